"""Large-scale linear-SEM DAG learning with greedy maximum-acyclic-subgraph projections."""
from .graph import is_acyclic, threshold, topological_order, triangular_project
from .mas import MasResult, exact_mas, greedy_mas
from .objective import (
    Dataset,
    PenaltyContext,
    full_objective,
    lipschitz_bound,
    penalized_gradient,
    sem_loss,
    soft_threshold,
)
from .solvers import DivergenceError, FitConfig, FitResult, fit, optimas_fit, proximas_fit, select_best
from .datagen import GraphSpec, GroundTruth, NoiseSpec, assign_weights, generate, sample_dag, sample_data
from .metrics import average_precision, confusion_rates, evaluate, gaussian_nll, shd_normalized, threshold_sweep

__version__ = "0.1.0"
