"""Outer loop alternating one optimization step with a greedy MAS projection.

Two step rules share the loop:

* ``proximas``: one FISTA step (gradient step from the momentum point,
  then L1 soft-thresholding) with step size 1/L;
* ``optimas``: one Adam step on the L1 subgradient.

For the first ``warmstart_fraction`` of the budget the proximity term and
MAS extraction are switched off and the solver fits the plain L1-regularized
least-squares objective. Once acyclicity is active, every iterate is projected
and the projection becomes the anchor of the next proximity term.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import check_weights, is_acyclic
from .io import write_trace, write_triplets
from .mas import greedy_mas
from .objective import full_objective, lipschitz_bound, soft_threshold

log = logging.getLogger(__name__)

METHODS = ("proximas", "optimas")


class DivergenceError(FloatingPointError):
    """The objective became non-finite during a fit."""


@dataclass
class FitConfig:
    method: str = "proximas"
    lambda1: float = 0.1
    lambda2: float = 20.0
    max_iterations: int = 1000
    time_budget: float | None = None
    warmstart_fraction: float = 0.8
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    snapshot_every: int | None = None
    keep_snapshot_weights: bool = False
    seed: int = 0
    init: np.ndarray | None = None

    def validate(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("lambda1 and lambda2 must be nonnegative")
        if not 0 <= self.warmstart_fraction <= 1:
            raise ValueError("warmstart_fraction must lie in [0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.time_budget is not None and self.time_budget <= 0:
            raise ValueError("time_budget must be positive")
        if self.snapshot_every is not None and self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be nonnegative")

    def to_dict(self):
        out = {k: v for k, v in self.__dict__.items() if k != "init"}
        out["init"] = "zeros" if self.init is None else "given"
        return out


@dataclass
class Snapshot:
    iteration: int
    wall_time: float
    objective: float
    acyclic: bool
    W: np.ndarray | None = None


@dataclass
class FitResult:
    best: np.ndarray
    best_objective: float
    best_iteration: int
    history: list = field(default_factory=list)
    objective_trace: np.ndarray = None
    acyclic_trace: np.ndarray = None
    gap_trace: np.ndarray = None
    final_iterate: np.ndarray = None
    activated_at: int | None = None
    total_iterations: int = 0
    total_time: float = 0.0


def select_best(candidates):
    """Return the matrix with the smallest objective; the earliest wins ties."""
    if not candidates:
        raise ValueError("no candidates to select from")
    best_W, best_obj = candidates[0]
    for W, obj in candidates[1:]:
        if obj < best_obj:
            best_W, best_obj = W, obj
    return best_W


class _Fista:
    def __init__(self, data, W0, lambda1, L):
        self.G, self.n, self.lambda1, self.L = data.gram, data.n, lambda1, L
        self.W = W0.copy()
        self.GW = self.G @ self.W
        self.Y, self.GY = self.W.copy(), self.GW.copy()
        self.t = 1.0

    def step(self, anchor, lambda2):
        grad = (self.GY - self.G) / self.n
        if lambda2:
            grad += lambda2 * (self.Y - anchor)
        W_new = soft_threshold(self.Y - grad / self.L, self.lambda1 / self.L)
        GW_new = self.G @ W_new
        t_new = (1.0 + math.sqrt(1.0 + 4.0 * self.t * self.t)) / 2.0
        beta = (self.t - 1.0) / t_new
        # G @ Y follows from linearity, so one product per step suffices
        self.Y = W_new + beta * (W_new - self.W)
        self.GY = GW_new + beta * (GW_new - self.GW)
        self.W, self.GW, self.t = W_new, GW_new, t_new


class _Adam:
    def __init__(self, data, W0, config):
        self.G, self.n = data.gram, data.n
        self.cfg = config
        self.W = W0.copy()
        self.GW = self.G @ self.W
        self.m = np.zeros_like(self.W)
        self.v = np.zeros_like(self.W)
        self.k = 0

    def step(self, anchor, lambda2):
        c = self.cfg
        grad = (self.GW - self.G) / self.n + c.lambda1 * np.sign(self.W)
        if lambda2:
            grad += lambda2 * (self.W - anchor)
        np.fill_diagonal(grad, 0.0)
        self.k += 1
        self.m = c.adam_beta1 * self.m + (1 - c.adam_beta1) * grad
        self.v = c.adam_beta2 * self.v + (1 - c.adam_beta2) * grad * grad
        m_hat = self.m / (1 - c.adam_beta1 ** self.k)
        v_hat = self.v / (1 - c.adam_beta2 ** self.k)
        self.W = self.W - c.learning_rate * m_hat / (np.sqrt(v_hat) + c.adam_epsilon)
        np.fill_diagonal(self.W, 0.0)
        self.GW = self.G @ self.W


def _objective_from_product(data, W, GW, lambda1):
    D = W - np.eye(data.d)
    GD = GW - data.gram
    return float(np.sum(D * GD) / (2 * data.n)) + lambda1 * float(np.abs(W).sum())


def _initial(data, config):
    if config.init is None:
        return np.zeros((data.d, data.d))
    W0 = check_weights(config.init, "init")
    if W0.shape != (data.d, data.d):
        raise ValueError(f"init has shape {W0.shape}, expected {(data.d, data.d)}")
    if np.any(np.diag(W0) != 0):
        raise ValueError("init must have a zero diagonal")
    return W0


def _run(data, config, callback=None, snapshot_dir=None):
    config.validate()
    if data.n == 0 or data.d == 0:
        raise ValueError("empty data")
    start = time.perf_counter()
    W0 = _initial(data, config)
    K = config.max_iterations
    rho = config.warmstart_fraction
    budget = config.time_budget

    if config.method == "proximas":
        stepper = _Fista(data, W0, config.lambda1, lipschitz_bound(data, 0.0))
    else:
        stepper = _Adam(data, W0, config)

    if snapshot_dir is not None:
        snapshot_dir = Path(snapshot_dir)
        snapshot_dir.mkdir(parents=True, exist_ok=True)

    history, objectives, flags, gaps = [], [], [], []
    active = False
    activated_at = None
    anchor = W0
    best, best_obj, best_it = None, np.inf, 0
    tracked, tracked_obj = W0, np.nan

    def snapshot(k, elapsed):
        snap = Snapshot(k, elapsed, tracked_obj, active,
                        tracked.copy() if config.keep_snapshot_weights else None)
        history.append(snap)
        if snapshot_dir is not None:
            write_triplets(snapshot_dir / f"snapshot_{k}.csv", tracked)
        if callback is not None:
            callback(snap)

    k = 0
    while k < K:
        elapsed = time.perf_counter() - start
        if k >= 1 and budget is not None and elapsed >= budget:
            break
        k += 1
        if not active and (k > rho * K or (budget is not None and elapsed > rho * budget)):
            active, activated_at = True, k
            anchor = greedy_mas(stepper.W).projected
            if config.method == "proximas":
                stepper.L = lipschitz_bound(data, config.lambda2)
            log.debug("acyclicity activated at iteration %d", k)

        stepper.step(anchor, config.lambda2 if active else 0.0)

        if active:
            anchor = greedy_mas(stepper.W).projected
            gaps.append(float(np.linalg.norm(stepper.W - anchor)))
            tracked = anchor
            tracked_obj = full_objective(data, anchor, config.lambda1)
            if tracked_obj < best_obj:
                best, best_obj, best_it = anchor, tracked_obj, k
        else:
            anchor = stepper.W
            gaps.append(0.0)
            tracked = stepper.W
            tracked_obj = _objective_from_product(data, stepper.W, stepper.GW, config.lambda1)

        if not np.isfinite(tracked_obj):
            raise DivergenceError(
                f"non-finite objective at iteration {k} ({config.method}, "
                f"lambda1={config.lambda1}, lambda2={config.lambda2})"
            )
        objectives.append(tracked_obj)
        flags.append(active)
        if (config.snapshot_every and k % config.snapshot_every == 0) or k == K:
            snapshot(k, time.perf_counter() - start)

    if not history or history[-1].iteration != k:
        snapshot(k, time.perf_counter() - start)
    if snapshot_dir is not None:
        write_trace(snapshot_dir / "trace.csv", history)

    if best is None:
        # acyclicity never switched on: project once before returning
        best = greedy_mas(stepper.W).projected
        best_obj = full_objective(data, best, config.lambda1)
        best_it = k
    assert is_acyclic(best != 0)

    return FitResult(
        best=best,
        best_objective=best_obj,
        best_iteration=best_it,
        history=history,
        objective_trace=np.array(objectives),
        acyclic_trace=np.array(flags, dtype=bool),
        gap_trace=np.array(gaps),
        final_iterate=stepper.W.copy(),
        activated_at=activated_at,
        total_iterations=k,
        total_time=time.perf_counter() - start,
    )


def proximas_fit(data, config, callback=None, snapshot_dir=None):
    """FISTA steps on the penalized objective, alternated with greedy MAS projections."""
    if config.method != "proximas":
        raise ValueError("proximas_fit requires config.method == 'proximas'")
    return _run(data, config, callback, snapshot_dir)


def optimas_fit(data, config, callback=None, snapshot_dir=None):
    if config.method != "optimas":
        raise ValueError("optimas_fit requires config.method == 'optimas'")
    return _run(data, config, callback, snapshot_dir)


def fit(data, config, callback=None, snapshot_dir=None):
    config.validate()
    if config.method == "proximas":
        return proximas_fit(data, config, callback, snapshot_dir)
    return optimas_fit(data, config, callback, snapshot_dir)
