"""Synthetic linear-SEM benchmarks: random DAGs, random weights, noisy samples."""
from dataclasses import dataclass

import numpy as np

from .graph import is_acyclic, topological_order
from .objective import Dataset

MODELS = ("er", "sf")
NOISE_FAMILIES = ("gaussian", "exponential", "gumbel")
SCALE_MODES = ("ev", "nv")
SF_DIRECTIONS = ("existing-to-new", "new-to-existing")

EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class GraphSpec:
    d: int
    k: int = 1
    model: str = "er"
    sf_direction: str = "existing-to-new"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.sf_direction not in SF_DIRECTIONS:
            raise ValueError(f"sf_direction must be one of {SF_DIRECTIONS}")
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.k >= self.d:
            raise ValueError(f"k={self.k} >= d={self.d}: requested density is impossible")


@dataclass
class NoiseSpec:
    family: str = "gaussian"
    scale_mode: str = "ev"
    scales: np.ndarray | None = None

    def __post_init__(self):
        if self.family not in NOISE_FAMILIES:
            raise ValueError(f"noise family must be one of {NOISE_FAMILIES}, got {self.family!r}")
        if self.scale_mode not in SCALE_MODES:
            raise ValueError(f"scale mode must be one of {SCALE_MODES}, got {self.scale_mode!r}")

    @classmethod
    def sample(cls, family, scale_mode, d, rng):
        if scale_mode == "ev":
            scales = np.ones(d)
        else:
            scales = rng.uniform(0.5, 1.5, size=d)
        return cls(family, scale_mode, scales)

    def variances(self):
        """Per-node noise variance after centering."""
        s2 = np.asarray(self.scales, dtype=np.float64) ** 2
        if self.family == "gumbel":
            return s2 * np.pi ** 2 / 6
        return s2


@dataclass
class GroundTruth:
    W_true: np.ndarray
    mask_true: np.ndarray
    order_true: np.ndarray

    @property
    def d(self):
        return self.W_true.shape[0]


def sample_dag(spec, rng):
    """Random DAG structure and a topological order; weights stay zero."""
    d, k = spec.d, spec.k
    A = np.zeros((d, d), dtype=bool)
    if spec.model == "er":
        order = rng.permutation(d)
        p = min(1.0, 2.0 * k / (d - 1))
        upper = np.triu(rng.random((d, d)) < p, k=1)
        # upper[a, b] for positions a < b: arc order[a] -> order[b]
        A[np.ix_(order, order)] = upper
    else:
        labels = rng.permutation(d)
        arcs = []
        degree = np.zeros(d)
        for v in range(1, k + 1):  # seed path 0 -> 1 -> ... -> k
            arcs.append((v - 1, v))
            degree[v - 1] += 1
            degree[v] += 1
        for v in range(k + 1, d):
            w = degree[:v] + 1.0
            targets = rng.choice(v, size=k, replace=False, p=w / w.sum())
            for u in np.sort(targets):
                arcs.append((int(u), v))
                degree[u] += 1
                degree[v] += 1
        if spec.sf_direction == "new-to-existing":
            arcs = [(b, a) for a, b in arcs]
            insertion = np.arange(d)[::-1]
        else:
            insertion = np.arange(d)
        for a, b in arcs:
            A[labels[a], labels[b]] = True
        order = labels[insertion]
    order = np.asarray(order, dtype=np.int64)
    assert is_acyclic(A)
    return GroundTruth(np.zeros((d, d)), A, order)


def assign_weights(truth, rng, low=0.5, high=2.0):
    """Magnitudes uniform in [low, high] with an independent random sign per arc."""
    mask = truth.mask_true
    m = int(mask.sum())
    mags = rng.uniform(low, high, size=m)
    signs = np.where(rng.random(m) < 0.5, -1.0, 1.0)
    W = np.zeros(mask.shape)
    W[mask] = mags * signs
    return GroundTruth(W, mask.copy(), truth.order_true.copy())


def sample_noise(noise, n, rng):
    d = len(noise.scales)
    scales = np.asarray(noise.scales, dtype=np.float64)
    if noise.family == "gaussian":
        return rng.normal(0.0, 1.0, size=(n, d)) * scales
    if noise.family == "exponential":
        return (rng.exponential(1.0, size=(n, d)) - 1.0) * scales
    return (rng.gumbel(0.0, 1.0, size=(n, d)) - EULER_GAMMA) * scales


def propagate(W, E, order):
    """Solve x (I - W) = e row-wise by visiting nodes in topological ``order``."""
    X = np.array(E, dtype=np.float64, copy=True)
    for j in order:
        parents = np.flatnonzero(W[:, j])
        if parents.size:
            X[:, j] += X[:, parents] @ W[parents, j]
    return X


def sample_data(truth, noise, n, rng):
    W = truth.W_true
    order = truth.order_true
    if topological_order(W != 0) is None:
        raise ValueError("W_true is cyclic")
    pos = np.argsort(order)
    rows, cols = np.nonzero(W)
    if np.any(pos[rows] >= pos[cols]):
        raise ValueError("order_true is not a topological order of W_true")
    E = sample_noise(noise, n, rng)
    return Dataset.from_samples(propagate(W, E, order))


def generate(graph, family="gaussian", scale_mode="ev", n=1000, seed=0, n_val=None):
    """Ground truth plus train and validation datasets.

    Training draws come from ``default_rng(seed)``; validation reuses the
    truth with an independent generator seeded ``seed + 1``.
    """
    rng = np.random.default_rng(seed)
    truth = assign_weights(sample_dag(graph, rng), rng)
    noise = NoiseSpec.sample(family, scale_mode, graph.d, rng)
    train = sample_data(truth, noise, n, rng)
    val = sample_data(truth, noise, n if n_val is None else n_val, np.random.default_rng(seed + 1))
    return truth, noise, train, val
