"""Directed-graph primitives on dense weight matrices.

Convention: ``W[i, j]`` is the weight of the arc ``i -> j`` (``x = x @ W + e``).
A node order is an integer permutation; ``triangular_project`` keeps only
arcs whose source sits strictly later in the order than their target.
"""
from collections import deque

import numpy as np


def check_weights(W, name="W"):
    """Validate a square, finite matrix and return it as float64."""
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {W.shape}")
    if not np.all(np.isfinite(W)):
        raise ValueError(f"{name} contains non-finite entries")
    return W


def inverse_order(order):
    order = np.asarray(order, dtype=np.int64)
    d = order.shape[0]
    if not np.array_equal(np.sort(order), np.arange(d)):
        raise ValueError("order is not a permutation of 0..d-1")
    return np.argsort(order, kind="stable")


def _children(mask):
    return [np.flatnonzero(row) for row in mask]


def topological_order(mask):
    """Kahn's algorithm. Returns sources-first order, or None on a cycle."""
    mask = np.asarray(mask, dtype=bool)
    d = mask.shape[0]
    indeg = mask.sum(axis=0).astype(np.int64)
    children = _children(mask)
    queue = deque(int(v) for v in np.flatnonzero(indeg == 0))
    out = []
    while queue:
        v = queue.popleft()
        out.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(int(c))
    if len(out) != d:
        return None
    return np.array(out, dtype=np.int64)


def is_acyclic(mask):
    """True iff the directed graph given by ``mask`` has no cycle (self-loops count)."""
    mask = np.asarray(mask)
    if mask.dtype != bool:
        mask = mask != 0
    return topological_order(mask) is not None


def triangular_project(W, order):
    """Zero every arc that does not go from a later to an earlier position of ``order``.

    Same result as ``np.tril(W[order][:, order], -1)`` permuted back by the
    inverse order.
    """
    W = np.asarray(W, dtype=np.float64)
    pos = inverse_order(order)
    keep = pos[:, None] > pos[None, :]
    return np.where(keep, W, 0.0)


def threshold(W, tau):
    """Boolean adjacency with ``|W(i,j)| > tau`` off the diagonal."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    mask = np.abs(np.asarray(W, dtype=np.float64)) > tau
    np.fill_diagonal(mask, False)
    return mask
