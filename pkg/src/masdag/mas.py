"""Maximum acyclic subgraph (MAS) extraction on squared arc weights."""
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .graph import check_weights, triangular_project

EXACT_MAX_NODES = 9


@dataclass
class MasResult:
    projected: np.ndarray
    order: np.ndarray
    retained_weight: float
    removed_weight: float


def _result(W, order):
    projected = triangular_project(W, order)
    total = float(np.sum(W * W))
    retained = float(np.sum(projected * projected))
    return MasResult(projected, order, retained, total - retained)


def greedy_mas(W_tilde):
    """Vectorized Eades-style greedy heuristic.

    Repeatedly places the unplaced node with the least incoming squared
    weight at the back of the order; its incoming arcs from unplaced nodes
    are dropped and its outgoing arcs kept. Ties go to the smallest index.
    """
    W = check_weights(W_tilde, "W_tilde")
    d = W.shape[0]
    W_hat = W * W
    scores = W_hat.sum(axis=0)
    # +1 keeps the sentinel above live scores even for an all-zero input
    ub = (d + 1) * scores.max() + 1.0 if d else 1.0
    order = np.zeros(d, dtype=np.int64)
    for i in range(d):
        node = int(np.argmin(scores))
        order[d - 1 - i] = node
        scores[node] = ub
        scores -= W_hat[node, :]
    return _result(W, order)


def _all_orders(d):
    return np.array(list(permutations(range(d))), dtype=np.int64).reshape(-1, d)


def exact_mas(W_tilde, chunk=40320):
    """Brute force over all d! orders; ties resolve to the lexicographically smallest order."""
    W = check_weights(W_tilde, "W_tilde")
    d = W.shape[0]
    if d > EXACT_MAX_NODES:
        raise ValueError(f"exact_mas is limited to d <= {EXACT_MAX_NODES}, got d={d}")
    if d == 0:
        return _result(W, np.zeros(0, dtype=np.int64))
    W_hat = W * W
    orders = _all_orders(d)  # lexicographic
    best_val, best_idx = -np.inf, 0
    for start in range(0, len(orders), chunk):
        block = orders[start:start + chunk]
        pos = np.argsort(block, axis=1)
        keep = pos[:, :, None] > pos[:, None, :]
        vals = np.einsum("bij,ij->b", keep, W_hat)
        i = int(np.argmax(vals))  # first maximum within the block
        if vals[i] > best_val:
            best_val, best_idx = vals[i], start + i
    return _result(W, orders[best_idx].copy())
