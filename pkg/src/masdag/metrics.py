"""Structure-recovery metrics: confusion rates, normalized SHD, average precision, validation NLL."""
from dataclasses import dataclass, field

import numpy as np

from .graph import threshold

METRIC_COLUMNS = ("fnr_dir", "fpr_dir", "shd_norm_dir", "fnr_undir", "fpr_undir", "shd_norm_undir")
NLL_VARIANCE_FLOOR = 1e-12


def default_thresholds():
    grid = np.concatenate([[0.0], np.geomspace(0.01, 1.0, 20), [0.3]])
    return [float(t) for t in np.unique(grid)]


@dataclass
class MetricsRow:
    threshold: float
    fnr_dir: float
    fpr_dir: float
    shd_norm_dir: float
    fnr_undir: float
    fpr_undir: float
    shd_norm_undir: float


@dataclass
class EvalSummary:
    average_precision: float
    gaussian_nll: float
    rows: list = field(default_factory=list)


def _pair_masks(pred, truth):
    pred = np.asarray(pred, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if pred.shape != truth.shape or pred.ndim != 2 or pred.shape[0] != pred.shape[1]:
        raise ValueError(f"shape mismatch: pred {pred.shape} vs truth {truth.shape}")
    return pred, truth


def _rates(pred, truth):
    tp = np.sum(pred & truth)
    fn = np.sum(~pred & truth)
    fp = np.sum(pred & ~truth)
    tn = np.sum(~pred & ~truth)
    fnr = fn / (tp + fn) if tp + fn else 0.0
    fpr = fp / (fp + tn) if fp + tn else 0.0
    return float(fnr), float(fpr)


def _offdiag(mask):
    return mask[~np.eye(mask.shape[0], dtype=bool)]


def _undirected(mask):
    # unordered pair {i, j}, i < j, is present if either direction is
    sym = mask | mask.T
    return sym[np.triu_indices(mask.shape[0], k=1)]


def confusion_rates(pred, truth):
    """Return ``(fnr_dir, fpr_dir, fnr_undir, fpr_undir)``."""
    pred, truth = _pair_masks(pred, truth)
    fnr_d, fpr_d = _rates(_offdiag(pred), _offdiag(truth))
    fnr_u, fpr_u = _rates(_undirected(pred), _undirected(truth))
    return fnr_d, fpr_d, fnr_u, fpr_u


def shd(pred, truth):
    """Directed SHD: missing + extra arcs, each reversal counted once."""
    pred, truth = _pair_masks(pred, truth)
    off = ~np.eye(pred.shape[0], dtype=bool)
    missing = truth & ~pred & off
    extra = pred & ~truth & off
    reversed_ = missing & extra.T
    return int(missing.sum() + extra.sum() - reversed_.sum())


def shd_undirected(pred, truth):
    pred, truth = _pair_masks(pred, truth)
    return int(np.sum(_undirected(pred) != _undirected(truth)))


def shd_normalized(pred, truth, directed=True):
    """SHD divided by the number of true arcs (or 1 if there are none)."""
    pred, truth = _pair_masks(pred, truth)
    if directed:
        return shd(pred, truth) / max(int(_offdiag(truth).sum()), 1)
    return shd_undirected(pred, truth) / max(int(_undirected(truth).sum()), 1)


def average_precision_scores(scores, labels):
    """Sum of (R_n - R_{n-1}) P_n over descending distinct scores.

    Tied scores form one block, evaluated at the precision of its last element.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels, dtype=bool).ravel()
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must have the same length")
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise ValueError("average precision is undefined without positives")
    idx = np.argsort(-scores, kind="stable")
    s, y = scores[idx], labels[idx]
    tp = np.cumsum(y)
    # last index of each tie block
    ends = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    tp_end = tp[ends]
    precision = tp_end / (ends + 1)
    recall = tp_end / n_pos
    gains = np.diff(np.r_[0.0, recall])
    return float(np.sum(gains * precision))


def average_precision(W, truth):
    """AP of |W| as an arc score against the true adjacency, over off-diagonal cells."""
    W = np.asarray(W, dtype=np.float64)
    truth = np.asarray(truth, dtype=bool)
    if W.shape != truth.shape:
        raise ValueError(f"shape mismatch: W {W.shape} vs truth {truth.shape}")
    return average_precision_scores(_offdiag(np.abs(W)), _offdiag(truth))


def gaussian_nll(val, W):
    """Per-sample Gaussian NLL of the residuals with per-variable profiled variance."""
    X = val.X
    W = np.asarray(W, dtype=np.float64)
    if W.shape != (X.shape[1], X.shape[1]):
        raise ValueError(f"W has shape {W.shape}, expected {(X.shape[1], X.shape[1])}")
    if X.shape[0] < 2:
        raise ValueError("need at least 2 validation samples")
    R = X @ W - X
    var = np.maximum(np.mean(R * R, axis=0), NLL_VARIANCE_FLOOR)
    return float(0.5 * np.sum(np.log(2 * np.pi * var) + 1.0))


def threshold_sweep(W, truth, thresholds=None):
    if thresholds is None:
        thresholds = default_thresholds()
    thresholds = [float(t) for t in thresholds]
    if any(t < 0 for t in thresholds):
        raise ValueError("thresholds must be nonnegative")
    if thresholds != sorted(thresholds):
        raise ValueError("thresholds must be sorted ascending")
    truth = np.asarray(truth, dtype=bool)
    rows = []
    for tau in thresholds:
        pred = threshold(W, tau)
        fnr_d, fpr_d, fnr_u, fpr_u = confusion_rates(pred, truth)
        rows.append(MetricsRow(
            tau, fnr_d, fpr_d, shd_normalized(pred, truth),
            fnr_u, fpr_u, shd_normalized(pred, truth, directed=False),
        ))
    return rows


def evaluate(W, truth, val, thresholds=None):
    return EvalSummary(
        average_precision(W, truth),
        gaussian_nll(val, W),
        threshold_sweep(W, truth, thresholds),
    )
