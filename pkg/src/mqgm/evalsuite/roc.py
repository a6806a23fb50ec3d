"""ROC curves for edge detection."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RocCurve:
    """Path points ``(parameter, fpr, tpr)`` and the trapezoid AUC.

    The area is taken over the points sorted by FPR (then TPR) and
    augmented with ``(0, 0)`` and ``(1, 1)``.
    """

    points: tuple
    auc: float


def _pair_mask(truth):
    A = truth.adjacency
    iu = np.triu_indices(A.shape[0], 1)
    pos = A[iu]
    if pos.all() or not pos.any():
        raise ValueError("truth must contain at least one edge and one non-edge")
    return iu, pos


def _rates(pred, pos):
    tpr = float((pred & pos).sum() / pos.sum())
    fpr = float((pred & ~pos).sum() / (~pos).sum())
    return fpr, tpr


def _trapezoid(points):
    pts = sorted({(0.0, 0.0), (1.0, 1.0), *((f, t) for _, f, t in points)})
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))


def roc_auc(strengths, truth, thresholds=None):
    """ROC of the rule "edge iff strength > threshold" over unordered pairs.

    Parameters
    ----------
    strengths : ndarray, shape (d, d)
        Symmetric edge scores.
    truth : EdgeSet
    thresholds : sequence of float, optional
        Defaults to every distinct off-diagonal strength.

    Returns
    -------
    RocCurve
    """
    iu, pos = _pair_mask(truth)
    s = np.asarray(strengths, dtype=float)[iu]
    if thresholds is None:
        thresholds = np.unique(s)
    points = []
    for t in thresholds:
        fpr, tpr = _rates(s > t, pos)
        points.append((float(t), fpr, tpr))
    return RocCurve(points=tuple(points), auc=_trapezoid(points))


def roc_from_edge_sets(edge_sets, truth, params):
    """ROC from one estimated edge set per tuning parameter (per-lambda refits)."""
    iu, pos = _pair_mask(truth)
    points = []
    for lam, e in zip(params, edge_sets):
        A = e.adjacency if hasattr(e, "adjacency") else np.asarray(e, dtype=bool)
        fpr, tpr = _rates(A[iu], pos)
        points.append((float(lam), fpr, tpr))
    return RocCurve(points=tuple(points), auc=_trapezoid(points))
