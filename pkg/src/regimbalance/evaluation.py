"""Imbalance-aware evaluation metrics.

Undefined quantities (empty bins, empty denominators) are reported as
``None`` rather than as zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .empirical import build_histogram, density_at, histogram_bin_index
from .measures import RelevanceMeasure, UnsupportedMeasureError

__all__ = [
    "PredictionSet",
    "BinnedReport",
    "RegPRReport",
    "overall_mae",
    "binned_mae",
    "weighted_mae",
    "regression_precision_recall",
    "f_score",
    "classification_metrics",
    "format_float",
]


def format_float(x: Optional[float]) -> str:
    """Locale-independent 17-significant-digit rendering; ``None`` -> ``null``."""
    return "null" if x is None else format(float(x), ".17g")


@dataclass(frozen=True, eq=False)
class PredictionSet:
    y_true: np.ndarray
    y_pred: np.ndarray

    def __post_init__(self):
        yt = np.asarray(self.y_true, dtype=float).ravel()
        yp = np.asarray(self.y_pred, dtype=float).ravel()
        if yt.size != yp.size:
            raise ValueError(f"y_true has {yt.size} values but y_pred has {yp.size}")
        if yt.size == 0:
            raise ValueError("prediction set is empty")
        if not (np.all(np.isfinite(yt)) and np.all(np.isfinite(yp))):
            raise ValueError("predictions and targets must be finite")
        object.__setattr__(self, "y_true", yt)
        object.__setattr__(self, "y_pred", yp)

    @property
    def n(self) -> int:
        return int(self.y_true.size)

    @property
    def abs_errors(self) -> np.ndarray:
        return np.abs(self.y_true - self.y_pred)


@dataclass(frozen=True)
class BinnedReport:
    bin_edges: list
    mae_per_bin: list
    counts_per_bin: list

    @property
    def bin_centers(self) -> list:
        e = self.bin_edges
        return [0.5 * (e[i] + e[i + 1]) for i in range(len(e) - 1)]

    def to_dict(self) -> dict:
        return {
            "bin_edges": self.bin_edges,
            "counts_per_bin": self.counts_per_bin,
            "mae_per_bin": self.mae_per_bin,
        }

    def to_tsv(self) -> str:
        lines = ["bin_center\tcount\tmae"]
        for c, k, m in zip(self.bin_centers, self.counts_per_bin, self.mae_per_bin):
            lines.append(f"{format_float(c)}\t{k}\t{format_float(m)}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RegPRReport:
    precision: Optional[float]
    recall: Optional[float]
    f_beta: Optional[float]
    t_rel: float
    t_err: float
    beta: float
    k: float = 1.0

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f_beta": self.f_beta,
            "t_rel": self.t_rel,
            "t_err": self.t_err,
            "beta": self.beta,
            "k": self.k,
        }


def overall_mae(p: PredictionSet) -> float:
    return float(np.mean(p.abs_errors))


def binned_mae(p: PredictionSet, bin_edges) -> BinnedReport:
    """MAE per bin of the true target.

    Bin ``j`` is ``[b_j, b_{j+1})``; the last bin also includes its right
    edge.  Empty bins get ``None``.
    """
    edges = np.asarray(bin_edges, dtype=float)
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be strictly ascending with at least two entries")
    idx = histogram_bin_index(edges, p.y_true)
    if np.any(idx < 0):
        bad = p.y_true[idx < 0]
        raise ValueError(
            f"{bad.size} true targets lie outside [{edges[0]}, {edges[-1]}], e.g. {bad[0]!r}"
        )
    nb = edges.size - 1
    counts = np.bincount(idx, minlength=nb)
    sums = np.bincount(idx, weights=p.abs_errors, minlength=nb)
    mae = [float(s / c) if c > 0 else None for s, c in zip(sums, counts)]
    return BinnedReport([float(v) for v in edges], mae, [int(c) for c in counts])


def weighted_mae(p: PredictionSet, mu: RelevanceMeasure, n_bins: int = 20) -> float:
    """MAE with sample weights ``p_mu(y) / p_Y(y)``, normalized by the weight sum.

    ``p_Y`` is an ``n_bins`` histogram over the range of ``y_true`` built from
    ``y_true`` itself, so it is positive at every sample.
    """
    if getattr(mu, "has_atoms", False):
        raise UnsupportedMeasureError("weighted MAE needs a relevance measure with a density")
    hist = build_histogram(p.y_true, n_bins)
    log_w = mu.log_density(p.y_true) - np.log(density_at(hist, p.y_true))
    top = np.max(log_w)
    if not np.isfinite(top):
        raise ValueError("relevance density is zero at every target; weighted MAE undefined")
    w = np.exp(log_w - top)
    return float(np.sum(w * p.abs_errors) / np.sum(w))


def f_score(precision: float, recall: float, beta: float = 1.0) -> float:
    """F-beta score; ``P = R = 0`` gives 0 by convention."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    b2 = beta * beta
    denom = b2 * precision + recall
    if denom == 0:
        return 0.0
    return (1.0 + b2) * precision * recall / denom


def regression_precision_recall(
    p: PredictionSet,
    relevance: Callable[[np.ndarray], np.ndarray],
    t_rel: float = 0.5,
    t_err: float = 10.0,
    beta: float = 1.0,
    k: float = 1.0,
) -> RegPRReport:
    """Thresholded precision/recall for regression.

    A prediction is accurate when ``|y - pred| <= t_err``.  Recall is the
    accurate share of samples whose *true* target has relevance ``>= t_rel``;
    precision is the accurate share of samples whose *prediction* has
    relevance ``>= t_rel``.  ``k`` is recorded but not used.
    """
    if not 0.0 <= t_rel <= 1.0:
        raise ValueError("t_rel must lie in [0, 1]")
    if t_err <= 0:
        raise ValueError("t_err must be positive")
    accurate = p.abs_errors <= t_err
    rel_true = np.asarray(relevance(p.y_true)) >= t_rel
    rel_pred = np.asarray(relevance(p.y_pred)) >= t_rel
    n_rt, n_rp = int(rel_true.sum()), int(rel_pred.sum())
    recall = float(np.sum(accurate & rel_true) / n_rt) if n_rt else None
    precision = float(np.sum(accurate & rel_pred) / n_rp) if n_rp else None
    f = f_score(precision, recall, beta) if precision is not None and recall is not None else None
    return RegPRReport(precision, recall, f, float(t_rel), float(t_err), float(beta), float(k))


def classification_metrics(y_true, y_pred) -> dict:
    """Accuracy, TPR, TNR and F1 for binary labels (1 = positive)."""
    yt = np.asarray(y_true).astype(int).ravel()
    yp = np.asarray(y_pred).astype(int).ravel()
    if yt.size != yp.size or yt.size == 0:
        raise ValueError("label arrays must be non-empty and of equal length")
    if not (np.isin(yt, (0, 1)).all() and np.isin(yp, (0, 1)).all()):
        raise ValueError("labels must be 0 or 1")
    tp = int(np.sum((yt == 1) & (yp == 1)))
    tn = int(np.sum((yt == 0) & (yp == 0)))
    fp = int(np.sum((yt == 0) & (yp == 1)))
    fn = int(np.sum((yt == 1) & (yp == 0)))
    tpr = tp / (tp + fn) if tp + fn else None
    tnr = tn / (tn + fp) if tn + fp else None
    prec = tp / (tp + fp) if tp + fp else None
    f1 = f_score(prec, tpr) if prec is not None and tpr is not None else None
    return {"accuracy": (tp + tn) / yt.size, "tpr": tpr, "tnr": tnr, "f1": f1}
