"""Confusion counts, Acc / Prec / AUC and the composite indicator."""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass

import numpy as np


class DegenerateROC(ValueError):
    """Raised when ROC/AUC is asked for with a single class present."""


class PrecisionUndefined(UserWarning):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    TP: int = 0
    FP: int = 0
    FN: int = 0
    TN: int = 0

    @property
    def total(self) -> int:
        return self.TP + self.FP + self.FN + self.TN

    def to_dict(self) -> dict:
        return asdict(self)


def confusion(predictions, labels, positive_class: int = -1) -> ConfusionCounts:
    pred = np.asarray(predictions)
    lab = np.asarray(labels)
    if pred.shape != lab.shape:
        raise ValueError(f"length mismatch: {pred.shape} vs {lab.shape}")
    if pred.size == 0:
        raise ValueError("confusion counts need at least one sample")
    p_pos = pred == positive_class
    l_pos = lab == positive_class
    return ConfusionCounts(
        TP=int(np.sum(p_pos & l_pos)),
        FP=int(np.sum(p_pos & ~l_pos)),
        FN=int(np.sum(~p_pos & l_pos)),
        TN=int(np.sum(~p_pos & ~l_pos)),
    )


def accuracy(c: ConfusionCounts) -> float:
    return (c.TP + c.TN) / c.total if c.total else 0.0


def precision(c: ConfusionCounts) -> float:
    """TP / (TP + FP); defined as 0 (with a warning) when nothing is predicted positive."""
    if c.TP + c.FP == 0:
        warnings.warn("precision undefined (no positive predictions); reporting 0", PrecisionUndefined, stacklevel=2)
        return 0.0
    return c.TP / (c.TP + c.FP)


def roc_auc(scores, labels, positive_class: int = 1) -> tuple[list[tuple[float, float, float]], float]:
    """ROC points ``(threshold, fpr, tpr)`` and the trapezoidal area.

    Higher scores mean "more ``positive_class``".  Tied scores form one
    threshold group, which gives tied pairs half credit.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels) == positive_class
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateROC("ROC needs both classes present")
    order = np.argsort(-s, kind="mergesort")
    s_sorted = s[order]
    y_sorted = y[order]
    tp = np.cumsum(y_sorted)
    fp = np.cumsum(~y_sorted)
    # last index of each run of equal scores
    last = np.flatnonzero(np.r_[s_sorted[1:] != s_sorted[:-1], True])
    tpr = np.r_[0.0, tp[last] / n_pos]
    fpr = np.r_[0.0, fp[last] / n_neg]
    thresholds = np.r_[np.inf, s_sorted[last]]
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))
    points = [(float(t), float(f), float(r)) for t, f, r in zip(thresholds, fpr, tpr)]
    return points, auc


def composite_eta(acc: float, prec: float, auc: float) -> float:
    return (acc + prec + auc) / 3.0


@dataclass(frozen=True)
class Metrics:
    acc: float
    prec: float
    auc: float | None
    eta: float | None
    n_rules: float | None = None
    terms_per_rule: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate_predictions(predictions, scores, labels, positive_class: int = -1, n_rules=None, terms_per_rule=None) -> Metrics:
    """Acc, Prec (w.r.t. ``positive_class``), AUC and eta for one evaluation set.

    AUC is ``None`` when the labels hold a single class.
    """
    c = confusion(predictions, labels, positive_class)
    acc = accuracy(c)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PrecisionUndefined)
        prec = precision(c)
    try:
        # scores rise towards +1; orient them towards the positive class
        oriented = np.asarray(scores, float) * (1.0 if positive_class == 1 else -1.0)
        _, auc = roc_auc(oriented, labels, positive_class=positive_class)
    except DegenerateROC:
        auc = None
    eta = None if auc is None else composite_eta(acc, prec, auc)
    return Metrics(acc, prec, auc, eta, n_rules, terms_per_rule)
