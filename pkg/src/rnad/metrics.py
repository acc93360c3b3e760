"""ROC construction, AUROC, automated threshold selection, confusion metrics,
and the balanced risk.

The positive class is the anomaly class throughout, and the decision rule is
fixed: predict anomaly iff score >= threshold. Scores are anomaly scores
(larger means more anomalous). The balanced risk 0.5*FNR + 0.5*FPR is the
expected 0-1 loss under the 50/50 inline/anomaly mixture.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .data import ANOMALY, INLINE

#: candidate-threshold window for probability-valued scores
PROB_THRESHOLD_RANGE = (0.001, 0.999)


class RocCurve(NamedTuple):
    """Staircase of (fpr, tpr) points and the thresholds producing them."""

    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray


@dataclass(frozen=True)
class EvaluationReport:
    """Confusion counts and derived metrics at a fixed threshold."""

    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    f1: float
    balanced_risk: float
    auroc: float | None = None

    def to_dict(self) -> dict:
        d = {
            "threshold": self.threshold,
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "balanced_risk": self.balanced_risk,
        }
        if self.auroc is not None:
            d["auroc"] = self.auroc
        return d


def _validate(scores, labels, require_both_classes: bool):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError(
            f"scores and labels must be equal-length vectors, got "
            f"{scores.shape} and {labels.shape}")
    if scores.size == 0:
        raise ValueError("empty input")
    n_anomaly = int((labels == ANOMALY).sum())
    n_inline = int((labels == INLINE).sum())
    if require_both_classes and (n_anomaly == 0 or n_inline == 0):
        raise ValueError(
            "both classes required (single-class input leaves the ROC "
            "undefined)")
    return scores, labels, n_anomaly, n_inline


def roc_points(scores, labels) -> RocCurve:
    """ROC staircase over the unique scores, plus a sentinel above the max.

    Thresholds descend from +inf (predict nothing anomalous, point (0, 0))
    down to the minimum score (predict everything anomalous, point (1, 1)).
    """
    scores, labels, n_anomaly, n_inline = _validate(scores, labels, True)
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    pos = labels[order] == ANOMALY
    cum_tp = np.cumsum(pos)
    cum_fp = np.cumsum(~pos)
    last_of_value = np.flatnonzero(np.diff(s) != 0)
    idx = np.concatenate([last_of_value, [s.size - 1]])
    thresholds = np.concatenate([[np.inf], s[idx]])
    tpr = np.concatenate([[0.0], cum_tp[idx] / n_anomaly])
    fpr = np.concatenate([[0.0], cum_fp[idx] / n_inline])
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds)


def auroc(scores, labels) -> float:
    """Trapezoidal area under the ROC staircase.

    Equals the tie-corrected rank statistic
    (#{anomaly score > inline score} + 0.5 * #ties) / (n_anomaly * n_inline).
    """
    curve = roc_points(scores, labels)
    return float(np.trapezoid(curve.tpr, curve.fpr))


def optimal_threshold(scores, labels,
                      candidate_range: tuple[float, float] | None = None) -> float:
    """Threshold maximizing TPR - FPR over the unique scores.

    Ties go to the smallest maximizing threshold (favoring recall). When
    candidate_range is given (probability-valued scores), candidates are
    clipped into it before the search; raw magnitude scores search the full
    unique-score set.
    """
    scores, labels, n_anomaly, n_inline = _validate(scores, labels, True)
    candidates = np.unique(scores)
    if candidate_range is not None:
        lo, hi = candidate_range
        candidates = np.unique(np.clip(candidates, lo, hi))
    anom_sorted = np.sort(scores[labels == ANOMALY])
    inl_sorted = np.sort(scores[labels == INLINE])
    tp = n_anomaly - np.searchsorted(anom_sorted, candidates, side="left")
    fp = n_inline - np.searchsorted(inl_sorted, candidates, side="left")
    # TPR - FPR over the common denominator, in exact integer arithmetic so
    # ties resolve to the smallest candidate
    j_scaled = tp * n_inline - fp * n_anomaly
    return float(candidates[int(np.argmax(j_scaled))])


def report(scores, labels, threshold: float) -> EvaluationReport:
    """Confusion metrics at the rule score >= threshold -> anomaly.

    Degenerate denominators map to 0, keeping reports total; AUROC is
    included only when both classes are present.
    """
    scores, labels, n_anomaly, n_inline = _validate(scores, labels, False)
    predicted_anomaly = scores >= threshold
    actual_anomaly = labels == ANOMALY
    tp = int(np.sum(predicted_anomaly & actual_anomaly))
    fp = int(np.sum(predicted_anomaly & ~actual_anomaly))
    fn = int(np.sum(~predicted_anomaly & actual_anomaly))
    tn = int(np.sum(~predicted_anomaly & ~actual_anomaly))
    precision = tp / (tp + fp) if (tp + fp) > 0 else 0.0
    recall = tp / (tp + fn) if (tp + fn) > 0 else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if (precision + recall) > 0 else 0.0)
    fnr = fn / (tp + fn) if (tp + fn) > 0 else 0.0
    fpr = fp / (fp + tn) if (fp + tn) > 0 else 0.0
    area = auroc(scores, labels) if (n_anomaly > 0 and n_inline > 0) else None
    return EvaluationReport(
        threshold=float(threshold), tp=tp, fp=fp, tn=tn, fn=fn,
        precision=float(precision), recall=float(recall), f1=float(f1),
        balanced_risk=float(0.5 * fnr + 0.5 * fpr), auroc=area)
