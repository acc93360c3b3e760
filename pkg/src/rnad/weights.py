"""Supervised density-ratio correction: contamination estimation, the class
weight pair it induces, the analytic derivative for known mixtures, and the
weighted binary cross-entropy with its gradient.

A training sample drawn from the contaminated mixture
(1 - alpha) * D_inline + alpha * D_anomaly is reweighted so the loss targets
the balanced 50/50 mixture instead. For labeled data the correction collapses
to one weight per class: the ratio w_inline / w_anomaly = alpha / (1 - alpha)
is the invariant content; the absolute scale is a convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .data import ANOMALY, INLINE

PROB_CLIP = 1e-7
ALPHA_CLAMP = 1e-6


class DensityRatioError(ValueError):
    """Denominator of the density ratio vanished at a query point."""


@dataclass(frozen=True)
class RNWeights:
    """Class weight pair realizing the supervised correction."""

    w_inline: float
    w_anomaly: float
    contamination: float

    def __post_init__(self):
        if not (0.0 < self.contamination < 1.0):
            raise ValueError(
                f"contamination must lie in (0, 1), got {self.contamination}")
        if self.w_inline <= 0 or self.w_anomaly <= 0:
            raise ValueError("weights must be positive")

    def per_sample(self, labels: np.ndarray) -> np.ndarray:
        """Weight vector aligned with a label vector."""
        labels = np.asarray(labels)
        return np.where(labels == INLINE, self.w_inline, self.w_anomaly)


@dataclass(frozen=True)
class RNDerivativeSpec:
    """Known joint densities for the analytic balanced-vs-contaminated ratio.

    p_inline / p_anomaly map (x, y) to density values; x may be a single
    vector or a (n, d) matrix, in which case they return a vector.
    """

    contamination: float
    p_inline: Callable[[np.ndarray, int], np.ndarray]
    p_anomaly: Callable[[np.ndarray, int], np.ndarray]

    def __post_init__(self):
        if not (0.0 < self.contamination < 1.0):
            raise ValueError(
                f"contamination must lie in (0, 1), got {self.contamination}")


def estimate_contamination(labels: np.ndarray) -> float:
    """Anomaly fraction of a label vector, clamped into (0, 1).

    Clamping keeps downstream weights finite when a training split contains a
    single class; the all-inline regime degenerates toward ignoring inline
    error, which is the unsupervised family's territory.
    """
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("cannot estimate contamination from an empty label vector")
    frac = float((labels == ANOMALY).sum()) / labels.size
    return float(min(max(frac, ALPHA_CLAMP), 1.0 - ALPHA_CLAMP))


def rn_weights(contamination: float) -> RNWeights:
    """Normalized class weights: anomaly pinned to 1, inline to a/(1-a).

    At contamination 0.5 this is the unweighted loss (the evaluation mixture
    equals the training mixture).
    """
    if not (0.0 < contamination < 1.0):
        raise ValueError(f"contamination must lie in (0, 1), got {contamination}")
    return RNWeights(w_inline=contamination / (1.0 - contamination),
                     w_anomaly=1.0, contamination=contamination)


def rn_weights_unnormalized(contamination: float) -> RNWeights:
    """Raw density-ratio weights 0.5/(1-a) and 0.5/a, same ratio as rn_weights.

    This is the per-class value of the analytic derivative itself; used where
    the absolute scale matters (importance-weighted risk estimates).
    """
    if not (0.0 < contamination < 1.0):
        raise ValueError(f"contamination must lie in (0, 1), got {contamination}")
    return RNWeights(w_inline=0.5 / (1.0 - contamination),
                     w_anomaly=0.5 / contamination,
                     contamination=contamination)


def unit_weights() -> RNWeights:
    """The identity correction (plain loss); contamination 0.5."""
    return RNWeights(w_inline=1.0, w_anomaly=1.0, contamination=0.5)


def rn_derivative(spec: RNDerivativeSpec, x: np.ndarray, y: int) -> np.ndarray:
    """Exact balanced/contaminated density ratio at (x, y).

        (0.5 p_I + 0.5 p_A) / ((1 - a) p_I + a p_A)

    evaluated with the supplied densities. Serves as the analytic oracle for
    kernel-density estimates and for importance-weighted risk checks. A zero
    denominator is reported, never clamped.
    """
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 1
    if scalar:
        x = x[None, :]
    p_i = np.asarray(spec.p_inline(x, y), dtype=np.float64)
    p_a = np.asarray(spec.p_anomaly(x, y), dtype=np.float64)
    a = spec.contamination
    num = 0.5 * p_i + 0.5 * p_a
    den = (1.0 - a) * p_i + a * p_a
    if np.any(den <= 0.0):
        bad = int(np.argmax(den <= 0.0))
        raise DensityRatioError(
            f"density ratio denominator underflowed to 0 at row {bad}")
    out = num / den
    return float(out[0]) if scalar else out


def _clipped(probs: np.ndarray) -> np.ndarray:
    return np.clip(np.asarray(probs, dtype=np.float64), PROB_CLIP, 1.0 - PROB_CLIP)


def _check_lengths(probs, labels):
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels)
    if probs.size == 0:
        raise ValueError("empty input")
    if probs.shape != labels.shape:
        raise ValueError(
            f"length mismatch: {probs.shape} probs vs {labels.shape} labels")
    return probs, labels


def weighted_bce(probs: np.ndarray, labels: np.ndarray,
                 weights: RNWeights) -> float:
    """Mean class-weighted binary cross-entropy.

    probs are inline probabilities; inline rows contribute -ln p, anomaly
    rows -ln(1 - p). Probabilities are clipped to [1e-7, 1 - 1e-7] so the
    loss stays finite on saturated predictions. With unit weights this is
    exactly the plain BCE.
    """
    probs, labels = _check_lengths(probs, labels)
    p = _clipped(probs)
    losses = np.where(labels == INLINE, -np.log(p), -np.log1p(-p))
    return float(np.mean(weights.per_sample(labels) * losses))


def weighted_bce_grad(probs: np.ndarray, labels: np.ndarray,
                      weights: RNWeights) -> np.ndarray:
    """d(weighted_bce)/d(probs), elementwise.

    Differentiates the clipped loss literally: inside the clip window the
    component is w/n * (-1/p) for inline and w/n * 1/(1-p) for anomaly; at a
    clipped probability the loss is locally constant, so the component is 0.
    Matches central finite differences of weighted_bce everywhere.
    """
    probs, labels = _check_lengths(probs, labels)
    p = _clipped(probs)
    n = probs.size
    grad = np.where(labels == INLINE, -1.0 / p, 1.0 / (1.0 - p))
    grad = grad * weights.per_sample(labels) / n
    inside = (probs > PROB_CLIP) & (probs < 1.0 - PROB_CLIP)
    return np.where(inside, grad, 0.0)
