"""Cluster-based outlier scores and the kernel-density-weighted variant.

Three scoring rules share one distance term:

  base      distance from the query to its nearest centroid overall; queries
            in small clusters are measured against the nearest large centroid
  cblof     distance term weighted by the query's own cluster size
  ecblof    the bare distance term (no size correction)
  cblof_mod cluster-size weight replaced by a KDE-smoothed cluster mass,
            normalized to sum to n so it degenerates to cblof under uniform
            density

Cluster membership is nearest-centroid for every query, fitted or held out.
Scores are raw magnitudes; threshold selection handles scale.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .cluster import ClusterModel

VARIANTS = ("cblof", "ecblof", "cblof_mod")

BANDWIDTH_FLOOR = 1e-6


@dataclass(frozen=True)
class KdeModel:
    """Gaussian-kernel density with a single isotropic bandwidth."""

    support: np.ndarray
    bandwidth: float

    def density(self, x: np.ndarray) -> np.ndarray:
        """Density estimate at each query row; strictly positive."""
        x = np.asarray(x, dtype=np.float64)
        scalar = x.ndim == 1
        if scalar:
            x = x[None, :]
        n, d = self.support.shape
        sums = kernels.gaussian_kernel_sums(x, self.support, self.bandwidth)
        norm = n * (2.0 * math.pi * self.bandwidth ** 2) ** (d / 2.0)
        out = sums / norm
        # the kernel is positive everywhere; guard exp underflow at extreme range
        out = np.maximum(out, np.finfo(np.float64).tiny)
        return float(out[0]) if scalar else out

    def to_dict(self) -> dict:
        return {"bandwidth": self.bandwidth, "n_support": len(self.support)}


def kde_fit(points: np.ndarray) -> KdeModel:
    """Gaussian KDE with the per-dimension rule-of-thumb bandwidth collapsed
    to a scalar via the mean across dimensions.

    Zero-variance data hits the 1e-6 bandwidth floor with a warning.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError(f"points must be 2-D, got shape {points.shape}")
    n, d = points.shape
    if n < 2:
        raise ValueError(f"KDE needs at least 2 points, got {n}")
    sigma = points.std(axis=0)  # population convention, matching the standardizer
    factor = (4.0 / ((d + 2.0) * n)) ** (1.0 / (d + 4.0))
    bandwidth = float(np.mean(factor * sigma))
    if bandwidth < BANDWIDTH_FLOOR:
        warnings.warn(
            f"KDE bandwidth {bandwidth:.3g} below floor (zero-variance data?); "
            f"using {BANDWIDTH_FLOOR}", stacklevel=2)
        bandwidth = BANDWIDTH_FLOOR
    return KdeModel(support=points, bandwidth=bandwidth)


def _query_matrix(model: ClusterModel, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 1
    if scalar:
        x = x[None, :]
    if x.ndim != 2 or (x.shape[0] > 0 and x.shape[1] != model.centroids.shape[1]):
        raise ValueError(
            f"query shape {x.shape} does not match centroid dimension "
            f"{model.centroids.shape[1]}")
    return x, scalar


def _nearest(model: ClusterModel, x: np.ndarray):
    """Own cluster (ties -> lowest id), own distance, distance to nearest
    large centroid (ties -> lowest large id)."""
    d2 = kernels.pairwise_sq_dists(x, model.centroids)
    own = np.argmin(d2, axis=1)
    dist_own = np.sqrt(d2[np.arange(x.shape[0]), own])
    large = np.array(sorted(model.large_ids), dtype=np.int64)
    d2_large = d2[:, large]
    pos = np.argmin(d2_large, axis=1)
    dist_large = np.sqrt(d2_large[np.arange(x.shape[0]), pos])
    return own, dist_own, dist_large


def _distance_terms(model: ClusterModel, x: np.ndarray):
    own, dist_own, dist_large = _nearest(model, x)
    is_large = np.isin(own, np.array(sorted(model.large_ids), dtype=np.int64))
    return own, np.where(is_large, dist_own, dist_large)


def base_score(model: ClusterModel, x) -> tuple[int, float]:
    """Nearest centroid id and Euclidean distance (ties -> lowest id)."""
    q, _ = _query_matrix(model, x)
    own, dist_own, _ = _nearest(model, q)
    return int(own[0]), float(dist_own[0])


def ecblof_score(model: ClusterModel, x) -> float:
    """Distance term without the cluster-size correction."""
    q, _ = _query_matrix(model, x)
    _, term = _distance_terms(model, q)
    return float(term[0])


def cblof_score(model: ClusterModel, x) -> float:
    """Cluster-size-weighted distance term.

    |C_i| * d(x, own centroid) for queries whose nearest cluster is large;
    |C_i| * d(x, nearest large centroid) when it is small. Exactly
    size(own cluster) * ecblof_score(x).
    """
    q, _ = _query_matrix(model, x)
    own, term = _distance_terms(model, q)
    return float(model.sizes[own[0]] * term[0])


def mod_weights(model: ClusterModel, kde: KdeModel) -> np.ndarray:
    """KDE-smoothed cluster masses, normalized so they sum to n.

    Per cluster: (mean density over members) * size, rescaled so the weights
    total n. Uniform density over clusters reproduces the raw sizes exactly.
    Requires the KDE support to be the rows the cluster model was fitted on.
    """
    if model.assignment is None:
        raise ValueError("model has no stored assignment (restored from JSON?)")
    if len(kde.support) != len(model.assignment):
        raise ValueError(
            f"KDE support has {len(kde.support)} rows but the cluster model "
            f"was fitted on {len(model.assignment)}")
    dens = kde.density(kde.support)
    raw = np.empty(model.m, dtype=np.float64)
    for i in range(model.m):
        raw[i] = dens[model.assignment == i].mean() * model.sizes[i]
    return raw * (model.n / raw.sum())


def cblof_mod_score(model: ClusterModel, kde: KdeModel, x) -> float:
    """Distance term weighted by the KDE-smoothed cluster mass."""
    q, _ = _query_matrix(model, x)
    gamma = mod_weights(model, kde)
    own, term = _distance_terms(model, q)
    return float(gamma[own[0]] * term[0])


def score_dataset(model: ClusterModel, variant: str, features,
                  kde: KdeModel | None = None) -> np.ndarray:
    """Per-row scores under the chosen variant, order preserved."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    features = np.asarray(features, dtype=np.float64)
    if features.shape[0] == 0:
        return np.empty(0, dtype=np.float64)
    q, _ = _query_matrix(model, features)
    own, term = _distance_terms(model, q)
    if variant == "ecblof":
        return term
    if variant == "cblof":
        return model.sizes[own] * term
    if kde is None:
        raise ValueError("cblof_mod requires a fitted KdeModel")
    gamma = mod_weights(model, kde)
    return gamma[own] * term


def write_scores_csv(path, model: ClusterModel, variant: str, features,
                     kde: KdeModel | None = None) -> np.ndarray:
    """Score a matrix and dump row_index, cluster_id, base_score,
    corrected_score, variant; returns the corrected scores."""
    features = np.asarray(features, dtype=np.float64)
    q, _ = _query_matrix(model, features)
    own, dist_own, _ = _nearest(model, q)
    corrected = score_dataset(model, variant, features, kde=kde)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row_index", "cluster_id", "base_score",
                         "corrected_score", "variant"])
        for i in range(features.shape[0]):
            writer.writerow([i, int(own[i]), repr(float(dist_own[i])),
                             repr(float(corrected[i])), variant])
    return corrected
