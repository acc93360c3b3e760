"""Seeded k-means and the large/small cluster partition.

Clustering approximates the mixture components of the data; the partition
keeps the largest clusters as the estimate of the inline density, and small
clusters are later scored against their nearest large neighbor.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels

DEFAULT_CLUSTERS = 8
DEFAULT_COVERAGE = 0.90
DEFAULT_SIZE_RATIO = 5.0
DEFAULT_MAX_ITERS = 300
DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class ClusterModel:
    """Fitted k-means model plus the large/small partition.

    assignment is per-fitting-row and is None on models restored from JSON
    (held-out queries use nearest-centroid membership anyway).
    """

    centroids: np.ndarray
    sizes: np.ndarray
    large_ids: frozenset[int]
    objective: float
    seed: int
    assignment: np.ndarray | None = None
    objective_history: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if len(self.sizes) != len(self.centroids):
            raise ValueError("sizes and centroids disagree on cluster count")
        if (np.asarray(self.sizes) < 1).any():
            raise ValueError("empty cluster in model")
        if not self.large_ids:
            raise ValueError("large_ids must be nonempty")
        if not set(self.large_ids) <= set(range(len(self.sizes))):
            raise ValueError("large_ids outside cluster id range")

    @property
    def m(self) -> int:
        return len(self.centroids)

    @property
    def n(self) -> int:
        return int(np.sum(self.sizes))

    def to_dict(self) -> dict:
        return {
            "centroids": self.centroids.tolist(),
            "sizes": self.sizes.tolist(),
            "large_ids": sorted(self.large_ids),
            "objective": self.objective,
            "seed": self.seed,
            "m": self.m,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterModel":
        return cls(
            centroids=np.asarray(d["centroids"], dtype=np.float64),
            sizes=np.asarray(d["sizes"], dtype=np.int64),
            large_ids=frozenset(int(i) for i in d["large_ids"]),
            objective=float(d["objective"]),
            seed=int(d["seed"]),
        )


def _assign(features: np.ndarray, centroids: np.ndarray):
    d2 = kernels.pairwise_sq_dists(features, centroids)
    assignment = np.argmin(d2, axis=1)  # ties go to the lowest id
    min_d2 = d2[np.arange(features.shape[0]), assignment]
    return assignment, min_d2


def _assign_with_reseed(features: np.ndarray, centroids: np.ndarray):
    """Assignment step; empty clusters are reseeded to the worst-fit point.

    Duplicate-saturated inputs can leave a cluster unfillable (the lowest-id
    tie rule steals the reseeded point back); callers drop such clusters.
    """
    m = centroids.shape[0]
    centroids = centroids.copy()
    for _ in range(m + 1):
        assignment, min_d2 = _assign(features, centroids)
        counts = np.bincount(assignment, minlength=m)
        empties = np.flatnonzero(counts == 0)
        if empties.size == 0:
            break
        donor_order = np.argsort(-min_d2, kind="stable")
        cursor = 0
        moved = False
        for j in empties:
            while cursor < donor_order.size:
                i = donor_order[cursor]
                cursor += 1
                if counts[assignment[i]] > 1:
                    centroids[j] = features[i]
                    counts[assignment[i]] -= 1
                    moved = True
                    break
        if not moved:
            break
    else:
        assignment, min_d2 = _assign(features, centroids)
    return centroids, assignment, min_d2


def _kmeans_pp_init(features: np.ndarray, m: int,
                    rng: np.random.Generator) -> np.ndarray:
    n = features.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = ((features - features[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, m):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            nxt = int(rng.integers(n))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((features - features[nxt]) ** 2).sum(axis=1))
    return features[chosen].copy()


def large_cluster_ids(sizes, coverage: float = DEFAULT_COVERAGE,
                      ratio: float = DEFAULT_SIZE_RATIO,
                      pin: int | None = None) -> frozenset[int]:
    """Boundary rule over sizes sorted descending (ties -> lower id first).

    Scanning boundary positions b = 1..m, the first b wins where either the
    cumulative size of the b largest clusters reaches coverage * n, or the
    size drop across the boundary reaches `ratio`. Clusters before the
    boundary are large; the largest cluster is always large. `pin` overrides
    the rule with an explicit large-cluster count.
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    m = sizes.size
    if m == 0:
        raise ValueError("no clusters")
    order = np.lexsort((np.arange(m), -sizes))
    if pin is not None:
        boundary = min(max(int(pin), 1), m)
        return frozenset(int(i) for i in order[:boundary])
    sorted_sizes = sizes[order]
    n = int(sizes.sum())
    boundary = None
    cumulative = 0
    for b in range(1, m + 1):
        cumulative += int(sorted_sizes[b - 1])
        if cumulative >= coverage * n:
            boundary = b
            break
        if b < m and sorted_sizes[b - 1] / sorted_sizes[b] >= ratio:
            boundary = b
            break
    if boundary is None:
        boundary = max(1, m - 1)  # all but the smallest; unreachable for coverage <= 1
    return frozenset(int(i) for i in order[:boundary])


def partition_large_small(model: ClusterModel,
                          coverage: float = DEFAULT_COVERAGE,
                          ratio: float = DEFAULT_SIZE_RATIO,
                          pin: int | None = None) -> frozenset[int]:
    """Large-cluster id set for a fitted model under the boundary rule."""
    return large_cluster_ids(model.sizes, coverage=coverage, ratio=ratio, pin=pin)


def repartition(model: ClusterModel, coverage: float = DEFAULT_COVERAGE,
                ratio: float = DEFAULT_SIZE_RATIO,
                pin: int | None = None) -> ClusterModel:
    """Copy of the model with large_ids recomputed under new parameters."""
    return replace(model, large_ids=partition_large_small(
        model, coverage=coverage, ratio=ratio, pin=pin))


def kmeans_fit(features: np.ndarray, m: int, seed: int,
               max_iters: int = DEFAULT_MAX_ITERS, tol: float = DEFAULT_TOL,
               coverage: float = DEFAULT_COVERAGE,
               ratio: float = DEFAULT_SIZE_RATIO) -> ClusterModel:
    """Seeded k-means++ plus Lloyd iterations.

    Stops when the relative objective improvement drops below tol or after
    max_iters sweeps; the recorded objective (sum of squared distances to the
    assigned centroid) is non-increasing across iterations, and the returned
    assignment is consistent with the returned centroids.
    """
    features = np.ascontiguousarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {features.shape}")
    n = features.shape[0]
    if m < 1:
        raise ValueError(f"cluster count must be >= 1, got {m}")
    if m > n:
        raise ValueError(f"cluster count {m} exceeds row count {n}")
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(features, m, rng)
    centroids, assignment, min_d2 = _assign_with_reseed(features, centroids)
    objective = float(min_d2.sum())
    history = [objective]
    for _ in range(max_iters):
        new_centroids = centroids.copy()
        for j in range(m):
            members = assignment == j
            if members.any():
                new_centroids[j] = features[members].mean(axis=0)
        new_centroids, new_assignment, new_min_d2 = _assign_with_reseed(
            features, new_centroids)
        new_objective = float(new_min_d2.sum())
        history.append(new_objective)
        converged = objective <= 0.0 or (objective - new_objective) <= tol * objective
        centroids, assignment, objective = new_centroids, new_assignment, new_objective
        if converged:
            break

    counts = np.bincount(assignment, minlength=m)
    keep = np.flatnonzero(counts > 0)
    if keep.size < m:
        # duplicate-saturated input: compact away unfillable clusters
        remap = -np.ones(m, dtype=np.int64)
        remap[keep] = np.arange(keep.size)
        centroids = centroids[keep]
        assignment = remap[assignment]
        counts = counts[keep]

    large = large_cluster_ids(counts, coverage=coverage, ratio=ratio)
    return ClusterModel(
        centroids=centroids,
        sizes=counts.astype(np.int64),
        large_ids=large,
        objective=objective,
        seed=seed,
        assignment=assignment.astype(np.int64),
        objective_history=tuple(history),
    )
