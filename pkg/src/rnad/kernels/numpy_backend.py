"""Pure-numpy implementations of the hot kernels.

Used when the compiled extension is unavailable (or forced via RNAD_KERNELS).
Loops run over the small axis / in fixed-size chunks to bound temporaries.
"""

import numpy as np

_CHUNK = 512


def pairwise_sq_dists(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance from every point to every center."""
    n, m = points.shape[0], centers.shape[0]
    out = np.empty((n, m), dtype=np.float64)
    for j in range(m):
        diff = points - centers[j]
        out[:, j] = np.einsum("ij,ij->i", diff, diff)
    return out


def gaussian_kernel_sums(queries: np.ndarray, support: np.ndarray,
                         bandwidth: float) -> np.ndarray:
    """sum_j exp(-||q - s_j||^2 / (2 h^2)) for each query row q."""
    inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth)
    total = np.zeros(queries.shape[0], dtype=np.float64)
    for start in range(0, support.shape[0], _CHUNK):
        block = support[start:start + _CHUNK]
        sq = pairwise_sq_dists(queries, block)
        total += np.exp(-sq * inv_two_h2).sum(axis=1)
    return total
