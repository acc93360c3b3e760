"""Hot-kernel dispatch: compiled extension when available, numpy otherwise.

The environment variable RNAD_KERNELS forces a backend:

    RNAD_KERNELS=auto    (default) compiled if importable, else numpy
    RNAD_KERNELS=cython  compiled, ImportError if the extension is missing
    RNAD_KERNELS=numpy   pure-numpy fallback

Both backends compute the same formulas in float64; results agree to
rounding. `backend()` reports which one is active.
"""

import os

import numpy as np

from . import numpy_backend

_choice = os.environ.get("RNAD_KERNELS", "auto")
if _choice not in ("auto", "cython", "numpy"):
    raise ValueError(f"RNAD_KERNELS must be auto|cython|numpy, got {_choice!r}")

_impl = None
if _choice in ("auto", "cython"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        if _choice == "cython":
            raise
        _impl = None
if _impl is None:
    _impl = numpy_backend

_BACKEND = "numpy" if _impl is numpy_backend else "cython"


def backend() -> str:
    """Name of the active kernel backend ('cython' or 'numpy')."""
    return _BACKEND


def _as_matrix(a, name: str) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    return a


def pairwise_sq_dists(points, centers) -> np.ndarray:
    """(n, m) matrix of squared Euclidean distances between rows."""
    points = _as_matrix(points, "points")
    centers = _as_matrix(centers, "centers")
    if points.shape[1] != centers.shape[1]:
        raise ValueError(
            f"dimension mismatch: points have {points.shape[1]} columns, "
            f"centers have {centers.shape[1]}")
    return _impl.pairwise_sq_dists(points, centers)


def gaussian_kernel_sums(queries, support, bandwidth: float) -> np.ndarray:
    """Per-query sums of the unnormalized isotropic Gaussian kernel."""
    queries = _as_matrix(queries, "queries")
    support = _as_matrix(support, "support")
    if queries.shape[1] != support.shape[1]:
        raise ValueError(
            f"dimension mismatch: queries have {queries.shape[1]} columns, "
            f"support has {support.shape[1]}")
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    return _impl.gaussian_kernel_sums(queries, support, float(bandwidth))
