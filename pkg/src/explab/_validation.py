"""Input validation helpers.

Everything downstream works on C-contiguous float64 arrays; these helpers
coerce array-likes to that layout and enforce the shape/finiteness
contracts once, at the public API boundary.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericError


def as_matrix(X, name: str = "X", *, require_finite: bool = True) -> np.ndarray:
    """Coerce to a 2-D C-contiguous float64 array."""
    arr = np.ascontiguousarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"{name} must be non-empty, got shape {arr.shape}")
    if require_finite and not np.isfinite(arr).all():
        raise NumericError(f"{name} contains non-finite values")
    return arr


def as_vector(y, name: str = "y", *, require_finite: bool = True) -> np.ndarray:
    """Coerce to a 1-D C-contiguous float64 array."""
    arr = np.ascontiguousarray(y, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = np.ascontiguousarray(arr[:, 0])
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got ndim={arr.ndim}")
    if arr.shape[0] == 0:
        raise ValueError(f"{name} must be non-empty")
    if require_finite and not np.isfinite(arr).all():
        raise NumericError(f"{name} contains non-finite values")
    return arr


def check_same_rows(X: np.ndarray, y: np.ndarray, xname: str = "X", yname: str = "y") -> None:
    if X.shape[0] != y.shape[0]:
        raise ValueError(
            f"{xname} has {X.shape[0]} rows but {yname} has {y.shape[0]} entries"
        )


def as_binary_labels(labels, name: str = "labels") -> np.ndarray:
    """Coerce to an int array of 0/1 labels."""
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got ndim={arr.ndim}")
    if arr.shape[0] == 0:
        raise ValueError(f"{name} must be non-empty")
    out = arr.astype(np.int64, copy=False)
    if not np.array_equal(out, np.asarray(arr, dtype=np.float64)):
        raise ValueError(f"{name} must contain only 0/1 values")
    if not np.isin(out, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1 values")
    return out
