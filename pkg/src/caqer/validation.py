"""Input checks shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np

from .fidelity import DataMatrix

__all__ = [
    "check_data_matrix",
    "check_in_range",
    "check_positive_int",
    "check_is_fitted",
]


def check_data_matrix(C, d_S: int | None = None, d_C: int | None = None) -> DataMatrix:
    """Return ``C`` as a :class:`DataMatrix`.

    Accepts a ``DataMatrix`` or a square array together with ``d_S`` and
    ``d_C``.
    """
    if isinstance(C, DataMatrix):
        if d_S is not None and C.d_S != d_S:
            raise ValueError(f"data matrix has d_S = {C.d_S}, expected {d_S}")
        if d_C is not None and C.d_C != d_C:
            raise ValueError(f"data matrix has d_C = {C.d_C}, expected {d_C}")
        return C
    if d_S is None or d_C is None:
        raise TypeError("a raw array needs d_S and d_C")
    A = np.asarray(C)
    if not np.all(np.isfinite(A)):
        raise ValueError("data matrix has non-finite entries")
    return DataMatrix(A, int(d_S), int(d_C))


def check_in_range(name: str, value, lo: float, hi: float) -> float:
    v = float(value)
    if not np.isfinite(v) or v < lo or v > hi:
        raise ValueError(f"{name} must lie in [{lo}, {hi}], got {value!r}")
    return v


def check_positive_int(name: str, value) -> int:
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_is_fitted(est, attr: str):
    from sklearn.exceptions import NotFittedError

    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted yet; call fit first")
