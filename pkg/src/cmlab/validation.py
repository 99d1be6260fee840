"""Exceptions and input checks shared across the package."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array


class AxisError(ValueError):
    """Unknown, repeated, or mismatched axis names."""


class CapExceededError(RuntimeError):
    """A dense tensor, grid, or enumeration would exceed its size cap."""


class ZeroProbabilityError(ValueError):
    """Conditioning on an event of probability zero, or an empty support."""


def check_names(names):
    names = list(names)
    if len(set(names)) != len(names):
        raise AxisError(f"repeated axis names in {names}")
    for n in names:
        if not isinstance(n, str) or not n:
            raise AxisError(f"axis names must be nonempty strings, got {n!r}")
    return names


def check_mass(mass: np.ndarray, tol: float) -> np.ndarray:
    """Reject negative, non-finite, or unnormalized probability tensors."""
    flat = check_array(mass.reshape(1, -1), ensure_2d=True, dtype=float,
                       ensure_all_finite=True)
    if np.any(flat < 0):
        raise ValueError("probability mass must be nonnegative")
    total = flat.sum()
    if abs(total - 1.0) > tol:
        raise ValueError(f"probability mass sums to {total!r}, not 1")
    return mass


def check_params(mu: float, alpha: float) -> tuple[float, float]:
    mu, alpha = float(mu), float(alpha)
    if not np.isfinite(mu) or mu < 0:
        raise ValueError(f"mu must be finite and >= 0, got {mu}")
    if not np.isfinite(alpha) or alpha <= 0:
        raise ValueError(f"alpha must be finite and > 0, got {alpha}")
    return mu, alpha


def check_stochastic(matrix, n_in_axes: int = 1, tol: float = 1e-12) -> np.ndarray:
    """Validate a conditional table whose trailing axes form each row."""
    m = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(m)) or np.any(m < 0):
        raise ValueError("conditional table must be finite and nonnegative")
    rows = m.sum(axis=tuple(range(n_in_axes, m.ndim)))
    if np.any(np.abs(rows - 1.0) > tol):
        raise ValueError("conditional table rows must sum to 1")
    return m
