"""Input validation helpers shared by the public API."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

import numpy as np
from sklearn.utils import check_array


class CopulaDomainError(ValueError):
    """Raised when a copula argument lies outside the unit square."""


def check_unit(u1, u2):
    """Validate evaluation arguments and return them as float arrays."""
    a = np.asarray(u1, dtype=float)
    b = np.asarray(u2, dtype=float)
    if np.any(~np.isfinite(a)) or np.any(~np.isfinite(b)):
        raise CopulaDomainError("copula arguments must be finite")
    if np.any((a < 0.0) | (a > 1.0)) or np.any((b < 0.0) | (b > 1.0)):
        raise CopulaDomainError("copula arguments must lie in [0, 1]")
    return a, b


def check_unit_exact(u1, u2):
    """Validate scalar arguments for exact evaluation and return Fractions."""
    out = []
    for u in (u1, u2):
        if isinstance(u, Rational):
            f = Fraction(u)
        elif isinstance(u, float):
            f = Fraction(u)
        else:
            raise TypeError(f"exact evaluation needs rational arguments, got {type(u).__name__}")
        if f < 0 or f > 1:
            raise CopulaDomainError("copula arguments must lie in [0, 1]")
        out.append(f)
    return out[0], out[1]


def check_probability(q, name="q"):
    """Return ``q`` as a Fraction (if rational) or float, checking 0 <= q <= 1."""
    if isinstance(q, Rational):
        q = Fraction(q)
    else:
        q = float(q)
    if not 0 <= q <= 1:
        raise ValueError(f"{name} must lie in [0, 1], got {q}")
    return q


def check_bivariate(X, min_samples=2):
    """Validate an ``(n_samples, 2)`` data matrix in the sklearn convention."""
    X = check_array(X, dtype=np.float64, ensure_min_samples=min_samples, ensure_all_finite=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected exactly 2 columns, got {X.shape[1]}")
    return X


def check_resolution(m, name="m"):
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise ValueError(f"{name} must be a positive integer, got {m!r}")
    return int(m)
