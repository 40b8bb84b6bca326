"""Evaluable bivariate copulas.

Every copula here is a total function on the unit square and supports three
kinds of query:

* ``C(u1, u2)``: vectorised floating point evaluation,
* ``C.exact(u1, u2)``: scalar evaluation in rational arithmetic,
* ``C.partials(u1, u2)``: the two first partial derivatives, defined almost
  everywhere; callers only ask for them at points off the kink lines.

The builtins are the Fréchet-Hoeffding bounds ``M`` and ``W``, the product
copula ``PI`` and the band copula ``E`` whose mass sits on a closed polygon and
which makes the central square ``(1/4, 3/4]^2`` a null set. Checkerboard
(``GridCopula``) copulas are the finite representation used for exact
integration and sampling.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import cached_property, reduce

import numpy as np

from ._validation import CopulaDomainError, check_resolution, check_unit, check_unit_exact

__all__ = [
    "Copula",
    "MinCopula",
    "LowerBoundCopula",
    "ProductCopula",
    "DiamondCopula",
    "GridCopula",
    "Mixture",
    "Transformed",
    "M",
    "W",
    "PI",
    "E",
    "CopulaDomainError",
    "InvalidCopulaError",
    "DensityError",
    "rect_mass",
    "discretize",
    "copula_from_density",
]

MASS_TOL = 1e-12


class InvalidCopulaError(ValueError):
    """Raised when an input violates the copula axioms beyond tolerance."""


class DensityError(ValueError):
    """Raised when a density cannot be turned into a grid copula."""


def _lcm(*values):
    return reduce(math.lcm, values, 1)


class Copula:
    """Base class. Subclasses implement ``_evaluate``, ``_exact`` and ``_partials``."""

    kind = "abstract"

    #: lattice resolution whose cell diagonals contain every kink of the copula
    lattice_base = 1

    #: resolution of an exactly equivalent checkerboard, ``None`` if there is none
    grid_resolution = None

    def __call__(self, u1, u2):
        a, b = check_unit(u1, u2)
        out = self._evaluate(a, b)
        if out.ndim == 0:
            return float(out)
        return out

    def exact(self, u1, u2):
        """Evaluate at rational arguments and return a ``Fraction``."""
        a, b = check_unit_exact(u1, u2)
        return self._exact(a, b)

    def partials(self, u1, u2):
        a, b = check_unit(u1, u2)
        return self._partials(a, b)

    def to_grid(self):
        """Return the equivalent ``GridCopula``; only valid when ``grid_resolution`` is set."""
        if self.grid_resolution is None:
            raise TypeError(f"{self!r} has no exact checkerboard representation")
        return self._to_grid()

    def _to_grid(self):
        raise NotImplementedError

    def _evaluate(self, a, b):
        raise NotImplementedError

    def _exact(self, a, b):
        raise NotImplementedError

    def _partials(self, a, b):
        raise NotImplementedError


class MinCopula(Copula):
    """Upper Fréchet-Hoeffding bound ``M(u1, u2) = min(u1, u2)``."""

    kind = "M"

    def _evaluate(self, a, b):
        return np.minimum(a, b)

    def _exact(self, a, b):
        return min(a, b)

    def _partials(self, a, b):
        return (a < b).astype(float), (b < a).astype(float)

    def __repr__(self):
        return "M"


class LowerBoundCopula(Copula):
    """Lower Fréchet-Hoeffding bound ``W(u1, u2) = max(u1 + u2 - 1, 0)``."""

    kind = "W"

    def _evaluate(self, a, b):
        return np.maximum(a + b - 1.0, 0.0)

    def _exact(self, a, b):
        return max(a + b - 1, Fraction(0))

    def _partials(self, a, b):
        d = (a + b > 1.0).astype(float)
        return d, d.copy()

    def __repr__(self):
        return "W"


class ProductCopula(Copula):
    """Independence copula ``Pi(u1, u2) = u1 * u2``."""

    kind = "Pi"
    grid_resolution = 1

    def _evaluate(self, a, b):
        return a * b

    def _exact(self, a, b):
        return a * b

    def _partials(self, a, b):
        return np.array(b, dtype=float), np.array(a, dtype=float)

    def _to_grid(self):
        return GridCopula([[1.0]])

    def __repr__(self):
        return "Pi"


class DiamondCopula(Copula):
    """The three-branch copula ``E``.

    ``E = M`` where ``|u1 - u2| > 1/2``, ``E = W`` where ``|u1 + u2 - 1| > 1/2``
    and ``(u1 + u2)/2 - 1/4`` elsewhere. The inequalities are strict, so ties
    fall into the middle branch.
    """

    kind = "E"
    lattice_base = 2

    def _evaluate(self, a, b):
        middle = 0.5 * (a + b) - 0.25
        lower = np.maximum(a + b - 1.0, 0.0)
        upper = np.minimum(a, b)
        return np.where(np.abs(a - b) > 0.5, upper, np.where(np.abs(a + b - 1.0) > 0.5, lower, middle))

    def _exact(self, a, b):
        half = Fraction(1, 2)
        if abs(a - b) > half:
            return min(a, b)
        if abs(a + b - 1) > half:
            return max(a + b - 1, Fraction(0))
        return (a + b) / 2 - Fraction(1, 4)

    def _partials(self, a, b):
        in_m = np.abs(a - b) > 0.5
        in_w = ~in_m & (np.abs(a + b - 1.0) > 0.5)
        w_active = (a + b > 1.0).astype(float)
        d1 = np.where(in_m, (a < b).astype(float), np.where(in_w, w_active, 0.5))
        d2 = np.where(in_m, (b < a).astype(float), np.where(in_w, w_active, 0.5))
        return d1, d2

    def __repr__(self):
        return "E"


class GridCopula(Copula):
    """Checkerboard copula with a piecewise uniform density on an ``m x m`` grid.

    ``mass[i, j]`` is the probability of the cell ``(i/m, (i+1)/m] x (j/m, (j+1)/m]``,
    rows indexing the first coordinate. Between grid corners the distribution
    function is the bilinear interpolation of the cumulative masses.

    Parameters
    ----------
    mass : array-like of shape (m, m)
        Nonnegative cell masses whose rows and columns each sum to ``1/m``.
    atol : float
        Tolerance for the marginal and total-mass checks.
    """

    kind = "grid"

    def __init__(self, mass, atol=MASS_TOL):
        arr = np.array(mass, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise InvalidCopulaError(f"mass must be a non-empty square matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidCopulaError("mass contains non-finite entries")
        if np.any(arr < 0.0):
            raise InvalidCopulaError(f"negative cell mass {arr.min():.3e}")
        m = arr.shape[0]
        dev = max(
            np.max(np.abs(arr.sum(axis=1) - 1.0 / m)),
            np.max(np.abs(arr.sum(axis=0) - 1.0 / m)),
        )
        if dev > atol:
            raise InvalidCopulaError(f"marginal sums deviate from 1/m by {dev:.3e}")
        if abs(arr.sum() - 1.0) > atol:
            raise InvalidCopulaError(f"total mass {arr.sum()!r} differs from 1")
        arr.setflags(write=False)
        self.mass = arr
        self.m = m

    @property
    def grid_resolution(self):
        return self.m

    @property
    def lattice_base(self):
        return self.m

    def _to_grid(self):
        return self

    @cached_property
    def _cum(self):
        cum = np.zeros((self.m + 1, self.m + 1))
        cum[1:, 1:] = self.mass.cumsum(axis=0).cumsum(axis=1)
        cum.setflags(write=False)
        return cum

    @cached_property
    def _cum_exact(self):
        m = self.m
        cum = [[Fraction(0)] * (m + 1) for _ in range(m + 1)]
        for i in range(m):
            row_run = Fraction(0)
            for j in range(m):
                row_run += Fraction(float(self.mass[i, j]))
                cum[i + 1][j + 1] = cum[i][j + 1] + row_run
        return cum

    def _locate(self, u):
        scaled = u * self.m
        idx = np.minimum(np.floor(scaled).astype(int), self.m - 1)
        return idx, scaled - idx

    def _evaluate(self, a, b):
        i, fa = self._locate(a)
        j, fb = self._locate(b)
        S = self._cum
        return (
            (1 - fa) * (1 - fb) * S[i, j]
            + fa * (1 - fb) * S[i + 1, j]
            + (1 - fa) * fb * S[i, j + 1]
            + fa * fb * S[i + 1, j + 1]
        )

    def _exact(self, a, b):
        m = self.m
        i = min(math.floor(a * m), m - 1)
        j = min(math.floor(b * m), m - 1)
        fa = a * m - i
        fb = b * m - j
        S = self._cum_exact
        return (
            (1 - fa) * (1 - fb) * S[i][j]
            + fa * (1 - fb) * S[i + 1][j]
            + (1 - fa) * fb * S[i][j + 1]
            + fa * fb * S[i + 1][j + 1]
        )

    def _partials(self, a, b):
        i, fa = self._locate(a)
        j, fb = self._locate(b)
        S = self._cum
        m = self.m
        d1 = m * ((1 - fb) * (S[i + 1, j] - S[i, j]) + fb * (S[i + 1, j + 1] - S[i, j + 1]))
        d2 = m * ((1 - fa) * (S[i, j + 1] - S[i, j]) + fa * (S[i + 1, j + 1] - S[i + 1, j]))
        return d1, d2

    def refine(self, m):
        """Split every cell into ``k x k`` equal parts, ``k = m / self.m``."""
        k, rem = divmod(check_resolution(m), self.m)
        if rem:
            raise ValueError(f"resolution {m} is not a multiple of {self.m}")
        if k == 1:
            return self
        return GridCopula(np.kron(self.mass, np.ones((k, k))) / (k * k))

    def __repr__(self):
        return f"GridCopula(m={self.m})"


class Mixture(Copula):
    """Convex combination ``sum_i w_i C_i``.

    Weights may be floats or ``Fraction``s; they must be nonnegative and sum
    to one within ``1e-12``.
    """

    kind = "mixture"

    def __init__(self, components):
        comps = []
        for weight, copula in components:
            if not isinstance(copula, Copula):
                raise TypeError(f"mixture member must be a Copula, got {type(copula).__name__}")
            if not isinstance(weight, Fraction):
                weight = float(weight)
            if weight < 0:
                raise InvalidCopulaError(f"negative mixture weight {weight}")
            comps.append((weight, copula))
        if not comps:
            raise InvalidCopulaError("mixture needs at least one component")
        total = sum(float(w) for w, _ in comps)
        if abs(total - 1.0) > MASS_TOL:
            raise InvalidCopulaError(f"mixture weights sum to {total!r}, not 1")
        self.components = tuple(comps)

    @property
    def grid_resolution(self):
        res = [c.grid_resolution for _, c in self.components]
        if any(r is None for r in res):
            return None
        return _lcm(*res)

    @property
    def lattice_base(self):
        return _lcm(*(c.lattice_base for _, c in self.components))

    def _to_grid(self):
        m = self.grid_resolution
        mass = sum(float(w) * c.to_grid().refine(m).mass for w, c in self.components)
        return GridCopula(mass)

    def _evaluate(self, a, b):
        return sum(float(w) * c._evaluate(a, b) for w, c in self.components)

    def _exact(self, a, b):
        return sum((Fraction(w) * c._exact(a, b) for w, c in self.components), Fraction(0))

    def _partials(self, a, b):
        d1 = np.zeros(np.broadcast(a, b).shape)
        d2 = np.zeros_like(d1)
        for w, c in self.components:
            p1, p2 = c._partials(a, b)
            d1 = d1 + float(w) * p1
            d2 = d2 + float(w) * p2
        return d1, d2

    def __repr__(self):
        inner = " + ".join(f"{w}*{c!r}" for w, c in self.components)
        return f"Mixture({inner})"


class Transformed(Copula):
    """The copula ``g(C)`` for a group element ``g``.

    ``g`` acts on a random pair ``(U1, U2)`` with copula ``C`` by first
    replacing ``U_i`` with ``1 - U_i`` where ``flip_i`` is set and then
    swapping the coordinates if ``swap`` is set.
    """

    kind = "transformed"

    def __init__(self, element, copula):
        self.element = element
        self.copula = copula

    @property
    def grid_resolution(self):
        return self.copula.grid_resolution

    @property
    def lattice_base(self):
        return self.copula.lattice_base

    def _to_grid(self):
        return GridCopula(self.element.act_on_mass(self.copula.to_grid().mass))

    def _flipped(self, C, a, b):
        # distribution function of the pair after the flips, before the swap
        g = self.element
        if g.flip1 and g.flip2:
            return a + b - 1 + C(1 - a, 1 - b)
        if g.flip1:
            return b - C(1 - a, b)
        if g.flip2:
            return a - C(a, 1 - b)
        return C(a, b)

    def _evaluate(self, a, b):
        if self.element.swap:
            a, b = b, a
        return self._flipped(self.copula._evaluate, a, b)

    def _exact(self, a, b):
        if self.element.swap:
            a, b = b, a
        return self._flipped(self.copula._exact, a, b)

    def _partials(self, a, b):
        g = self.element
        if g.swap:
            a, b = b, a
        x = 1 - a if g.flip1 else a
        y = 1 - b if g.flip2 else b
        p1, p2 = self.copula._partials(x, y)
        if g.flip1 and g.flip2:
            p1, p2 = 1 - p1, 1 - p2
        elif g.flip1:
            p2 = 1 - p2
        elif g.flip2:
            p1 = 1 - p1
        if g.swap:
            p1, p2 = p2, p1
        return p1, p2

    def __repr__(self):
        return f"{self.element.name}({self.copula!r})"


M = MinCopula()
W = LowerBoundCopula()
PI = ProductCopula()
E = DiamondCopula()


def rect_mass(C, a1, b1, a2, b2, exact=False):
    """Probability of the half-open rectangle ``(a1, b1] x (a2, b2]`` under ``C``.

    Computed by inclusion-exclusion. Rounding noise down to ``-1e-12`` is
    clamped to zero; anything more negative means ``C`` is not 2-increasing.
    """
    if a1 > b1 or a2 > b2:
        raise CopulaDomainError(f"unordered rectangle bounds ({a1}, {b1}] x ({a2}, {b2}]")
    ev = C.exact if exact else C
    value = ev(b1, b2) - ev(a1, b2) - ev(b1, a2) + ev(a1, a2)
    if value < 0:
        if value < -MASS_TOL:
            raise InvalidCopulaError(f"rectangle mass {float(value):.3e} is negative")
        return Fraction(0) if exact else 0.0
    return value


def discretize(C, m):
    """Checkerboard approximation of ``C`` carrying its exact cell masses."""
    m = check_resolution(m)
    if C.grid_resolution is not None and m % C.grid_resolution == 0:
        return C.to_grid().refine(m)
    t = np.arange(m + 1) / m
    V = C(t[:, None], t[None, :])
    mass = V[1:, 1:] - V[:-1, 1:] - V[1:, :-1] + V[:-1, :-1]
    if mass.min() < -MASS_TOL:
        raise InvalidCopulaError(f"cell mass {mass.min():.3e} is negative")
    return GridCopula(np.maximum(mass, 0.0))


def _overlap_weights(cdf, m):
    """Fraction of each inner cell's image interval falling into each of ``m`` bins."""
    lo, hi = cdf[:-1, None], cdf[1:, None]
    edges = np.arange(m + 1) / m
    overlap = np.clip(np.minimum(hi, edges[None, 1:]) - np.maximum(lo, edges[None, :-1]), 0.0, None)
    width = (hi - lo)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(width > 0, overlap / width, 0.0)


def copula_from_density(f, bounds, m, inner=1024, tol=1e-13, max_sweeps=500):
    """Checkerboard copula of the distribution with density ``f``.

    Parameters
    ----------
    f : callable
        Vectorised nonnegative density ``f(x1, x2)``; it need not be normalised.
    bounds : tuple of 4 floats
        ``(x1_low, x1_high, x2_low, x2_high)``; mass outside is ignored.
    m : int
        Resolution of the resulting grid copula.
    inner : int
        Points per axis of the tensor midpoint rule.
    tol, max_sweeps
        Stopping rule of the final row/column rescaling. A deviation above
        ``1e-10`` after ``max_sweeps`` sweeps is an error.

    The mass of each inner cell is pushed through the marginal distribution
    functions, spread uniformly over its image rectangle and collected into
    the ``m x m`` bins.
    """
    m = check_resolution(m)
    inner = check_resolution(inner, "inner")
    x_lo, x_hi, y_lo, y_hi = map(float, bounds)
    if not (x_lo < x_hi and y_lo < y_hi):
        raise DensityError(f"degenerate integration rectangle {bounds}")
    xs = x_lo + (np.arange(inner) + 0.5) * (x_hi - x_lo) / inner
    ys = y_lo + (np.arange(inner) + 0.5) * (y_hi - y_lo) / inner
    vals = np.asarray(f(xs[:, None], ys[None, :]), dtype=float)
    vals = np.broadcast_to(vals, (inner, inner))
    if not np.all(np.isfinite(vals)):
        raise DensityError("density is not finite on the integration grid")
    if np.any(vals < 0):
        raise DensityError("density takes negative values")
    total = vals.sum()
    if not total > 0:
        raise DensityError("density has zero mass on the integration rectangle")
    cell = vals / total
    F1 = np.concatenate([[0.0], np.cumsum(cell.sum(axis=1))])
    F2 = np.concatenate([[0.0], np.cumsum(cell.sum(axis=0))])
    F1[-1] = F2[-1] = 1.0
    P = _overlap_weights(F1, m)
    Q = _overlap_weights(F2, m)
    mass = P.T @ cell @ Q

    target = 1.0 / m
    for _ in range(max_sweeps):
        dev = max(np.max(np.abs(mass.sum(axis=1) - target)), np.max(np.abs(mass.sum(axis=0) - target)))
        if dev <= tol:
            break
        mass = mass * (target / mass.sum(axis=1))[:, None]
        mass = mass * (target / mass.sum(axis=0))[None, :]
    dev = max(np.max(np.abs(mass.sum(axis=1) - target)), np.max(np.abs(mass.sum(axis=0) - target)))
    if dev > 1e-10:
        raise DensityError(f"marginal normalisation did not converge (deviation {dev:.3e})")
    return GridCopula(mass, atol=max(MASS_TOL, dev * m))
