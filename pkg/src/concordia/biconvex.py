"""The biconvex form ``[C, D]``: the integral of ``C`` against the measure of ``D``.

Two routes are used.

``exact-grid``
    Both arguments reduce to checkerboards. On their common refinement ``C`` is
    bilinear and ``D`` is uniform on every cell, so the cell integral is the
    cell mass times ``C`` at the cell centre.

``discretized``
    Otherwise the form is evaluated through the identity
    ``[C, D] = 1/2 - int d1C * d2D`` over the unit square. Each lattice cell is
    cut along both diagonals; on each triangle the partial derivatives of all
    supported copulas are affine, so a degree-2 interior rule is exact once the
    lattice is aligned with the kinks. The lattice is doubled until two
    successive values agree to ``1e-8``.

The form is symmetric for bivariate copulas. There exist copula pairs with
``[C, D] = 0``; none of the builtins is such a pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._validation import check_resolution
from .copulas import GridCopula

__all__ = [
    "BiconvexResult",
    "BiconvexConvergenceError",
    "biconvex_form",
    "biconvex_oracle",
    "KNOWN_VALUES",
]

CONVERGENCE_TOL = 1e-8
MAX_RESOLUTION = 4096

#: closed-form values of the form for d = 2, as ``Fraction``s
KNOWN_VALUES = {
    "[M,M]": Fraction(1, 2),
    "[Pi,Pi]": Fraction(1, 4),
    "[M,Pi]": Fraction(1, 3),
    "[M,M_GammaNu]": Fraction(3, 8),
}


class BiconvexConvergenceError(RuntimeError):
    """Successive lattice refinements still disagree at the resolution cap."""

    def __init__(self, value, est_error, resolution):
        super().__init__(
            f"biconvex form did not converge: last value {value!r}, "
            f"difference {est_error:.3e} at resolution {resolution}"
        )
        self.value = value
        self.est_error = est_error
        self.resolution = resolution


@dataclass(frozen=True)
class BiconvexResult:
    value: float
    method: str
    resolution_used: int
    est_error: float

    def __float__(self):
        return self.value


# Strang-Fix interior points in barycentric form, exact for quadratics
_BARY = np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]])
_CENTRE = np.array([0.5, 0.5])
_CORNERS = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def _cell_points():
    pts = []
    for k in range(4):
        tri = np.stack([_CENTRE, _CORNERS[k], _CORNERS[(k + 1) % 4]])
        pts.append(_BARY @ tri)
    return np.concatenate(pts)  # 12 points in cell-local coordinates


_LOCAL = _cell_points()


def _derivative_integral(C, D, m, block=256):
    """``int d1C * d2D`` on an ``m x m`` lattice, summed block by block."""
    h = 1.0 / m
    j = np.arange(m)
    partial_sums = []
    for start in range(0, m, block):
        i = np.arange(start, min(start + block, m))
        u1 = (i[:, None, None] + _LOCAL[None, None, :, 0]) * h
        u2 = (j[None, :, None] + _LOCAL[None, None, :, 1]) * h
        u1, u2 = np.broadcast_arrays(u1, u2)
        d1C, _ = C._partials(u1, u2)
        _, d2D = D._partials(u1, u2)
        partial_sums.append(np.sum(d1C * d2D))
    # each of the 12 points carries weight (h^2 / 4) / 3
    return math.fsum(partial_sums) * h * h / 12.0


def _grid_pair(C, D, resolution):
    Cg = C.to_grid().refine(resolution)
    Dg = D.to_grid().refine(resolution)
    centres = (np.arange(resolution) + 0.5) / resolution
    values = Cg(centres[:, None], centres[None, :])
    return float(np.sum(Dg.mass * values))


def _check_range(value):
    if not -1e-12 <= value <= 0.5 + 1e-12:
        raise ArithmeticError(f"biconvex form {value!r} outside [0, 1/2]")
    return min(max(value, 0.0), 0.5)


def biconvex_form(C, D, m=16):
    """Compute ``[C, D]``.

    Parameters
    ----------
    C, D : Copula
    m : int
        Starting lattice resolution for the discretised route. It is rounded up
        to a multiple of the resolution at which both copulas are piecewise
        affine on the triangulated lattice.

    Returns
    -------
    BiconvexResult

    Raises
    ------
    BiconvexConvergenceError
        If the discretised route has not converged when the resolution passes
        4096.
    """
    m = check_resolution(m)
    rc, rd = C.grid_resolution, D.grid_resolution
    if rc is not None and rd is not None and math.lcm(rc, rd) <= MAX_RESOLUTION:
        res = math.lcm(rc, rd)
        return BiconvexResult(_check_range(_grid_pair(C, D, res)), "exact-grid", res, 0.0)

    base = math.lcm(C.lattice_base, D.lattice_base)
    res = base * max(1, -(-m // base))
    previous = 0.5 - _derivative_integral(C, D, res)
    diff = math.inf
    while True:
        res *= 2
        if res > MAX_RESOLUTION:
            raise BiconvexConvergenceError(previous, diff, res // 2)
        value = 0.5 - _derivative_integral(C, D, res)
        diff = abs(value - previous)
        if diff < CONVERGENCE_TOL:
            return BiconvexResult(_check_range(value), "discretized", res, diff)
        previous = value


def biconvex_oracle(C, D, n_samples=10**6, seed=0):
    """Monte Carlo estimate of ``[C, D]`` for a checkerboard ``D``.

    Points are drawn from the measure of ``D`` (a cell by its mass, then
    uniformly inside) and ``C`` is averaged over them. Returns
    ``(estimate, standard_error)``. Meant as an independent check only.
    """
    if not isinstance(D, GridCopula):
        raise TypeError("the oracle samples from a GridCopula")
    rng = np.random.default_rng(seed)
    m = D.m
    p = D.mass.ravel()
    cells = rng.choice(p.size, size=n_samples, p=p / p.sum())
    i, j = np.divmod(cells, m)
    u1 = (i + rng.random(n_samples)) / m
    u2 = (j + rng.random(n_samples)) / m
    values = C(u1, u2)
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(n_samples))

