"""Rank-based plug-in estimators of ``kappa_A``.

With relative ranks ``U_k`` of a sample of size ``n`` the three forms are

    <C, A>_n = mean_k A(U_1k, U_2k)
    <M, A>_n = mean_k A(k/(n+1), k/(n+1))
    <W, A>_n = mean_k A(k/(n+1), (n+1-k)/(n+1))

and the estimator is ``(<C, A>_n - 1/4) / (<M, A>_n - 1/4)``. It is defined
once ``<M, A>_n > 1/4``, which holds exactly from ``n_A`` on.

Forms are computed in rational arithmetic by default, so the closed-form
sample versions of Spearman's rho and Gini's gamma hold as exact equalities.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_bivariate
from .copulas import rect_mass
from .ranks import RelativeRankMatrix, Sample, relative_ranks

__all__ = [
    "EmpiricalCopula",
    "EstimateReport",
    "SampleTooSmall",
    "SampleSizeNotFound",
    "empirical_biconvex",
    "comonotone_form",
    "countermonotone_form",
    "minimal_sample_size",
    "estimate",
    "estimate_from_ranks",
    "spearman_sample_form",
    "gini_sample_form",
    "gini_rank_form",
    "gini_rank_form_as_printed",
    "rearrange_toward_comonotone",
    "rearrange_toward_countermonotone",
    "ConcordanceEstimator",
]

QUARTER = Fraction(1, 4)
POSITIVE_MASS = 1e-12
TABLE_MAX_N = 64


class SampleTooSmall(ValueError):
    def __init__(self, n, n_A):
        super().__init__(f"sample size {n} is below n_A = {n_A}; the estimator's denominator vanishes")
        self.n = n
        self.n_A = n_A


class SampleSizeNotFound(LookupError):
    def __init__(self, n_max):
        super().__init__(f"no n <= {n_max} gives the central square positive mass")
        self.n_max = n_max


class EmpiricalCopula:
    """Step function ``u -> (1/n) #{k : U_k <= u}`` built from relative ranks."""

    def __init__(self, U):
        self.U = U

    def __call__(self, u1, u2):
        u1 = np.asarray(u1, dtype=float)[..., None]
        u2 = np.asarray(u2, dtype=float)[..., None]
        v = self.U.values
        return np.mean((v[0] <= u1) & (v[1] <= u2), axis=-1)

    def integrate_against(self, A, m):
        """Integral of the step function against the checkerboard of ``A`` at resolution ``m``.

        Each cell's mass is spread uniformly, so the integral over a cell
        factorises into the covered fractions along each axis.
        """
        from .copulas import discretize

        mass = discretize(A, m).mass
        lower = np.arange(m) / m
        v = self.U.values
        f1 = np.clip((lower[None, :] + 1.0 / m - v[0][:, None]) * m, 0.0, 1.0)
        f2 = np.clip((lower[None, :] + 1.0 / m - v[1][:, None]) * m, 0.0, 1.0)
        return float(np.sum((f1 @ mass) * f2) / self.U.n)


def _mean_exact(A, points):
    return sum((A._exact(a, b) for a, b in points), Fraction(0)) / len(points)


def empirical_biconvex(U, A, exact=True):
    """``<C, A>_n``: the mean of ``A`` over the relative rank points."""
    if exact:
        return _mean_exact(A, U.fractions())
    v = U.values
    return float(np.mean(A(v[0], v[1])))


def _lattice(n, anti):
    d = n + 1
    k = np.arange(1, n + 1)
    return k, (d - k if anti else k), d


def _diagonal_form(A, n, anti, exact):
    if n < 1:
        raise ValueError("n must be positive")
    k, j, d = _lattice(n, anti)
    if exact:
        return _mean_exact(A, [(Fraction(int(a), d), Fraction(int(b), d)) for a, b in zip(k, j)])
    return float(np.mean(A(k / d, j / d)))


def comonotone_form(A, n, exact=True):
    """``<M, A>_n``, the form of a perfectly comonotone sample of size ``n``."""
    return _diagonal_form(A, n, False, exact)


def countermonotone_form(A, n, exact=True):
    """``<W, A>_n``, the form of a perfectly countermonotone sample of size ``n``."""
    return _diagonal_form(A, n, True, exact)


def minimal_sample_size(A, n_max=10_000):
    """Smallest ``n >= 2`` for which ``A`` gives ``(1/(n+1), n/(n+1)]^2`` positive mass.

    The mass criterion (threshold ``1e-12``) is cross-checked against the
    equivalent exact condition ``<M, A>_n > 1/4``.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    for n in range(2, n_max + 1):
        lo, hi = 1.0 / (n + 1), n / (n + 1.0)
        positive = rect_mass(A, lo, hi, lo, hi) > POSITIVE_MASS
        above = comonotone_form(A, n) > QUARTER
        if positive != above:
            raise ArithmeticError(
                f"mass criterion ({positive}) and form criterion ({above}) disagree at n = {n}"
            )
        if positive:
            return n
    raise SampleSizeNotFound(n_max)


@dataclass(frozen=True)
class EstimateReport:
    n: int
    generator: str
    c_form: object
    m_form: object
    w_form: object
    kappa_hat: object
    n_A: int
    valid: bool = True

    def to_dict(self):
        out = asdict(self)
        for key in ("c_form", "m_form", "w_form", "kappa_hat"):
            out[key] = float(out[key])
        return out


def _cached_form(g, kind, n, exact):
    key = (kind, n, exact)
    if key not in g._cache:
        fn = comonotone_form if kind == "M" else countermonotone_form
        g._cache[key] = fn(g.copula, n, exact)
    return g._cache[key]


def _lattice_table(A, n):
    """``A`` on the lattice ``{1..n}^2 / (n + 1)`` as integers over a common denominator."""
    d = n + 1
    values = [[A._exact(Fraction(i, d), Fraction(j, d)) for j in range(1, d)] for i in range(1, d)]
    denom = math.lcm(*(v.denominator for row in values for v in row))
    table = np.array([[v.numerator * (denom // v.denominator) for v in row] for row in values], dtype=object)
    return table, denom


def _c_form(U, g, exact):
    if not exact or U.n > TABLE_MAX_N:
        return empirical_biconvex(U, g.copula, exact)
    key = ("table", U.n)
    if key not in g._cache:
        g._cache[key] = _lattice_table(g.copula, U.n)
    table, denom = g._cache[key]
    return Fraction(int(table[U.ranks[0] - 1, U.ranks[1] - 1].sum()), denom * U.n)


def estimate_from_ranks(U, g, exact=True):
    """Estimate ``kappa_A`` from a relative rank matrix."""
    n = U.n
    if n < g.n_A:
        raise SampleTooSmall(n, g.n_A)
    c_form = _c_form(U, g, exact)
    m_form = _cached_form(g, "M", n, exact)
    w_form = _cached_form(g, "W", n, exact)
    quarter = QUARTER if exact else 0.25
    if not m_form > quarter:
        raise SampleTooSmall(n, g.n_A)
    kappa_hat = (c_form - quarter) / (m_form - quarter)
    return EstimateReport(n, g.name, c_form, m_form, w_form, kappa_hat, g.n_A)


def estimate(sample, g, exact=True):
    """Rank the sample and estimate ``kappa_A``; see ``estimate_from_ranks``."""
    return estimate_from_ranks(relative_ranks(sample), g, exact)


def spearman_sample_form(U):
    """``1 - 6 sum (R1 - R2)^2 / (n (n^2 - 1))`` as a ``Fraction``."""
    n = U.n
    d2 = int(np.sum((U.ranks[0] - U.ranks[1]) ** 2))
    return 1 - Fraction(6 * d2, n * (n * n - 1))


def gini_rank_form(U):
    """Gini's gamma from absolute ranks, with the ``n + 1`` offset."""
    n = U.n
    r1, r2 = U.ranks
    total = int(np.sum(np.abs(r1 + r2 - (n + 1)))) - int(np.sum(np.abs(r1 - r2)))
    return Fraction(total, (n * n) // 2)


def gini_rank_form_as_printed(U):
    """The rank form with the offset ``1`` in place of ``n + 1``; kept for comparison only."""
    n = U.n
    r1, r2 = U.ranks
    total = int(np.sum(np.abs(r1 + r2 - 1))) - int(np.sum(np.abs(r1 - r2)))
    return Fraction(total, (n * n) // 2)


def gini_sample_form(U):
    """Gini's gamma from relative ranks, checked against ``gini_rank_form``."""
    n = U.n
    if n < 2:
        raise ValueError("n must be at least 2")
    pts = U.fractions()
    mins = sum((min(a, b) for a, b in pts), Fraction(0))
    maxs = sum((max(a + b - 1, Fraction(0)) for a, b in pts), Fraction(0))
    value = Fraction(n + 1, (n * n) // 2) * (2 * mins + 2 * maxs - n)
    rank_value = gini_rank_form(U)
    if value != rank_value:
        raise ArithmeticError(f"relative-rank form {value} differs from rank form {rank_value}")
    return value


def rearrange_toward_comonotone(U):
    """Swap steps turning ``U`` into the comonotone configuration.

    Step ``p`` fixes the level ``t = n + 1 - p``: the column whose second rank
    is ``t`` receives ``(t, t)`` and the column whose first rank is ``t``
    receives the leftover pair. Returns the ``n + 1`` configurations visited,
    starting with ``U``. For any copula the mean of its values over the
    configuration never decreases along the way.
    """
    ranks = U.ranks.copy()
    n = U.n
    trajectory = [U]
    for p in range(1, n + 1):
        t = n + 1 - p
        (l,) = np.flatnonzero(ranks[1] == t)
        i = ranks[0, l]
        if i != t:
            (m,) = np.flatnonzero(ranks[0] == t)
            j = ranks[1, m]
            ranks[:, l] = (t, t)
            ranks[:, m] = (i, j)
        trajectory.append(RelativeRankMatrix(ranks.copy()))
    return trajectory


def rearrange_toward_countermonotone(U):
    """Mirror of ``rearrange_toward_comonotone`` through the first-coordinate reflection."""
    return [V.reflect_first() for V in rearrange_toward_comonotone(U.reflect_first())]


class ConcordanceEstimator(BaseEstimator):
    """Estimate a copula-generated measure of concordance from bivariate data.

    Parameters
    ----------
    generator : str or ConcordanceGenerator, default="spearman"
        ``"spearman"``, ``"gini"``, ``"eq:<q>"``, a path to a copula
        specification file, or a prebuilt generator.
    exact : bool, default=True
        Compute the forms in rational arithmetic.

    Attributes
    ----------
    kappa_ : float
        The estimate.
    report_ : EstimateReport
    ranks_ : RelativeRankMatrix
    n_A_ : int
    """

    def __init__(self, generator="spearman", exact=True):
        self.generator = generator
        self.exact = exact

    def fit(self, X, y=None):
        from .specs import resolve_generator

        X = check_bivariate(X)
        self.n_features_in_ = X.shape[1]
        g = resolve_generator(self.generator)
        self.ranks_ = relative_ranks(Sample(X.T))
        self.report_ = estimate_from_ranks(self.ranks_, g, self.exact)
        self.n_A_ = self.report_.n_A
        self.kappa_ = float(self.report_.kappa_hat)
        return self

    def score(self, X=None, y=None):
        """The fitted estimate; ``X`` is ignored."""
        check_is_fitted(self, "kappa_")
        return self.kappa_
