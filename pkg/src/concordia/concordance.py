"""Measures of concordance generated by a Gamma-invariant copula.

For a generator ``A`` the measure is

    kappa_A[C] = ([C, A] - 1/4) / ([M, A] - 1/4),

which is Spearman's rho for ``A = Pi`` and Gini's gamma for
``A = (M + W) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from ._validation import check_probability
from .biconvex import biconvex_form
from .copulas import PI, M, Mixture, W
from .group import GAMMA, GAMMA_NU, NU1, PI_SWAP, apply_transform, invariance_defect

__all__ = [
    "NotGammaInvariant",
    "ConcordanceGenerator",
    "AxiomReport",
    "make_generator",
    "kappa",
    "gini_copula",
    "interpolation_copula",
    "spearman",
    "gini",
    "interpolated_generator",
    "interpolation_weights",
    "check_moc_axioms",
]


class NotGammaInvariant(ValueError):
    """The candidate generator is not invariant under the full group."""

    def __init__(self, deviation, element, point):
        super().__init__(
            f"copula is not Gamma-invariant: |g(A) - A| = {deviation:.3e} for g = {element.name} at {point}"
        )
        self.deviation = deviation
        self.element = element
        self.point = point


@dataclass(frozen=True)
class ConcordanceGenerator:
    """A verified generator with its cached normalising constant ``[M, A]``."""

    copula: object
    name: str
    m_form: float
    invariance_checked: bool = True
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n_A(self):
        """Smallest sample size for which the plug-in estimator is defined."""
        if "n_A" not in self._cache:
            from .estimator import minimal_sample_size

            self._cache["n_A"] = minimal_sample_size(self.copula)
        return self._cache["n_A"]


def make_generator(A, name=None, lattice=101, tol=1e-10):
    """Verify that ``A`` is Gamma-invariant and precompute ``[M, A]``.

    Raises
    ------
    NotGammaInvariant
        With the largest deviation found and the witnessing element and point.
    """
    deviation, g, point = invariance_defect(A, GAMMA, lattice)
    if deviation > tol:
        raise NotGammaInvariant(deviation, g, point)
    m_form = biconvex_form(M, A).value
    if not m_form > 0.25:
        raise ArithmeticError(f"[M, A] = {m_form!r} is not above 1/4")
    return ConcordanceGenerator(A, name or repr(A), m_form)


def kappa(g, C, m=16):
    """Population value ``kappa_A[C]``."""
    return (biconvex_form(C, g.copula, m).value - 0.25) / (g.m_form - 0.25)


def gini_copula():
    """``M`` symmetrised over the reflections, ``(M + W) / 2``."""
    return Mixture([(Fraction(1, 2), M), (Fraction(1, 2), W)])


def interpolation_copula(q):
    """``(1 - q) Pi + q (M + W) / 2`` for ``q`` in ``[0, 1]``."""
    q = check_probability(q)
    if q == 0:
        return PI
    if q == 1:
        return gini_copula()
    return Mixture([(1 - q, PI), (q, gini_copula())])


@lru_cache(maxsize=None)
def spearman():
    return make_generator(PI, "spearman")


@lru_cache(maxsize=None)
def gini():
    return make_generator(gini_copula(), "gini")


def interpolated_generator(q):
    """Generator of the interpolation between Spearman's rho (q=0) and Gini's gamma (q=1)."""
    q = check_probability(q)
    if q == 0:
        return spearman()
    if q == 1:
        return gini()
    return make_generator(interpolation_copula(q), f"eq:{q}")


def interpolation_weights(q):
    """Weights ``(2(1-q)/(2+q), 3q/(2+q))`` of Spearman's rho and Gini's gamma."""
    q = check_probability(q)
    return 2 * (1 - q) / (2 + q), 3 * q / (2 + q)


@dataclass
class AxiomReport:
    generator: str
    tol: float
    kappa_M: float
    swap: float
    reflection: float
    reflection_sum: float
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures


def check_moc_axioms(g, corpus, tol=1e-8):
    """Check the bivariate measure-of-concordance axioms for ``kappa_A``.

    Worst deviations over the corpus are reported for ``kappa[M] = 1``,
    ``kappa[pi(C)] = kappa[C]``, ``kappa[nu1(C)] = -kappa[C]`` and
    ``sum over the reflections of kappa[nu(C)] = 0``.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValueError("corpus must not be empty")
    report = AxiomReport(g.name, tol, abs(kappa(g, M) - 1.0), 0.0, 0.0, 0.0)
    if report.kappa_M > tol:
        report.failures.append(("kappa_M", M, report.kappa_M))
    for C in corpus:
        k = kappa(g, C)
        dev_swap = abs(kappa(g, apply_transform(PI_SWAP, C)) - k)
        dev_refl = abs(kappa(g, apply_transform(NU1, C)) + k)
        dev_sum = abs(sum(kappa(g, apply_transform(nu, C)) for nu in GAMMA_NU))
        for label, dev in (("swap", dev_swap), ("reflection", dev_refl), ("reflection_sum", dev_sum)):
            setattr(report, label, max(getattr(report, label), dev))
            if dev > tol:
                report.failures.append((label, C, dev))
    return report
