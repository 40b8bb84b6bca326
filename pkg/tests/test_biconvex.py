from fractions import Fraction

import numpy as np
import pytest

from concordia import E, M, PI, W, Mixture, biconvex_form, gini_copula
from concordia.biconvex import KNOWN_VALUES, BiconvexConvergenceError, biconvex_oracle
from concordia.copulas import Copula
from concordia.group import GAMMA_NU, GAMMA_PI_TAU, apply_transform, symmetrize

from .oracles import random_grid

GINI = gini_copula()


def quad_against(C, D, k=4000):
    """Midpoint-rule oracles for the three special second arguments."""
    t = (np.arange(k) + 0.5) / k
    if D is M:
        return float(np.mean(C(t, t)))
    if D is W:
        return float(np.mean(C(t, 1 - t)))
    if D is PI:
        return float(np.mean(C(t[:, None], t[None, :])))
    raise ValueError(D)


def form(C, D):
    return biconvex_form(C, D).value


@pytest.mark.parametrize(
    "C, D, expected",
    [(M, M, Fraction(1, 2)), (PI, PI, Fraction(1, 4)), (M, PI, Fraction(1, 3)), (M, GINI, Fraction(3, 8)),
     (W, W, 0), (W, M, Fraction(1, 4)), (E, E, Fraction(1, 4)), (E, PI, Fraction(1, 4)), (M, E, Fraction(5, 16)),
     (W, PI, Fraction(1, 6)), (PI, E, Fraction(1, 4))],
)
def test_closed_form_values(C, D, expected):
    assert form(C, D) == pytest.approx(float(expected), abs=1e-12)


def test_known_values_table():
    pairs = {"[M,M]": (M, M), "[Pi,Pi]": (PI, PI), "[M,Pi]": (M, PI), "[M,M_GammaNu]": (M, GINI)}
    assert set(KNOWN_VALUES) == set(pairs)
    for key, (C, D) in pairs.items():
        assert form(C, D) == pytest.approx(float(KNOWN_VALUES[key]), abs=1e-12)


def test_exact_grid_path_for_grids(rng):
    G, H = random_grid(4, rng), random_grid(6, rng)
    res = biconvex_form(G, H)
    assert res.method == "exact-grid" and res.resolution_used == 12
    assert biconvex_form(PI, PI).method == "exact-grid"


@pytest.mark.parametrize("D", [M, W, PI], ids=["M", "W", "Pi"])
def test_against_quadrature(D, rng):
    for C in (E, random_grid(5, rng), Mixture([(0.4, E), (0.6, W)])):
        assert form(C, D) == pytest.approx(quad_against(C, D), abs=1e-6)


def test_against_monte_carlo(rng):
    for C in (M, E, random_grid(3, rng)):
        D = random_grid(8, rng)
        mean, se = biconvex_oracle(C, D, n_samples=200_000, seed=7)
        assert abs(form(C, D) - mean) < 4 * se + 1e-12


def test_symmetric(rng, corpus):
    for C in corpus:
        for D in corpus[:5]:
            assert form(C, D) == pytest.approx(form(D, C), abs=1e-10)


def test_bilinear(rng):
    G, H = random_grid(4, rng), random_grid(4, rng)
    for w in (0.0, 0.3, 0.8):
        mix = Mixture([(w, G), (1 - w, E)])
        assert form(mix, H) == pytest.approx(w * form(G, H) + (1 - w) * form(E, H), abs=1e-10)
        assert form(M, mix) == pytest.approx(w * form(M, G) + (1 - w) * form(M, E), abs=1e-10)


def test_monotone_in_first_argument(rng):
    # W <= C <= M pointwise, so the form is ordered against any D
    for D in (PI, E, random_grid(6, rng)):
        for C in (PI, E, random_grid(5, rng)):
            assert form(W, D) - 1e-12 <= form(C, D) <= form(M, D) + 1e-12


def test_range(corpus):
    for C in corpus:
        for D in corpus:
            assert -1e-12 <= form(C, D) <= 0.5 + 1e-12


def test_measure_preserving_elements(rng):
    G, H = random_grid(5, rng), random_grid(7, rng)
    for g in GAMMA_PI_TAU:
        assert form(apply_transform(g, G), apply_transform(g, H)) == pytest.approx(form(G, H), abs=1e-12)


def test_reflection_invariant_pairs_give_quarter(rng):
    A = symmetrize(random_grid(8, rng), GAMMA_NU)
    B = symmetrize(random_grid(6, rng), GAMMA_NU)
    for C in (A, E, PI, GINI):
        for D in (B, E, PI, GINI):
            assert form(C, D) == pytest.approx(0.25, abs=1e-12)


def test_reflection_sum(rng):
    G, H = random_grid(6, rng), symmetrize(random_grid(4, rng), GAMMA_NU)
    total = sum(form(apply_transform(nu, G), H) for nu in GAMMA_NU)
    assert total == pytest.approx(1.0, abs=1e-12)


class _FGM(Copula):
    """Farlie-Gumbel-Morgenstern copula with theta = 1/2 (smooth density)."""

    kind = "fgm"

    def _evaluate(self, a, b):
        return a * b + 0.5 * a * b * (1 - a) * (1 - b)

    def _exact(self, a, b):
        return Fraction(a) * b + Fraction(1, 2) * a * b * (1 - a) * (1 - b)

    def _partials(self, a, b):
        return b + 0.5 * b * (1 - b) * (1 - 2 * a), a + 0.5 * a * (1 - a) * (1 - 2 * b)


def test_smooth_copula_converges():
    # [C, Pi] = 1/4 + theta/36
    res = biconvex_form(_FGM(), PI)
    assert res.value == pytest.approx(0.25 + 0.5 / 36, abs=1e-8)


def test_convergence_error_carries_state(monkeypatch):
    import concordia.biconvex as bc

    monkeypatch.setattr(bc, "CONVERGENCE_TOL", 0.0)
    monkeypatch.setattr(bc, "MAX_RESOLUTION", 64)
    with pytest.raises(BiconvexConvergenceError) as info:
        biconvex_form(E, M)
    assert info.value.resolution == 64
    assert info.value.value == pytest.approx(5 / 16, abs=1e-12)
