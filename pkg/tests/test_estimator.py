import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from concordia import (
    E, PI, ConcordanceEstimator, RelativeRankMatrix, SampleTooSmall, estimate, gini, gini_copula,
    interpolated_generator, make_generator, minimal_sample_size, relative_ranks, spearman,
)
from concordia.estimator import (
    EmpiricalCopula, SampleSizeNotFound, comonotone_form, countermonotone_form, empirical_biconvex,
    estimate_from_ranks, gini_rank_form, gini_rank_form_as_printed, gini_sample_form,
    rearrange_toward_comonotone, rearrange_toward_countermonotone, spearman_sample_form,
)
from concordia.copulas import rect_mass
from concordia.group import GAMMA, symmetrize

from .oracles import random_grid, random_ranks

GINI = gini_copula()


def ranks_strategy(max_n=20, min_n=2):
    return st.integers(min_n, max_n).flatmap(
        lambda n: st.tuples(st.permutations(range(1, n + 1)), st.permutations(range(1, n + 1)))
    ).map(lambda rows: RelativeRankMatrix(np.array(rows)))


def test_forms_small_examples():
    assert comonotone_form(PI, 3) == Fraction(7, 24)
    assert countermonotone_form(PI, 3) == Fraction(5, 24)
    assert comonotone_form(E, 3) == Fraction(1, 4)
    assert comonotone_form(GINI, 4) == Fraction(7, 20)
    assert float(comonotone_form(PI, 3, exact=False)) == pytest.approx(7 / 24)


def test_comonotone_form_matches_direct_mean():
    for n in range(1, 12):
        direct = sum(Fraction(k, n + 1) ** 2 for k in range(1, n + 1)) / n
        assert comonotone_form(PI, n) == direct == Fraction(2 * n + 1, 6 * (n + 1))


def test_minimal_sample_sizes():
    assert minimal_sample_size(PI) == 2
    assert minimal_sample_size(GINI) == 2
    assert minimal_sample_size(E) == 4
    with pytest.raises(SampleSizeNotFound):
        minimal_sample_size(E, n_max=3)


def test_E_estimator_undefined_below_n_E():
    g = make_generator(E, "E")
    for n in (2, 3):
        U = RelativeRankMatrix(np.stack([np.arange(1, n + 1)] * 2))
        with pytest.raises(SampleTooSmall):
            estimate_from_ranks(U, g)
    U = RelativeRankMatrix(np.stack([np.arange(1, 5)] * 2))
    assert estimate_from_ranks(U, g).kappa_hat == 1


@settings(max_examples=200)
@given(ranks_strategy())
def test_sandwich_and_sum(U):
    for A in (PI, GINI, E):
        c = empirical_biconvex(U, A)
        lo, hi = countermonotone_form(A, U.n), comonotone_form(A, U.n)
        assert lo <= c <= hi
        assert lo + hi == Fraction(1, 2)


@settings(max_examples=100)
@given(ranks_strategy(max_n=30))
def test_spearman_identity(U):
    assert estimate_from_ranks(U, spearman()).kappa_hat == spearman_sample_form(U)


def test_gini_identity_exhaustive_small():
    for n in range(2, 6):
        base = list(range(1, n + 1))
        for p in itertools.permutations(base):
            U = RelativeRankMatrix(np.array([base, list(p)]))
            assert estimate_from_ranks(U, gini()).kappa_hat == gini_sample_form(U) == gini_rank_form(U)


def test_printed_offset_disagrees():
    U = RelativeRankMatrix(np.array([[1, 2, 3], [1, 2, 3]]))
    assert gini_rank_form(U) == 1
    assert gini_rank_form_as_printed(U) != 1


@settings(max_examples=100)
@given(ranks_strategy(max_n=20))
def test_estimator_symmetries(U):
    for g in (spearman(), gini()):
        k = estimate_from_ranks(U, g).kappa_hat
        assert estimate_from_ranks(U.swap_rows(), g).kappa_hat == k
        assert estimate_from_ranks(U.reflect_first(), g).kappa_hat == -k
        assert -1 <= k <= 1


@pytest.mark.parametrize("name", ["spearman", "gini", "E"])
def test_bounds_attained(name):
    g = make_generator(E, "E") if name == "E" else {"spearman": spearman(), "gini": gini()}[name]
    for n in range(g.n_A, 15):
        up = RelativeRankMatrix(np.stack([np.arange(1, n + 1)] * 2))
        down = up.reflect_first()
        assert estimate_from_ranks(up, g).kappa_hat == 1
        assert estimate_from_ranks(down, g).kappa_hat == -1


def test_rearrangement_reaches_comonotone(rng):
    for _ in range(50):
        n = int(rng.integers(2, 12))
        U = RelativeRankMatrix(random_ranks(n, rng))
        path = rearrange_toward_comonotone(U)
        assert len(path) == n + 1
        assert np.array_equal(path[-1].ranks[0], path[-1].ranks[1])
        for V in path:
            RelativeRankMatrix(V.ranks)
        down = rearrange_toward_countermonotone(U)
        assert np.array_equal(down[-1].ranks[0], n + 1 - down[-1].ranks[1])


def test_rearrangement_monotone(rng):
    for _ in range(50):
        U = RelativeRankMatrix(random_ranks(int(rng.integers(2, 10)), rng))
        for A in (PI, GINI, E):
            up = [empirical_biconvex(V, A) for V in rearrange_toward_comonotone(U)]
            down = [empirical_biconvex(V, A) for V in rearrange_toward_countermonotone(U)]
            assert all(a <= b for a, b in zip(up, up[1:]))
            assert all(a >= b for a, b in zip(down, down[1:]))


def test_empirical_copula_integral_matches_survival_mean(rng):
    # the integral of the step function against A is the mean A-survival mass above the points
    for A in (PI, random_grid(4, rng), random_grid(6, rng)):
        for _ in range(5):
            U = RelativeRankMatrix(random_ranks(9, rng))
            survival = [rect_mass(A, a, 1.0, b, 1.0) for a, b in U.values.T]
            assert EmpiricalCopula(U).integrate_against(A, 12) == pytest.approx(np.mean(survival), abs=1e-12)


def test_empirical_copula_integral_for_invariant_generator(rng):
    # with a Gamma-invariant A the survival mass is A at the reflected point
    A = symmetrize(random_grid(4, rng), GAMMA)
    U = RelativeRankMatrix(random_ranks(11, rng))
    reflected = RelativeRankMatrix(U.denominator - U.ranks)
    assert EmpiricalCopula(U).integrate_against(A, 8) == pytest.approx(float(empirical_biconvex(reflected, A)), abs=1e-12)


def test_empirical_copula_steps():
    U = RelativeRankMatrix(np.array([[1, 2], [2, 1]]))
    C = EmpiricalCopula(U)
    assert C(1 / 3, 2 / 3) == 0.5 and C(1.0, 1.0) == 1.0 and C(0.3, 0.3) == 0.0


def test_estimate_report_from_sample():
    rng = np.random.default_rng(3)
    x = rng.normal(size=200)
    rep = estimate(np.stack([x, x + 0.1 * rng.normal(size=200)]), spearman())
    assert 0.9 < rep.kappa_hat <= 1
    d = rep.to_dict()
    assert d["n"] == 200 and d["generator"] == "spearman" and isinstance(d["kappa_hat"], float)


def test_float_path_agrees_with_exact(rng):
    U = RelativeRankMatrix(random_ranks(40, rng))
    for g in (spearman(), gini(), interpolated_generator(Fraction(1, 4))):
        exact = estimate_from_ranks(U, g, exact=True).kappa_hat
        assert estimate_from_ranks(U, g, exact=False).kappa_hat == pytest.approx(float(exact), abs=1e-12)


def test_sklearn_estimator():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(100, 2))
    est = ConcordanceEstimator(generator="gini")
    assert est.get_params() == {"generator": "gini", "exact": True}
    est.fit(X)
    U = relative_ranks(X.T)
    assert est.kappa_ == float(gini_rank_form(U)) == est.score()
    assert est.n_A_ == 2 and est.n_features_in_ == 2
    assert clone(est).get_params() == est.get_params()
    with pytest.raises(ValueError):
        ConcordanceEstimator().fit(np.ones((5, 3)))
    with pytest.raises(ValueError):
        ConcordanceEstimator().fit([[0.0, np.nan], [1.0, 2.0]])


def test_sklearn_estimator_small_sample():
    with pytest.raises(SampleTooSmall):
        ConcordanceEstimator(generator=make_generator(E, "E")).fit([[0, 0], [1, 1], [2, 2]])


@settings(max_examples=60)
@given(ranks_strategy(max_n=70))
def test_lattice_table_matches_direct_form(U):
    g = interpolated_generator(Fraction(2, 7))
    direct = empirical_biconvex(U, g.copula)
    assert estimate_from_ranks(U, g).c_form == direct
