"""Cross-checked numeric routes for the heat-operator moments."""

import math
from fractions import Fraction

import numpy as np
import pytest

from sphereheat.heatop import (
    MomentResult,
    SeriesToleranceError,
    heat_apply_matexp,
    heat_apply_series,
    heat_moment,
    heat_moment_monomial,
)
from sphereheat.operators import (
    OperatorMatrix,
    SphereConfig,
    build_D,
    build_sphere_laplacian,
)
from sphereheat.polyalg import BasisIndexer, Polynomial


def x1sq_closed_form(n: int, t: float) -> float:
    """By hand from the eigen-pairs x^2 - 1 and x: 1 + (N-1)e^-t - N e^(-t(1-1/N))."""
    return 1.0 + (n - 1) * math.exp(-t) - n * math.exp(-t * (1.0 - 1.0 / n))


# ----------------------------------------------------------------------
# series route
# ----------------------------------------------------------------------


def test_series_identity_at_zero_time():
    d_op = build_D(6, 4)
    f = Polynomial(1, {(4,): Fraction(2), (1,): Fraction(-3)})
    assert heat_apply_series(d_op, 0.0, f) == f


def test_series_on_eigenvector_of_d():
    n, t = 9, 0.7
    d_op = build_D(n, 3)
    out = heat_apply_series(d_op, t, Polynomial.variable(1, 0), tol=1e-14)
    expect = math.exp(0.5 * t * (-1.0 + 1.0 / n))
    assert out.coefficient((1,)) == pytest.approx(expect, abs=1e-13)


def test_series_constant_is_fixed():
    cfg = SphereConfig(N=8, t=1.3, k=2, ell=3)
    lap = build_sphere_laplacian(cfg)
    one = Polynomial.constant(2, Fraction(1))
    assert heat_apply_series(lap, cfg.t, one) == one.map_coefficients(float)


def test_series_unreachable_tolerance_raises():
    d_op = build_D(4, 8)
    with pytest.raises(SeriesToleranceError):
        heat_apply_series(d_op, 2.0, Polynomial.monomial((8,)), tol=1e-12, max_terms=3)


def test_series_agrees_with_matexp_on_all_basis_monomials():
    cfg = SphereConfig(N=10, t=1.0, k=2, ell=4)
    lap = build_sphere_laplacian(cfg)
    exp_mat = heat_apply_matexp(lap, cfg.t)
    idx = lap.indexer
    worst = 0.0
    for j, alpha in enumerate(idx):
        evolved = heat_apply_series(lap, cfg.t, Polynomial.monomial(alpha), tol=1e-13)
        col = np.array([float(c) for c in idx.to_vector(evolved)])
        worst = max(worst, float(np.max(np.abs(col - exp_mat[:, j]))))
    assert worst <= 1e-10


# ----------------------------------------------------------------------
# matexp route
# ----------------------------------------------------------------------


def test_matexp_of_zero_operator_is_identity():
    idx = BasisIndexer(2, 2)
    zero = OperatorMatrix(
        [[Fraction(0)] * idx.dimension for _ in range(idx.dimension)], idx, "0", (None, 2, 2)
    )
    assert np.allclose(heat_apply_matexp(zero, 1.7), np.eye(idx.dimension), atol=1e-15)


def test_matexp_diagonal_action_on_eigenvector():
    n, t = 12, 0.9
    d_op = build_D(n, 2)
    exp_mat = heat_apply_matexp(d_op, t)
    col = exp_mat[:, d_op.indexer.index((1,))]
    expect = math.exp(0.5 * t * (-1.0 + 1.0 / n))
    assert col[d_op.indexer.index((1,))] == pytest.approx(expect, rel=1e-13)
    assert np.max(np.abs(np.delete(col, d_op.indexer.index((1,))))) <= 1e-15


def test_matexp_extended_precision_matches_double():
    d_op = build_D(8, 4)
    a = heat_apply_matexp(d_op, 1.0)
    b = heat_apply_matexp(d_op, 1.0, precision="extended")
    worst = max(
        abs(a[i, j] - float(b[i, j]))
        for i in range(d_op.dimension)
        for j in range(d_op.dimension)
    )
    assert worst <= 1e-12


# ----------------------------------------------------------------------
# the moment pipeline
# ----------------------------------------------------------------------


@pytest.mark.parametrize("n", [4, 16, 64])
@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_first_moment_vanishes(n, t):
    cfg = SphereConfig(N=n, t=t, k=1, ell=1)
    assert abs(heat_moment_monomial(cfg, (1,)).value) <= 1e-12


@pytest.mark.parametrize("route", ["matexp", "series"])
def test_second_moment_of_rest_variable_is_n_free(route):
    for n in (4, 16):
        for t in (0.5, 2.0):
            cfg = SphereConfig(N=n, t=t, k=2, ell=2)
            res = heat_moment_monomial(cfg, (0, 2), route=route)
            assert res.value == pytest.approx(-math.expm1(-t), abs=1e-12)


@pytest.mark.parametrize("route", ["matexp", "series"])
def test_first_variable_second_moment_closed_form(route):
    for n in (4, 16, 64):
        for t in (0.5, 1.0, 2.0):
            cfg = SphereConfig(N=n, t=t, k=1, ell=2)
            res = heat_moment_monomial(cfg, (2,), route=route)
            assert res.value == pytest.approx(x1sq_closed_form(n, t), abs=1e-11)


def test_rest_first_moment_vanishes():
    cfg = SphereConfig(N=8, t=1.0, k=2, ell=1)
    assert heat_moment_monomial(cfg, (0, 1)).value == 0.0


def test_normalization():
    for n in (4, 32):
        for t in (0.5, 2.0):
            for k in (1, 3):
                cfg = SphereConfig(N=n, t=t, k=k, ell=3)
                one = Polynomial.constant(k, Fraction(1))
                assert heat_moment(cfg, one).value == pytest.approx(1.0, abs=1e-12)


def test_odd_rest_exponent_moments_vanish():
    cfg = SphereConfig(N=8, t=1.0, k=3, ell=5)
    for alpha in [(0, 1, 0), (0, 0, 3), (1, 1, 0), (2, 1, 2), (0, 3, 1), (1, 0, 1)]:
        assert abs(heat_moment_monomial(cfg, alpha).value) <= 1e-12


def all_alphas(k, deg):
    if k == 1:
        return [(n,) for n in range(deg + 1)]
    return [(n,) + rest for n in range(deg + 1) for rest in all_alphas(k - 1, deg - n)]


def test_route_agreement_all_monomials_to_degree_six():
    worst = 0.0
    for k in (1, 2, 3):
        for n in (8, 16, 32):
            for t in (0.5, 1.0, 2.0):
                cfg = SphereConfig(N=n, t=t, k=k, ell=6)
                for alpha in all_alphas(k, 6):
                    a = heat_moment_monomial(cfg, alpha, route="matexp")
                    b = heat_moment_monomial(cfg, alpha, route="series", tol=1e-12)
                    assert abs(a.value - b.value) <= a.error_bound + b.error_bound
                    worst = max(worst, abs(a.value - b.value))
    assert worst <= 1e-9


def test_mixed_term_influence_shrinks_like_one_over_n():
    # on x1^2 x2^2 the full-vs-decoupled gap halves when N doubles
    for t in (0.5, 1.0):
        gaps = {}
        for n in (8, 16, 32, 64):
            cfg = SphereConfig(N=n, t=t, k=2, ell=4)
            full = heat_moment_monomial(cfg, (2, 2)).value
            split = heat_moment_monomial(cfg, (2, 2), include_mixed_term=False).value
            gaps[n] = abs(full - split)
        for n in (8, 16, 32):
            assert 1.6 <= gaps[n] / gaps[2 * n] <= 2.4


def test_mixed_term_irrelevant_for_odd_parity():
    # x1 x2 is odd in x2, so both routes return zero identically
    for n in (8, 32):
        cfg = SphereConfig(N=n, t=1.0, k=2, ell=2)
        full = heat_moment_monomial(cfg, (1, 1)).value
        split = heat_moment_monomial(cfg, (1, 1), include_mixed_term=False).value
        assert abs(full) <= 1e-14 and abs(split) <= 1e-14


def test_small_time_limit_is_point_evaluation():
    # m(0+, N) -> sqrt(N), so every coordinate of the base point goes to zero
    cfg = SphereConfig(N=8, t=1e-8, k=2, ell=4)
    f = Polynomial(2, {(2, 0): Fraction(3), (0, 0): Fraction(5), (1, 1): Fraction(2)})
    assert heat_moment(cfg, f).value == pytest.approx(5.0, abs=1e-6)


def test_moment_result_provenance_fields():
    cfg = SphereConfig(N=8, t=1.0, k=2, ell=2)
    res = heat_moment_monomial(cfg, (2, 0))
    assert res.route == "matexp"
    assert res.monomial == (2, 0)
    assert res.error_bound >= 0
    assert res.config == cfg
    with pytest.raises(ValueError):
        MomentResult(1.0, "matexp", -1.0, cfg, None)


def test_extended_precision_matches_double_when_well_conditioned():
    cfg = SphereConfig(N=8, t=1.0, k=1, ell=4)
    a = heat_moment_monomial(cfg, (2,))
    b = heat_moment_monomial(cfg, (2,), precision="extended")
    assert a.value == pytest.approx(b.value, abs=1e-12)


def test_degree_and_varcount_validation():
    cfg = SphereConfig(N=8, t=1.0, k=2, ell=2)
    with pytest.raises(ValueError):
        heat_moment(cfg, Polynomial.monomial((3, 0)))
    with pytest.raises(ValueError):
        heat_moment(cfg, Polynomial.monomial((1,)))
    with pytest.raises(ValueError):
        heat_moment(cfg, Polynomial.monomial((1, 0)), route="bogus")
    with pytest.raises(ValueError):
        heat_moment(cfg, Polynomial.monomial((1, 0)), route="series",
                    precision="extended")
    with pytest.raises(ValueError):
        heat_moment(cfg, Polynomial.monomial((1, 0)), precision="single")
