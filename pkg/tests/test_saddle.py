import numpy as np
import pytest
from hypothesis import given, strategies as st

from finmax.core import AffineFamily, CallableFamily, MaxProblem, PrimalDualPoint
from finmax.problems import SADDLE_POINTS, builtin, two_parabolas, abs_value, abs_value_floor, linear_parabola
from finmax.saddle import (
    NotAMinimiserError,
    certificate,
    check_monotone_sample,
    compute_multipliers,
    lipschitz_bound,
    lipschitz_sample,
    phi,
    saddle_operator,
)
from oracles import fd_jacobian


def Z(x, y):
    return PrimalDualPoint(np.atleast_1d(float(x)), np.asarray(y, dtype=float))


def test_phi_examples():
    p = two_parabolas()
    assert phi(p, Z(0, [0.5, 0.5])) == pytest.approx(1.0)
    assert phi(p, Z(-1, [1.0, 0.0])) == pytest.approx(0.0)


@pytest.mark.parametrize("j", [0, 1, 2])
def test_phi_at_vertex_is_subfunction(j):
    p = builtin("planes")
    y = np.eye(3)[j]
    assert phi(p, Z(0.7, y)) == pytest.approx(p.values(np.array([0.7]))[j])


def test_phi_rejects_infeasible_y():
    with pytest.raises(ValueError):
        phi(two_parabolas(), Z(0, [0.6, 0.6]))


def test_operator_examples():
    Fx, Fy = saddle_operator(two_parabolas(), Z(0, [0.5, 0.5]))
    np.testing.assert_allclose(Fx, [0.0])
    np.testing.assert_allclose(Fy, [-1.0, -1.0])
    Fx, Fy = saddle_operator(linear_parabola(), Z(0, [0.0, 1.0]))
    np.testing.assert_allclose(Fx, [0.0])
    np.testing.assert_allclose(Fy, [0.0, 0.0], atol=0)


def test_operator_x_block_matches_finite_differences(rng):
    p = two_parabolas()
    for _ in range(10):
        z = Z(rng.standard_normal(), rng.dirichlet([1, 1]))
        fd = fd_jacobian(lambda x: np.array([z.y @ p.values(x)]), z.x)[0]
        np.testing.assert_allclose(saddle_operator(p, z)[0], fd, rtol=1e-6, atol=1e-8)


def test_certificate_examples():
    p = two_parabolas()
    assert certificate(p, Z(0, [0.5, 0.5])) == (0.0, 0.0, 0.0)
    c = certificate(p, Z(1, [0.5, 0.5]))
    assert c.grad_norm == pytest.approx(2.0) and c.gap == pytest.approx(2.0)
    c = certificate(p, Z(0, [1.0, 0.0]))
    assert c.gap == pytest.approx(0.0) and c.grad_norm == pytest.approx(2.0)


@pytest.mark.parametrize("name", sorted(SADDLE_POINTS))
def test_certificate_vanishes_at_saddle_points(name):
    p = builtin(name)
    for x, y in SADDLE_POINTS[name]:
        assert certificate(p, PrimalDualPoint(x, y)).total <= 1e-12


@given(st.floats(-5, 5), st.integers(0, 10**6))
def test_weak_duality(x, seed):
    # phi(x, y) <= f(x) for every y in the simplex
    p = builtin("planes")
    y = np.random.default_rng(seed).dirichlet(np.ones(3))
    assert phi(p, Z(x, y)) <= p.f(np.array([x])) + 1e-12


# ---------------------------------------------------------------------------
# multipliers


def test_multipliers_fig1a():
    m = compute_multipliers(abs_value(), np.zeros(1))
    np.testing.assert_allclose(m.a_point, [0.5, 0.5], atol=1e-8)
    assert m.is_singleton and m.nondegenerate


def test_multipliers_fig1b():
    m = compute_multipliers(abs_value_floor(), np.zeros(1))
    assert not m.is_singleton and m.nondegenerate
    assert m.strong_support.indices == (0, 1, 2)
    assert m.a_point[0] == pytest.approx(m.a_point[1])


def test_multipliers_fig1c():
    m = compute_multipliers(linear_parabola(), np.zeros(1))
    np.testing.assert_allclose(m.a_point, [0.0, 1.0], atol=1e-8)
    assert m.is_singleton and not m.nondegenerate
    assert m.strong_support.indices == (1,)
    assert m.active_support.indices == (0, 1)


def test_multipliers_reject_non_minimiser():
    with pytest.raises(NotAMinimiserError):
        compute_multipliers(abs_value(), np.array([0.5]))


# ---------------------------------------------------------------------------
# monotonicity and Lipschitz


def test_monotone_ex32():
    assert check_monotone_sample(two_parabolas(), 1000) >= -1e-10


def test_affine_x_block_vanishes():
    p = MaxProblem(AffineFamily([[1.0, 2.0], [-3.0, 0.5], [0.0, 1.0]], [0.0, 1.0, -1.0]))
    rng = np.random.default_rng(0)
    for _ in range(200):
        z, w = (Z(0, rng.dirichlet(np.ones(3))) for _ in range(2))
        z.x, w.x = rng.standard_normal(2), rng.standard_normal(2)
        Fx, Fy = saddle_operator(p, z)
        Gx, Gy = saddle_operator(p, w)
        x_part = (Fx - Gx) @ (z.x - w.x)
        y_part = (Fy - Gy) @ (z.y - w.y)
        assert x_part + y_part == pytest.approx(0.0, abs=1e-10)


def test_nonconvex_subfunction_is_detected():
    fam = CallableFamily([(lambda x: -x[0] ** 2, lambda x: -2 * x), (lambda x: 0.0 * x[0], lambda x: 0 * x)], 1)
    assert check_monotone_sample(MaxProblem(fam), 2000, radius=3.0) < 0


@pytest.mark.parametrize("L,M,N,expected", [(0, 0, 4, 0.0), (1, 1, 1, np.sqrt(3)), (3, 2, 2, 5.0)])
def test_lipschitz_bound(L, M, N, expected):
    assert lipschitz_bound(L, M, N) == pytest.approx(expected)


@pytest.mark.parametrize("name", ["ex32", "fig1b", "fig1c"])
def test_sampled_ratios_below_bound(name):
    s = lipschitz_sample(builtin(name), 500, radius=2.0)
    assert np.all(s.ratios <= s.bound * (1 + 1e-12))
