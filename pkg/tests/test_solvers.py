import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from finmax.core import AffineFamily, CallableFamily, EvaluationError, MaxProblem, PrimalDualPoint
from finmax.problems import builtin, two_parabolas, abs_value, linear_parabola
from finmax.simplex import in_simplex, project_simplex
from finmax.solvers import (
    GOLDEN,
    SolverConfig,
    agraal_step,
    init_agraal,
    solve,
    subgradient_step,
)

AG = SolverConfig()


def start(p, x0=1.0):
    return PrimalDualPoint.uniform(np.full(p.n, x0), p.N)


def test_config_validation():
    for bad in (dict(kind="newton"), dict(phi_ratio=1.0), dict(phi_ratio=1.7), dict(lambda0=0.0),
                dict(lambda_max=0.0), dict(gamma0=-1.0), dict(max_iters=-1)):
        with pytest.raises(ValueError):
            SolverConfig(**bad)
    SolverConfig(phi_ratio=GOLDEN)


def test_first_step_by_hand():
    # ex32 from x=1, y=(1/2,1/2): values (4, 0), Fx = 0.5*4 + 0.5*0 = 2
    p = two_parabolas()
    s0 = init_agraal(p, start(p), AG)
    s1 = agraal_step(p, s0, AG)
    rho = 1 / 1.5 + 1 / 1.5**2
    lam = rho * 1.0  # zero operator displacement at the start
    assert s1.last_step == pytest.approx(lam)
    assert s1.x[0] == pytest.approx(1.0 - lam * 2.0)
    np.testing.assert_allclose(s1.y, project_simplex([0.5 + lam * 4, 0.5]).point)
    assert s1.theta_prev == pytest.approx(1.5 * lam / 1.0)


def test_zero_operator_is_fixed_point():
    p = MaxProblem(AffineFamily(np.zeros((3, 2)), np.zeros(3)))
    z0 = PrimalDualPoint([0.3, -0.2], [0.2, 0.3, 0.5])
    z, tr = solve(p, z0, AG, max_iters=50)
    np.testing.assert_allclose(z.x, z0.x)
    np.testing.assert_allclose(z.y, z0.y)


@pytest.mark.parametrize("name", ["ex32", "fig1c"])
def test_agraal_converges_on_builtins(name):
    p = builtin(name)
    z, tr = solve(p, start(p), AG, max_iters=5000, certificate_tol=1e-6)
    r = tr.rows[-1]
    assert r.grad_norm + r.gap + r.dual_residual <= 1e-6
    assert abs(z.x[0]) <= 1e-4


def test_agraal_ex32_dual_limit():
    p = two_parabolas()
    z, _ = solve(p, start(p), AG, max_iters=5000, certificate_tol=1e-6)
    np.testing.assert_allclose(z.y, [0.5, 0.5], atol=1e-4)


def test_agraal_fig1a_dual_limit():
    p = abs_value()
    z, _ = solve(p, start(p), AG, max_iters=5000)
    np.testing.assert_allclose(z.y, [0.5, 0.5], atol=1e-4)


def test_fig1c_dual_limit():
    p = linear_parabola()
    z, _ = solve(p, start(p), AG, max_iters=5000, certificate_tol=1e-8)
    np.testing.assert_allclose(z.y, [0.0, 1.0], atol=1e-3)


def test_running_min_gap_decreases():
    p = two_parabolas()
    _, tr = solve(p, start(p), AG, max_iters=2000)
    run = np.minimum.accumulate(tr.column("f") - 1.0)
    assert np.all(np.diff(run) <= 0)
    assert run[-1] <= 1e-6


@settings(max_examples=25)
@given(st.integers(0, 2**31 - 1))
def test_iterates_stay_feasible_and_steps_bounded(seed):
    rng = np.random.default_rng(seed)
    N, n = 8, 3
    p = MaxProblem(AffineFamily(rng.standard_normal((N, n)), rng.standard_normal(N)))
    cfg = SolverConfig(lambda_max=50.0)
    s = init_agraal(p, PrimalDualPoint.uniform(np.zeros(n), N), cfg)
    for _ in range(200):
        s = agraal_step(p, s, cfg)
        assert in_simplex(s.y, 1e-12)
        assert 0 < s.last_step <= 50.0


def test_solve_max_iters_zero():
    p = two_parabolas()
    z0 = start(p)
    z, tr = solve(p, z0, AG, max_iters=0)
    assert len(tr) == 0
    np.testing.assert_array_equal(z.x, z0.x)


def test_log_stride_keeps_final_row():
    p = two_parabolas()
    _, tr = solve(p, start(p), AG, max_iters=25, log_every=10)
    assert [r.k for r in tr.rows] == [10, 20, 25]


def test_keep_x_records_iterates():
    p = two_parabolas()
    z, tr = solve(p, start(p), AG, max_iters=7, log_every=3, keep_x=True)
    assert len(tr.xs) == len(tr.rows)
    np.testing.assert_array_equal(tr.xs[-1], z.x)


def test_traces_are_deterministic():
    p = builtin("planes")
    cfg = SolverConfig(lambda0=None, seed=7)
    a = solve(p, start(p), cfg, max_iters=300)[1].rows
    b = solve(p, start(p), cfg, max_iters=300)[1].rows
    assert a == b


def test_evaluation_error_carries_iteration():
    # finite at x = 1, blows up once x leaves [0.5, 2]
    def val(x):
        return x[0] ** 2 if 0.5 <= x[0] <= 2 else math.inf

    p = MaxProblem(CallableFamily([(val, lambda x: 2 * x)], 1))
    with pytest.raises(EvaluationError) as e:
        solve(p, start(p), AG, max_iters=100)
    assert e.value.iteration == 1 and e.value.index == 0


# ---------------------------------------------------------------------------
# subgradient


def test_subgradient_single_step():
    p = abs_value()
    x1 = subgradient_step(p, np.array([0.5]), 0, SolverConfig(kind="subgradient", gamma0=0.1))
    assert x1[0] == pytest.approx(0.4)


def test_subgradient_stationary_point_unchanged():
    p = two_parabolas()
    p1 = MaxProblem(p.family.restrict([0]))
    x = subgradient_step(p1, np.array([-1.0]), 3, SolverConfig(kind="subgradient"))
    assert x[0] == -1.0


def test_subgradient_converges_on_v_shape():
    p = abs_value()
    cfg = SolverConfig(kind="subgradient")
    z, tr = solve(p, PrimalDualPoint([1.0]), cfg, max_iters=10000, log_every=1000)
    assert abs(z.x[0]) <= 0.05
    assert math.isnan(tr.rows[-1].gap)
