import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qacg.linsolve import (
    CgBreakdown,
    CgConfig,
    cg_iteration_bound,
    cg_solve,
    dense_solve_oracle,
)
from qacg.operators import Grid1D, PoissonOperator, condition_number_zero_mean


def random_spd(n, seed, cond=100.0):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    w = np.geomspace(1.0, cond, n)
    return (Q * w) @ Q.T


class CountingOperator:
    def __init__(self, A):
        self.A = A
        self.calls = 0

    def __call__(self, v):
        self.calls += 1
        return self.A @ v


def test_identity_one_iteration():
    b = np.array([1.0, -2.0, 3.0])
    rep = cg_solve(lambda v: v, b)
    assert rep.iterations == 1
    np.testing.assert_allclose(rep.solution, b)
    assert rep.converged


def test_random_spd_matches_oracle():
    A = random_spd(32, 0)
    b = np.random.default_rng(1).standard_normal(32)
    rep = cg_solve(lambda v: A @ v, b, cfg=CgConfig(1e-12))
    np.testing.assert_allclose(rep.solution, dense_solve_oracle(A, b), rtol=1e-8, atol=1e-8)


def test_history_shape_and_convergence_flag():
    A = random_spd(20, 2)
    b = np.ones(20)
    rep = cg_solve(lambda v: A @ v, b, cfg=CgConfig(1e-8))
    assert len(rep.residual_history) == rep.iterations + 1
    assert rep.residual_history[0] == pytest.approx(1.0)
    assert rep.converged and rep.residual_history[-1] <= 1e-8
    assert rep.true_residual < 1e-7
    assert rep.absolute_residual_history[-1] == pytest.approx(rep.residual_history[-1] * math.sqrt(20))


def test_one_application_per_iteration():
    A = random_spd(40, 3, cond=1e4)
    b = np.random.default_rng(4).standard_normal(40)
    for tol in (1e-2, 1e-6, 1e-10):
        op = CountingOperator(A)
        rep = cg_solve(op, b, cfg=CgConfig(tol))
        # one for r_0, one per iteration, one for the final true residual
        assert op.calls == rep.iterations + 2


def test_max_iterations_respected():
    A = random_spd(50, 5, cond=1e6)
    rep = cg_solve(lambda v: A @ v, np.ones(50), cfg=CgConfig(1e-12, max_iterations=3))
    assert rep.iterations == 3 and not rep.converged


def test_kappa_tightens_default_cap():
    A = random_spd(50, 5, cond=1e6)
    rep = cg_solve(lambda v: A @ v, np.ones(50), cfg=CgConfig(1e-12), kappa=1.0)
    assert rep.iterations <= 10 * cg_iteration_bound(1.0, 1e-12)


def test_zero_rhs():
    rep = cg_solve(lambda v: v, np.zeros(5), x0=np.ones(5))
    assert rep.iterations == 0 and rep.converged
    np.testing.assert_array_equal(rep.solution, np.zeros(5))


def test_exact_warm_start_needs_no_iterations():
    A = random_spd(16, 6)
    b = np.random.default_rng(7).standard_normal(16)
    x = dense_solve_oracle(A, b)
    rep = cg_solve(lambda v: A @ v, b, x0=x)
    assert rep.iterations == 0 and rep.converged


def test_breakdown_on_indefinite():
    A = np.diag([1.0, -1.0])
    with pytest.raises(CgBreakdown) as exc:
        cg_solve(lambda v: A @ v, np.array([0.0, 1.0]))
    assert exc.value.iteration == 0


def test_shape_mismatch():
    with pytest.raises(ValueError):
        cg_solve(lambda v: v, np.ones(3), x0=np.ones(4))


def test_config_validation():
    for bad in (0.0, 1.0, -1e-3):
        with pytest.raises(ValueError):
            CgConfig(bad)
    with pytest.raises(ValueError):
        CgConfig(1e-6, max_iterations=0)


def test_json_fields():
    rep = cg_solve(lambda v: 2 * v, np.ones(3))
    doc = json.loads(json.dumps(rep.to_json()))
    assert set(doc) == {"iterations", "converged", "residual_history"}


def test_zero_mean_projection_periodic():
    op = PoissonOperator(Grid1D(32), 1)
    b = np.random.default_rng(8).standard_normal(32) + 5.0
    rep = cg_solve(op, b, zero_mean=True, cfg=CgConfig(1e-10))
    assert abs(rep.solution.mean()) < 1e-12
    bz = b - b.mean()
    np.testing.assert_allclose(op(rep.solution), bz, atol=1e-7 * np.linalg.norm(bz))


@settings(max_examples=20, deadline=None)
@given(n=st.integers(2, 64), seed=st.integers(0, 2**31 - 1))
def test_a_norm_error_non_increasing(n, seed):
    A = random_spd(n, seed, cond=1e3)
    b = np.random.default_rng(seed + 1).standard_normal(n)
    x_star = dense_solve_oracle(A, b)
    errs = []
    for k in range(0, n + 1):
        rep = cg_solve(lambda v: A @ v, b, cfg=CgConfig(1e-14, max_iterations=max(k, 1)))
        if k == 0:
            e = x_star
        else:
            e = x_star - rep.solution
        errs.append(math.sqrt(e @ A @ e))
        if rep.converged:
            break
    scale = math.sqrt(x_star @ A @ x_star)
    assert all(b2 <= b1 + 1e-9 * scale for b1, b2 in zip(errs, errs[1:]))


# --- iteration bound -------------------------------------------------------------


def test_bound_examples():
    assert cg_iteration_bound(1.0, 0.5) == 1
    assert cg_iteration_bound(100.0, 1e-6) == 73
    assert cg_iteration_bound(100.0, 1e-6) == math.ceil(5 * math.log(2e6))


@given(kappa=st.floats(1.0, 1e8), eps=st.floats(1e-12, 0.9))
def test_bound_sqrt_scaling(kappa, eps):
    b1, b4 = cg_iteration_bound(kappa, eps), cg_iteration_bound(4 * kappa, eps)
    assert 2 * b1 - 1 <= b4 <= 2 * b1


def test_bound_domain():
    with pytest.raises(ValueError):
        cg_iteration_bound(0.5, 1e-6)
    with pytest.raises(ValueError):
        cg_iteration_bound(2.0, 1.5)


@pytest.mark.parametrize("n", [8, 16, 32, 64, 128])
def test_poisson_iterations_below_bound(n):
    op = PoissonOperator(Grid1D(n), 1)
    b = np.random.default_rng(n).standard_normal(n)
    rep = cg_solve(op, b, zero_mean=True, cfg=CgConfig(1e-6))
    assert rep.converged
    assert rep.iterations <= cg_iteration_bound(condition_number_zero_mean(Grid1D(n)), 1e-6)


# --- dense oracle ------------------------------------------------------------------


def test_oracle_trivial_cases():
    b = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(dense_solve_oracle(np.eye(3), b), b)
    np.testing.assert_allclose(dense_solve_oracle(np.diag([1.0, 2.0, 4.0]), b), [1.0, 1.0, 0.75])


def test_oracle_residual():
    A = random_spd(16, 9)
    b = np.random.default_rng(10).standard_normal(16)
    x = dense_solve_oracle(A, b)
    assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_oracle_rejects_non_spd():
    with pytest.raises(ValueError):
        dense_solve_oracle(np.array([[1.0, 2.0], [0.0, 1.0]]), np.ones(2))
    with pytest.raises(ValueError):
        dense_solve_oracle(np.diag([1.0, -1.0]), np.ones(2))
