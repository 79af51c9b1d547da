import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lossyqkd.sdp import (
    Decision,
    SdpProblem,
    Status,
    check_feasibility,
    feasibility_transform,
    hermitian_dual,
    hermitian_problem,
    solve,
)

from _helpers import random_hermitian


def empty(F0):
    F0 = np.asarray(F0, dtype=float)
    return SdpProblem(np.zeros(0), F0, np.zeros((0,) + F0.shape))


def random_problem(rng, n, m):
    """Random feasibility LMI with traceless directions (bounded t)."""
    F0 = rng.normal(size=(n, n))
    F0 = F0 + F0.T
    Fi = []
    for _ in range(m):
        f = rng.normal(size=(n, n))
        f = f + f.T
        Fi.append(f - np.trace(f) / n * np.eye(n))
    return SdpProblem(np.zeros(m), F0, np.array(Fi).reshape(m, n, n))


def assert_certified(result, tol_gap=1e-7):
    assert result.status is Status.OPTIMAL
    assert result.gap < tol_gap
    assert result.dual_residual < 1e-8
    assert np.linalg.eigvalsh(result.Z)[0] > -1e-9
    assert result.complementarity < 1e-7
    for h in result.history:
        assert abs(h["weak_duality"]) < 1e-8


def test_transform_examples():
    prob = feasibility_transform(empty(np.diag([1.0, 1.0])))
    assert prob.nvars == 1
    v = check_feasibility(empty(np.diag([1.0, 1.0])))
    assert np.isclose(v.t_star, -1, atol=1e-8) and v.decision is Decision.FEASIBLE
    v = check_feasibility(empty(np.diag([-2.0, 1.0])))
    assert np.isclose(v.t_star, 2, atol=1e-8) and v.decision is Decision.INFEASIBLE


def test_transform_rejects_objective():
    with pytest.raises(ValueError):
        feasibility_transform(SdpProblem(np.ones(1), np.eye(2), np.eye(2)[None]))


def test_transform_adds_one_variable():
    rng = np.random.default_rng(0)
    prob = random_problem(rng, 4, 3)
    assert feasibility_transform(prob).nvars == prob.nvars + 1


def test_one_dimensional_eigenvalue_problem():
    res = solve(feasibility_transform(empty(np.diag([-1.0, 3.0]))))
    assert_certified(res)
    assert np.isclose(res.x[-1], 1, atol=1e-8)
    assert np.isclose(res.dual_value, 1, atol=1e-7)
    assert res.Z[0, 0] > 0.999 and abs(res.Z[1, 1]) < 1e-6


def test_violation_certificate():
    F0 = np.diag([-0.3, 0.5, 1.0])
    v = check_feasibility(empty(F0))
    assert v.decision is Decision.INFEASIBLE
    assert np.isclose(v.t_star, 0.3, atol=1e-8)
    assert np.isclose(np.trace(F0 @ v.Z), -0.3, atol=1e-7)
    assert np.isclose(np.trace(v.Z), 1, atol=1e-9)


def test_identity_is_feasible():
    v = check_feasibility(empty(np.eye(3)))
    assert v.decision is Decision.FEASIBLE and np.isclose(v.t_star, -1, atol=1e-8)
    assert np.trace(np.eye(3) @ v.Z) >= -v.t_star - 1e-8


def test_scaled_identity_trace():
    v = check_feasibility(empty(np.diag([-1.0, 2.0])), scale_identity_by=0.5)
    assert np.isclose(np.trace(v.Z), 2, atol=1e-8)
    assert np.isclose(v.t_star, 2, atol=1e-7)


def test_marginal_decision():
    v = check_feasibility(empty(np.diag([0.0, 1.0])))
    assert v.decision is Decision.MARGINAL


def test_hermitian_embedding_dual():
    rng = np.random.default_rng(3)
    H = random_hermitian(3, rng)
    lam = np.linalg.eigvalsh(H)[0]
    v = check_feasibility(hermitian_problem(np.zeros(0), H, []))
    assert np.isclose(v.t_star, -lam, atol=1e-8)
    Zh = hermitian_dual(v.Z)
    assert np.isclose(np.trace(Zh).real, 1, atol=1e-9)
    assert np.isclose(np.trace(Zh @ H).real, lam, atol=1e-7)


def test_determinism():
    rng = np.random.default_rng(7)
    prob = feasibility_transform(random_problem(rng, 8, 6))
    a, b = solve(prob), solve(prob)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.Z, b.Z)
    assert a.iterations == b.iterations


def test_result_json():
    import json

    res = solve(feasibility_transform(empty(np.diag([-1.0, 3.0]))))
    data = json.loads(res.to_json())
    assert data["status"] == "Optimal" and len(data["x"]) == 1


def test_max_iterations_status():
    rng = np.random.default_rng(8)
    res = solve(feasibility_transform(random_problem(rng, 6, 4)), max_iter=2)
    assert res.status is Status.MAX_ITERATIONS


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12), st.integers(0, 10))
def test_random_problems_certified(seed, n, m):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng, n, m)
    res = solve(feasibility_transform(prob))
    assert_certified(res)
    dual = np.array([np.sum(f * res.Z) for f in prob.Fi])
    assert np.max(np.abs(dual), initial=0.0) < 1e-8
    assert np.isclose(np.trace(res.Z), 1, atol=1e-8)
    # the optimal slack is singular and Z lives on its kernel
    assert np.linalg.eigvalsh(res.S)[0] < 1e-6
