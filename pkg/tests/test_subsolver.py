import numpy as np
import pytest

from oracles import grid_prox_oracle
from vecprox.cone import make_generator_set
from vecprox.manifold import Euclidean, Hyperboloid
from vecprox.problem import VectorObjective, norm_sq, sq_distances
from vecprox.subsolver import (
    InnerConfig,
    SubproblemSpec,
    feasibility_residual,
    prox_objective,
    solve_subproblem,
)

E2, H2 = Euclidean(2), Hyperboloid(2)
ZS = make_generator_set("scalar")
Z2 = make_generator_set("orthant", 2)
E = np.ones(2) / np.sqrt(2)
QUAD = sq_distances(E2, [[0, 0], [1, 0]])


def scalar_spec(anchor, lam=2.0, method="epigraph"):
    return SubproblemSpec(norm_sq(2), np.asarray(anchor, float), lam, [1.0], ZS, InnerConfig(method=method))


def test_feasibility_residual_examples():
    spec = scalar_spec([1.0, 0.0])
    assert feasibility_residual([1.0, 0.0], spec) == 0.0
    assert feasibility_residual([0.0, 0.0], spec) == pytest.approx(-1.0)
    assert feasibility_residual([2.0, 0.0], spec) == pytest.approx(3.0)


@pytest.mark.parametrize("method", ["epigraph", "subgradient"])
def test_scalar_closed_form(method):
    res = solve_subproblem(scalar_spec([1.0, 0.0], method=method))
    np.testing.assert_allclose(res.point, [0.5, 0.0], atol=1e-6)
    assert res.feasibility_residual <= 0.0
    assert res.status in ("converged", "max_iters")


@pytest.mark.parametrize("method", ["epigraph", "subgradient"])
def test_minimal_anchor_is_fixed(method):
    res = solve_subproblem(scalar_spec([0.0, 0.0], method=method))
    np.testing.assert_allclose(res.point, [0.0, 0.0], atol=1e-12)


def test_bi_objective_matches_grid_oracle():
    pk = np.array([2.0, 0.0])
    spec = SubproblemSpec(QUAD, pk, 1.0, E, Z2)
    res = solve_subproblem(spec)
    p, phi = grid_prox_oracle(QUAD.params["anchors"], pk, 1.0, E)
    assert np.linalg.norm(res.point - p) <= 5e-3
    assert prox_objective(res.point, spec) <= phi + 1e-12
    assert res.status == "converged"


def test_subgradient_method_is_close_to_epigraph():
    pk = np.array([2.0, 1.5])
    a = solve_subproblem(SubproblemSpec(QUAD, pk, 1.0, E, Z2))
    b = solve_subproblem(SubproblemSpec(QUAD, pk, 1.0, E, Z2, InnerConfig(method="subgradient")))
    assert np.linalg.norm(a.point - b.point) <= 1e-2
    assert b.feasibility_residual <= 1e-10


def test_hyperbolic_step_descends():
    rng = np.random.default_rng(0)
    F = sq_distances(H2, [H2.random_point(rng) for _ in range(2)])
    pk = H2.random_point(rng, 2.0)
    spec = SubproblemSpec(F, pk, 0.7, E, Z2)
    res = solve_subproblem(spec)
    H2.check_point(res.point)
    assert res.feasibility_residual <= 1e-10
    assert prox_objective(res.point, spec) <= prox_objective(pk, spec)
    assert res.optimality_estimate <= 1e-6


def test_failing_objective_reports_failure():
    def value(p):
        if np.linalg.norm(p) < 1.3:
            raise FloatingPointError("boom")
        return np.array([np.sum(p ** 2)])

    F = VectorObjective(E2, 1, value, lambda p: np.array([2 * p]))
    res = solve_subproblem(SubproblemSpec(F, np.array([1.0, 1.0]), 1.0, [1.0], ZS))
    assert res.status == "failed"


def test_spec_validation():
    with pytest.raises(ValueError):
        scalar_spec([1.0, 0.0], lam=0.0)
    with pytest.raises(ValueError):
        SubproblemSpec(QUAD, np.zeros(2), 1.0, [1.0, -1.0], Z2)
    with pytest.raises(ValueError):
        SubproblemSpec(QUAD, np.zeros(3), 1.0, E, Z2)
    with pytest.raises(ValueError):
        InnerConfig(method="newton")
    with pytest.raises(ValueError):
        InnerConfig(tol_opt=0.0)
