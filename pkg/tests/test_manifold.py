import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from vecprox import manifold as mf
from vecprox.manifold import Euclidean, Hyperboloid, ManifoldError, make_manifold

E2, H2, H3 = Euclidean(2), Hyperboloid(2), Hyperboloid(3)
C1, S1 = np.cosh(1.0), np.sinh(1.0)
Q1 = np.array([C1, S1, 0.0])
O = np.array([1.0, 0.0, 0.0])

seeds = st.integers(0, 2**32 - 1)


def test_euclidean_examples():
    assert E2.dist([0, 0], [3, 4]) == pytest.approx(5.0)
    np.testing.assert_allclose(E2.exp([1, 1], [2, 0]), [3, 1])
    np.testing.assert_allclose(E2.log([1, 1], [3, 1]), [2, 0])
    np.testing.assert_allclose(E2.grad_sq_dist(np.zeros(2), np.array([1.0, 2.0])), [2, 4])


def test_hyperboloid_distance_matches_arc_length():
    assert H2.dist(O, Q1) == pytest.approx(1.0, abs=1e-14)
    # arc length of t -> (cosh t, sinh t, 0) in the ambient Minkowski metric
    length, _ = quad(lambda t: np.sqrt(np.sinh(t) ** 2 * -1 + np.cosh(t) ** 2), 0.0, 1.0)
    assert H2.dist(O, Q1) == pytest.approx(length, abs=1e-12)


def test_hyperboloid_exp_log_examples():
    np.testing.assert_allclose(H2.exp(O, [0, 1, 0]), Q1, atol=1e-14)
    np.testing.assert_allclose(H2.log(O, Q1), [0, 1, 0], atol=1e-12)
    g = H2.grad_sq_dist(O, Q1)
    assert H2.norm(Q1, g) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("M", [E2, H2, H3])
def test_identity_cases(M):
    p = M.random_point(np.random.default_rng(0))
    assert M.dist(p, p) == 0.0
    np.testing.assert_array_equal(M.exp(p, np.zeros(M.ambient_dim)), p)
    np.testing.assert_array_equal(M.log(p, p), np.zeros(M.ambient_dim))
    np.testing.assert_array_equal(M.grad_sq_dist(p, p), np.zeros(M.ambient_dim))
    q = M.random_point(np.random.default_rng(1))
    assert M.comparison_residual(q, p, q) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, radius=st.floats(0.0, 10.0))
def test_round_trip_property(seed, radius):
    rng = np.random.default_rng(seed)
    for M in (E2, H2, H3):
        p = M.random_point(rng)
        v = M.random_tangent(rng, p)
        v *= radius / max(M.norm(p, v), 1e-300)
        q = M.exp(p, v)
        assert M.dist(M.exp(p, M.log(p, q)), q) <= 1e-8
        assert abs(M.norm(p, M.log(p, q)) - M.dist(p, q)) <= 1e-8 * max(1.0, radius)


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_grad_sq_dist_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    for M in (E2, H2):
        q, p = M.random_point(rng), M.random_point(rng)
        g = M.grad_sq_dist(q, p)
        for _ in range(4):
            u = M.random_tangent(rng, p)
            u /= M.norm(p, u)
            h = 1e-5
            fd = (M.sq_dist(q, M.exp(p, h * u)) - M.sq_dist(q, M.exp(p, -h * u))) / (2 * h)
            assert abs(fd - M.inner(p, g, u)) <= 1e-5 * max(1.0, abs(fd))


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_comparison_inequality(seed):
    rng = np.random.default_rng(seed)
    p1, p2, p3 = (H2.random_point(rng, 1.5) for _ in range(3))
    assert H2.comparison_residual(p1, p2, p3) >= -1e-9
    e1, e2, e3 = (E2.random_point(rng) for _ in range(3))
    assert abs(E2.comparison_residual(e1, e2, e3)) <= 1e-9


def test_comparison_coefficient_is_read_at_call_time(monkeypatch):
    rng = np.random.default_rng(3)
    p1, p2, p3 = (E2.random_point(rng) for _ in range(3))
    monkeypatch.setattr(mf, "COMPARISON_COEFFICIENT", 1.0)
    assert abs(E2.comparison_residual(p1, p2, p3)) > 1e-3


@pytest.mark.parametrize("M", [E2, H2, H3])
def test_exp_differential_matches_finite_differences(M):
    rng = np.random.default_rng(5)
    for r in (1e-6, 0.5, 2.0):
        p = M.random_point(rng)
        u = M.random_tangent(rng, p)
        u *= r / M.norm(p, u)
        w = M.random_tangent(rng, p)
        h = 1e-6
        fd = (M.exp(p, u + h * w) - M.exp(p, u - h * w)) / (2 * h)
        np.testing.assert_allclose(M.exp_differential(p, u, w), fd, atol=1e-7 * max(1.0, np.abs(fd).max()))


@pytest.mark.parametrize("M", [E2, H2, H3])
def test_tangent_basis_is_orthonormal(M):
    p = M.random_point(np.random.default_rng(2), 2.0)
    B = M.tangent_basis(p)
    G = np.array([[M.inner(p, a, b) for b in B] for a in B])
    np.testing.assert_allclose(G, np.eye(M.n), atol=1e-10)
    v = M.random_tangent(np.random.default_rng(4), p)
    np.testing.assert_allclose(B.T @ M.coords(p, v), v, atol=1e-10)


def test_strong_convexity_along_geodesics():
    rng = np.random.default_rng(9)
    for _ in range(200):
        q, a, b = (H2.random_point(rng) for _ in range(3))
        t = rng.uniform()
        lhs = H2.sq_dist(q, H2.geodesic(a, b, t))
        rhs = (1 - t) * H2.sq_dist(q, a) + t * H2.sq_dist(q, b) - t * (1 - t) * H2.sq_dist(a, b)
        assert lhs <= rhs + 1e-8


def test_far_points_keep_precision():
    p = H2.random_point(np.random.default_rng(1))
    v = H2.random_tangent(np.random.default_rng(2), p)
    v *= 15.0 / H2.norm(p, v)
    q = H2.exp(p, v)
    H2.check_point(q)
    assert H2.dist(p, q) == pytest.approx(15.0, rel=1e-9)


def test_validation_errors():
    with pytest.raises(ManifoldError):
        H2.check_point([1.0, 1.0, 0.0])
    with pytest.raises(ManifoldError):
        H2.check_point([-1.0, 0.0, 0.0])
    with pytest.raises(ManifoldError):
        H2.check_point([1.0, 0.0])  # a point of the wrong space
    with pytest.raises(ManifoldError):
        E2.check_point([np.nan, 0.0])
    with pytest.raises(ManifoldError):
        H2.exp(O, [1.0, 0.0, 0.0])  # not tangent at the origin
    with pytest.raises(ManifoldError):
        H2.exp(O, [0.0, 800.0, 0.0])
    with pytest.raises(ManifoldError):
        make_manifold("sphere", 2)
    with pytest.raises(ManifoldError):
        Euclidean(0)


def test_equality_and_serialization():
    assert make_manifold("Hyperboloid", 2) == H2
    assert H2 != E2 and H2 != H3
    assert H2.to_dict() == {"kind": "hyperboloid", "dim": 2}
    assert len({H2, Hyperboloid(2), E2}) == 2
