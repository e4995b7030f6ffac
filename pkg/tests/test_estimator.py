import pickle

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from vecprox.estimator import VectorProximalPoint, check_start_points
from vecprox.manifold import Euclidean, Hyperboloid


def test_get_set_params_and_clone():
    est = VectorProximalPoint(anchors=[[0, 0], [1, 0]], lam=0.5)
    params = est.get_params()
    assert params["lam"] == 0.5 and params["manifold"] == "euclidean"
    twin = clone(est).set_params(lam=2.0)
    assert twin.lam == 2.0 and est.lam == 0.5


def test_fit_transform():
    est = VectorProximalPoint(anchors=[[0, 0], [1, 0]]).fit([2.0, 2.0])
    assert est.status_ == "step_converged" and est.n_iter_ == est.trace_.n_iter
    assert abs(est.solution_[1]) <= 1e-3 and -1e-3 <= est.solution_[0] <= 1 + 1e-3
    out = est.transform([[2.0, 2.0], [0.5, -3.0]])
    assert out.shape == (2, 2)
    np.testing.assert_array_equal(out[0], est.solution_)
    assert np.all(np.abs(out[:, 1]) <= 1e-3)
    assert est.score([[2.0, 2.0]]) <= 0.0
    np.testing.assert_array_equal(
        VectorProximalPoint(anchors=[[0, 0], [1, 0]]).fit_transform([[2.0, 2.0]]), out[:1])


def test_scalar_problem_closed_form():
    est = VectorProximalPoint(problem="norm_sq", lam=2.0, tol_step=1e-9).fit([1.0, 0.0])
    np.testing.assert_allclose(est.trace_.points[:10, 0], 2.0 ** -np.arange(10), atol=1e-12)


def test_hyperbolic_spatial_coordinates():
    H = Hyperboloid(2)
    A = [H.origin().tolist(), H.exp(H.origin(), [0, 1.0, 0]).tolist()]
    est = VectorProximalPoint(manifold="hyperboloid", anchors=A, lam=0.5).fit([[0.3, 1.2]])
    H.check_point(est.solution_)
    assert est.problem_.efficient_set_distance(est.solution_) <= 1e-3


def test_pipeline_and_pickle():
    pipe = make_pipeline(FunctionTransformer(lambda X: X + 1.0),
                         VectorProximalPoint(anchors=[[0, 0], [1, 0]]))
    out = pipe.fit_transform(np.array([[1.0, 1.0]]))
    assert abs(out[0, 1]) <= 1e-3
    # fitted objectives hold closures; the unfitted estimator pickles and refits identically
    est = VectorProximalPoint(anchors=[[0, 0], [1, 0]])
    back = pickle.loads(pickle.dumps(est))
    np.testing.assert_array_equal(back.fit([2.0, 2.0]).solution_, est.fit([2.0, 2.0]).solution_)


def test_validation():
    with pytest.raises(NotFittedError):
        VectorProximalPoint(anchors=[[0, 0], [1, 0]]).transform([[1.0, 1.0]])
    with pytest.raises(ValueError):
        check_start_points([[1.0, 2.0, 3.0]], Euclidean(2))
    with pytest.raises(ValueError):
        check_start_points([[np.nan, 0.0]], Euclidean(2))
    with pytest.raises(ValueError):
        VectorProximalPoint(anchors=[[0, 0], [1, 0]], lam=-1.0).fit([[0.0, 1.0]])
    with pytest.raises(ValueError):
        VectorProximalPoint(problem="norm_sq", manifold="hyperboloid").fit([[0.0, 1.0]])
    np.testing.assert_allclose(check_start_points([0.0, 0.0], Hyperboloid(2)), [[1.0, 0.0, 0.0]])
