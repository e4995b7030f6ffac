"""scikit-learn style wrapper around the proximal point solver.

``VectorProximalPoint`` treats each row of ``X`` as a starting point and
maps it to the terminal iterate of the method, so it can sit in a
``Pipeline`` or be cloned, grid-searched and pickled like any transformer.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .cone import make_generator_set
from .manifold import make_manifold
from .problem import ProblemInstance, make_builtin
from .proxpoint import OuterConfig, run
from .subsolver import InnerConfig

__all__ = ["VectorProximalPoint", "check_start_points"]


def check_start_points(X, manifold) -> np.ndarray:
    """Validate ``X`` as a batch of points on ``manifold``.

    A 1-D array is read as a single point.  Hyperboloid rows may be given in
    ambient coordinates (length ``n + 1``) or in spatial coordinates
    (length ``n``), in which case the time coordinate is filled in.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    X = check_array(X, ensure_2d=True, dtype=float)
    d = manifold.ambient_dim
    if X.shape[1] == d - 1 and manifold.kind == "hyperboloid":
        X = np.hstack([np.sqrt(1.0 + np.sum(X ** 2, axis=1, keepdims=True)), X])
    if X.shape[1] != d:
        raise ValueError(f"expected {d} coordinates per point, got {X.shape[1]}")
    for x in X:
        manifold.check_point(x)
    return X


class VectorProximalPoint(TransformerMixin, BaseEstimator):
    """Proximal point method for vector optimization on a Hadamard manifold.

    Parameters
    ----------
    manifold : {"euclidean", "hyperboloid"}
    dim : int
        Intrinsic dimension.
    problem : str
        Builtin problem name (``"sq_distances"``, ``"norm_sq"``, ...).
    anchors : array-like, optional
        Anchor points for ``sq_distances``.
    cone : str, optional
        Cone kind; ``None`` keeps the problem's natural cone.
    generators : array-like, optional
        Generators for ``cone="custom"``.
    lam : float or sequence of float
        Prox parameters (a sequence is a schedule; its last value is held).
    lambda_max : float, optional
    directions : sequence of array-like, optional
        Scalarization directions, cycled.
    tol_step, max_outer : stopping rule.
    inner_method : {"epigraph", "subgradient"}
    tol_opt, tol_feas : inner tolerances.

    Attributes
    ----------
    trace_ : SolveTrace
        Trace of the run started from the first row passed to ``fit``.
    solution_ : ndarray
    values_ : ndarray
    status_ : str
    n_iter_ : int
    problem_ : ProblemInstance
    """

    def __init__(self, manifold="euclidean", dim=2, problem="sq_distances", anchors=None, cone=None,
                 generators=None, lam=1.0, lambda_max=None, directions=None, tol_step=1e-7,
                 max_outer=500, inner_method="epigraph", tol_opt=1e-8, tol_feas=1e-10):
        self.manifold = manifold
        self.dim = dim
        self.problem = problem
        self.anchors = anchors
        self.cone = cone
        self.generators = generators
        self.lam = lam
        self.lambda_max = lambda_max
        self.directions = directions
        self.tol_step = tol_step
        self.max_outer = max_outer
        self.inner_method = inner_method
        self.tol_opt = tol_opt
        self.tol_feas = tol_feas

    def _build(self):
        M = make_manifold(self.manifold, self.dim)
        params = {} if self.anchors is None else {"anchors": np.asarray(self.anchors, dtype=float).tolist()}
        prob = make_builtin(self.problem, M, params)
        if self.cone is not None:
            Z = make_generator_set(self.cone, m=prob.objective.m, generators=self.generators)
            prob = ProblemInstance(prob.objective, Z, prob.reference_solutions, prob.witness,
                                   prob.efficient_set_distance)
        lam = self.lam if np.isscalar(self.lam) else tuple(float(x) for x in self.lam)
        dirs = None if self.directions is None else tuple(tuple(map(float, d)) for d in self.directions)
        cfg = OuterConfig(lam=lam, lambda_max=self.lambda_max, directions=dirs, tol_step=self.tol_step,
                          max_outer=int(self.max_outer),
                          inner=InnerConfig(method=self.inner_method, tol_opt=self.tol_opt,
                                            tol_feas=self.tol_feas))
        cfg.direction_list(prob.Z)
        return M, prob, cfg

    def fit(self, X, y=None):
        """Run the method from the first row of ``X``."""
        M, prob, cfg = self._build()
        X = check_start_points(X, M)
        trace = run(prob, X[0], cfg)
        self.problem_ = prob
        self.outer_config_ = cfg
        self.trace_ = trace
        self.solution_ = trace.terminal.point
        self.values_ = trace.terminal.values
        self.status_ = trace.status
        self.n_iter_ = trace.n_iter
        self.n_features_in_ = M.ambient_dim
        return self

    def transform(self, X):
        """Terminal iterate for each row of ``X`` used as a start."""
        check_is_fitted(self, "problem_")
        X = check_start_points(X, self.problem_.manifold)
        return np.array([run(self.problem_, x, self.outer_config_).terminal.point for x in X])

    def score(self, X, y=None):
        """Negative mean scalarized value at the terminal points (higher is better)."""
        from .cone import scalarize

        P = self.transform(X)
        e = self.outer_config_.direction_list(self.problem_.Z)[0]
        F = self.problem_.objective
        return -float(np.mean([scalarize(F.value(p), e, self.problem_.Z) for p in P]))
