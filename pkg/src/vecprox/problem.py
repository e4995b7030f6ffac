"""Vector objectives ``F: M -> R^m`` and the builtin test problems."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .cone import GeneratorSet, leq_C, make_generator_set, scalarize_argmax, _denominators
from .manifold import Euclidean, Manifold, ManifoldError

__all__ = [
    "VectorObjective",
    "ProblemInstance",
    "eval_objective",
    "objective_gradients",
    "scalarized_subgradient",
    "c_convexity_audit",
    "fd_gradients",
    "sq_distances",
    "norm_sq",
    "norms",
    "nonconvex_pair",
    "segment_distance",
    "make_builtin",
]

FD_STEP = 1e-6


@dataclass(frozen=True, eq=False)
class VectorObjective:
    """``F`` with a value oracle and (optionally) a Riemannian-gradient oracle.

    ``gradient(p)`` must return an ``(m, ambient_dim)`` array whose rows are
    tangent at ``p``.  When it is missing, gradients fall back to central
    differences along geodesics (accuracy ~1e-8 at best).
    """

    manifold: Manifold
    m: int
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    convex: bool = False
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, p):
        return eval_objective(self, p)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    objective: VectorObjective
    Z: GeneratorSet
    reference_solutions: Sequence[np.ndarray] = ()
    witness: Optional[np.ndarray] = None
    #: distance from a point to the known weak-efficient set, when available
    efficient_set_distance: Optional[Callable[[np.ndarray], float]] = None

    def __post_init__(self):
        M = self.objective.manifold
        if self.Z.m != self.objective.m:
            raise ValueError(
                f"cone lives in R^{self.Z.m}, objective has {self.objective.m} components"
            )
        for q in self.reference_solutions:
            M.check_point(q)
        if self.witness is not None:
            M.check_point(self.witness)

    @property
    def manifold(self) -> Manifold:
        return self.objective.manifold

    def witness_dominates(self, p) -> bool:
        """True when the witness satisfies ``F(w) <=_C F(p)`` (it lies in every descent set)."""
        if self.witness is None:
            return False
        F = self.objective
        return leq_C(eval_objective(F, self.witness), eval_objective(F, p), self.Z)


def eval_objective(F: VectorObjective, p) -> np.ndarray:
    p = F.manifold.check_point(p)
    y = np.atleast_1d(np.asarray(F.value(p), dtype=float))
    if y.shape != (F.m,):
        raise ValueError(f"objective returned shape {y.shape}, expected ({F.m},)")
    if not np.all(np.isfinite(y)):
        raise ValueError(f"objective is not finite at {p}")
    return y


def fd_gradients(F: VectorObjective, p, h: float = FD_STEP) -> np.ndarray:
    """Central geodesic differences along an orthonormal tangent basis."""
    M = F.manifold
    B = M.tangent_basis(p)
    G = np.zeros((F.m, M.ambient_dim))
    for b in B:
        d = (F.value(M.exp(p, h * b)) - F.value(M.exp(p, -h * b))) / (2 * h)
        G += np.outer(d, b)
    return G


def objective_gradients(F: VectorObjective, p) -> np.ndarray:
    """Row ``i`` is ``grad F_i(p)`` in T_pM."""
    M = F.manifold
    p = M.check_point(p)
    if F.gradient is None:
        return fd_gradients(F, p)
    G = np.atleast_2d(np.asarray(F.gradient(p), dtype=float))
    if G.shape != (F.m, M.ambient_dim):
        raise ValueError(f"gradient oracle returned shape {G.shape}")
    return np.array([M.project_tangent(p, g) for g in G])


def scalarized_subgradient(F: VectorObjective, p, e, Z: GeneratorSet) -> np.ndarray:
    """Danskin subgradient of ``p -> f_e(F(p))``: the active generator's combination.

    With ``z*`` the lowest-index maximizer of ``<F(p), z>/<e, z>``, returns
    ``sum_i z*_i grad F_i(p) / <e, z*>``.
    """
    den = _denominators(e, Z)
    _, j = scalarize_argmax(eval_objective(F, p), e, Z)
    G = objective_gradients(F, p)
    return Z.generators[j] @ G / den[j]


def c_convexity_audit(F: VectorObjective, Z: GeneratorSet, samples: int = 1000, seed: int = 0,
                      scale: float = 2.0, slack: float = 1e-8) -> dict:
    """Sample geodesic segments and check ``F(γ(t)) <=_C (1-t)F(p) + tF(q)``.

    The worst violation is ``max_j <F(γ(t)) - chord, z_j>`` over generators;
    positive values beyond ``slack`` are failures.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    M = F.manifold
    worst = -np.inf
    witness = None
    failures = 0
    for _ in range(samples):
        p = M.random_point(rng, scale)
        q = M.random_point(rng, scale)
        t = rng.uniform()
        chord = (1 - t) * eval_objective(F, p) + t * eval_objective(F, q)
        gap = float(np.max(Z.generators @ (eval_objective(F, M.geodesic(p, q, t)) - chord)))
        if gap > slack:
            failures += 1
        if gap > worst:
            worst, witness = gap, (p, q, t)
    return {
        "passed": failures == 0,
        "failures": failures,
        "samples": samples,
        "worst_violation": worst,
        "witness": witness,
    }


# -- builtin problems -----------------------------------------------------

def sq_distances(M: Manifold, anchors) -> VectorObjective:
    """``F_i(p) = d(p, a_i)**2``; C-convex for the orthant on any Hadamard manifold."""
    A = [M.check_point(a) for a in np.atleast_2d(np.asarray(anchors, dtype=float))]

    def value(p):
        return np.array([M.sq_dist(p, a) for a in A])

    def gradient(p):
        return np.array([M.grad_sq_dist(a, p) for a in A])

    return VectorObjective(M, len(A), value, gradient, convex=True, name="sq_distances",
                           params={"anchors": [a.tolist() for a in A]})


def norm_sq(n: int) -> VectorObjective:
    """Scalar ``F(p) = ||p||**2`` on R^n."""
    M = Euclidean(n)
    F = sq_distances(M, [np.zeros(n)])
    return VectorObjective(M, 1, F.value, F.gradient, convex=True, name="norm_sq", params={})


def norms(M: Manifold, center, weights=(1.0,)) -> VectorObjective:
    """``F_i(p) = w_i d(p, center)``: weakly sharp at ``center`` (nonsmooth there)."""
    c = M.check_point(center)
    w = np.asarray(weights, dtype=float)

    def value(p):
        return w * M.dist(p, c)

    def gradient(p):
        d = M.dist(p, c)
        if d == 0.0:
            return np.zeros((len(w), M.ambient_dim))
        u = -M.log(p, c) / d
        return np.outer(w, u)

    return VectorObjective(M, len(w), value, gradient, convex=bool(np.all(w >= 0)), name="norms",
                           params={"center": c.tolist(), "weights": w.tolist()})


def nonconvex_pair(n: int) -> VectorObjective:
    """``F(p) = (||p||², -||p||²)``: not C-convex for the orthant."""
    M = Euclidean(n)

    def value(p):
        s = float(p @ p)
        return np.array([s, -s])

    def gradient(p):
        return np.array([2 * p, -2 * p])

    return VectorObjective(M, 2, value, gradient, convex=False, name="nonconvex_pair", params={})


def segment_distance(M: Manifold, a, b, p, tol: float = 1e-12) -> float:
    """Distance from ``p`` to the geodesic segment ``[a, b]``.

    ``t -> d(p, γ(t))`` is convex on a Hadamard manifold, so golden-section
    search on [0, 1] finds the minimum.
    """
    if M.dist(a, b) == 0.0:
        return M.dist(p, a)
    v = M.log(a, b)

    def g(t):
        return M.dist(p, M.exp(a, t * v))

    lo, hi = 0.0, 1.0
    r = (np.sqrt(5) - 1) / 2
    x1, x2 = hi - r * (hi - lo), lo + r * (hi - lo)
    f1, f2 = g(x1), g(x2)
    while hi - lo > tol:
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - r * (hi - lo)
            f1 = g(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + r * (hi - lo)
            f2 = g(x2)
    return min(f1, f2, g(0.0), g(1.0))


def make_builtin(name: str, M: Manifold, params: dict | None = None) -> ProblemInstance:
    """Construct a builtin :class:`ProblemInstance` by name.

    ``sq_distances`` with anchors ``a_1..a_m`` (orthant cone); ``norm_sq``
    (scalar cone, Euclidean only); ``nonconvex_pair`` (Euclidean only).
    """
    params = dict(params or {})
    if name == "sq_distances":
        anchors = params.get("anchors")
        if anchors is None or len(anchors) < 1:
            raise ValueError("sq_distances needs a non-empty 'anchors' list")
        F = sq_distances(M, anchors)
        Z = make_generator_set("scalar") if F.m == 1 else make_generator_set("orthant", F.m)
        A = [np.asarray(a, dtype=float) for a in anchors]
        dist = None
        if F.m == 1:
            dist = lambda p: M.dist(p, A[0])  # noqa: E731
        elif F.m == 2:
            dist = lambda p: segment_distance(M, A[0], A[1], p)  # noqa: E731
        return ProblemInstance(F, Z, reference_solutions=tuple(A), efficient_set_distance=dist)
    if name == "norm_sq":
        if not isinstance(M, Euclidean):
            raise ManifoldError("norm_sq is defined on Euclidean space only")
        F = norm_sq(M.n)
        return ProblemInstance(F, make_generator_set("scalar"), reference_solutions=(np.zeros(M.n),),
                               witness=np.zeros(M.n), efficient_set_distance=lambda p: float(np.linalg.norm(p)))
    if name == "nonconvex_pair":
        if not isinstance(M, Euclidean):
            raise ManifoldError("nonconvex_pair is defined on Euclidean space only")
        return ProblemInstance(nonconvex_pair(M.n), make_generator_set("orthant", 2))
    raise ValueError(f"unknown builtin problem {name!r}")
