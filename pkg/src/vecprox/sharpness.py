"""Weak sharp minimum diagnostics for vector objectives (orthant cones).

A candidate ``p̂`` is a weak sharp minimum of ``G`` with modulus ``tau`` when

    d(G(p) - G(p̂), -C) >= tau * d(p, W),   W = {p : G(p) = G(p̂)}

for all ``p``.  Everything here is evidence on a finite probe set, never a
proof; reports carry a hash of the probes so runs can be reproduced.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .cone import GeneratorSet, make_generator_set, scalarize
from .problem import VectorObjective, eval_objective

__all__ = [
    "SharpnessError",
    "SharpnessQuery",
    "dist_to_neg_cone",
    "level_set_distance",
    "estimate_sharpness_modulus",
    "scalar_transfer_audit",
    "radial_probes",
]

LEVEL_TOL = 1e-8


class SharpnessError(ValueError):
    pass


def _require_orthant(Z: GeneratorSet | None, m: int) -> GeneratorSet:
    if Z is None:
        return make_generator_set("scalar") if m == 1 else make_generator_set("orthant", m)
    if not (Z.kind in ("scalar", "orthant") or Z.is_orthant):
        raise SharpnessError("only the nonnegative orthant is supported for cone distances")
    return Z


def dist_to_neg_cone(y, Z: GeneratorSet | None = None) -> float:
    """Euclidean distance from ``y`` to ``-R^m_+``: ``|max(y, 0)|``."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    _require_orthant(Z, y.shape[0])
    return float(np.linalg.norm(np.maximum(y, 0.0)))


@dataclass(frozen=True, eq=False)
class SharpnessQuery:
    """Candidate, probes and a description of its level set ``W``.

    Give either ``level_set`` (sample points of W) or ``level_distance``
    (a closed-form ``p -> d(p, W)``).
    """

    objective: VectorObjective
    candidate: np.ndarray
    probes: np.ndarray
    level_set: Optional[np.ndarray] = None
    level_distance: Optional[Callable[[np.ndarray], float]] = None
    Z: Optional[GeneratorSet] = None

    def __post_init__(self):
        G = self.objective
        M = G.manifold
        object.__setattr__(self, "candidate", M.check_point(self.candidate))
        object.__setattr__(self, "Z", _require_orthant(self.Z, G.m))
        probes = np.atleast_2d(np.asarray(self.probes, dtype=float))
        if probes.size == 0:
            raise SharpnessError("probe set must be non-empty")
        for p in probes:
            M.check_point(p)
        object.__setattr__(self, "probes", probes)
        if self.level_set is None and self.level_distance is None:
            raise SharpnessError("need level_set samples or a level_distance callback")
        if self.level_set is not None:
            W = np.atleast_2d(np.asarray(self.level_set, dtype=float))
            g0 = eval_objective(G, self.candidate)
            for q in W:
                if np.linalg.norm(eval_objective(G, q) - g0) > LEVEL_TOL:
                    raise SharpnessError(f"level-set sample {q} is off the level set")
            object.__setattr__(self, "level_set", W)

    @property
    def probe_hash(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.probes).tobytes()).hexdigest()


def level_set_distance(q: SharpnessQuery, p) -> float:
    if q.level_distance is not None:
        return float(q.level_distance(p))
    M = q.objective.manifold
    return min(M.dist(p, w) for w in q.level_set)


def _ratios(q: SharpnessQuery, numerator) -> np.ndarray:
    g0 = eval_objective(q.objective, q.candidate)
    out = []
    for p in q.probes:
        d = level_set_distance(q, p)
        if d <= 0.0:
            raise SharpnessError(f"probe {p} lies on the level set (zero distance)")
        out.append(numerator(eval_objective(q.objective, p) - g0) / d)
    return np.array(out)


def estimate_sharpness_modulus(q: SharpnessQuery) -> float:
    """``min_p d(G(p) - G(p̂), -C) / d(p, W)`` over the probes."""
    return float(np.min(_ratios(q, lambda y: dist_to_neg_cone(y, q.Z))))


def scalar_transfer_audit(q: SharpnessQuery, e, Z: GeneratorSet | None = None,
                          threshold: float = 1e-8) -> dict:
    """Compare vector sharpness with sharpness of ``p -> f(G(p) - G(p̂))``.

    Passes when a vector modulus above ``threshold`` comes with a positive
    scalar modulus on the same probes; vacuously when the vector modulus
    does not clear the threshold.
    """
    Z = q.Z if Z is None else _require_orthant(Z, q.objective.m)
    tau_v = estimate_sharpness_modulus(q)
    tau_s = float(np.min(_ratios(q, lambda y: scalarize(y, e, Z))))
    met = tau_v > threshold
    return {
        "passed": bool((not met) or tau_s > 0.0),
        "hypothesis_met": bool(met),
        "tau_vector": tau_v,
        "tau_scalar": tau_s,
        "threshold": threshold,
        "probes": int(len(q.probes)),
        "probe_hash": q.probe_hash,
        "message": "ok" if met else "hypothesis not met",
    }


def radial_probes(M, center, radii, directions: int = 16, seed: int = 0) -> np.ndarray:
    """Points ``exp(center, r u)`` for random unit tangents ``u`` and each radius."""
    rng = np.random.default_rng(seed)
    c = M.check_point(center)
    pts = []
    for r in np.atleast_1d(radii):
        for _ in range(directions):
            u = M.random_tangent(rng, c)
            pts.append(M.exp(c, (r / M.norm(c, u)) * u))
    return np.array(pts)
