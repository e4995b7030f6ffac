"""Polyhedral ordering cones given by a finite dual generator set.

A cone ``C = {y : <y, z> >= 0 for every generator z}`` induces the
partial order ``a <=_C b  iff  b - a in C``.  The scalarization

    f(y) = max_z <y, z> / <e, z>

is the Gerstewitz-type function ``inf{t : t e in y + C}`` for a direction
``e`` in the interior of ``C``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConeError",
    "GeneratorSet",
    "make_generator_set",
    "in_cone",
    "leq_C",
    "scalarize",
    "scalarize_argmax",
    "scalarize_inf_oracle",
    "check_direction",
    "default_direction",
    "pointedness_audit",
]

CONE_TOL = 1e-12


class ConeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    """Finite generator list ``Z`` (one generator per row of ``generators``)."""

    generators: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        Z = np.atleast_2d(np.asarray(self.generators, dtype=float))
        if Z.size == 0:
            raise ConeError("generator set must be non-empty")
        if not np.all(np.isfinite(Z)):
            raise ConeError("generators must be finite")
        if np.any(np.all(Z == 0.0, axis=1)):
            raise ConeError("zero generator supplied")
        Z.setflags(write=False)
        object.__setattr__(self, "generators", Z)

    @property
    def m(self) -> int:
        return self.generators.shape[1]

    def __len__(self):
        return self.generators.shape[0]

    @property
    def is_orthant(self) -> bool:
        Z = self.generators
        if Z.shape[0] != Z.shape[1]:
            return False
        return bool(np.array_equal(Z, np.eye(Z.shape[0])))

    def to_dict(self) -> dict:
        if self.kind in ("scalar", "orthant"):
            return {"kind": self.kind, "m": self.m} if self.kind == "orthant" else {"kind": "scalar"}
        return {"kind": "custom", "generators": self.generators.tolist()}

    def __eq__(self, other):
        return (
            isinstance(other, GeneratorSet)
            and self.kind == other.kind
            and np.array_equal(self.generators, other.generators)
        )

    def __hash__(self):
        return hash((self.kind, self.generators.tobytes()))


def make_generator_set(kind: str, m: int | None = None, generators=None) -> GeneratorSet:
    """Build ``Z`` for the scalar cone, the nonnegative orthant or a custom list.

    Custom generators are l1-normalized.

    >>> make_generator_set("custom", generators=[[2.0, 2.0]]).generators
    array([[0.5, 0.5]])
    """
    if kind == "scalar":
        return GeneratorSet(np.ones((1, 1)), kind="scalar")
    if kind == "orthant":
        if m is None or int(m) < 1:
            raise ConeError("orthant cone needs m >= 1")
        return GeneratorSet(np.eye(int(m)), kind="orthant")
    if kind == "custom":
        if generators is None:
            raise ConeError("custom cone needs a generator list")
        Z = np.atleast_2d(np.asarray(generators, dtype=float))
        if Z.size == 0:
            raise ConeError("generator set must be non-empty")
        l1 = np.abs(Z).sum(axis=1)
        if np.any(l1 == 0.0):
            raise ConeError("zero generator supplied")
        return GeneratorSet(Z / l1[:, None], kind="custom")
    raise ConeError(f"unknown cone kind {kind!r}")


def _vector(y, Z: GeneratorSet, name="y") -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim == 0:
        y = y.reshape(1)
    if y.shape != (Z.m,):
        raise ConeError(f"{name} has shape {y.shape}, cone lives in R^{Z.m}")
    return y


def in_cone(y, Z: GeneratorSet, strict: bool = False) -> bool:
    """Membership in ``C`` (or its interior when ``strict``)."""
    s = Z.generators @ _vector(y, Z)
    if strict:
        return bool(np.all(s > CONE_TOL))
    return bool(np.all(s >= -CONE_TOL))


def leq_C(a, b, Z: GeneratorSet, strict: bool = False) -> bool:
    """``a <=_C b`` (or ``a <_C b`` when ``strict``)."""
    return in_cone(_vector(b, Z, "b") - _vector(a, Z, "a"), Z, strict=strict)


def _denominators(e, Z: GeneratorSet) -> np.ndarray:
    den = Z.generators @ _vector(e, Z, "e")
    if np.any(den <= 0.0):
        raise ConeError(f"direction {np.asarray(e)} is not interior to the cone")
    return den


def scalarize_argmax(y, e, Z: GeneratorSet) -> tuple[float, int]:
    """Value of the scalarization and the (lowest-index) maximizing generator."""
    ratios = (Z.generators @ _vector(y, Z)) / _denominators(e, Z)
    j = int(np.argmax(ratios))
    return float(ratios[j]), j


def scalarize(y, e, Z: GeneratorSet) -> float:
    """Max-form scalarization ``max_z <y,z>/<e,z>``.

    >>> Z = make_generator_set("orthant", 2)
    >>> scalarize([1.0, 2.0], [1.0, 1.0], Z)
    2.0
    """
    return scalarize_argmax(y, e, Z)[0]


def scalarize_inf_oracle(y, e, Z: GeneratorSet, tol: float = 1e-10) -> float:
    """``inf{t : t e - y in C}`` by bracketing and bisection.

    Independent of :func:`scalarize`; only cone membership is used.
    """
    if tol <= 0:
        raise ConeError("tol must be positive")
    y = _vector(y, Z)
    e = _vector(e, Z, "e")
    _denominators(e, Z)

    def ok(t):
        return in_cone(t * e - y, Z)

    limit = 2.0**60
    lo, hi = -1.0, 1.0
    while not ok(hi):
        lo = hi
        hi *= 2.0
        if hi > limit:
            raise ConeError("bracket growth exceeded 2**60")
    while ok(lo):
        hi = lo
        lo *= 2.0
        if lo < -limit:
            raise ConeError("bracket growth exceeded 2**60")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def check_direction(e, Z: GeneratorSet, unit: bool = True, tol: float = 1e-9) -> np.ndarray:
    """Validate a scalarization direction and return it (renormalized when ``unit``)."""
    e = _vector(e, Z, "e")
    _denominators(e, Z)
    if unit:
        nrm = float(np.linalg.norm(e))
        if abs(nrm - 1.0) > tol:
            raise ConeError(f"direction must have unit Euclidean norm, got {nrm}")
        e = e / nrm
    return e


def default_direction(Z: GeneratorSet) -> np.ndarray:
    """Unit interior direction: ``(1,...,1)/sqrt(m)`` for the orthant."""
    if Z.kind in ("scalar", "orthant") or Z.is_orthant:
        return np.full(Z.m, 1.0 / np.sqrt(Z.m))
    e = Z.generators.sum(axis=0)
    if np.linalg.norm(e) > 0 and np.all(Z.generators @ e > 0):
        return e / np.linalg.norm(e)
    # max s  s.t.  Z y >= s,  -1 <= y <= 1
    from scipy.optimize import linprog

    J, m = Z.generators.shape
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A = np.hstack([-Z.generators, np.ones((J, 1))])
    res = linprog(c, A_ub=A, b_ub=np.zeros(J), bounds=[(-1, 1)] * m + [(None, 1)])
    if not res.success or res.x[-1] <= CONE_TOL:
        raise ConeError("cone has empty interior")
    e = res.x[:m]
    return e / np.linalg.norm(e)


def pointedness_audit(Z: GeneratorSet, samples: int = 1000, seed: int = 0) -> dict:
    """Heuristic pointedness check: random ``y`` with both ``y`` and ``-y`` in C.

    Samples directions from the null space of ``Z`` as well as at random, so a
    cone with a lineality space is caught.
    """
    rng = np.random.default_rng(seed)
    Zm = Z.generators
    _, s, vt = np.linalg.svd(Zm)
    rank = int(np.sum(s > 1e-12))
    null = vt[rank:]
    worst = 0.0
    witness = None
    for i in range(samples):
        if len(null) and i % 2 == 0:
            y = null.T @ rng.normal(size=len(null))
        else:
            y = rng.normal(size=Z.m)
        if in_cone(y, Z) and in_cone(-y, Z):
            n = float(np.linalg.norm(y))
            if n > worst:
                worst, witness = n, y
    return {"pointed": worst <= 1e-10, "worst_norm": worst, "witness": witness}
