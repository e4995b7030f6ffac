"""Hadamard manifolds: flat Euclidean space and the hyperboloid model.

Points and tangent vectors are plain 1-D numpy arrays in ambient
coordinates (length ``n`` for :class:`Euclidean`, ``n + 1`` for
:class:`Hyperboloid`).  A manifold object owns all geometry; the arrays
carry no back-reference, so a "manifold mismatch" surfaces as a shape
error raised by :meth:`Manifold.check_point`.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "ManifoldError",
    "Manifold",
    "Euclidean",
    "Hyperboloid",
    "make_manifold",
    "COMPARISON_COEFFICIENT",
]

#: Coefficient of the inner-product term in the comparison inequality.
#: The flat law of cosines pins this to 2.
COMPARISON_COEFFICIENT = 2.0

POINT_TOL = 1e-9
SMALL = 1e-12


class ManifoldError(ValueError):
    """Invalid point, tangent vector or mismatched manifold."""


class Manifold:
    """Common interface of the two geometries."""

    kind: str = "abstract"

    def __init__(self, n: int):
        n = int(n)
        if n < 1:
            raise ManifoldError(f"dimension must be >= 1, got {n}")
        self.n = n

    # -- identity ------------------------------------------------------
    @property
    def ambient_dim(self) -> int:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.n == other.n

    def __hash__(self):
        return hash((self.kind, self.n))

    def __repr__(self):
        return f"{type(self).__name__}({self.n})"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "dim": self.n}

    # -- validation ----------------------------------------------------
    def _as_array(self, x, what: str) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.shape[0] != self.ambient_dim:
            raise ManifoldError(
                f"{what} for {self!r} needs {self.ambient_dim} ambient "
                f"coordinates, got shape {x.shape}"
            )
        if not np.all(np.isfinite(x)):
            raise ManifoldError(f"{what} has non-finite coordinates")
        return x

    def check_point(self, p) -> np.ndarray:
        return self._as_array(p, "point")

    def check_tangent(self, p, v) -> np.ndarray:
        return self._as_array(v, "tangent vector")

    # -- geometry (subclasses) -----------------------------------------
    def inner(self, p, u, v) -> float:
        raise NotImplementedError

    def norm(self, p, v) -> float:
        return float(np.sqrt(max(self.inner(p, v, v), 0.0)))

    def dist(self, p, q) -> float:
        raise NotImplementedError

    def exp(self, p, v) -> np.ndarray:
        raise NotImplementedError

    def log(self, p, q) -> np.ndarray:
        raise NotImplementedError

    def exp_differential(self, p, u, w) -> np.ndarray:
        """Differential of ``exp_p`` at ``u`` applied to ``w`` (both in T_pM)."""
        raise NotImplementedError

    def project_tangent(self, p, v) -> np.ndarray:
        raise NotImplementedError

    def origin(self) -> np.ndarray:
        raise NotImplementedError

    def tangent_basis(self, p) -> np.ndarray:
        """Rows form an orthonormal basis of T_pM."""
        raise NotImplementedError

    # -- derived -------------------------------------------------------
    def sq_dist(self, p, q) -> float:
        return self.dist(p, q) ** 2

    def geodesic(self, p, q, t: float) -> np.ndarray:
        """Point at parameter ``t`` on the geodesic segment from p to q."""
        return self.exp(p, t * self.log(p, q))

    def grad_sq_dist(self, q, p) -> np.ndarray:
        """Riemannian gradient at ``p`` of ``x -> d(q, x)**2``, a vector in T_pM."""
        return -2.0 * self.log(p, q)

    def comparison_residual(self, p1, p2, p3, coefficient: float | None = None) -> float:
        """Slack in the nonpositive-curvature law of cosines at vertex ``p3``.

        Returns ``d²(p1,p2) - [d²(p1,p3) + d²(p3,p2) - c<log_{p3} p1, log_{p3} p2>]``
        with ``c = COMPARISON_COEFFICIENT``.  Nonnegative on Hadamard
        manifolds, identically zero in flat space.
        """
        c = COMPARISON_COEFFICIENT if coefficient is None else coefficient
        u = self.log(p3, p1)
        v = self.log(p3, p2)
        return (
            self.sq_dist(p1, p2)
            - self.sq_dist(p1, p3)
            - self.sq_dist(p3, p2)
            + c * self.inner(p3, u, v)
        )

    def random_point(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        o = self.origin()
        v = self.tangent_basis(o).T @ rng.normal(scale=scale, size=self.n)
        return self.exp(o, v)

    def random_tangent(self, rng: np.random.Generator, p, scale: float = 1.0) -> np.ndarray:
        return self.tangent_basis(p).T @ rng.normal(scale=scale, size=self.n)

    def coords(self, p, v) -> np.ndarray:
        """Coordinates of ``v`` in :meth:`tangent_basis` at ``p``."""
        B = self.tangent_basis(p)
        return np.array([self.inner(p, b, v) for b in B])


class Euclidean(Manifold):
    """Flat space R^n with the standard metric."""

    kind = "euclidean"

    @property
    def ambient_dim(self) -> int:
        return self.n

    def inner(self, p, u, v) -> float:
        return float(np.dot(u, v))

    def dist(self, p, q) -> float:
        p = self.check_point(p)
        q = self.check_point(q)
        return float(np.linalg.norm(q - p))

    def exp(self, p, v) -> np.ndarray:
        p = self.check_point(p)
        v = self.check_tangent(p, v)
        return p + v

    def log(self, p, q) -> np.ndarray:
        p = self.check_point(p)
        q = self.check_point(q)
        return q - p

    def exp_differential(self, p, u, w) -> np.ndarray:
        return np.asarray(w, dtype=float)

    def project_tangent(self, p, v) -> np.ndarray:
        return np.asarray(v, dtype=float)

    def origin(self) -> np.ndarray:
        return np.zeros(self.n)

    def tangent_basis(self, p) -> np.ndarray:
        return np.eye(self.n)


def minkowski(u, v) -> float:
    """Lorentzian product ``-u0 v0 + sum_i ui vi``."""
    return float(np.dot(u[1:], v[1:]) - u[0] * v[0])


class Hyperboloid(Manifold):
    """Hyperbolic space H^n as the upper sheet ``<x, x>_L = -1, x0 > 0`` in R^{n+1}."""

    kind = "hyperboloid"

    @property
    def ambient_dim(self) -> int:
        return self.n + 1

    def check_point(self, p) -> np.ndarray:
        p = self._as_array(p, "point")
        # rounding in <p,p>_L grows like eps * p0**2
        tol = POINT_TOL * max(1.0, p[0] * p[0])
        if p[0] <= 0 or abs(minkowski(p, p) + 1.0) > tol:
            raise ManifoldError(
                f"point {p} is not on the hyperboloid (<p,p>_L = {minkowski(p, p)})"
            )
        return p

    def check_tangent(self, p, v) -> np.ndarray:
        v = self._as_array(v, "tangent vector")
        scale = max(1.0, float(np.max(np.abs(p))) * max(1.0, float(np.max(np.abs(v)))))
        if abs(minkowski(p, v)) > POINT_TOL * scale:
            raise ManifoldError(f"vector {v} is not tangent at {p}")
        return v

    def inner(self, p, u, v) -> float:
        return minkowski(u, v)

    def _renormalize(self, x: np.ndarray) -> np.ndarray:
        # Rescaling by sqrt(-<x,x>_L) cancels catastrophically far from the
        # origin; rebuilding the time coordinate from the spatial part does not.
        y = x.copy()
        y[0] = np.sqrt(1.0 + np.dot(x[1:], x[1:]))
        if not np.all(np.isfinite(y)):
            raise ManifoldError("hyperboloid coordinates overflowed")
        return y

    def project_tangent(self, p, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return v + minkowski(p, v) * p

    def dist(self, p, q) -> float:
        p = self.check_point(p)
        q = self.check_point(q)
        c = -minkowski(p, q)
        if c > 2.0:
            return float(np.arccosh(c))
        # <p-q, p-q>_L = 4 sinh²(d/2); accurate for nearby points
        dd = p - q
        s = max(minkowski(dd, dd), 0.0)
        return float(2.0 * np.arcsinh(0.5 * np.sqrt(s)))

    def exp(self, p, v) -> np.ndarray:
        p = self.check_point(p)
        v = self.check_tangent(p, v)
        r = self.norm(p, v)
        if r < SMALL:
            return p.copy()
        with np.errstate(over="ignore", invalid="ignore"):
            q = np.cosh(r) * p + (np.sinh(r) / r) * v
        if not np.all(np.isfinite(q)):
            raise ManifoldError(f"exp overflow for tangent norm {r}")
        return self._renormalize(q)

    def log(self, p, q) -> np.ndarray:
        p = self.check_point(p)
        q = self.check_point(q)
        d = self.dist(p, q)
        if d < SMALL:
            return np.zeros_like(p)
        dq = q - p
        # q + <p,q>p rewritten around q - p to avoid cancellation
        u = dq + minkowski(p, dq) * p
        u = self.project_tangent(p, u)
        nu = self.norm(p, u)
        if nu == 0.0:
            return np.zeros_like(p)
        return (d / nu) * u

    def exp_differential(self, p, u, w) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        u = np.asarray(u, dtype=float)
        w = np.asarray(w, dtype=float)
        r = self.norm(p, u)
        uw = minkowski(u, w)
        if r < 1e-4:
            sinc = 1.0 + r * r / 6.0
            c3 = 1.0 / 3.0 + r * r / 30.0
        else:
            sinc = np.sinh(r) / r
            c3 = (r * np.cosh(r) - np.sinh(r)) / r**3
        return sinc * uw * p + c3 * uw * u + sinc * w

    def origin(self) -> np.ndarray:
        o = np.zeros(self.n + 1)
        o[0] = 1.0
        return o

    def tangent_basis(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        basis = []
        for i in range(1, self.n + 1):
            e = np.zeros(self.n + 1)
            e[i] = 1.0
            v = self.project_tangent(p, e)
            for b in basis:
                v = v - minkowski(b, v) * b
            v = v / np.sqrt(minkowski(v, v))
            basis.append(v)
        return np.array(basis)


def make_manifold(kind: str, dim: int) -> Manifold:
    kinds = {"euclidean": Euclidean, "hyperboloid": Hyperboloid}
    try:
        return kinds[kind.lower()](dim)
    except KeyError:
        raise ManifoldError(f"unknown manifold kind {kind!r}") from None
