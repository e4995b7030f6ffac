"""One proximal subproblem.

Minimize, over ``Omega = {p : F(p) <=_C F(anchor)}``,

    phi(p) = f_e(F(p)) + (lam / 2) d(p, anchor)**2

where ``f_e`` is the max-form scalarization.  Two solvers are available:

``"epigraph"`` (default)
    Pull the problem back through ``exp_anchor`` (a global diffeomorphism on
    a Hadamard manifold, and an isometry along rays, so
    ``d(exp_anchor(u), anchor) = |u|``) and solve the smooth epigraph
    program ``min t + lam/2 |u|²`` subject to ``<F, z>/<e, z> <= t`` and
    ``<F - F(anchor), z> <= 0`` with SLSQP.

``"subgradient"``
    Riemannian subgradient method with constraint switching and
    ``alpha_t = c / (lam (t + 1))`` steps, returning the best feasible iterate.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, nnls, root

from .cone import GeneratorSet, _denominators, check_direction
from .problem import VectorObjective, eval_objective, objective_gradients

__all__ = [
    "InnerConfig",
    "SubproblemSpec",
    "SubproblemResult",
    "feasibility_residual",
    "prox_objective",
    "solve_subproblem",
]

log = logging.getLogger(__name__)

METHODS = ("epigraph", "subgradient")
# subgradient method: give up after this many iterations without a new best
STALL_ITERS = 2000


@dataclass(frozen=True)
class InnerConfig:
    method: str = "epigraph"
    max_iters: int = 50_000
    tol_opt: float = 1e-8
    tol_feas: float = 1e-10
    step_c: float = 2.0
    verbose: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"inner method must be one of {METHODS}, got {self.method!r}")
        if self.max_iters < 1:
            raise ValueError("inner max_iters must be >= 1")
        if not (self.tol_opt > 0 and self.tol_feas > 0 and self.step_c > 0):
            raise ValueError("inner tolerances and step constant must be positive")


@dataclass(frozen=True, eq=False)
class SubproblemSpec:
    objective: VectorObjective
    anchor: np.ndarray
    lam: float
    direction: np.ndarray
    Z: GeneratorSet
    config: InnerConfig = field(default_factory=InnerConfig)

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"proximal parameter must be positive, got {self.lam}")
        anchor = self.objective.manifold.check_point(self.anchor)
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "direction", check_direction(self.direction, self.Z, unit=False))
        object.__setattr__(self, "_F0", eval_objective(self.objective, anchor))
        object.__setattr__(self, "_den", _denominators(self.direction, self.Z))

    @property
    def anchor_values(self) -> np.ndarray:
        return self._F0


@dataclass
class SubproblemResult:
    point: np.ndarray
    objective_value: float
    feasibility_residual: float
    optimality_estimate: float
    inner_iterations: int
    status: str  # converged | max_iters | failed
    values: np.ndarray = None


def feasibility_residual(p, spec: SubproblemSpec) -> float:
    """``max_j <F(p) - F(anchor), z_j>``; ``p`` is in Omega iff this is <= 0."""
    y = eval_objective(spec.objective, p) - spec.anchor_values
    return float(np.max(spec.Z.generators @ y))


def prox_objective(p, spec: SubproblemSpec) -> float:
    """``f_e(F(p)) + lam/2 d²(p, anchor)`` (the indicator of Omega excluded)."""
    y = eval_objective(spec.objective, p)
    f = float(np.max(spec.Z.generators @ y / spec._den))
    return f + 0.5 * spec.lam * spec.objective.manifold.sq_dist(p, spec.anchor)


def _stationarity(spec: SubproblemSpec, p, u_coords, values, grads_coords, act_tol=1e-7) -> float:
    """Smallest ``|lam u + sum mu_j da_j + sum nu_j dc_j|`` over active pieces.

    ``mu`` is a convex combination over the active scalarization pieces and
    ``nu >= 0`` over active descent constraints; this is the residual of the
    optimality inclusion in normal coordinates at the anchor.
    """
    Zg = spec.Z.generators
    ratios = Zg @ values / spec._den
    fmax = ratios.max()
    act_a = np.flatnonzero(ratios >= fmax - act_tol * (1 + abs(fmax)))
    cons = Zg @ (values - spec.anchor_values)
    act_c = np.flatnonzero(cons >= -act_tol * (1 + np.abs(Zg @ spec.anchor_values)))
    da = (Zg[act_a] / spec._den[act_a, None]) @ grads_coords  # (ka, n)
    dc = Zg[act_c] @ grads_coords  # (kc, n)
    W = 1e6
    A = np.vstack([np.hstack([da.T, dc.T]),
                   np.concatenate([np.full(len(act_a), W), np.zeros(len(act_c))])[None, :]])
    b = np.concatenate([-spec.lam * u_coords, [W]])
    x, _ = nnls(A, b)
    r = A[:-1] @ x - b[:-1]
    return float(np.linalg.norm(r))


def _pull_back(spec: SubproblemSpec, u: np.ndarray) -> np.ndarray:
    """Largest ``s`` in [0,1] (by bisection) with ``exp(anchor, s u)`` in Omega."""
    M = spec.objective.manifold
    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if feasibility_residual(M.exp(spec.anchor, mid * u), spec) <= 0.0:
            lo = mid
        else:
            hi = mid
    return lo * u


def _finish(spec: SubproblemSpec, u: np.ndarray, iters: int) -> SubproblemResult:
    """Repair feasibility, never return worse than the anchor, measure stationarity."""
    M = spec.objective.manifold
    F = spec.objective
    cfg = spec.config
    p = M.exp(spec.anchor, u)
    g = feasibility_residual(p, spec)
    if not np.isfinite(g):
        return SubproblemResult(spec.anchor.copy(), prox_objective(spec.anchor, spec), 0.0,
                                np.inf, iters, "failed", spec.anchor_values.copy())
    if g > cfg.tol_feas:
        u = _pull_back(spec, u)
        p = M.exp(spec.anchor, u)
        g = feasibility_residual(p, spec)
    phi = prox_objective(p, spec)
    phi0 = prox_objective(spec.anchor, spec)
    if phi > phi0 or g > cfg.tol_feas:
        u = np.zeros_like(u)
        p = spec.anchor.copy()
        phi, g = phi0, 0.0
    B = M.tangent_basis(spec.anchor)
    uc = np.array([M.inner(spec.anchor, b, u) for b in B])
    values = eval_objective(F, p)
    G = objective_gradients(F, p)
    # chain rule through exp_anchor: coordinates of the pulled-back gradients
    J = np.array([M.exp_differential(spec.anchor, u, b) for b in B])
    Gc = np.array([[M.inner(p, g_i, j) for j in J] for g_i in G])
    opt = _stationarity(spec, p, uc, values, Gc)
    status = "converged" if opt <= np.sqrt(cfg.tol_opt) * (1 + spec.lam) else "max_iters"
    return SubproblemResult(p, phi, max(g, 0.0), opt, iters, status, values)


def _solve_epigraph(spec: SubproblemSpec) -> SubproblemResult:
    M = spec.objective.manifold
    F = spec.objective
    a = spec.anchor
    B = M.tangent_basis(a)
    n = B.shape[0]
    Zg = spec.Z.generators
    den = spec._den
    lam = spec.lam
    F0 = spec.anchor_values
    cache: dict = {}

    def evaluate(x):
        key = x[:n].tobytes()
        if key not in cache:
            u = B.T @ x[:n]
            p = M.exp(a, u)
            y = eval_objective(F, p)
            G = objective_gradients(F, p)
            J = np.array([M.exp_differential(a, u, b) for b in B])
            Gc = np.array([[M.inner(p, g_i, j) for j in J] for g_i in G])
            cache.clear()
            cache[key] = (y, Gc)
        return cache[key]

    def fun(x):
        return x[n] + 0.5 * lam * float(x[:n] @ x[:n])

    def jac(x):
        return np.concatenate([lam * x[:n], [1.0]])

    def cons(x):
        y, _ = evaluate(x)
        return np.concatenate([x[n] - Zg @ y / den, -(Zg @ (y - F0))])

    def cons_jac(x):
        _, Gc = evaluate(x)
        k = len(Zg)
        top = np.hstack([-(Zg / den[:, None]) @ Gc, np.ones((k, 1))])
        bot = np.hstack([-(Zg @ Gc), np.zeros((k, 1))])
        return np.vstack([top, bot])

    t0 = float(np.max(Zg @ F0 / den))
    x = np.concatenate([np.zeros(n), [t0]])
    total = 0
    for _ in range(3):
        res = minimize(fun, x, jac=jac, method="SLSQP",
                       constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
                       options={"maxiter": min(spec.config.max_iters, 1000), "ftol": 1e-16})
        total += int(res.nit)
        if spec.config.verbose:
            log.debug("SLSQP status=%s nit=%s msg=%s", res.status, res.nit, res.message)
        if not np.all(np.isfinite(res.x)):
            break
        step = float(np.linalg.norm(res.x[:n] - x[:n]))
        x = res.x
        if step <= 1e-13 * (1 + np.linalg.norm(x[:n])):
            break
    polished = _polish_kkt(spec, x[:n], evaluate)
    if polished is not None:
        x = np.concatenate([polished, [0.0]])
    return _finish(spec, B.T @ x[:n], total)


def _polish_kkt(spec: SubproblemSpec, uc: np.ndarray, evaluate, cand_tol: float = 1e-4):
    """Newton-type refinement of an SLSQP point.

    For each plausible active set (smallest first) solve the square KKT
    system ``lam u + Da^T mu + Dc^T nu = 0``, ``sum(mu) = 1``,
    ``a_A(u) = t``, ``c_C(u) = 0`` with MINPACK's hybrid method, and keep
    the first set whose solution has nonnegative multipliers and respects
    the inactive pieces.  Returns refined coordinates or ``None``.
    """
    from itertools import combinations

    Zg = spec.Z.generators
    den = spec._den
    F0 = spec.anchor_values
    n = len(uc)
    y, _ = evaluate(np.concatenate([uc, [0.0]]))
    a = Zg @ y / den
    c = Zg @ (y - F0)
    fmax = float(a.max())
    scale = 1.0 + abs(fmax) + float(np.max(np.abs(Zg @ F0)))
    A0 = np.flatnonzero(a >= fmax - 1e-9 * scale)
    C0 = np.flatnonzero(c >= -1e-9 * scale)
    if len(A0) + len(C0) <= n + 1:
        u = _kkt_active(spec, uc, evaluate, A0, C0, scale)
        if u is not None:
            return u
    pieces = list(np.flatnonzero(a >= fmax - cand_tol * scale))
    cons = list(np.flatnonzero(c >= -cand_tol * scale))
    for ka in range(1, len(pieces) + 1):
        found = []
        for A in combinations(pieces, ka):
            for kc in range(len(cons) + 1):
                for C in combinations(cons, kc):
                    if ka + kc > n + 1:
                        continue
                    u = _kkt_active(spec, uc, evaluate, np.array(A), np.array(C, dtype=int), scale)
                    if u is not None:
                        found.append((float(u @ u), u))
        if found:
            return min(found, key=lambda f: f[0])[1]
    return None


def _kkt_active(spec, uc, evaluate, A, C, scale):
    Zg = spec.Z.generators
    den = spec._den
    F0 = spec.anchor_values
    lam = spec.lam
    n = len(uc)
    ka = len(A)

    def residual(z):
        u, t = z[:n], z[n]
        mu = z[n + 1:n + 1 + ka]
        nu = z[n + 1 + ka:]
        try:
            with np.errstate(all="ignore"):
                yy, Gc = evaluate(np.concatenate([u, [0.0]]))
        except ValueError:
            return np.full(n + 1 + ka + len(C), 1e10)
        da = (Zg[A] / den[A, None]) @ Gc
        dc = Zg[C] @ Gc if len(C) else np.zeros((0, n))
        return np.concatenate([
            lam * u + da.T @ mu + dc.T @ nu,
            [mu.sum() - 1.0],
            Zg[A] @ yy / den[A] - t,
            Zg[C] @ (yy - F0) if len(C) else np.zeros(0),
        ])

    y, _ = evaluate(np.concatenate([uc, [0.0]]))
    z0 = np.concatenate([uc, [float(np.max(Zg[A] @ y / den[A]))], np.full(ka, 1.0 / ka), np.zeros(len(C))])
    try:
        sol = root(residual, z0, method="hybr", options={"xtol": 1e-15, "factor": 0.1})
    except (ValueError, np.linalg.LinAlgError):
        return None
    z = sol.x
    if not np.all(np.isfinite(z)):
        return None
    r = np.linalg.norm(residual(z))
    mu = z[n + 1:n + 1 + ka]
    nu = z[n + 1 + ka:]
    if r > 1e-12 * scale or np.any(mu < -1e-10) or np.any(nu < -1e-10):
        return None
    if np.linalg.norm(z[:n] - uc) > 1e-3 * (1.0 + np.linalg.norm(uc)):
        return None
    yy, _ = evaluate(np.concatenate([z[:n], [0.0]]))
    if np.max(Zg @ yy / den) > z[n] + 1e-14 * scale:
        return None
    if np.max(Zg @ (yy - F0)) > spec.config.tol_feas:
        return None
    return z[:n]


def _solve_subgradient(spec: SubproblemSpec) -> SubproblemResult:
    M = spec.objective.manifold
    F = spec.objective
    cfg = spec.config
    Zg = spec.Z.generators
    den = spec._den
    q = spec.anchor.copy()
    best_q, best_phi = q.copy(), prox_objective(q, spec)
    improvements: list[float] = []
    last_improvement = 0
    it = 0
    for it in range(1, cfg.max_iters + 1):
        y = eval_objective(F, q)
        G = objective_gradients(F, q)
        g = float(np.max(Zg @ (y - spec.anchor_values)))
        if g > cfg.tol_feas:
            j = int(np.argmax(Zg @ (y - spec.anchor_values)))
            d = -(Zg[j] @ G)
        else:
            j = int(np.argmax(Zg @ y / den))
            d = -(Zg[j] @ G / den[j] - spec.lam * M.log(q, spec.anchor))
        alpha = cfg.step_c / (spec.lam * it)
        q = M.exp(q, M.project_tangent(q, alpha * d))
        if feasibility_residual(q, spec) <= cfg.tol_feas:
            phi = prox_objective(q, spec)
            if phi < best_phi:
                improvements.append(best_phi - phi)
                best_q, best_phi = q.copy(), phi
                last_improvement = it
                if len(improvements) >= 25 and sum(improvements[-25:]) < cfg.tol_opt * (1 + abs(best_phi)):
                    break
        if it - last_improvement >= STALL_ITERS:
            break
        if cfg.verbose and it % 1000 == 0:
            log.debug("subgradient it=%d best=%.12g", it, best_phi)
    res = _finish(spec, M.log(spec.anchor, best_q), it)
    if it >= cfg.max_iters and res.status == "converged":
        res.status = "max_iters"
    return res


def solve_subproblem(spec: SubproblemSpec) -> SubproblemResult:
    """Approximate ``argmin_{p in Omega} phi(p)`` from the feasible anchor.

    The returned point is always feasible to ``tol_feas`` and never has a
    larger ``phi`` than the anchor, unless the oracle produced NaNs
    (``status="failed"``).
    """
    try:
        if spec.config.method == "epigraph":
            return _solve_epigraph(spec)
        return _solve_subgradient(spec)
    except (ValueError, FloatingPointError) as exc:
        log.warning("subproblem failed: %s", exc)
        return SubproblemResult(spec.anchor.copy(), float("nan"), float("nan"), float("inf"),
                                0, "failed", spec.anchor_values.copy())
