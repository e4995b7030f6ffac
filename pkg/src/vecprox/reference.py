"""Hard-coded flat-space max-scalarization proximal loop.

Only for ``F_i(p) = |p - a_i|²`` on R^n with the orthant cone.  Each step is
the convex QCQP

    min  r² + lam/2 |p - p_k|²
    s.t. |p - a_i| <= sqrt(e_i) r,   |p - a_i| <= |p_k - a_i|

(``r²`` is the max-scalarization ``max_i |p - a_i|²/e_i``) solved by an
interior-point conic solver.  Norm constraints are kept as second-order
cones: squaring them costs about half the digits once the descent set is a
thin lens.  The conic solution fixes the active set; Newton's method on the
KKT system (exact Hessians, all equal to ``2I``) then supplies the last
digits, since a duality-gap tolerance alone pins the point only to about
its square root.  Shares no code with the general solver beyond numpy.
"""
from __future__ import annotations

import numpy as np

__all__ = ["flat_prox_step", "flat_reference_run"]


def flat_prox_step(anchors: np.ndarray, pk: np.ndarray, lam: float, e: np.ndarray) -> np.ndarray:
    import cvxpy as cp

    A = np.asarray(anchors, dtype=float)
    pk = np.asarray(pk, dtype=float)
    radius = np.linalg.norm(pk - A, axis=1)
    p = cp.Variable(pk.shape[0])
    r = cp.Variable(nonneg=True)
    cons = []
    for i, a in enumerate(A):
        cons += [cp.norm(p - a) <= np.sqrt(e[i]) * r, cp.norm(p - a) <= radius[i]]
    prob = cp.Problem(cp.Minimize(cp.square(r) + 0.5 * lam * cp.sum_squares(p - pk)), cons)
    try:
        prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-13, tol_gap_rel=1e-13, tol_feas=1e-13,
                   tol_ktratio=1e-10, max_iter=500)
    except cp.error.SolverError:
        return pk.copy()
    if p.value is None or prob.status not in ("optimal", "optimal_inaccurate"):
        # a singleton descent set: the iterate is already efficient
        return pk.copy()
    x = np.asarray(p.value, dtype=float)
    refined = _newton_kkt(A, pk, lam, e, x)
    return x if refined is None else refined


def _subsets(idx, nonempty):
    from itertools import combinations

    for r in range(1 if nonempty else 0, len(idx) + 1):
        yield from (list(c) for c in combinations(idx, r))


def _newton_kkt(A, pk, lam, e, x, cand_tol=1e-3):
    """Exact KKT refinement, trying each plausible active set (smallest first)."""
    b = np.sum((pk - A) ** 2, axis=1)
    sq = np.sum((x - A) ** 2, axis=1)
    piece = sq / e
    scale = 1 + piece.max()
    pieces = np.flatnonzero(piece >= piece.max() - cand_tol * scale)
    cons = np.flatnonzero(sq >= b - cand_tol * (1 + b))
    best = None
    for act in _subsets(list(pieces), True):
        for con in _subsets(list(cons), False):
            if len(act) + len(con) > len(x) + 1:
                continue
            p = _newton_active(A, pk, lam, e, b, x, np.array(act), np.array(con, dtype=int))
            if p is None:
                continue
            val = np.max(np.sum((p - A) ** 2, axis=1) / e) + 0.5 * lam * np.sum((p - pk) ** 2)
            if best is None or val < best[0]:
                best = (val, p)
        if best is not None:
            break
    return None if best is None else best[1]


def _newton_active(A, pk, lam, e, b, x, act, con, iters=30):
    n, ka, kc = len(x), len(act), len(con)
    D = np.hstack([(2 * (x - A[act]) / e[act, None]).T, (2 * (x - A[con])).T.reshape(n, kc)])
    D = np.vstack([D, np.concatenate([np.ones(ka), np.zeros(kc)])])
    rhs = np.concatenate([-lam * (x - pk), [1.0]])
    mult = np.linalg.lstsq(D, rhs, rcond=None)[0]
    z = np.concatenate([x, [np.max(np.sum((x - A[act]) ** 2, axis=1) / e[act])], mult])

    def parts(z):
        p, t = z[:n], z[n]
        mu, nu = z[n + 1:n + 1 + ka], z[n + 1 + ka:]
        ga = 2 * (p - A[act]) / e[act, None]
        gc = 2 * (p - A[con]).reshape(kc, n)
        R = np.concatenate([
            lam * (p - pk) + ga.T @ mu + gc.T @ nu,
            [mu.sum() - 1.0],
            np.sum((p - A[act]) ** 2, axis=1) / e[act] - t,
            np.sum((p - A[con]) ** 2, axis=1) - b[con],
        ])
        J = np.zeros((len(R), len(z)))
        J[:n, :n] = (lam + 2 * np.sum(mu / e[act]) + 2 * np.sum(nu)) * np.eye(n)
        J[:n, n + 1:n + 1 + ka] = ga.T
        J[:n, n + 1 + ka:] = gc.T
        J[n, n + 1:n + 1 + ka] = 1.0
        J[n + 1:n + 1 + ka, :n] = ga
        J[n + 1:n + 1 + ka, n] = -1.0
        J[n + 1 + ka:, :n] = gc
        return R, J

    for _ in range(iters):
        R, J = parts(z)
        if np.linalg.norm(R) < 1e-15:
            break
        z = z - np.linalg.lstsq(J, R, rcond=None)[0]
    R, _ = parts(z)
    mu, nu = z[n + 1:n + 1 + ka], z[n + 1 + ka:]
    p = z[:n]
    sq = np.sum((p - A) ** 2, axis=1)
    # the descent lens is ~|p_k - p*|² thin near convergence: verify tightly
    if (not np.all(np.isfinite(z)) or np.linalg.norm(R) > 1e-13
            or np.any(mu < -1e-10) or np.any(nu < -1e-10)
            or np.any(sq > b + 1e-15 * (1 + b)) or np.max(sq / e) > z[n] * (1 + 1e-15) + 1e-15
            or np.linalg.norm(p - x) > 1e-3):
        return None
    return p


def flat_reference_run(anchors, p0, lam, e, tol_step: float = 1e-7, max_outer: int = 500):
    """Iterates ``[p0, p1, ...]`` of the flat loop (constant ``lam`` or a schedule)."""
    lams = np.atleast_1d(np.asarray(lam, dtype=float))
    e = np.asarray(e, dtype=float)
    p = np.asarray(p0, dtype=float)
    out = [p.copy()]
    for k in range(max_outer):
        q = flat_prox_step(anchors, p, float(lams[min(k, lams.size - 1)]), e)
        out.append(q)
        if np.linalg.norm(q - p) <= tol_step:
            break
        p = q
    return np.array(out)
