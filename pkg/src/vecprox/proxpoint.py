"""The outer proximal point loop, its trace, and the convergence audits."""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .cone import GeneratorSet, check_direction, default_direction, scalarize
from .manifold import Manifold
from .problem import ProblemInstance, VectorObjective, eval_objective
from .subsolver import InnerConfig, SubproblemSpec, solve_subproblem

__all__ = [
    "OuterConfig",
    "IterationRecord",
    "SolveTrace",
    "AuditReport",
    "run",
    "descent_audit",
    "fejer_audit",
    "grid_scalarization_check",
    "write_trace_csv",
    "read_trace_csv",
    "result_json",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = "1"
STATUSES = ("step_converged", "max_outer", "inner_failure")


@dataclass(frozen=True)
class OuterConfig:
    """Schedules and stopping rule of the outer loop.

    ``lam`` is a constant or a sequence (the last entry is held once the
    sequence runs out); ``directions`` is ``None`` (the cone's default
    direction), one unit vector, or a list used cyclically.
    """

    lam: Union[float, Sequence[float]] = 1.0
    lambda_max: Optional[float] = None
    directions: Optional[Sequence[Sequence[float]]] = None
    tol_step: float = 1e-7
    max_outer: int = 500
    seed: int = 0
    inner: InnerConfig = field(default_factory=InnerConfig)

    def __post_init__(self):
        lams = np.atleast_1d(np.asarray(self.lam, dtype=float))
        if lams.size == 0 or not np.all(np.isfinite(lams)) or np.any(lams <= 0):
            raise ValueError("proximal parameters must be positive (lambda_k > 0)")
        bound = float(lams.max()) if self.lambda_max is None else float(self.lambda_max)
        if np.any(lams > bound):
            raise ValueError(f"proximal parameters exceed lambda_max={bound}")
        if self.tol_step <= 0:
            raise ValueError("tol_step must be positive")
        if int(self.max_outer) < 1:
            raise ValueError("max_outer must be >= 1")

    def lambda_at(self, k: int) -> float:
        lams = np.atleast_1d(np.asarray(self.lam, dtype=float))
        return float(lams[min(k, lams.size - 1)])

    def direction_list(self, Z: GeneratorSet) -> list[np.ndarray]:
        if self.directions is None:
            return [default_direction(Z)]
        D = np.atleast_2d(np.asarray(self.directions, dtype=float))
        return [check_direction(e, Z, unit=True) for e in D]


@dataclass
class IterationRecord:
    k: int
    point: np.ndarray
    values: np.ndarray
    fk_value: float
    step: float
    feas_residual: float
    inner_iters: int
    inner_status: str
    wall_ms: float
    lam: float = float("nan")  # parameter that produced this iterate
    direction: Optional[np.ndarray] = None


@dataclass
class SolveTrace:
    records: list[IterationRecord]
    status: str
    manifold: Manifold
    Z: GeneratorSet

    def __len__(self):
        return len(self.records)

    @property
    def points(self) -> np.ndarray:
        return np.array([r.point for r in self.records])

    @property
    def values(self) -> np.ndarray:
        return np.array([r.values for r in self.records])

    @property
    def terminal(self) -> IterationRecord:
        return self.records[-1]

    @property
    def n_iter(self) -> int:
        return len(self.records) - 1


def run(problem: ProblemInstance, p0, cfg: OuterConfig = OuterConfig(), *,
        record_time: bool = False) -> SolveTrace:
    """Iterate ``p^{k+1} = argmin_{Omega_k} f_k(F(p)) + lam_k/2 d²(p, p^k)``.

    Stops when ``d(p^{k+1}, p^k) <= tol_step`` (``step_converged``), after
    ``max_outer`` steps (``max_outer``), or on a failed subproblem
    (``inner_failure``).  ``wall_ms`` is recorded only with ``record_time``;
    otherwise it is 0 so traces are reproducible byte for byte.
    """
    F = problem.objective
    M = F.manifold
    Z = problem.Z
    p = M.check_point(p0).copy()
    dirs = cfg.direction_list(Z)
    y = eval_objective(F, p)
    records = [IterationRecord(0, p, y, scalarize(y, dirs[0], Z), 0.0, 0.0, 0, "start", 0.0)]
    status = "max_outer"
    for k in range(int(cfg.max_outer)):
        lam = cfg.lambda_at(k)
        e = dirs[k % len(dirs)]
        t0 = time.perf_counter()
        spec = SubproblemSpec(F, p, lam, e, Z, cfg.inner)
        res = solve_subproblem(spec)
        wall = (time.perf_counter() - t0) * 1e3 if record_time else 0.0
        if res.status == "failed":
            status = "inner_failure"
            break
        q = res.point
        step = M.dist(p, q)
        yq = res.values if res.values is not None else eval_objective(F, q)
        e_next = dirs[(k + 1) % len(dirs)]
        records.append(IterationRecord(k + 1, q, yq, scalarize(yq, e_next, Z), step,
                                       res.feasibility_residual, res.inner_iterations,
                                       res.status, wall, lam, e.copy()))
        p = q
        if step <= cfg.tol_step:
            status = "step_converged"
            break
    return SolveTrace(records, status, M, Z)


# -- audits ---------------------------------------------------------------

@dataclass
class AuditReport:
    name: str
    passed: bool
    hard: bool = True
    worst: float = 0.0
    violations: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "hard": self.hard,
            "worst": self.worst,
            "violations": list(self.violations),
            "details": self.details,
        }


def descent_audit(trace: SolveTrace, Z: GeneratorSet | None = None, slack: float = 1e-10) -> AuditReport:
    """Check ``F(p^{k+1}) <=_C F(p^k)`` and the scalarized prox-descent inequality.

    The vector check is ``max_j <F(p^{k+1}) - F(p^k), z_j> <= slack``.  The
    scalar check ``f_k(F(p^{k+1})) + lam_k/2 d² <= f_k(F(p^k)) + slack``
    needs the per-step ``lam_k``/``e^k``, so it is skipped for traces read
    back from CSV alone.
    """
    Z = trace.Z if Z is None else Z
    M = trace.manifold
    worst = -np.inf
    worst_lyap = -np.inf
    bad = []
    lyap_checked = 0
    for i, (a, b) in enumerate(zip(trace.records, trace.records[1:])):
        gap = float(np.max(Z.generators @ (b.values - a.values)))
        lyap = -np.inf
        if b.direction is not None and np.isfinite(b.lam):
            lhs = scalarize(b.values, b.direction, Z) + 0.5 * b.lam * M.sq_dist(a.point, b.point)
            lyap = lhs - scalarize(a.values, b.direction, Z)
            lyap_checked += 1
        worst = max(worst, gap)
        worst_lyap = max(worst_lyap, lyap)
        if gap > slack or lyap > slack:
            bad.append(i)
    if len(trace.records) < 2:
        worst = worst_lyap = 0.0
    return AuditReport("descent", not bad, True, float(worst), bad,
                       {"worst_lyapunov": float(worst_lyap), "lyapunov_steps_checked": lyap_checked,
                        "slack": slack})


def fejer_audit(trace: SolveTrace, w=None, slack: float = 1e-10, *,
                objective: VectorObjective | None = None, w_values=None) -> AuditReport:
    """Check ``d(w, p^{k+1}) <= d(w, p^k) + slack`` along the trace.

    ``w`` defaults to the terminal iterate.  The check is hard (a violation
    fails the audit) only when ``F(w) <=_C F(p^k)`` is verified for every
    ``k``, which needs ``F(w)``: from ``w_values``, from ``objective``, or
    from the trace itself when ``w`` is the terminal iterate.  Otherwise the
    report is advisory.  Also checks the boundedness consequence
    ``d(p^0, p^k) <= 2 d(p^0, w)``.
    """
    M = trace.manifold
    Z = trace.Z
    if w is None:
        w = trace.terminal.point
        w_values = trace.terminal.values
    w = M.check_point(w)
    if w_values is None and objective is not None:
        w_values = eval_objective(objective, w)
    dominates = False
    if w_values is not None:
        dom = [float(np.max(Z.generators @ (np.asarray(w_values) - r.values))) for r in trace.records]
        dominates = max(dom) <= slack
    d = np.array([M.dist(w, r.point) for r in trace.records])
    inc = np.diff(d)
    bad = [int(k) for k in np.flatnonzero(inc > slack)]
    p0 = trace.records[0].point
    radius = max(M.dist(p0, r.point) for r in trace.records)
    bounded = radius <= 2.0 * d[0] + slack
    worst = float(inc.max()) if inc.size else 0.0
    bounded = bool(bounded)
    dominates = bool(dominates)
    passed = not bad and bounded
    return AuditReport("fejer", passed, dominates, worst, bad,
                       {"witness_dominates": dominates, "distances": d.tolist(),
                        "max_radius": radius, "bounded": bounded, "slack": slack})


def grid_scalarization_check(objective: VectorObjective, Z: GeneratorSet, e, lo, hi,
                             n: int = 200, tol: float = 1e-12) -> AuditReport:
    """Grid argmin of ``f_e∘F`` must not be strictly dominated on the grid.

    Works on 2-D Euclidean objectives.  A point ``q`` strictly dominates
    ``p*`` when ``<F(p*) - F(q), z_j> > tol`` for every generator.
    """
    if objective.manifold.ambient_dim != 2:
        raise ValueError("grid check needs a 2-D objective")
    xs = np.linspace(lo[0], hi[0], n)
    ys = np.linspace(lo[1], hi[1], n)
    P = np.array([[x, y] for x in xs for y in ys])
    Y = np.array([objective.value(p) for p in P])
    e = np.asarray(e, dtype=float)
    s = np.max((Y @ Z.generators.T) / (Z.generators @ e), axis=1)
    i = int(np.argmin(s))
    margins = (Y[i] - Y) @ Z.generators.T  # (N, J)
    dominated_by = np.flatnonzero(np.all(margins > tol, axis=1))
    return AuditReport("grid_weak_efficiency", dominated_by.size == 0, True,
                       float(np.max(np.min(margins, axis=1))),
                       dominated_by[:10].tolist(), {"argmin": P[i].tolist(), "grid": n})


# -- serialization --------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".16e")


def trace_header(m: int, d: int) -> list[str]:
    return (["k", "step", "f_k_value", "feas_residual", "inner_iters", "wall_ms"]
            + [f"F_{i}" for i in range(m)] + [f"x_{i}" for i in range(d)])


def write_trace_csv(trace: SolveTrace, path=None) -> str:
    """Trace as CSV text (written to ``path`` when given)."""
    m = trace.Z.m
    d = trace.manifold.ambient_dim
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(trace_header(m, d))
    for r in trace.records:
        w.writerow([r.k, _fmt(r.step), _fmt(r.fk_value), _fmt(r.feas_residual), r.inner_iters,
                    _fmt(r.wall_ms)] + [_fmt(v) for v in r.values] + [_fmt(v) for v in r.point])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def result_json(trace: SolveTrace, audits: Sequence[AuditReport] = ()) -> dict:
    t = trace.terminal
    return {
        "schema_version": SCHEMA_VERSION,
        "status": trace.status,
        "iterations": trace.n_iter,
        "terminal_point": t.point.tolist(),
        "terminal_values": t.values.tolist(),
        "terminal_f_k_value": t.fk_value,
        "terminal_step": t.step,
        "manifold": trace.manifold.to_dict(),
        "cone": trace.Z.to_dict(),
        "steps": [
            {"k": r.k, "lambda": r.lam, "direction": r.direction.tolist(), "inner_status": r.inner_status}
            for r in trace.records[1:]
        ],
        "audits": {a.name: {"passed": a.passed, "hard": a.hard, "worst": a.worst,
                            "violations": list(a.violations)} for a in audits},
    }


def read_trace_csv(source, manifold: Manifold, Z: GeneratorSet, result: dict | None = None) -> SolveTrace:
    """Parse a trace CSV (path or text) back into a :class:`SolveTrace`.

    Per-step ``lambda``, direction, inner status and the terminal status live
    in the JSON result; pass it as ``result`` for a complete round trip.
    """
    if isinstance(source, str) and "\n" in source:
        text = source
    else:
        with open(source, newline="") as fh:
            text = fh.read()
    rows = list(csv.reader(io.StringIO(text)))
    header, rows = rows[0], rows[1:]
    m, d = Z.m, manifold.ambient_dim
    if header != trace_header(m, d):
        raise ValueError("trace CSV header does not match manifold/cone dimensions")
    steps = {s["k"]: s for s in (result or {}).get("steps", [])}
    records = []
    for row in rows:
        k = int(row[0])
        vals = np.array([float(v) for v in row[6:6 + m]])
        pt = np.array([float(v) for v in row[6 + m:6 + m + d]])
        s = steps.get(k)
        records.append(IterationRecord(
            k, pt, vals, float(row[2]), float(row[1]), float(row[3]), int(row[4]),
            s["inner_status"] if s else ("start" if k == 0 else "unknown"), float(row[5]),
            float(s["lambda"]) if s else float("nan"),
            np.array(s["direction"], dtype=float) if s else None,
        ))
    status = (result or {}).get("status", "unknown")
    return SolveTrace(records, status, manifold, Z)


def dump_result(trace: SolveTrace, path, audits: Sequence[AuditReport] = ()) -> dict:
    doc = result_json(trace, audits)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
    return doc
