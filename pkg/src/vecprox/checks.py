"""Randomized property suites run by ``vecprox check``.

Each suite returns a list of :class:`PropertyResult`; tolerances are the
contract values and are not tuned per run.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from . import manifold as mf
from .cone import (
    in_cone,
    make_generator_set,
    scalarize,
    scalarize_inf_oracle,
)
from .problem import (
    eval_objective,
    make_builtin,
    objective_gradients,
    scalarized_subgradient,
    sq_distances,
)
from .proxpoint import OuterConfig, descent_audit, fejer_audit, run
from .sharpness import SharpnessQuery, estimate_sharpness_modulus, radial_probes, scalar_transfer_audit
from .problem import norms

__all__ = ["PropertyResult", "SUITES", "run_suite"]


@dataclass
class PropertyResult:
    suite: str
    name: str
    passed: bool
    worst: float
    tolerance: float
    samples: int
    seconds: float = 0.0

    def to_dict(self):
        d = asdict(self)
        d["passed"] = bool(d["passed"])
        return d


def _prop(suite, name, worst, tol, samples, t0, *, lower=False):
    passed = worst >= -tol if lower else worst <= tol
    return PropertyResult(suite, name, bool(passed), float(worst), tol, samples, time.perf_counter() - t0)


def _geodesic_fd(M, f, p, u, h=1e-5):
    return (f(M.exp(p, h * u)) - f(M.exp(p, -h * u))) / (2 * h)


# -- geometry -------------------------------------------------------------

def geometry_suite(seed: int = 0, samples: int = 1000) -> list[PropertyResult]:
    rng = np.random.default_rng(seed)
    out = []
    spaces = [mf.Euclidean(3), mf.Hyperboloid(2), mf.Hyperboloid(3)]

    t0 = time.perf_counter()
    worst = 0.0
    for M in spaces:
        for _ in range(samples // 2):
            p = M.random_point(rng)
            v = M.random_tangent(rng, p)
            v *= rng.uniform(0, 10) / M.norm(p, v)
            q = M.exp(p, v)
            worst = max(worst, M.dist(M.exp(p, M.log(p, q)), q))
    out.append(_prop("geometry", "exp_log_round_trip", worst, 1e-8, len(spaces) * (samples // 2), t0))

    t0 = time.perf_counter()
    worst = 0.0
    for M in spaces:
        for _ in range(samples // 2):
            p, q = M.random_point(rng), M.random_point(rng)
            worst = max(worst, abs(M.norm(p, M.log(p, q)) - M.dist(p, q)))
    out.append(_prop("geometry", "log_norm_equals_dist", worst, 1e-9, len(spaces) * (samples // 2), t0))

    t0 = time.perf_counter()
    worst = 0.0
    n = 0
    for M in spaces:
        for _ in range(50):
            q, p = M.random_point(rng), M.random_point(rng)
            g = M.grad_sq_dist(q, p)
            for _ in range(4):
                u = M.random_tangent(rng, p)
                u /= M.norm(p, u)
                fd = _geodesic_fd(M, lambda x: M.sq_dist(q, x), p, u)
                an = M.inner(p, g, u)
                worst = max(worst, abs(fd - an) / max(1.0, abs(an)))
                n += 1
    out.append(_prop("geometry", "grad_sq_dist_vs_fd", worst, 1e-5, n, t0))

    t0 = time.perf_counter()
    H = mf.Hyperboloid(2)
    lowest = np.inf
    for _ in range(samples):
        p1, p2, p3 = (H.random_point(rng, 1.5) for _ in range(3))
        lowest = min(lowest, H.comparison_residual(p1, p2, p3))
    out.append(_prop("geometry", "comparison_residual_hyperboloid_nonnegative", lowest, 1e-9, samples,
                     t0, lower=True))

    t0 = time.perf_counter()
    E = mf.Euclidean(3)
    worst = 0.0
    for _ in range(samples):
        p1, p2, p3 = (E.random_point(rng) for _ in range(3))
        worst = max(worst, abs(E.comparison_residual(p1, p2, p3)))
    out.append(_prop("geometry", "comparison_residual_euclidean_zero", worst, 1e-9, samples, t0))

    t0 = time.perf_counter()
    worst = -np.inf
    for M in spaces:
        for _ in range(samples // 4):
            q, a, b = M.random_point(rng), M.random_point(rng), M.random_point(rng)
            t = rng.uniform()
            lhs = M.sq_dist(q, M.geodesic(a, b, t))
            rhs = (1 - t) * M.sq_dist(q, a) + t * M.sq_dist(q, b) - t * (1 - t) * M.sq_dist(a, b)
            worst = max(worst, lhs - rhs)
    out.append(_prop("geometry", "sq_dist_strong_convexity", worst, 1e-8, len(spaces) * (samples // 4), t0))
    return out


# -- scalarization --------------------------------------------------------

def _random_cone(rng, m):
    """Orthant or a random pointed polyhedral cone generated by a perturbed basis."""
    if rng.uniform() < 0.5:
        return make_generator_set("orthant", m)
    B = np.eye(m) + 0.3 * rng.normal(size=(m, m))
    return make_generator_set("custom", generators=B)


def _interior(rng, Z):
    # e with <e, z_j> > 0: solve Z e = positive target
    target = rng.uniform(0.5, 1.5, size=len(Z))
    e = np.linalg.lstsq(Z.generators, target, rcond=None)[0]
    return e / np.linalg.norm(e)


def scalarization_suite(seed: int = 0, samples: int = 10_000) -> list[PropertyResult]:
    rng = np.random.default_rng(seed)
    out = []
    cones = []
    for _ in range(20):
        m = int(rng.integers(1, 5))
        Z = make_generator_set("scalar") if m == 1 else _random_cone(rng, m)
        cones.append((Z, _interior(rng, Z)))

    t0 = time.perf_counter()
    worst = 0.0
    for i in range(samples):
        Z, e = cones[i % len(cones)]
        y = rng.normal(scale=3.0, size=Z.m)
        a = rng.normal(scale=3.0)
        t = rng.uniform(0.01, 10.0)
        val = scalarize(t * y + a * e, e, Z)
        worst = max(worst, abs(val - (t * scalarize(y, e, Z) + a)) / max(1.0, abs(val)))
    out.append(_prop("scalarization", "translation_scaling", worst, 1e-10, samples, t0))

    t0 = time.perf_counter()
    worst = -np.inf
    for i in range(samples):
        Z, e = cones[i % len(cones)]
        y = rng.normal(scale=3.0, size=Z.m)
        # elements of C: solve Z c = nonnegative target
        c = np.linalg.lstsq(Z.generators, rng.exponential(size=len(Z)), rcond=None)[0]
        worst = max(worst, scalarize(y, e, Z) - scalarize(y + c, e, Z))
    out.append(_prop("scalarization", "monotonicity", worst, 1e-12, samples, t0))

    t0 = time.perf_counter()
    tol = 1e-8
    worst = 0.0
    n = max(samples // 5, 1)
    for i in range(n):
        Z, e = cones[i % len(cones)]
        y = rng.normal(scale=3.0, size=Z.m)
        worst = max(worst, abs(scalarize(y, e, Z) - scalarize_inf_oracle(y, e, Z, tol=tol)))
    out.append(_prop("scalarization", "max_form_equals_inf_form", worst, 2 * tol, n, t0))

    t0 = time.perf_counter()
    bad = 0
    for i in range(samples):
        Z, e = cones[i % len(cones)]
        y = rng.normal(scale=3.0, size=Z.m)
        s = scalarize(y, e, Z)
        if abs(s) > 1e-9 and (s <= 0) != in_cone(-y, Z):
            bad += 1
    out.append(_prop("scalarization", "sublevel_consistency", bad, 0, samples, t0))
    return out


# -- subgradients ---------------------------------------------------------

def _builtins(rng):
    E, H = mf.Euclidean(2), mf.Hyperboloid(2)
    yield make_builtin("norm_sq", E)
    yield make_builtin("sq_distances", E, {"anchors": rng.normal(size=(2, 2))})
    yield make_builtin("sq_distances", E, {"anchors": rng.normal(size=(3, 2))})
    yield make_builtin("sq_distances", H, {"anchors": [H.random_point(rng) for _ in range(2)]})
    yield make_builtin("sq_distances", mf.Hyperboloid(3), {"anchors": [mf.Hyperboloid(3).random_point(rng) for _ in range(3)]})


def subgradient_suite(seed: int = 0, samples: int = 1000) -> list[PropertyResult]:
    rng = np.random.default_rng(seed)
    problems = list(_builtins(rng))
    out = []

    t0 = time.perf_counter()
    worst = 0.0
    n = 0
    for P in problems:
        F, M = P.objective, P.manifold
        for _ in range(40):
            p = M.random_point(rng, 1.5)
            G = objective_gradients(F, p)
            u = M.random_tangent(rng, p)
            u /= M.norm(p, u)
            fd = _geodesic_fd(M, lambda x: eval_objective(F, x), p, u)
            an = np.array([M.inner(p, g, u) for g in G])
            worst = max(worst, float(np.max(np.abs(fd - an) / np.maximum(1.0, np.abs(an)))))
            n += 1
    out.append(_prop("subgradient", "gradient_oracle_vs_fd", worst, 1e-5, n, t0))

    t0 = time.perf_counter()
    worst = -np.inf
    n = 0
    for P in problems:
        F, M, Z = P.objective, P.manifold, P.Z
        e = np.full(Z.m, 1 / np.sqrt(Z.m))
        for _ in range(samples // len(problems)):
            p, q = M.random_point(rng, 1.5), M.random_point(rng, 1.5)
            w = scalarized_subgradient(F, p, e, Z)
            lhs = scalarize(eval_objective(F, p), e, Z) + M.inner(p, w, M.log(p, q))
            worst = max(worst, lhs - scalarize(eval_objective(F, q), e, Z))
            n += 1
    out.append(_prop("subgradient", "subgradient_inequality", worst, 1e-8, n, t0))

    t0 = time.perf_counter()
    worst = 0.0
    n = 0
    for P in problems:
        F, M, Z = P.objective, P.manifold, P.Z
        e = np.full(Z.m, 1 / np.sqrt(Z.m))
        for _ in range(40):
            p = M.random_point(rng, 1.5)
            ratios = Z.generators @ eval_objective(F, p) / (Z.generators @ e)
            srt = np.sort(ratios)
            if len(srt) > 1 and srt[-1] - srt[-2] < 1e-3:
                continue  # near a tie the max is not differentiable
            w = scalarized_subgradient(F, p, e, Z)
            u = M.random_tangent(rng, p)
            u /= M.norm(p, u)
            fd = _geodesic_fd(M, lambda x: scalarize(eval_objective(F, x), e, Z), p, u)
            worst = max(worst, abs(fd - M.inner(p, w, u)) / max(1.0, abs(fd)))
            n += 1
    out.append(_prop("subgradient", "danskin_directional_derivative", worst, 1e-5, n, t0))
    return out


# -- fejer ----------------------------------------------------------------

def fejer_suite(seed: int = 0, runs: int = 4) -> list[PropertyResult]:
    rng = np.random.default_rng(seed)
    out = []
    t0 = time.perf_counter()
    worst_desc = -np.inf
    worst_fejer = -np.inf
    failures = 0
    for i in range(runs):
        M = mf.Euclidean(2) if i % 2 == 0 else mf.Hyperboloid(2)
        anchors = [M.random_point(rng) for _ in range(2)]
        P = make_builtin("sq_distances", M, {"anchors": anchors})
        tr = run(P, M.random_point(rng, 2.0), OuterConfig())
        d = descent_audit(tr)
        f = fejer_audit(tr)
        worst_desc = max(worst_desc, d.worst)
        worst_fejer = max(worst_fejer, f.worst)
        failures += (not d.passed) + (not (f.passed and f.hard)) + (tr.status != "step_converged")
    out.append(_prop("fejer", "c_descent", worst_desc, 1e-10, runs, t0))
    out.append(_prop("fejer", "fejer_monotone_to_limit", worst_fejer, 1e-10, runs, t0))
    out.append(_prop("fejer", "audit_failures", failures, 0, runs, t0))
    return out


# -- sharpness ------------------------------------------------------------

def sharpness_suite(seed: int = 0) -> list[PropertyResult]:
    E = mf.Euclidean(2)
    o = np.zeros(2)
    out = []
    t0 = time.perf_counter()
    probes = radial_probes(E, o, np.geomspace(1e-3, 1.0, 8), seed=seed)
    sharp = SharpnessQuery(norms(E, o), o, probes, level_distance=lambda p: float(np.linalg.norm(p)))
    tau = estimate_sharpness_modulus(sharp)
    out.append(_prop("sharpness", "norm_modulus_is_one", abs(tau - 1.0), 1e-6, len(probes), t0))

    t0 = time.perf_counter()
    F = sq_distances(E, [o])
    small = radial_probes(E, o, np.geomspace(1e-4, 1e-2, 5), seed=seed)
    flat = SharpnessQuery(F, o, small, level_distance=lambda p: float(np.linalg.norm(p)))
    out.append(_prop("sharpness", "sq_norm_not_sharp", estimate_sharpness_modulus(flat), 1e-2, len(small), t0))

    t0 = time.perf_counter()
    pair = SharpnessQuery(norms(E, o, (1.0, 2.0)), o, probes, level_distance=lambda p: float(np.linalg.norm(p)))
    rep = scalar_transfer_audit(pair, np.array([1.0, 1.0]))
    rep1 = scalar_transfer_audit(sharp, np.array([1.0]))
    ok = rep["passed"] and rep["hypothesis_met"] and rep1["passed"] and rep1["hypothesis_met"]
    out.append(_prop("sharpness", "scalar_transfer", 0.0 if ok else 1.0, 0.0, 2 * len(probes), t0))
    return out


SUITES = {
    "geometry": geometry_suite,
    "scalarization": scalarization_suite,
    "subgradient": subgradient_suite,
    "fejer": fejer_suite,
    "sharpness": sharpness_suite,
}


def run_suite(name: str, seed: int = 0) -> list[PropertyResult]:
    if name == "all":
        return [r for s in SUITES.values() for r in s(seed=seed)]
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](seed=seed)
