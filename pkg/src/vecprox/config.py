"""JSON run configuration: sections manifold, problem, cone, outer, inner, output."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Optional

import numpy as np

from .cone import ConeError, make_generator_set
from .manifold import ManifoldError, make_manifold
from .problem import ProblemInstance, make_builtin
from .proxpoint import OuterConfig
from .subsolver import InnerConfig

__all__ = ["ConfigError", "RunConfig", "load_config", "build"]


class ConfigError(ValueError):
    pass


@dataclass
class ManifoldSection:
    kind: str = "euclidean"
    dim: int = 2


@dataclass
class ProblemSection:
    name: str = "sq_distances"
    anchors: Optional[list] = None
    start: Optional[list] = None  # None: random start drawn from outer.seed


@dataclass
class ConeSection:
    kind: Optional[str] = None  # None: the builtin's natural cone
    generators: Optional[list] = None


@dataclass
class OuterSection:
    # "lambda" in JSON
    lam: Any = 1.0
    lambda_max: Optional[float] = None
    directions: Optional[list] = None
    tol_step: float = 1e-7
    max_outer: int = 500
    seed: int = 0


@dataclass
class InnerSection:
    method: str = "epigraph"
    max_iters: int = 50_000
    tol_opt: float = 1e-8
    tol_feas: float = 1e-10
    step_c: float = 2.0
    verbose: bool = False


@dataclass
class OutputSection:
    trace_csv: str = "trace.csv"
    result_json: str = "result.json"
    record_time: bool = False


SECTIONS = {
    "manifold": ManifoldSection,
    "problem": ProblemSection,
    "cone": ConeSection,
    "outer": OuterSection,
    "inner": InnerSection,
    "output": OutputSection,
}
_RENAMES = {"outer": {"lambda": "lam"}}


@dataclass
class RunConfig:
    manifold: ManifoldSection = field(default_factory=ManifoldSection)
    problem: ProblemSection = field(default_factory=ProblemSection)
    cone: ConeSection = field(default_factory=ConeSection)
    outer: OuterSection = field(default_factory=OuterSection)
    inner: InnerSection = field(default_factory=InnerSection)
    output: OutputSection = field(default_factory=OutputSection)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(doc) - set(SECTIONS)
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        kwargs = {}
        for name, klass in SECTIONS.items():
            sec = doc.get(name, {}) or {}
            if not isinstance(sec, dict):
                raise ConfigError(f"section {name!r} must be an object")
            renames = _RENAMES.get(name, {})
            allowed = {f.name for f in fields(klass)} - set(renames.values()) | set(renames)
            bad = set(sec) - allowed
            if bad:
                raise ConfigError(f"unknown keys in {name!r}: {sorted(bad)}")
            kwargs[name] = klass(**{renames.get(k, k): v for k, v in sec.items()})
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        out = {}
        for name in SECTIONS:
            sec = asdict(getattr(self, name))
            inverse = {v: k for k, v in _RENAMES.get(name, {}).items()}
            out[name] = {inverse.get(k, k): v for k, v in sec.items()}
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    def validate(self) -> None:
        build(self)

    def outer_config(self) -> OuterConfig:
        o, i = self.outer, self.inner
        try:
            inner = InnerConfig(method=i.method, max_iters=int(i.max_iters), tol_opt=float(i.tol_opt),
                                tol_feas=float(i.tol_feas), step_c=float(i.step_c), verbose=bool(i.verbose))
            lam = o.lam if np.isscalar(o.lam) else tuple(float(x) for x in o.lam)
            return OuterConfig(lam=lam, lambda_max=o.lambda_max,
                               directions=None if o.directions is None else tuple(map(tuple, o.directions)),
                               tol_step=float(o.tol_step), max_outer=int(o.max_outer), seed=int(o.seed),
                               inner=inner)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return RunConfig.from_dict(doc)


def build(cfg: RunConfig):
    """Validate ``cfg`` and return ``(problem, p0, outer_config)``."""
    try:
        M = make_manifold(cfg.manifold.kind, cfg.manifold.dim)
        params = {}
        if cfg.problem.anchors is not None:
            params["anchors"] = cfg.problem.anchors
        problem = make_builtin(cfg.problem.name, M, params)
        if cfg.cone.kind is not None:
            m = problem.objective.m
            Z = make_generator_set(cfg.cone.kind, m=m, generators=cfg.cone.generators)
            problem = ProblemInstance(problem.objective, Z, problem.reference_solutions,
                                      problem.witness, problem.efficient_set_distance)
        outer = cfg.outer_config()
        outer.direction_list(problem.Z)
        if cfg.problem.start is None:
            p0 = M.random_point(np.random.default_rng(outer.seed), scale=2.0)
        else:
            p0 = M.check_point(np.asarray(cfg.problem.start, dtype=float))
    except ConfigError:
        raise
    except (ManifoldError, ConeError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    return problem, p0, outer
