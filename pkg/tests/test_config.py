import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vecprox.config import ConfigError, RunConfig, build, load_config

BASE = {
    "manifold": {"kind": "euclidean", "dim": 2},
    "problem": {"name": "sq_distances", "anchors": [[0, 0], [1, 0]], "start": [2.0, 2.0]},
}


def test_defaults_round_trip():
    cfg = RunConfig.from_dict(BASE)
    again = RunConfig.from_dict(json.loads(cfg.dumps()))
    assert again == cfg
    assert "lambda" in cfg.to_dict()["outer"] and "lam" not in cfg.to_dict()["outer"]


@settings(max_examples=30, deadline=None)
@given(lam=st.one_of(st.floats(0.01, 10), st.lists(st.floats(0.01, 10), min_size=1, max_size=4)),
       seed=st.integers(0, 2**31), tol=st.floats(1e-12, 1e-3), method=st.sampled_from(["epigraph", "subgradient"]),
       record=st.booleans())
def test_round_trip_property(lam, seed, tol, method, record):
    doc = dict(BASE, outer={"lambda": lam, "seed": seed, "tol_step": tol},
               inner={"method": method}, output={"record_time": record})
    cfg = RunConfig.from_dict(doc)
    assert RunConfig.from_dict(json.loads(cfg.dumps())) == cfg


@pytest.mark.parametrize("doc, needle", [
    ({"extra": {}}, "unknown config sections"),
    ({"outer": {"lam": 1.0}}, "unknown keys"),
    ({"outer": {"lambda": 0}}, "positive"),
    ({"outer": {"lambda": [1.0, 3.0], "lambda_max": 2.0}}, "lambda_max"),
    ({"outer": {"directions": [[1.0, 0.0]]}}, "interior"),
    ({"manifold": {"kind": "sphere"}}, "sphere"),
    ({"manifold": {"kind": "hyperboloid", "dim": 2}, "problem": {"anchors": [[1, 0, 0]], "start": [1, 1, 1]}},
     "hyperboloid"),
    ({"inner": {"method": "newton"}}, "inner method"),
    ({"cone": {"kind": "custom"}}, "generator"),
    ({"cone": {"kind": "custom", "generators": [[1, 0, 0]]}}, "R\\^"),
    ([], "object"),
    ({"outer": 3}, "object"),
])
def test_rejections(doc, needle):
    if isinstance(doc, dict):
        merged = {k: dict(v) if isinstance(v, dict) else v for k, v in BASE.items()}
        for k, v in doc.items():
            merged[k] = {**merged.get(k, {}), **v} if isinstance(v, dict) else v
        doc = merged
    with pytest.raises(ConfigError, match=needle):
        RunConfig.from_dict(doc)


def test_build_and_random_start(tmp_path):
    doc = dict(BASE, problem={"name": "sq_distances", "anchors": [[0, 0], [1, 0]]}, outer={"seed": 5})
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    cfg = load_config(path)
    _, p0, _ = build(cfg)
    _, p1, _ = build(load_config(path))
    np.testing.assert_array_equal(p0, p1)
    cfg.outer.seed = 6
    assert not np.array_equal(build(cfg)[1], p0)


def test_custom_cone_from_config():
    doc = dict(BASE, cone={"kind": "custom", "generators": [[2, 1], [1, 2]]})
    prob, _, outer = build(RunConfig.from_dict(doc))
    np.testing.assert_allclose(prob.Z.generators.sum(axis=1), 1.0)
    assert outer.direction_list(prob.Z)[0] @ prob.Z.generators[0] > 0


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
