from __future__ import annotations

import json

import numpy as np
import pytest

from gamma2 import io
from gamma2.config import (build_potential, build_weight, eps_sweep, get, load_config, load_scenario,
                           parse_config, scenario_names)
from gamma2.errors import ConfigError


def test_parse_sections_and_comments():
    cfg = parse_config("""
        # comment
        [potential]
        name = quartic   # trailing
        [weight]
        kind: linear
        problem.mass = 1
    """)
    assert cfg == {"potential.name": "quartic", "weight.kind": "linear", "weight.problem.mass": "1"}


def test_parse_bad_line():
    with pytest.raises(ConfigError):
        parse_config("just words")


def test_get_types_and_missing():
    cfg = {"a": "2", "b": "x", "c": "yes"}
    assert get(cfg, "a", int) == 2
    assert get(cfg, "c", bool) is True
    assert get(cfg, "z", float, 1.5) == 1.5
    with pytest.raises(ConfigError, match="'z'"):
        get(cfg, "z", float)
    with pytest.raises(ConfigError):
        get(cfg, "b", float)


def test_eps_sweep_default_and_validation():
    eps = eps_sweep({})
    assert len(eps) == 7 and eps[0] == pytest.approx(0.1) and eps[-1] == pytest.approx(1e-3)
    assert eps_sweep({"sweep.eps": "0.1, 0.05, 0.01"}) == [0.1, 0.05, 0.01]
    with pytest.raises(ConfigError):
        eps_sweep({"sweep.eps": "0.1, 0.2, 0.01"})
    with pytest.raises(ConfigError):
        eps_sweep({"sweep.eps": "0.1, -0.2"})


def test_scenarios_load():
    names = scenario_names()
    assert "skew-weight-quartic" in names and "coarse-grid" in names
    for n in names:
        cfg = load_scenario(n)
        build_potential(cfg)
        build_weight(cfg)
    with pytest.raises(ConfigError):
        load_scenario("nope")


def test_relative_paths_resolved(tmp_path):
    (tmp_path / "eta.csv").write_text("t,eta\n-1,1\n0,1.5\n1,2\n")
    (tmp_path / "run.cfg").write_text("weight.kind = table\nweight.file = eta.csv\n")
    w, _ = build_weight(load_config(tmp_path / "run.cfg"))
    assert w.total == pytest.approx(3.0)


def test_missing_referenced_file(tmp_path):
    (tmp_path / "run.cfg").write_text("weight.kind = table\nweight.file = gone.csv\n")
    with pytest.raises(ConfigError, match="does not exist"):
        build_weight(load_config(tmp_path / "run.cfg"))
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")


def test_unknown_weight_kind():
    with pytest.raises(ConfigError):
        build_weight({"weight.kind": "spiral"})


def test_csv_roundtrip_is_exact(tmp_path):
    x = np.random.default_rng(0).standard_normal(50)
    io.write_csv(tmp_path / "a.csv", ["x", "y"], [x, 2 * x])
    header, data = io.read_csv(tmp_path / "a.csv")
    assert header == ["x", "y"]
    assert np.array_equal(data[:, 0], x)


def test_csv_column_length_check(tmp_path):
    with pytest.raises(ValueError):
        io.write_csv(tmp_path / "a.csv", ["x", "y"], [[1, 2], [1]])


def test_json_cleans_numpy_and_nan(tmp_path):
    io.write_json(tmp_path / "a.json", {"b": np.float64(1.5), "a": [np.int64(2), float("nan")]})
    text = (tmp_path / "a.json").read_text()
    rec = json.loads(text)
    assert rec["b"] == 1.5 and rec["a"][0] == 2
    assert text.index('"a"') < text.index('"b"')
