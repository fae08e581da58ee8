import json

import pytest

from magnetolin.config import RunConfig, load_config, parse_config
from magnetolin.errors import ConfigError


def test_defaults():
    cfg = load_config(None)
    assert cfg.grid.n == 17 and cfg.magnetostatics.N == 128
    assert cfg.loads.h.kind == "constant" and cfg.loads.h.value == [0.1, 0.0]
    assert cfg.boundary.w == "uniaxial-stretch" and cfg.boundary.alpha == 0.1
    assert cfg.sweep.eps_values == [0.4, 0.2, 0.1, 0.05, 0.025, 0.0125]


def test_round_trip(tmp_path):
    cfg = parse_config({"grid": {"n": 9}, "sweep": {"num_eps": 2}, "seed": 5})
    path = tmp_path / "c.json"
    path.write_text(cfg.model_dump_json())
    again = load_config(path)
    assert again == cfg


@pytest.mark.parametrize(
    "data, path",
    [
        ({"grid": {"n": 2}}, "grid.n"),
        ({"model": {"a": 1.0}}, "model.a"),
        ({"model": {"p": 2}}, "model.p"),
        ({"grid": {"gamma": "top-edge"}}, "grid.gamma"),
        ({"sweep": {"eps_factor": 1.5}}, "sweep.eps_factor"),
        ({"magnetostatics": {"mu0": -1}}, "magnetostatics.mu0"),
        ({"loads": {"h": {"value": [1.0]}}}, "loads.h.value"),
        ({"solver": {"tolerance": 1e-6}}, "solver.tolerance"),
        ({"seed": -3}, "seed"),
    ],
)
def test_errors_name_the_field(data, path):
    with pytest.raises(ConfigError) as info:
        parse_config(data)
    assert info.value.path == path


def test_missing_file_and_bad_json(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(bad)
    arr = tmp_path / "arr.json"
    arr.write_text(json.dumps([1, 2]))
    with pytest.raises(ConfigError):
        load_config(arr)


def test_build_problem_uses_sections():
    cfg = RunConfig.model_validate(
        {"grid": {"n": 5, "gamma": "full-boundary"}, "magnetostatics": {"mu0": 0.0, "N": 16}}
    )
    problem = cfg.build_problem()
    assert problem.grid.n == 5 and problem.solver is None
    assert problem.box.N == 16
    assert cfg.build_model().p == 4.0
