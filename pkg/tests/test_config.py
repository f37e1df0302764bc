"""Tests for the flat dotted-key configuration parser and renderer."""

import math

import pytest

from monorhythm.config import (
    ConfigError,
    format_value,
    load_config,
    parse_config,
    render_config,
)


def test_parse_types_and_comments():
    text = "\n".join(
        [
            "# leading comment",
            "model.u_peak = 100.0",
            "solver.m = 8   # trailing comment",
            "",
            "stimulus.kind = sinusoid",
            "ic.u = 0.5, -1.25e-3, 2",
            "converge.m_list = 4,8,16",
        ]
    )
    cfg = parse_config(text, path="demo.cfg")
    assert cfg.entries["model.u_peak"] == 100.0, "float value should parse"
    assert cfg.entries["solver.m"] == 8, "int value should parse"
    assert isinstance(cfg.entries["solver.m"], int), "int kind must stay an int"
    assert cfg.entries["stimulus.kind"] == "sinusoid", "string value should parse"
    assert cfg.entries["ic.u"] == (0.5, -1.25e-3, 2.0), "float list should parse"
    assert cfg.entries["converge.m_list"] == (4, 8, 16), "int list should parse"
    assert cfg.lines["stimulus.kind"] == 5, "line numbers should skip blanks"


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError) as exc_info:
        parse_config("model.u_peak = 1\nmodel.zeta = 3\n", path="bad.cfg")
    message = str(exc_info.value)
    assert "bad.cfg:2" in message, f"expected file:line prefix, got {message!r}"
    assert "model.zeta" in message, f"expected offending key named, got {message!r}"


def test_duplicate_key_names_first_line():
    text = "solver.m = 4\nsolver.tol = 1e-8\nsolver.m = 8\n"
    with pytest.raises(ConfigError) as exc_info:
        parse_config(text, path="dup.cfg")
    message = str(exc_info.value)
    assert "dup.cfg:3" in message, f"duplicate should point at its own line: {message!r}"
    assert "first set on line 1" in message, f"expected first line named: {message!r}"


def test_missing_equals_sign_rejected():
    with pytest.raises(ConfigError) as exc_info:
        parse_config("solver.m 4\n")
    assert "key = value" in str(exc_info.value), "malformed line should describe format"


def test_bad_values_rejected_per_kind():
    for line in (
        "model.u_peak = abc",
        "model.u_peak = inf",
        "solver.m = 4.5",
        "ic.u = 1.0, oops",
        "converge.m_list = 4,eight",
        "solver.m =",
    ):
        with pytest.raises(ConfigError):
            parse_config(line + "\n")


def test_choice_keys_enforced():
    with pytest.raises(ConfigError) as exc_info:
        parse_config("stimulus.kind = triangle\n")
    message = str(exc_info.value)
    assert "sinusoid" in message, f"error should list allowed choices: {message!r}"
    for key, value in (
        ("stimulus.kind", "pulse"),
        ("solver.method", "both"),
        ("output.format", "json"),
    ):
        cfg = parse_config(f"{key} = {value}\n")
        assert cfg.entries[key] == value, f"{value!r} should be accepted for {key}"


def test_require_and_get_record_consumption():
    cfg = parse_config("solver.m = 8\n")
    assert cfg.require("solver.m") == 8, "present key should be returned"
    assert cfg.get("solver.tol", 1e-10) == 1e-10, "default should be returned"
    assert cfg.get("solver.dt", None) is None, "None default should pass through"
    echo = cfg.echo()
    assert echo == {"solver.m": 8, "solver.tol": 1e-10}, (
        f"echo should hold resolved values and skip None defaults, got {echo}"
    )
    with pytest.raises(ConfigError) as exc_info:
        cfg.require("cauchy.t_end")
    assert "cauchy.t_end" in str(exc_info.value), "missing key should be named"


def test_require_exactly_one():
    cfg = parse_config("stimulus.period = 2.0\n")
    key, value = cfg.require_exactly_one("stimulus.period", "stimulus.period_raw")
    assert key == "stimulus.period" and value == 2.0

    both = parse_config("stimulus.period = 2.0\nstimulus.period_raw = 0.064\n")
    with pytest.raises(ConfigError) as exc_info:
        both.require_exactly_one("stimulus.period", "stimulus.period_raw")
    assert "both" in str(exc_info.value), "two-key conflict should say 'both'"

    neither = parse_config("solver.m = 4\n")
    with pytest.raises(ConfigError) as exc_info:
        neither.require_exactly_one("stimulus.period", "stimulus.period_raw")
    assert "neither" in str(exc_info.value), "absent pair should say 'neither'"


def test_render_parse_round_trip_is_exact():
    original = {
        "model.u_peak": 100.0,
        "model.a": math.pi / 13.0,
        "solver.tol": 1e-10,
        "solver.m": 8,
        "ic.u": (0.1, -2.5e-17, 3.0),
        "converge.m_list": (4, 8, 16),
        "stimulus.kind": "pulse",
    }
    text = render_config(original)
    reparsed = parse_config(text).entries
    assert reparsed == original, (
        f"render/parse round trip should be exact: {reparsed} vs {original}"
    )
    lines = text.splitlines()
    assert lines == sorted(lines), "rendered keys should be sorted"


def test_render_rejects_unknown_key():
    with pytest.raises(ConfigError):
        render_config({"model.unknown_knob": 1.0})


def test_format_value_float_precision():
    third = 1.0 / 3.0
    assert float(format_value("model.a", third)) == third, (
        "17 significant digits must reproduce the double exactly"
    )


def test_load_config_missing_file():
    with pytest.raises(ConfigError) as exc_info:
        load_config("/nonexistent/path/run.cfg")
    assert "cannot read configuration" in str(exc_info.value)
