import json
import math

import pytest

from invlab import __version__
from invlab.cli import ExperimentSpec, _overrides, load_specs, main, run, run_suite, spec_hash
from invlab.report import RunManifest, canonical, emit_report, fmt


def _write(tmp_path, obj, name="spec.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def test_fmt_and_canonical():
    assert fmt(1 / 3) == "0.333333333333333"
    assert canonical({"a": (1, 2.0), "b": 1 + 2j, "c": True}) == {"a": [1, 2.0], "b": [1.0, 2.0], "c": True}


def test_ratio_limit_example():
    m = run(ExperimentSpec("ratio-limit", {"theta1": "pi/3", "theta2": "2*pi/3", "alpha": 0}))
    s = m.records[0].summary
    assert m.passed and s["target"] == pytest.approx(4.0) and s["abs_error"] < 1e-3


def test_peak_and_oracle_examples():
    assert run(ExperimentSpec("peak-check", {"delta": 0.1})).passed
    rec = run(ExperimentSpec("oracle-compare", {"domain": "bidisc", "point": [[0, 0], [0, 0]],
                                                 "optimizer": {"degree": 3, "restarts": 2}})).records[0]
    s = rec.summary
    assert rec.passed and s["lower"] <= s["caratheodory"] <= s["eisenman"] <= s["upper"] + 1e-9


def test_csv_of_ratio_experiment_has_40_rows():
    m = run(ExperimentSpec("ratio-limit", {}))
    lines = emit_report(m, "csv").strip().splitlines()
    assert lines[0] == "j,r,alpha,m1,m2,ratio" and len(lines) == 41


def test_manifest_echoes_spec_hash():
    specs = load_specs({"experiments": [{"id": "peak-check"}, {"id": "ratio-limit", "seed": 3}]})
    m = run_suite(specs)
    doc = json.loads(emit_report(m, "json"))
    assert doc["spec_hash"] == spec_hash(specs) and doc["version"] == __version__
    assert [e["id"] for e in doc["experiments"]] == ["peak-check", "ratio-limit"]
    assert emit_report(m, "csv").splitlines()[1].endswith(spec_hash(specs))


def test_thread_count_does_not_change_output():
    specs = load_specs({"experiments": [{"id": "peak-check"}, {"id": "ratio-limit"}, {"id": "cone-density"}]})
    assert emit_report(run_suite(specs, threads=1)) == emit_report(run_suite(specs, threads=3))


def test_unknown_experiment_and_keys():
    with pytest.raises(KeyError):
        ExperimentSpec("nope")
    with pytest.raises(ValueError):
        load_specs({"id": "peak-check", "bogus": 1})
    with pytest.raises(ValueError):
        run(ExperimentSpec("peak-check", {"nope": 1}))


def test_overrides():
    assert _overrides(["--delta", "0.05", "--approach=harmonic", "--n-radii", "8"]) == \
        {"delta": 0.05, "approach": "harmonic", "n_radii": 8}
    with pytest.raises(SystemExit):
        _overrides(["--delta"])


def test_main_run_is_byte_identical(tmp_path):
    spec = _write(tmp_path, {"experiments": [{"id": "ratio-limit"}, {"id": "cone-density"},
                                             {"id": "peak-check", "config": {"delta": 0.1}}]})
    outs = []
    for k in range(2):
        out = tmp_path / f"out{k}"
        assert main(["run", "--spec", str(spec), "--out", str(out)]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outs[0] == outs[1]
    assert {"manifest.json", "manifest.csv", "ratio-limit.json", "ratio-limit.ratio.csv"} <= set(outs[0])


def test_main_exit_codes(tmp_path, capsys):
    assert main(["run", "--spec", str(_write(tmp_path, {"id": "nope"})), "--out", str(tmp_path / "o")]) == 2
    failing = _write(tmp_path, {"id": "ratio-limit", "config": {"threshold": 1e-30, "approach": "harmonic",
                                                                 "alpha": "pi/6"}}, "f.json")
    assert main(["run", "--spec", str(failing), "--out", str(tmp_path / "o")]) == 1
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "ratio-limit" in out and "re_w_minus_z2" in out


def test_main_seed_and_override(tmp_path):
    spec = _write(tmp_path, {"id": "peak-check"})
    out = tmp_path / "o"
    assert main(["run", "--spec", str(spec), "--out", str(out), "--seed", "5", "--delta", "0.01"]) == 0
    doc = json.loads((out / "manifest.json").read_text())
    assert doc["experiments"][0]["seed"] == 5 and doc["experiments"][0]["config"]["delta"] == 0.01


def test_angle_strings():
    m = run(ExperimentSpec("ratio-limit", {"theta1": "pi/2", "theta2": "3*pi/4", "alpha": "pi/4"}))
    assert m.records[0].summary["target"] == pytest.approx(27 / 8)
    with pytest.raises(ValueError):
        run(ExperimentSpec("ratio-limit", {"theta1": "__import__('os')"}))
