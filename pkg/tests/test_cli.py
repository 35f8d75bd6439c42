import io
import json

import numpy as np
import pytest

from linsta.cli import RunConfig, config_from_args, main, parse_range, run, validate
from linsta.ltidyn import LtiSystem, simulate
from linsta.oscillator import RobustnessSpec, Target, e1_min
from linsta.superosc import design_robust_transport


def _run(config):
    out, err = io.StringIO(), io.StringIO()
    code = run(config, out, err)
    return code, out.getvalue(), err.getvalue()


def _rows(text):
    lines = text.strip().splitlines()
    return lines[0], np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])


def test_parse_range():
    np.testing.assert_allclose(parse_range("2:40:0.1"), np.arange(2, 40.05, 0.1)[:381])
    assert len(parse_range("2:40:0.1")) == 381
    assert parse_range("1:1:0.5").tolist() == [1.0]
    for bad in ("1:2", "2:1:0.1", "0:1:0"):
        with pytest.raises(ValueError):
            parse_range(bad)


def test_validate_examples():
    assert validate(RunConfig(command="design", p=1)) == []
    d = validate(RunConfig(command="design", tf=-1.0))
    assert len(d) == 1 and d[0].field == "tf" and d[0].level == "error"
    sense = RunConfig(command="sense", frequencies=[1.0, 1.05], tf=100.0)
    d = validate(sense)
    assert len(d) == 1 and d[0].level == "warning" and "pi/(2 eps)" in d[0].message
    assert validate(RunConfig(command="sense", frequencies=[1.0, 1.05], tf=10.0)) == []


def test_validate_errors_name_fields():
    cases = {
        "p": RunConfig(p=7),
        "omega0": RunConfig(omega0=0.0),
        "tf_range": RunConfig(command="sweep-cost"),
        "frequencies": RunConfig(command="sense", frequencies=[1.0]),
        "drive": RunConfig(command="simulate"),
        "model": RunConfig(command="dissipative", model="other"),
        "Gamma": RunConfig(command="dissipative", Gamma=-1.0),
        "command": RunConfig(command="plot"),
    }
    for name, cfg in cases.items():
        assert any(dg.field == name for dg in validate(cfg)), name


def test_invalid_config_exit_code():
    code, out, err = _run(RunConfig(command="design", tf=-1.0))
    assert code == 2 and out == "" and "tf" in err


def test_numerical_failure_exit_code():
    # a near-coincident sensing pair passes validation but fails inside the solver
    code, _, err = _run(RunConfig(command="sense", frequencies=[1.0, 1.0 + 1e-13], tf=1.0))
    assert code == 3 and "DesignError" in err


def test_sweep_cost_matches_closed_form():
    code, out, _ = _run(RunConfig(command="sweep-cost", tf_range="2:40:0.1"))
    assert code == 0
    header, data = _rows(out)
    assert header == "tf,E1" and data.shape == (381, 2)
    target = Target(1.0, 0.0, 1.0)
    np.testing.assert_allclose(data[:, 1], [e1_min(target, t) for t in data[:, 0]], rtol=1e-15)
    assert np.all(np.diff(data[:, 1]) < 0)


def test_design_then_sweep_spectrum(tmp_path):
    rep = tmp_path / "design.json"
    assert main(["design", "--p", "1", "--omega0", "1", "--d", "1", "--tf", "10", "--out", str(rep)]) == 0
    report = json.loads(rep.read_text())
    assert report["verification"]["flatness_order"] == 2
    assert (tmp_path / "design.json.meta.json").is_file()
    spec_csv = tmp_path / "spectrum.csv"
    assert main(["sweep-spectrum", "--design", str(rep), "--omega-range", "0.9:1.1:0.01", "--out", str(spec_csv)]) == 0
    header, data = _rows(spec_csv.read_text())
    assert header == "omega,deltaE" and data.shape == (21, 2)
    i0 = int(np.argmin(np.abs(data[:, 0] - 1.0)))
    assert data[i0, 1] < 1e-20
    assert np.all(data[:, 1] >= 0)


def test_design_simulate_roundtrip(tmp_path):
    rep = tmp_path / "design.json"
    assert main(["design", "--p", "2", "--phi", "0.5", "--out", str(rep)]) == 0
    traj = tmp_path / "traj.csv"
    assert main(["simulate", "--design", str(rep), "--out", str(traj)]) == 0
    header, data = _rows(traj.read_text())
    assert header == "t,x1,x2"
    spec = RobustnessSpec(2, 1.0, Target(1.0, 0.5, 1.0), 10.0)
    ref = simulate(LtiSystem.oscillator(1.0), design_robust_transport(spec).signal, steps=1000).final
    np.testing.assert_allclose(data[-1, 1:], ref, atol=1e-12, rtol=0)


def test_simulate_custom_system(tmp_path):
    sysf = tmp_path / "sys.json"
    sysf.write_text(json.dumps({"A": [[-1.0]], "B": [[1.0]]}))
    drive = tmp_path / "drive.json"
    drive.write_text(json.dumps({"terms": [{"coeffs": [[1, 0]], "freq": [0, 0]}], "t_f": 2.0}))
    code, out, _ = _run(RunConfig(command="simulate", drive=str(drive), system=str(sysf), steps=4))
    assert code == 0
    header, data = _rows(out)
    assert header == "t,x1"
    np.testing.assert_allclose(data[:, 1], 1 - np.exp(-data[:, 0]), atol=1e-10)


def test_sense_sweep():
    code, out, _ = _run(config_from_args(["sense", "--omega1", "1", "--omega2", "1.05", "--tf", "10"]))
    assert code == 0
    header, data = _rows(out)
    assert header == "omega,x_f,v_f" and data.shape == (51, 3)
    np.testing.assert_allclose(data[0, 1:], [0.0, 1.0], atol=1e-8)
    np.testing.assert_allclose(data[-1, 1:], [1.0, 0.0], atol=1e-8)


def test_sense_warning_still_runs():
    code, out, err = _run(RunConfig(command="sense", frequencies=[1.0, 1.05], tf=100.0, sweep_points=3))
    assert code == 0 and "warning" in err and out


def test_sense_json():
    code, out, _ = _run(RunConfig(command="sense", frequencies=[1.0, 1.05], format="json"))
    data = json.loads(out)
    assert code == 0 and len(data["a"]) == 2 and "drive" in data


@pytest.mark.parametrize("model", ["lindblad", "overdamped", "underdamped"])
def test_dissipative_models(model):
    code, out, _ = _run(RunConfig(command="dissipative", model=model, Gamma=0.2, gamma=0.5, steps=50))
    assert code == 0
    header, data = _rows(out)
    assert header.startswith("t,x1")
    assert abs(data[-1, 1] - 1.0) < 1e-8


def test_dissipative_alpha():
    code, out, _ = _run(RunConfig(command="dissipative", Gamma=0.1, alpha=True, steps=20))
    header, data = _rows(out)
    assert code == 0 and header == "t,re_alpha,im_alpha" and data.shape == (21, 3)
    # mean position from alpha reaches the target
    assert abs(np.sqrt(2) * data[-1, 1] - 1.0) < 1e-8


def test_determinism(tmp_path):
    paths = [tmp_path / f"s{k}.csv" for k in range(2)]
    for p in paths:
        assert main(["sweep-spectrum", "--p", "1", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    a, b = (json.loads((tmp_path / f"s{k}.csv.meta.json").read_text()) for k in range(2))
    assert a["config"]["out"] != b["config"]["out"]


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"p": 2, "tf": 5.0, "d": 0.5, "omega0": 2.0}))
    c = config_from_args(["design", "--config", str(cfg), "--tf", "7"])
    assert (c.p, c.tf, c.r, c.omega0) == (2, 7.0, 0.5, 2.0)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(SystemExit):
        config_from_args(["design", "--config", str(bad)])


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("LINSTA_OUTPUT_DIR", str(tmp_path / "outdir"))
    assert main(["sweep-cost", "--tf-range", "2:3:0.5"]) == 0
    assert (tmp_path / "outdir" / "sweep-cost.csv").read_text().startswith("tf,E1\n")
    assert main(["design", "--p", "0"]) == 0
    assert (tmp_path / "outdir" / "design.json").is_file()


def test_csv_is_lossless(tmp_path):
    code, out, _ = _run(RunConfig(command="sweep-cost", tf_range="3:3.3:0.1"))
    _, data = _rows(out)
    target = Target(1.0, 0.0, 1.0)
    assert [e1_min(target, t) for t in data[:, 0]] == data[:, 1].tolist()
