import csv
import json

import pytest
import yaml

from scsf.cli import apply_overrides, main, run, validate

SMALL_SIM = {
    "m": 31,
    "n_modes": 16,
    "dt": 1e-3,
    "t_end": 0.2,
    "seed": 3,
    "observable_stride": 5,
    "noise": {"family": "power_law", "c": 0.2, "gamma": 2.0},
}


def write_cfg(tmp_path, experiment, block=None, **sim):
    cfg = {"experiment": experiment, "sim": {**SMALL_SIM, **sim}, "output": {"dir": str(tmp_path / "runs")}}
    if block is not None:
        cfg[experiment] = block
    p = tmp_path / f"{experiment}.yaml"
    p.write_text(yaml.safe_dump(cfg))
    return p


def body(run_dir):
    return (run_dir / "series.csv").read_bytes()


def summary(run_dir):
    return json.loads((run_dir / "summary.json").read_text())


def test_validate_cases(tmp_path):
    ok = write_cfg(tmp_path, "simulate", m=127, n_modes=64, scheme="explicit", dt=(1 / 128) ** 2)
    assert validate(ok)["valid"]
    rep = validate(ok, ["sim.noise.gamma=1"])
    assert not rep["valid"]
    assert "Hilbert-Schmidt" in rep["problems"][0]["message"]
    rep = validate(ok, ["sim.n_modes=200"])
    assert any(p["field"] == "sim.n_modes" for p in rep["problems"])
    rep = validate(ok, ["sim.dt=1e-3"])
    assert any("CFL" in p["message"] for p in rep["problems"])
    assert not validate(ok, ["experiment=nope"])["valid"]


def test_simulate_zero_horizon(tmp_path):
    p = write_cfg(tmp_path, "simulate", t_end=0.0)
    code, rd = run(p)
    assert code == 0
    rows = list(csv.reader((rd / "series.csv").open()))
    assert rows == [["t", "norm_H_sq", "norm_E", "energy_phi"]]
    assert summary(rd)["n_records"] == 0
    for name in ("config.resolved.yaml", "manifest.json"):
        assert (rd / name).exists()
    man = json.loads((rd / "manifest.json").read_text())
    assert man["seed"] == 3 and "git_revision" in man and "wall_seconds" in man


def test_csv_format(tmp_path):
    code, rd = run(write_cfg(tmp_path, "simulate", {"u0": "e1"}))
    raw = (rd / "series.csv").read_bytes()
    assert raw.count(b"\r\n") == 41  # header + 40 records
    row = raw.split(b"\r\n")[1].split(b",")
    assert len(row[1].rstrip(b"0")) >= 15  # full double precision


def test_determinism_across_worker_counts(tmp_path, monkeypatch):
    p = write_cfg(tmp_path, "moments", {"t_avg": 0.4, "n_chains": 3})
    monkeypatch.setenv("SCSF_THREADS", "1")
    _, a = run(p)
    monkeypatch.setenv("SCSF_THREADS", "3")
    _, b = run(p)
    assert a != b
    assert body(a) == body(b)


def test_coupling_outputs(tmp_path):
    p = write_cfg(tmp_path, "coupling", {"t_min": 0.01})
    code, rd = run(p)
    assert code == 0
    head = (rd / "series.csv").read_text().splitlines()[0]
    assert head == "t,distance,bound,avg_u_E,avg_v_E"
    s = summary(rd)
    assert s["passed"] and s["distance_increases"] == 0
    code, rd = run(p, ["coupling.tol=-1e9"])
    assert code == 2
    s = summary(rd)
    assert s["n_violations"] > 0 and s["violations"][0]["check"] == "stability_bound"
    assert "magnitude" in s["violations"][0]


def test_config_error_exit_1(tmp_path, capsys):
    p = write_cfg(tmp_path, "coupling", {"alphas": [2.0]})
    code, rd = run(p)
    assert code == 1 and rd is None
    assert "coupling.alphas" in capsys.readouterr().err


def test_resolvent_report(tmp_path):
    blk = {"functions": ["const(1)", "cyl_cos(1,1)"], "lambdas": [1.0, 2.0], "n_points": 2, "n_paths": 4, "t_trunc": 0.5}
    code, rd = run(write_cfg(tmp_path, "resolvent", blk))
    assert code == 0
    est = summary(rd)["estimates"]
    assert len(est) == 8
    keys = {"function", "lambda", "estimate", "stderr", "truncation_bias", "bound_lhs", "bound_rhs", "pass"}
    assert keys <= set(est[0])
    assert "gradient" in summary(rd)


def test_yosida_and_invariance(tmp_path):
    code, rd = run(write_cfg(tmp_path, "yosida-check", {"n_fields": 5, "m_samples": 20}))
    assert code == 0
    assert summary(rd)["mollified"]["error"] >= 0
    blk = {"functions": ["cyl_cos(1,1)"], "t_avg": 1.0, "t_burn": 0.1}
    code, rd = run(write_cfg(tmp_path, "invariance", blk, noise={"family": "custom", "sigma": [0.0] * 16}))
    assert code == 0
    assert summary(rd)["residuals"][0]["residual"] == 0.0


def test_main_entry(tmp_path, capsys):
    p = write_cfg(tmp_path, "simulate", t_end=0.01)
    assert main(["validate", str(p)]) == 0
    assert main(["run", str(p), "sim.seed=4", "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out.strip().splitlines()[-1]
    assert str(tmp_path / "o") in out
    assert main(["run", str(tmp_path / "missing.yaml")]) == 1


def test_overrides():
    cfg = apply_overrides({"sim": {"m": 3}}, ["sim.m=7", "sim.noise.c=0.5", "x=[1, 2]"])
    assert cfg["sim"]["m"] == 7 and cfg["sim"]["noise"]["c"] == 0.5 and cfg["x"] == [1, 2]
    with pytest.raises(ValueError):
        apply_overrides({}, ["novalue"])
