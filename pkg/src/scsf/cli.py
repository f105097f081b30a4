"""Command-line driver: ``scsf run CONFIG [key=value ...]`` and ``scsf validate CONFIG``.

Configs are YAML files with an ``experiment`` name, a ``sim`` block and an
optional block named after the experiment (see ``configs/``).  Every run
writes into a fresh timestamped directory:

    config.resolved.yaml   the config after defaults and overrides
    summary.json           results, ``passed`` flag and ``violations`` list
    series.csv             RFC-4180 table, doubles printed with 17 digits
    manifest.json          seed, git revision, backend, workers, timings

Exit status is 0 when every check passes, 2 when a check is violated (all
outputs are still written) and 1 on configuration or runtime errors.
"""

import argparse
import copy
import csv
import json
import subprocess
import sys
import time
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import kernels
from .coupling import DISTANCE_FLOOR, fit_decay_exponent, run_coupled
from .drift import drift
from .ergodic import agreement, estimate_moments, initial_condition
from .errors import ConfigError, ScsfError, ValidationError
from .functionals import MOMENT_TAGS, FunctionalTag
from .integrator import SimConfig, simulate
from .kolmogorov import gradient_bound_check, invariance_residual, parse_test_function, resolvent_sweep
from .noise import NoiseSpec, RngStream
from .parallel import worker_count
from .spectral import norm_H, random_field
from .yosida import mollified_drift, resolvent, yosida_map

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2
EXPERIMENTS = ("simulate", "moments", "coupling", "yosida-check", "resolvent", "invariance")

DEFAULTS = {
    "sim": {
        "m": 127,
        "n_modes": 64,
        "dt": 1e-5,
        "scheme": "backward_euler",
        "t_end": 1.0,
        "seed": 0,
        "observable_stride": 100,
        "cfl_fraction": 0.5,
        "noise": {"family": "power_law", "c": 0.1, "gamma": 2.0},
    },
    "output": {"dir": "runs"},
    "simulate": {"u0": "zero", "observables": ["norm_H_sq", "norm_E", "energy_phi"], "stream": 0},
    "moments": {
        "tags": [t.value for t in MOMENT_TAGS],
        "t_avg": 50.0,
        "t_burn": None,
        "n_chains": 4,
        "ics": ["zero", "e1", "tent"],
        "n_batches": 16,
        "n_se": 3.0,
    },
    "coupling": {
        "u0": "zero",
        "v0": "e1",
        "alphas": [0.25, 0.5, 1.0],
        "csv_alpha": 0.5,
        "t_min": 0.01,
        "tol": 1e-3,
        "monotone_tol": 1e-9,
        "stream": 0,
    },
    "yosida-check": {
        "alphas": [0.1, 0.01, 0.001],
        "n_fields": 100,
        "field_modes": 8,
        "field_scale": 1.0,
        "norm_tol": 1e-9,
        "residual_tol": 1e-10,
        "beta": 1e-6,
        "m_samples": 0,
        "mollify_alpha": 0.01,
    },
    "resolvent": {
        "functions": ["const(1)", "cyl_cos(1,1)", "cyl_exp(1,10)"],
        "lambdas": [0.5, 1.0, 2.0],
        "n_points": 20,
        "point_scale": 0.5,
        "n_paths": 32,
        "t_trunc": None,
        "n_se": 3.0,
        "gradient": {"enabled": True, "function": "cyl_cos(1,1)", "lambda": 1.0, "delta": 1e-3, "direction": "e1"},
    },
    "invariance": {
        "functions": ["cyl_cos(1,1)", "cyl_cos(3,0.5)", "cyl_exp(1,1000)"],
        "t_avg": 20.0,
        "t_burn": 2.0,
        "u0": "zero",
        "n_se": 3.0,
    },
}


# ----------------------------------------------------------------- config


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in (over or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def apply_overrides(cfg: dict, overrides) -> dict:
    """Apply dotted ``key=value`` overrides; values are parsed as YAML scalars."""
    cfg = copy.deepcopy(cfg)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value", field=item)
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        node = cfg
        for p in parts[:-1]:
            if not isinstance(node.setdefault(p, {}), dict):
                raise ConfigError(f"cannot descend into non-mapping {p!r}", field=key)
            node = node[p]
        node[parts[-1]] = yaml.safe_load(raw)
    return cfg


def load_config(path, overrides=()) -> dict:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", field="config") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML: {exc}", field="config") from exc
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping", field="config")
    raw = apply_overrides(raw, overrides)
    exp = raw.get("experiment")
    merged = {"experiment": exp, "sim": _merge(DEFAULTS["sim"], raw.get("sim")), "output": _merge(DEFAULTS["output"], raw.get("output"))}
    if exp in DEFAULTS:
        merged[exp] = _merge(DEFAULTS[exp], raw.get(exp))
    unknown = set(raw) - {"experiment", "sim", "output", exp}
    merged["_unknown"] = sorted(str(k) for k in unknown)
    return merged


def build_sim(sim: dict) -> SimConfig:
    keys = ("m", "n_modes", "dt", "scheme", "t_end", "seed", "observable_stride", "cfl_fraction", "newton_tol", "newton_max_iter")
    extra = set(sim) - set(keys) - {"noise"}
    if extra:
        raise ConfigError(f"unknown keys {sorted(extra)}", field="sim")
    try:
        n = int(sim["n_modes"])
        noise = NoiseSpec.from_dict(sim["noise"], n)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc), field="sim.noise") from exc
    kw = {k: sim[k] for k in keys if k in sim}
    casts = {"m": int, "n_modes": int, "dt": float, "t_end": float, "seed": int, "observable_stride": int, "cfl_fraction": float, "newton_tol": float, "newton_max_iter": int}
    for k, f in casts.items():
        if k in kw:
            try:
                kw[k] = f(kw[k])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"cannot convert {kw[k]!r}", field=f"sim.{k}") from exc
    return SimConfig(noise=noise, **kw)


def config_problems(cfg: dict) -> list:
    """All violations as ``(field, message)``; never raises."""
    probs = []
    exp = cfg.get("experiment")
    if exp not in EXPERIMENTS:
        probs.append(("experiment", f"unknown experiment {exp!r}, expected one of {EXPERIMENTS}"))
    for k in cfg.get("_unknown", []):
        probs.append((k, "unknown top-level key"))
    try:
        sim = build_sim(cfg["sim"])
    except ConfigError as exc:
        probs.append((exc.field, str(exc)))
        if exc.field != "sim.noise":
            return probs
        # keep checking the rest of the block with a placeholder noise
        try:
            n = int(cfg["sim"]["n_modes"])
            sim = build_sim({**cfg["sim"], "noise": {"family": "custom", "sigma": [0.0] * n}})
        except (ConfigError, KeyError, TypeError, ValueError):
            return probs
    probs.extend((f"sim.{f}", msg) for f, msg in sim.problems())
    block = cfg.get(exp, {})
    try:
        if exp == "coupling":
            for a in block["alphas"]:
                if not 0 < float(a) <= 1:
                    probs.append(("coupling.alphas", f"exponent {a} outside (0, 1]"))
            if float(block["csv_alpha"]) not in [float(a) for a in block["alphas"]]:
                probs.append(("coupling.csv_alpha", "must be one of coupling.alphas"))
            initial_condition(block["u0"], sim.m)
            initial_condition(block["v0"], sim.m)
        elif exp == "moments":
            for t in block["tags"]:
                FunctionalTag(t)
            if int(block["n_chains"]) < 1:
                probs.append(("moments.n_chains", "must be >= 1"))
            if float(block["t_avg"]) <= 0:
                probs.append(("moments.t_avg", "must be positive"))
            for ic in block["ics"]:
                initial_condition(ic, sim.m)
        elif exp == "simulate":
            for t in block["observables"]:
                FunctionalTag(t)
            initial_condition(block["u0"], sim.m)
        elif exp == "yosida-check":
            if any(float(a) <= 0 for a in block["alphas"]):
                probs.append(("yosida-check.alphas", "must be positive"))
            if int(block["m_samples"]) == 1:
                probs.append(("yosida-check.m_samples", "use 0 (skip) or >= 2"))
        elif exp == "resolvent":
            for f in block["functions"]:
                parse_test_function(f)
            if any(float(l) <= 0 for l in block["lambdas"]):
                probs.append(("resolvent.lambdas", "must be positive"))
            if int(block["n_paths"]) < 2:
                probs.append(("resolvent.n_paths", "need at least 2 paths for a standard error"))
            g = block.get("gradient") or {}
            if g.get("enabled") and not 1e-4 <= float(g["delta"]) <= 1e-2:
                probs.append(("resolvent.gradient.delta", "finite-difference step must lie in [1e-4, 1e-2]"))
        elif exp == "invariance":
            for f in block["functions"]:
                parse_test_function(f)
            initial_condition(block["u0"], sim.m)
    except KeyError as exc:
        probs.append((f"{exp}.{exc.args[0]}", "missing key"))
    except (TypeError, ValueError) as exc:
        probs.append((exp, str(exc)))
    return probs


def validate_config(cfg: dict) -> SimConfig:
    probs = config_problems(cfg)
    if probs:
        field, msg = probs[0]
        raise ConfigError(msg, field=field)
    return build_sim(cfg["sim"])


# ---------------------------------------------------------------- outputs


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x) if np.isfinite(x) else str(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=False)
        fh.write("\n")


def git_revision() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def make_run_dir(base, experiment) -> Path:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S_%fZ")
    base = Path(base)
    base.mkdir(parents=True, exist_ok=True)
    path = base / f"{experiment}-{stamp}"
    i = 1
    while path.exists():
        path = base / f"{experiment}-{stamp}-{i}"
        i += 1
    path.mkdir()
    return path


class Outcome:
    """Collects results, violations and the CSV table of one experiment."""

    def __init__(self):
        self.results = {}
        self.violations = []
        self.header = ["t"]
        self.rows = []

    def violation(self, check, location, magnitude, **extra):
        self.violations.append({"check": check, "location": location, "magnitude": float(magnitude), **extra})


# ------------------------------------------------------------- experiments


def exp_simulate(sim: SimConfig, blk: dict, out: Outcome):
    u0 = initial_condition(blk["u0"], sim.m)
    traj = simulate(u0, sim, blk["observables"], stream_id=int(blk["stream"]))
    names = list(traj.series)
    out.header = ["t"] + names
    # The series holds the recorded states after time zero; the initial
    # values are reported separately.
    out.rows = [[traj.times[i]] + [traj.series[n][i] for n in names] for i in range(1, traj.times.size)]
    out.results["initial"] = {n: traj.series[n][0] for n in names}
    out.results["final"] = {n: traj.series[n][-1] for n in names}
    out.results["n_records"] = len(out.rows)
    for n in names:
        if not np.all(np.isfinite(traj.series[n])):
            out.violation("finite_series", n, float("nan"))


def exp_moments(sim: SimConfig, blk: dict, out: Outcome):
    rep = estimate_moments(
        sim,
        blk["tags"],
        t_avg=float(blk["t_avg"]),
        t_burn=None if blk["t_burn"] is None else float(blk["t_burn"]),
        n_chains=int(blk["n_chains"]),
        ics=tuple(blk["ics"]),
        n_batches=int(blk["n_batches"]),
        keep_chains=True,
    )
    names = rep.tags
    out.header = ["chain", "ic", "t"] + names
    for c, ch in enumerate(rep.chains):
        for i in range(ch.times.size):
            out.rows.append([c, ch.ic, ch.times[i]] + [ch.series[n][i] for n in names])
    out.results.update(rep.to_dict())
    for name in names:
        if not np.isfinite(rep.mean[name]):
            out.violation("finite", name, float("nan"))
        if not rep.stabilized[name]:
            w = rep.windows[name]
            mag = abs(w[0][1] - w[1][1]) / max(abs(w[0][1]), abs(w[1][1])) if len(w) > 1 else float("nan")
            out.violation("dyadic_windows", name, mag, tolerance=0.10)
        if not rep.bounded[name]:
            out.violation("running_average_bounded", name, rep.running_max[name])
    ics = list(rep.by_ic)
    comps = []
    for i in range(len(ics)):
        for j in range(i + 1, len(ics)):
            for name in names:
                a, b = rep.by_ic[ics[i]][name], rep.by_ic[ics[j]][name]
                diff, pooled, ok = agreement(a["mean"], a["stderr"], b["mean"], b["stderr"], float(blk["n_se"]))
                comps.append({"a": ics[i], "b": ics[j], "tag": name, "diff": diff, "pooled_stderr": pooled, "agree": ok})
                if not ok:
                    out.violation("ic_agreement", f"{name}:{ics[i]}~{ics[j]}", diff, pooled_stderr=pooled)
    out.results["ic_comparisons"] = comps


def exp_coupling(sim: SimConfig, blk: dict, out: Outcome):
    u0 = initial_condition(blk["u0"], sim.m)
    v0 = initial_condition(blk["v0"], sim.m)
    run = run_coupled(u0, v0, sim, blk["alphas"], stream_id=int(blk["stream"]))
    header, rows = run.csv_rows(float(blk["csv_alpha"]))
    out.header, out.rows = header, [list(r) for r in rows]
    tol = float(blk["tol"]) + sim.dt
    checks = {}
    for a in run.alphas:
        n, bad = run.bound_check(a, float(blk["t_min"]), np.inf, tol)
        checks[str(a)] = {"checked": n, "violations": len(bad)}
        for t, excess in bad:
            out.violation("stability_bound", f"alpha={a},t={t:.17g}", excess, tolerance=tol)
    out.results["bound_checks"] = checks
    if sim.scheme == "backward_euler":
        inc = run.distance_increases(float(blk["monotone_tol"]))
        out.results["distance_increases"] = int(inc.size)
        for i in inc:
            out.violation(
                "distance_nonincreasing", f"t={run.times[i]:.17g}", run.distance[i] - run.distance[i - 1],
                tolerance=float(blk["monotone_tol"]),
            )
    out.results["d0"] = run.distance[0]
    out.results["d_final"] = run.distance[-1]
    # decay exponent is descriptive only; the bound above is the check
    live = run.times[(run.distance > DISTANCE_FLOOR) & (run.times >= float(blk["t_min"]))]
    try:
        fit = fit_decay_exponent(run.times, run.distance, float(blk["t_min"]), live[-1] if live.size else 0.0)
        out.results["decay_fit"] = {**asdict(fit), "reference": -0.25, "t_max": float(live[-1])}
    except ValidationError as exc:
        out.results["decay_fit"] = {"refused": str(exc)}


def exp_yosida(sim: SimConfig, blk: dict, out: Outcome):
    gen = RngStream(sim.seed, 0).generator()
    alphas = sorted((float(a) for a in blk["alphas"]), reverse=True)
    fields = random_field(sim.m, gen, int(blk["field_modes"]), scale=float(blk["field_scale"]), size=int(blk["n_fields"]))
    out.header = ["field", "alpha", "norm_V", "norm_A", "dist_to_A", "residual", "iterations"]
    for i, x in enumerate(fields):
        ax = drift(x)
        na = float(norm_H(ax))
        prev = np.inf
        for a in alphas:
            sol = resolvent(x, a)
            v = (sol.value - x) / a
            nv = float(norm_H(v))
            dist = float(norm_H(v - ax))
            out.rows.append([i, a, nv, na, dist, sol.final_residual, sol.iterations])
            if nv > na + float(blk["norm_tol"]):
                out.violation("yosida_norm", f"field={i},alpha={a}", nv - na, tolerance=float(blk["norm_tol"]))
            if sol.final_residual > float(blk["residual_tol"]):
                out.violation("resolvent_residual", f"field={i},alpha={a}", sol.final_residual)
            if dist > prev + float(blk["norm_tol"]):
                out.violation("monotone_convergence", f"field={i},alpha={a}", dist - prev)
            prev = dist
    out.results["n_fields"] = len(fields)
    out.results["alphas"] = alphas
    ms = int(blk["m_samples"])
    if ms:
        a = float(blk["mollify_alpha"])
        x = fields[0]
        est = mollified_drift(x, a, float(blk["beta"]), ms, RngStream(sim.seed, 1))
        err = float(norm_H(est.mean - yosida_map(x, a)))
        out.results["mollified"] = {"alpha": a, "beta": float(blk["beta"]), "error": err, "stderr_norm": est.stderr_norm}
        if err > 3 * est.stderr_norm:
            out.violation("mollified_limit", f"alpha={a}", err, stderr_norm=est.stderr_norm)


def _direction(name, m):
    h = initial_condition(name, m)
    return h / norm_H(h)


def exp_resolvent(sim: SimConfig, blk: dict, out: Outcome):
    gen = RngStream(sim.seed, 10**6).generator()
    npts = int(blk["n_points"])
    points = [np.zeros(sim.m)] + list(random_field(sim.m, gen, 8, scale=float(blk["point_scale"]), size=max(npts - 1, 0)))
    points = points[:npts]
    ests = resolvent_sweep(
        blk["functions"], blk["lambdas"], points, sim, int(blk["n_paths"]),
        None if blk["t_trunc"] is None else float(blk["t_trunc"]), n_se=float(blk["n_se"]),
    )
    report = []
    out.header = ["point", "function", "lambda", "estimate", "stderr", "truncation_bias", "bound_lhs", "bound_rhs", "pass"]
    for e in ests:
        report.append(
            {"function": e.function, "lambda": e.lam, "estimate": e.estimate, "stderr": e.stderr,
             "truncation_bias": e.truncation_bias, "bound_lhs": e.bound_lhs, "bound_rhs": e.bound_rhs,
             "pass": e.passed, "point": e.point}
        )
        out.rows.append([e.point, e.function, e.lam, e.estimate, e.stderr, e.truncation_bias, e.bound_lhs, e.bound_rhs, int(e.passed)])
        if not e.passed:
            out.violation("resolvent_sup_bound", f"{e.function},lambda={e.lam},point={e.point}", e.bound_lhs - e.bound_rhs)
    out.results["estimates"] = report
    g = blk.get("gradient") or {}
    if g.get("enabled"):
        chk = gradient_bound_check(
            g["function"], float(g["lambda"]), points[min(1, len(points) - 1)], _direction(g["direction"], sim.m),
            sim, int(blk["n_paths"]), float(g["delta"]), crn=True, stream_base=10**5, n_se=float(blk["n_se"]),
        )
        out.results["gradient"] = chk.to_dict()
        if not chk.passed:
            out.violation("gradient_bound", f"{chk.function},lambda={chk.lam}", chk.lhs - chk.rhs, stderr=chk.stderr)


def exp_invariance(sim: SimConfig, blk: dict, out: Outcome):
    res, traj = invariance_residual(
        blk["functions"], sim, float(blk["t_avg"]), None if blk["t_burn"] is None else float(blk["t_burn"]),
        u0=initial_condition(blk["u0"], sim.m), n_se=float(blk["n_se"]), with_series=True,
    )
    names = [parse_test_function(f).name for f in blk["functions"]]
    out.header = ["t"] + [f"J0[{n}]" for n in names]
    out.rows = [[traj.times[i]] + [traj.series[n][i] for n in names] for i in range(traj.times.size)]
    out.results["residuals"] = [r.to_dict() for r in res]
    for r in res:
        if not r.passed:
            out.violation("invariance", r.function, r.residual, stderr=r.stderr)


RUNNERS = {
    "simulate": exp_simulate,
    "moments": exp_moments,
    "coupling": exp_coupling,
    "yosida-check": exp_yosida,
    "resolvent": exp_resolvent,
    "invariance": exp_invariance,
}


# ------------------------------------------------------------------ entry


def run(config_path, overrides=(), out_dir=None, stream=None):
    """Execute one experiment; returns ``(exit_code, run_dir or None)``."""
    stream = sys.stderr if stream is None else stream
    try:
        cfg = load_config(config_path, overrides)
        sim = validate_config(cfg)
    except ValidationError as exc:
        print(f"config error: {exc}", file=stream)
        return EXIT_ERROR, None
    exp = cfg["experiment"]
    base = out_dir if out_dir is not None else cfg["output"]["dir"]
    run_dir = make_run_dir(base, exp)
    resolved = {k: v for k, v in cfg.items() if not k.startswith("_")}
    with open(run_dir / "config.resolved.yaml", "w") as fh:
        yaml.safe_dump(resolved, fh, sort_keys=False)
    manifest = {
        "experiment": exp,
        "seed": sim.seed,
        "git_revision": git_revision(),
        "backend": kernels.BACKEND,
        "workers": worker_count(),
        "started": datetime.now(timezone.utc).isoformat(),
    }
    out = Outcome()
    t0 = time.perf_counter()
    code = EXIT_OK
    error = None
    try:
        RUNNERS[exp](sim, cfg[exp], out)
    except (ScsfError, ValueError, ArithmeticError, OSError) as exc:
        error = f"{type(exc).__name__}: {exc}"
        code = EXIT_ERROR
        print(f"error: {error}", file=stream)
    wall = time.perf_counter() - t0
    if code == EXIT_OK and out.violations:
        code = EXIT_VIOLATION
    summary = {
        "experiment": exp,
        "passed": code == EXIT_OK,
        "exit_code": code,
        "error": error,
        "n_violations": len(out.violations),
        "violations": out.violations,
        **out.results,
    }
    write_json(run_dir / "summary.json", summary)
    write_csv(run_dir / "series.csv", out.header, out.rows)
    manifest.update({"finished": datetime.now(timezone.utc).isoformat(), "wall_seconds": wall, "exit_code": code})
    write_json(run_dir / "manifest.json", manifest)
    return code, run_dir


def validate(config_path, overrides=()) -> dict:
    """Dry-run validation report ``{"valid": bool, "problems": [...]}``."""
    try:
        cfg = load_config(config_path, overrides)
    except ConfigError as exc:
        return {"valid": False, "problems": [{"field": exc.field, "message": str(exc)}]}
    probs = config_problems(cfg)
    report = {"valid": not probs, "problems": [{"field": f, "message": m} for f, m in probs]}
    if not probs:
        sim = build_sim(cfg["sim"])
        report["experiment"] = cfg["experiment"]
        report["n_steps"] = sim.n_steps
        if sim.scheme == "explicit":
            report["explicit_dt_limit"] = sim.explicit_dt_limit()
    return report


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="scsf", description="Stochastic curve shortening flow experiments")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment")
    r.add_argument("config")
    r.add_argument("overrides", nargs="*", help="dotted key=value overrides, e.g. sim.seed=3")
    r.add_argument("--out", default=None, help="base directory for run folders (default: output.dir)")
    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("config")
    v.add_argument("overrides", nargs="*")
    args = p.parse_args(argv)
    if args.command == "validate":
        rep = validate(args.config, args.overrides)
        print(json.dumps(_jsonable(rep), indent=2))
        return EXIT_OK if rep["valid"] else EXIT_VIOLATION
    code, run_dir = run(args.config, args.overrides, args.out)
    if run_dir is not None:
        print(run_dir)
    return code


if __name__ == "__main__":
    sys.exit(main())
