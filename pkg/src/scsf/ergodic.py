"""Birkhoff averages of field functionals along long stationary runs.

Each chain is one trajectory with its own noise stream.  After a burn-in,
the recorded functional values are averaged in time; standard errors come
from non-overlapping batch means because successive samples are strongly
correlated.  Dyadic windows ``[T, 2T]`` of the averaging period expose runs
that have not stabilized.
"""

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .functionals import MOMENT_TAGS, resolve_observers
from .integrator import SimConfig, simulate
from .parallel import pmap
from .spectral import Grid

DEFAULT_BATCHES = 16
WINDOW_REL_TOL = 0.10
DEFAULT_ICS = ("zero", "e1", "tent")


def initial_condition(name: str, m: int) -> np.ndarray:
    """Named initial fields: ``zero``, ``tent``, ``e<k>``, optionally scaled as ``'0.5*e1'``."""
    grid = Grid(m)
    scale = 1.0
    if "*" in name:
        c, name = name.split("*", 1)
        scale = float(c)
    name = name.strip()
    if name == "zero":
        u = np.zeros(m)
    elif name == "tent":
        x = grid.nodes
        u = np.minimum(x, 1.0 - x)
    elif name.startswith("e") and name[1:].isdigit():
        u = grid.basis(int(name[1:]))
    else:
        raise ValueError(f"unknown initial condition {name!r}")
    return scale * u


def batch_means(x, n_batches: int = DEFAULT_BATCHES):
    """Mean and batch-means standard error of a correlated series."""
    x = np.asarray(x, dtype=float)
    if x.size < 2 * n_batches:
        n_batches = max(2, x.size // 2)
    if x.size < 2:
        return float(x.mean()) if x.size else float("nan"), float("nan")
    b = x.size // n_batches
    means = x[: b * n_batches].reshape(n_batches, b).mean(axis=1)
    return float(x.mean()), float(means.std(ddof=1) / np.sqrt(n_batches))


def dyadic_windows(t, x, t0: float, t_avg: float, min_samples: int = 8):
    """Averages over ``[t0 + T, t0 + 2T]`` for ``T = t_avg/2, t_avg/4, ...``.

    Returned longest window first, as ``[(T, mean), ...]``.
    """
    out = []
    T = t_avg / 2
    while True:
        sel = (t > t0 + T) & (t <= t0 + 2 * T + 1e-12 * t_avg)
        if sel.sum() < min_samples:
            break
        out.append((T, float(x[sel].mean())))
        T /= 2
    return out


def windows_agree(windows, rel_tol: float = WINDOW_REL_TOL) -> bool:
    """Whether the two longest dyadic windows agree to ``rel_tol`` relative."""
    if len(windows) < 2:
        return False
    a, b = windows[0][1], windows[1][1]
    scale = max(abs(a), abs(b))
    return scale == 0.0 or abs(a - b) <= rel_tol * scale


@dataclass
class ChainResult:
    ic: str
    stream_id: int
    times: np.ndarray
    series: dict

    def averaging_mask(self, t_burn: float):
        return self.times > t_burn


@dataclass
class MomentReport:
    """Pooled Birkhoff averages with stabilization diagnostics."""

    tags: list
    mean: dict
    stderr: dict
    windows: dict
    stabilized: dict
    running_max: dict
    bounded: dict
    chain_means: dict
    chain_stderr: dict
    by_ic: dict
    burn_in: float
    total_time: float
    seed: int
    stream_ids: list
    chain_ics: list
    flags: list = field(default_factory=list)
    chains: list | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return not self.flags

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("chains")
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _run_chain(args):
    cfg, ic, stream_id, tags = args
    u0 = initial_condition(ic, cfg.m)
    traj = simulate(u0, cfg, tags, stream_id=stream_id)
    return ChainResult(ic, stream_id, traj.times, traj.series)


def _pool(chains, names, t_burn, t_avg, n_batches):
    mean, se, windows, stab, runmax, bounded = {}, {}, {}, {}, {}, {}
    cmeans, cses = {}, {}
    for name in names:
        ms, ss, ws, rmax = [], [], [], []
        for ch in chains:
            sel = ch.averaging_mask(t_burn)
            x = ch.series[name][sel]
            mu, s = batch_means(x, n_batches)
            ms.append(mu)
            ss.append(s)
            ws.append(dyadic_windows(ch.times[sel], x, t_burn, t_avg))
            running = np.cumsum(x) / np.arange(1, x.size + 1)
            rmax.append(float(np.max(np.abs(running))) if running.size else float("nan"))
        k = len(chains)
        mean[name] = float(np.mean(ms))
        se[name] = float(np.sqrt(np.sum(np.square(ss))) / k)
        nwin = min(len(w) for w in ws)
        windows[name] = [(ws[0][j][0], float(np.mean([w[j][1] for w in ws]))) for j in range(nwin)]
        stab[name] = windows_agree(windows[name])
        runmax[name] = float(max(rmax))
        final = abs(mean[name])
        bounded[name] = bool(np.isfinite(runmax[name]) and runmax[name] <= 10.0 * final) or (
            final == 0.0 and runmax[name] == 0.0
        )
        cmeans[name] = ms
        cses[name] = ss
    return mean, se, windows, stab, runmax, bounded, cmeans, cses


def estimate_moments(
    cfg: SimConfig,
    tags=MOMENT_TAGS,
    t_avg: float = 50.0,
    t_burn: float | None = None,
    n_chains: int = 4,
    ics=DEFAULT_ICS,
    n_batches: int = DEFAULT_BATCHES,
    stream_base: int = 0,
    common_noise: bool = False,
    keep_chains: bool = False,
) -> MomentReport:
    """Pooled time averages over ``n_chains`` chains cycling through ``ics``.

    Chain ``c`` starts from ``ics[c % len(ics)]`` and uses noise stream
    ``stream_base + c`` (or ``stream_base`` for every chain when
    ``common_noise``).  Blow-up in any chain propagates as
    :class:`~scsf.errors.BlowUpError` naming seed and stream.
    """
    if n_chains < 1:
        raise ValueError("n_chains must be >= 1")
    if t_burn is None:
        t_burn = t_avg / 10.0
    names = list(resolve_observers(tags))
    run_cfg = cfg.with_(t_end=t_burn + t_avg).validate()
    jobs = [
        (run_cfg, ics[c % len(ics)], stream_base if common_noise else stream_base + c, tags)
        for c in range(n_chains)
    ]
    chains = pmap(_run_chain, jobs)
    mean, se, windows, stab, runmax, bounded, cmeans, cses = _pool(
        chains, names, t_burn, t_avg, n_batches
    )
    by_ic = {}
    for ic in dict.fromkeys(ch.ic for ch in chains):
        group = [i for i, ch in enumerate(chains) if ch.ic == ic]
        by_ic[ic] = {
            name: {
                "mean": float(np.mean([cmeans[name][i] for i in group])),
                "stderr": float(np.sqrt(np.sum([cses[name][i] ** 2 for i in group])) / len(group)),
                "chains": len(group),
            }
            for name in names
        }
    flags = []
    for name in names:
        if not np.isfinite(mean[name]):
            flags.append(f"{name}: non-finite average")
        if not stab[name]:
            flags.append(f"{name}: dyadic windows differ by more than {WINDOW_REL_TOL:.0%}")
        if not bounded[name]:
            flags.append(f"{name}: running average exceeds 10x the final average")
    return MomentReport(
        tags=names,
        mean=mean,
        stderr=se,
        windows=windows,
        stabilized=stab,
        running_max=runmax,
        bounded=bounded,
        chain_means=cmeans,
        chain_stderr=cses,
        by_ic=by_ic,
        burn_in=float(t_burn),
        total_time=float(n_chains * (t_burn + t_avg)),
        seed=int(cfg.seed),
        stream_ids=[j[2] for j in jobs],
        chain_ics=[j[1] for j in jobs],
        flags=flags,
        chains=chains if keep_chains else None,
    )


def agreement(a_mean, a_se, b_mean, b_se, n_se: float = 3.0):
    """``(difference, pooled stderr, agree)`` for two independent estimates."""
    diff = abs(a_mean - b_mean)
    pooled = float(np.hypot(a_se, b_se))
    return diff, pooled, bool(diff <= n_se * pooled)


@dataclass
class ICReport:
    ics: list
    reports: dict
    comparisons: list
    agree: bool

    def to_dict(self):
        return {
            "ics": self.ics,
            "agree": self.agree,
            "comparisons": self.comparisons,
            "reports": {k: r.to_dict() for k, r in self.reports.items()},
        }


def initial_condition_independence(
    cfg: SimConfig,
    tags=MOMENT_TAGS,
    ic_set=("zero", "e1"),
    t_avg: float = 50.0,
    t_burn: float | None = None,
    chains_per_ic: int = 1,
    common_noise: bool = False,
    n_se: float = 3.0,
) -> ICReport:
    """Compare moment estimates started from different initial conditions.

    Every IC uses the same stream ids when ``common_noise`` is set, so
    identical ICs then give identical estimates; otherwise each IC gets its
    own block of streams.
    """
    if len(ic_set) < 2:
        raise ValueError("need at least two initial conditions")
    reports = {}
    for i, ic in enumerate(ic_set):
        base = 0 if common_noise else i * chains_per_ic
        key = ic if ic not in reports else f"{ic}#{i}"
        reports[key] = estimate_moments(
            cfg, tags, t_avg, t_burn, chains_per_ic, (ic,), stream_base=base
        )
    comparisons = []
    keys = list(reports)
    for i in range(len(keys)):
        for j in range(i + 1, len(keys)):
            a, b = reports[keys[i]], reports[keys[j]]
            for name in a.tags:
                diff, pooled, ok = agreement(a.mean[name], a.stderr[name], b.mean[name], b.stderr[name], n_se)
                comparisons.append(
                    {"a": keys[i], "b": keys[j], "tag": name, "diff": diff, "pooled_stderr": pooled, "agree": ok}
                )
    return ICReport(keys, reports, comparisons, all(c["agree"] for c in comparisons))
