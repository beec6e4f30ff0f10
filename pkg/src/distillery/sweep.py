"""Sweep execution and CSV emission for the command-line interface.

Every command resolves to a list of parameter cells evaluated by pure
top-level functions, so cells can go through a process pool; rows come back
in cell order, which keeps the CSV body byte-stable for any thread count.
"""

import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .channels import LossChannelParams, SubtractionParams, detect_phonons, loss_event
from .core import TruncationConfig, normalize, tmss
from .negativity import log_negativity
from .protocol import (
    MaltingSchedule,
    average_entanglement,
    critical_attempts,
    malt,
    mash_iterate,
)


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved invocation of one subcommand."""

    command: str
    lam: float
    t: float
    tau: float
    ts_values: tuple
    ts_spec: str
    out: str
    ma: int = 0
    mb: int = 0
    steps: int = 0
    imax: int = 0
    jmax: int = 0
    max_iter: int = 50
    n_max: int = 0
    threads: int = 1
    baseline: str = "tmss"


@dataclass(frozen=True)
class SweepResult:
    columns: tuple
    rows: list
    metadata: dict
    path: str


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".15g")
    return str(x)


def write_csv(path, columns, rows, metadata):
    """Atomic CSV write: metadata lines '# key=value', header, data rows.

    UTF-8, comma delimited, LF line endings, 15 significant digits.
    """
    dirn = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=dirn, suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            for key, value in metadata.items():
                f.write(f"# {key}={_fmt(value)}\n")
            f.write(",".join(columns) + "\n")
            for row in rows:
                f.write(",".join(_fmt(x) for x in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _pmap(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# per-cell workers (top level so the process pool can pickle them)


def _pij_cell(args):
    lam, t, ts, n_max, i, j = args
    cfg = TruncationConfig(n_max)
    sched = MaltingSchedule(i, j, LossChannelParams(t), SubtractionParams(ts))
    return malt(lam, sched, cfg).joint_prob


def _mc_cell(args):
    lam, t, ts, n_max, max_iter, gain_mode = args
    cfg = TruncationConfig(n_max)
    count = critical_attempts(
        lam,
        LossChannelParams(t),
        SubtractionParams(ts),
        cfg,
        max_iter=max_iter,
        gain_mode=gain_mode,
    )
    return count.m_c


def _avg_cell(args):
    lam, t, ts, n_max, max_iter, gain_mode = args
    cfg = TruncationConfig(n_max)
    avg = average_entanglement(
        lam,
        LossChannelParams(t),
        SubtractionParams(ts),
        cfg,
        max_iter=max_iter,
        gain_mode=gain_mode,
    )
    return len(avg.terms), avg.value


# ---------------------------------------------------------------------------
# command runners


def _run_decay(cfg):
    tcfg = TruncationConfig(cfg.n_max)
    loss = LossChannelParams(cfg.t)
    sub = SubtractionParams(cfg.ts_values[0])
    s_loss = s_vac = s_both = tmss(cfg.lam, tcfg)
    rows = []
    warn = False
    for m in range(cfg.steps + 1):
        negs = [log_negativity(s) for s in (s_loss, s_vac, s_both)]
        warn = warn or any(n.trunc_warning for n in negs)
        rows.append((m, negs[0].value, negs[1].value, negs[2].value))
        if m == cfg.steps:
            break
        s_loss = loss_event(s_loss, loss)
        s_vac, _ = normalize(detect_phonons(s_vac, sub, 0, 0))
        s_both, _ = normalize(detect_phonons(loss_event(s_both, loss), sub, 0, 0))
    return ("m", "neg_loss_only", "neg_vac_only", "neg_both"), rows, {"trunc_warning": warn}


def _run_malt_trace(cfg):
    tcfg = TruncationConfig(cfg.n_max)
    sched = MaltingSchedule(
        cfg.ma, cfg.mb, LossChannelParams(cfg.t), SubtractionParams(cfg.ts_values[0])
    )
    rec = malt(cfg.lam, sched, tcfg)
    rows = list(rec.negativity_trace)
    return ("m", "negativity"), rows, {"joint_prob": rec.joint_prob}


def _run_pij(cfg):
    cells = [
        (cfg.lam, cfg.t, cfg.ts_values[0], cfg.n_max, i, j)
        for i in range(1, cfg.imax + 1)
        for j in range(1, cfg.jmax + 1)
    ]
    probs = _pmap(_pij_cell, cells, cfg.threads)
    rows = [(c[4], c[5], p) for c, p in zip(cells, probs)]
    return ("i", "j", "p"), rows, {}


def _run_distill(cfg):
    tcfg = TruncationConfig(cfg.n_max)
    sched = MaltingSchedule(
        cfg.ma, cfg.mb, LossChannelParams(cfg.t), SubtractionParams(cfg.ts_values[0])
    )
    rec = malt(cfg.lam, sched, tcfg)
    outcome = mash_iterate(rec.state, tcfg, max_iter=cfg.max_iter)
    rows = [(0, "malt", rec.negativity_trace[0][1], 1.0)]
    for m, neg in rec.negativity_trace[1:]:
        rows.append((m, "malt", neg, rec.cycle_probs[m - 1]))
    base = len(rec.negativity_trace) - 1
    for i, neg in enumerate(outcome.negativity_by_stage[1:], start=1):
        rows.append((base + i, "mash", neg, outcome.mash_probs[i - 1]))
    meta = {
        "joint_prob": rec.joint_prob,
        "mash_iterations": outcome.iterations,
        "converged": outcome.converged,
        "max_discarded": outcome.max_discarded,
    }
    return ("stage", "phase", "negativity", "prob"), rows, meta


def _run_mc_sweep(cfg):
    gain_mode = "malt-only" if cfg.baseline == "malt-only" else "full"
    cells = [
        (cfg.lam, cfg.t, ts, cfg.n_max, cfg.max_iter, gain_mode) for ts in cfg.ts_values
    ]
    counts = _pmap(_mc_cell, cells, cfg.threads)
    rows = [(ts, mc) for ts, mc in zip(cfg.ts_values, counts)]
    baseline = math.log2((1.0 + cfg.lam) / (1.0 - cfg.lam))
    return ("ts", "m_c"), rows, {"baseline_negativity": baseline}


def _run_avg_ent(cfg):
    gain_mode = "malt-only" if cfg.baseline == "malt-only" else "full"
    cells = [
        (cfg.lam, cfg.t, ts, cfg.n_max, cfg.max_iter, gain_mode) for ts in cfg.ts_values
    ]
    results = _pmap(_avg_cell, cells, cfg.threads)
    rows = [(ts, mc, val) for ts, (mc, val) in zip(cfg.ts_values, results)]
    return ("ts", "m_c", "avg_ent"), rows, {}


_RUNNERS = {
    "decay": _run_decay,
    "malt-trace": _run_malt_trace,
    "pij": _run_pij,
    "distill": _run_distill,
    "mc-sweep": _run_mc_sweep,
    "avg-ent": _run_avg_ent,
}


def run(config):
    """Execute one resolved subcommand and write its CSV."""
    t0 = time.perf_counter()
    columns, rows, extra = _RUNNERS[config.command](config)
    tcfg = TruncationConfig(config.n_max)
    metadata = {
        "command": config.command,
        "version": f"distillery-{__version__}",
        "lambda": config.lam,
        "t": config.t,
        "tau": config.tau,
        "ts": config.ts_spec,
        "n_max": config.n_max,
        "eig_tol": tcfg.eig_tol,
        "trace_tol": tcfg.trace_tol,
        "conv_tol": tcfg.conv_tol,
        "threads": config.threads,
    }
    for name in ("ma", "mb", "steps", "imax", "jmax"):
        if getattr(config, name):
            metadata[name] = getattr(config, name)
    if config.command in ("distill", "mc-sweep", "avg-ent"):
        metadata["max_iter"] = config.max_iter
        metadata["baseline"] = config.baseline
    metadata.update(extra)
    metadata["wall_time_s"] = time.perf_counter() - t0
    write_csv(config.out, columns, rows, metadata)
    return SweepResult(tuple(columns), rows, metadata, config.out)
