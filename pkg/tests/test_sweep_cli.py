import math
import os
import subprocess
import sys

import numpy as np
import pytest

import oracles
from distillery import cli
from distillery.cli import ConfigError, build_parser, main, parse_ts, validate_config
from distillery.sweep import _fmt

P11_TRAJ_NMAX8 = 3.993432960736389e-06


def _parse(argv):
    return build_parser().parse_args(argv)


def _lines(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    assert b"\r" not in raw  # LF only
    return raw.decode("utf-8").splitlines()


def _split(path):
    lines = _lines(path)
    meta = {}
    body = []
    for line in lines:
        if line.startswith("# "):
            key, _, val = line[2:].partition("=")
            meta[key] = val
        else:
            body.append(line)
    return meta, body


# --- flag parsing ----------------------------------------------------------


def test_parse_ts_single_value():
    assert parse_ts("0.95") == (0.95,)


def test_parse_ts_range_includes_endpoints():
    got = parse_ts("0.6:0.8:0.05")
    assert got == pytest.approx((0.6, 0.65, 0.7, 0.75, 0.8))
    # a stop within half a step of the next grid point still takes it
    assert parse_ts("0.6:0.79:0.05") == pytest.approx((0.6, 0.65, 0.7, 0.75, 0.8))
    # but beyond half a step the grid stops short
    assert parse_ts("0.6:0.77:0.05") == pytest.approx((0.6, 0.65, 0.7, 0.75))
    # endpoint reached within float rounding slack
    assert parse_ts("0.7:0.9:0.1")[-1] == pytest.approx(0.9)


def test_parse_ts_rejects_malformed():
    for bad in ("", "0.6:0.8", "0.8:0.6:0.05", "0.6:0.8:0", "0.6:0.8:-0.1", "a:b:c"):
        with pytest.raises(ValueError):
            parse_ts(bad)


def test_validate_collects_every_error():
    ns = _parse(["decay", "--lambda", "1.5", "--tau", "0.5", "--out", "/nonexistent/x.csv"])
    with pytest.raises(ConfigError) as err:
        validate_config(ns)
    msg = str(err.value)
    assert "--lambda" in msg
    assert "--tau" in msg
    assert "--ts is required" in msg
    assert "--steps is required" in msg
    assert "--out directory" in msg


def test_validate_tau_takes_precedence_over_t(tmp_path):
    ns = _parse([
        "decay", "--lambda", "0.1", "--tau", "100", "--t", "0.5",
        "--ts", "0.99", "--steps", "2", "--out", str(tmp_path / "o.csv"),
    ])
    cfg = validate_config(ns)
    assert cfg.t == pytest.approx(math.sqrt(1 - 1 / 100), rel=1e-14)
    assert cfg.tau == 100.0


def test_validate_auto_n_max(tmp_path):
    base = ["--lambda", "0.1", "--tau", "100", "--ts", "0.99", "--steps", "2",
            "--out", str(tmp_path / "o.csv")]
    assert validate_config(_parse(["decay"] + base)).n_max == 7
    with pytest.raises(ConfigError, match="n-max"):
        validate_config(_parse(["decay"] + base + ["--n-max", "5"]))
    assert validate_config(_parse(["decay"] + base + ["--n-max", "9"])).n_max == 9


def test_validate_range_only_for_sweep_commands(tmp_path):
    out = str(tmp_path / "o.csv")
    ns = _parse(["decay", "--lambda", "0.1", "--tau", "100",
                 "--ts", "0.6:0.8:0.1", "--steps", "2", "--out", out])
    with pytest.raises(ConfigError, match="single value"):
        validate_config(ns)
    ns = _parse(["mc-sweep", "--lambda", "0.1", "--tau", "100",
                 "--ts", "0.6:0.8:0.1", "--out", out])
    cfg = validate_config(ns)
    assert len(cfg.ts_values) == 3


def test_validate_range_clips_closed_border(tmp_path):
    # a sweep written up to 1.00 drops the out-of-domain endpoint only
    ns = _parse(["mc-sweep", "--lambda", "0.1", "--tau", "100",
                 "--ts", "0.96:1.00:0.01", "--out", str(tmp_path / "o.csv")])
    cfg = validate_config(ns)
    assert cfg.ts_values == pytest.approx((0.96, 0.97, 0.98, 0.99))
    ns = _parse(["mc-sweep", "--lambda", "0.1", "--tau", "100",
                 "--ts", "1.0:1.2:0.1", "--out", str(tmp_path / "o.csv")])
    with pytest.raises(ConfigError, match="no values inside"):
        validate_config(ns)


def test_validate_sweep_needs_finite_tau(tmp_path):
    ns = _parse(["mc-sweep", "--lambda", "0.1", "--t", "1.0",
                 "--ts", "0.7:0.8:0.05", "--out", str(tmp_path / "o.csv")])
    with pytest.raises(ConfigError, match="finite tau"):
        validate_config(ns)


# --- output contract -------------------------------------------------------


def test_decay_csv_format(tmp_path):
    out = tmp_path / "decay.csv"
    rc = main(["decay", "--lambda", "0.1", "--tau", "100", "--ts", "0.99",
               "--steps", "3", "--out", str(out)])
    assert rc == 0
    meta, body = _split(out)
    for key in ("command", "version", "lambda", "t", "tau", "n_max",
                "eig_tol", "trace_tol", "conv_tol", "wall_time_s"):
        assert key in meta
    assert meta["command"] == "decay"
    assert meta["n_max"] == "7"
    assert body[0] == "m,neg_loss_only,neg_vac_only,neg_both"
    assert len(body) == 5
    first = body[1].split(",")
    assert abs(float(first[1]) - math.log2(1.1 / 0.9)) < 1e-6
    # every column decreases along the sweep
    rows = [list(map(float, b.split(","))) for b in body[1:]]
    for col in (1, 2, 3):
        assert all(b[col] < a[col] for a, b in zip(rows, rows[1:]))
    # floats rendered at 15 significant digits, round-trip stable
    for row in body[1:]:
        for cell in row.split(",")[1:]:
            assert _fmt(float(cell)) == cell
    # atomic write leaves no temp files behind
    assert os.listdir(tmp_path) == ["decay.csv"]


def test_malt_trace_csv(tmp_path):
    out = tmp_path / "mt.csv"
    rc = main(["malt-trace", "--lambda", "0.1", "--tau", "100", "--ts", "0.99",
               "--ma", "1", "--mb", "2", "--out", str(out)])
    assert rc == 0
    meta, body = _split(out)
    assert body[0] == "m,negativity"
    assert len(body) == 4  # cycles 0..2
    assert float(meta["joint_prob"]) > 0.0
    assert [int(r.split(",")[0]) for r in body[1:]] == [0, 1, 2]


def test_pij_csv_rows_unique_sorted(tmp_path):
    out = tmp_path / "pij.csv"
    rc = main(["pij", "--lambda", "0.1", "--tau", "100", "--ts", "0.99",
               "--imax", "2", "--jmax", "3", "--out", str(out)])
    assert rc == 0
    _, body = _split(out)
    assert body[0] == "i,j,p"
    keys = [tuple(map(int, r.split(",")[:2])) for r in body[1:]]
    assert len(keys) == 6
    assert len(set(keys)) == 6
    assert keys == sorted(keys)


def test_pij_single_cell_matches_trajectory_oracle(tmp_path):
    out = tmp_path / "p11.csv"
    rc = main(["pij", "--lambda", "0.1", "--tau", "100", "--ts", "0.99",
               "--imax", "1", "--jmax", "1", "--n-max", "8", "--out", str(out)])
    assert rc == 0
    _, body = _split(out)
    p = float(body[1].split(",")[2])
    assert abs(p - P11_TRAJ_NMAX8) < 1e-10 * P11_TRAJ_NMAX8 + 1e-16
    live = oracles.p11_trajectory_oracle(0.1, 8, math.sqrt(1 - 1 / 100), 0.99)
    assert p == pytest.approx(live, rel=1e-10)


def test_distill_csv_stages(tmp_path):
    out = tmp_path / "d.csv"
    rc = main(["distill", "--lambda", "0.1", "--tau", "100", "--ts", "0.99",
               "--ma", "1", "--mb", "1", "--out", str(out)])
    assert rc == 0
    meta, body = _split(out)
    assert body[0] == "stage,phase,negativity,prob"
    phases = [r.split(",")[1] for r in body[1:]]
    assert phases[0] == "malt"
    assert phases[-1] == "mash"
    assert phases == sorted(phases, key=lambda p: (p != "malt"))  # malt block first
    assert meta["converged"] == "1"
    assert int(meta["mash_iterations"]) >= 1
    negs = [float(r.split(",")[2]) for r in body[1:]]
    assert negs[-1] > negs[0]


def test_mc_sweep_csv_threshold(tmp_path):
    out = tmp_path / "mc.csv"
    rc = main(["mc-sweep", "--lambda", "0.1", "--tau", "100",
               "--ts", "0.6:0.8:0.05", "--out", str(out)])
    assert rc == 0
    meta, body = _split(out)
    assert body[0] == "ts,m_c"
    vals = [(float(a), int(b)) for a, b in (r.split(",") for r in body[1:])]
    assert [v for _, v in vals[:2]] == [0, 0]  # below threshold
    assert vals[-1][1] >= 1
    assert float(meta["baseline_negativity"]) == pytest.approx(math.log2(1.1 / 0.9), rel=1e-12)


def test_avg_ent_csv(tmp_path):
    out = tmp_path / "avg.csv"
    rc = main(["avg-ent", "--lambda", "0.1", "--tau", "100",
               "--ts", "0.75", "--out", str(out)])
    assert rc == 0
    _, body = _split(out)
    assert body[0] == "ts,m_c,avg_ent"
    ts, mc, val = body[1].split(",")
    assert int(mc) >= 1
    assert float(val) > math.log2(1.1 / 0.9)


def test_baseline_flag_selects_malt_only_gain(tmp_path):
    out = tmp_path / "mo.csv"
    rc = main(["mc-sweep", "--lambda", "0.1", "--tau", "100", "--ts", "0.99",
               "--baseline", "malt-only", "--out", str(out)])
    assert rc == 0
    meta, body = _split(out)
    assert meta["baseline"] == "malt-only"
    assert int(body[1].split(",")[1]) >= 1


# --- exit codes ------------------------------------------------------------


def test_exit_code_zero_on_success(tmp_path):
    rc = main(["decay", "--lambda", "0.1", "--tau", "100", "--ts", "0.99",
               "--steps", "1", "--out", str(tmp_path / "ok.csv")])
    assert rc == 0


def test_exit_code_one_on_config_error(tmp_path):
    rc = main(["decay", "--lambda", "1.5", "--tau", "100", "--ts", "0.99",
               "--steps", "1", "--out", str(tmp_path / "x.csv")])
    assert rc == 1
    assert not (tmp_path / "x.csv").exists()
    assert main(["no-such-command"]) == 1
    assert main([]) == 1


def test_exit_code_two_on_numerical_failure(tmp_path):
    # subtracting from vacuum is an impossible branch
    rc = main(["distill", "--lambda", "0", "--tau", "100", "--ts", "0.99",
               "--ma", "1", "--mb", "1", "--out", str(tmp_path / "z.csv")])
    assert rc == 2
    assert not (tmp_path / "z.csv").exists()


# --- determinism -----------------------------------------------------------


def test_repeated_runs_are_bit_stable(tmp_path):
    argv = ["mc-sweep", "--lambda", "0.1", "--tau", "100",
            "--ts", "0.7:0.8:0.05", "--out", None]
    bodies = []
    for name in ("a.csv", "b.csv"):
        argv[-1] = str(tmp_path / name)
        assert main(list(argv)) == 0
        bodies.append(_split(tmp_path / name)[1])
    assert bodies[0] == bodies[1]


def test_thread_count_does_not_change_the_body(tmp_path):
    base = ["pij", "--lambda", "0.1", "--tau", "100", "--ts", "0.99",
            "--imax", "2", "--jmax", "2"]
    one = tmp_path / "t1.csv"
    two = tmp_path / "t2.csv"
    assert main(base + ["--threads", "1", "--out", str(one)]) == 0
    assert main(base + ["--threads", "2", "--out", str(two)]) == 0
    assert _split(one)[1] == _split(two)[1]
    assert _split(one)[0]["threads"] == "1"
    assert _split(two)[0]["threads"] == "2"


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "distillery", "malt-trace", "--lambda", "0.1",
         "--tau", "100", "--ts", "0.99", "--ma", "1", "--mb", "1",
         "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
    assert "config:" in proc.stderr  # resolved config echoed to stderr
