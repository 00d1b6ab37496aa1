"""Command-line surface: stable CSV/JSON outputs for each experiment.

Four subcommands: `fringes` tabulates the interference pattern and its
derivative envelopes, `gsq` scans the windowed mean squared derivative
and fits its large-window slope, `adapt` runs the adaptive-estimation
ensemble, and `compare` reports the controlled-vs-free sensitivity
comparison. Every output embeds the fully resolved configuration, so a
run can be reproduced byte for byte from its own metadata; wall-clock
timing goes to stderr only.

Exit codes: 0 success, 2 config error, 3 I/O error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import simkit
from .information import compare_control
from .protocol import run_adaptive
from .runconfig import ConfigError, adaptive_echo, load_adaptive_config, load_compare_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv_text(meta: dict, header: str, rows) -> str:
    lines = [f"# {k} = {v}" for k, v in meta.items()]
    lines.append(header)
    lines.extend(rows)
    return "\n".join(lines) + "\n"


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_fringes(args) -> int:
    meta = {
        "command": "fringes",
        "n_units": args.n_units,
        "zeta_min": _fmt(args.zeta_min),
        "zeta_max": _fmt(args.zeta_max),
        "points": args.points,
    }
    k_scan, gf_scan, gu_scan = simkit.fringe_scan(
        args.n_units, (args.zeta_min, args.zeta_max), args.points)
    rows = [
        ",".join((_fmt(z), _fmt(k), _fmt(gf), _fmt(gu)))
        for z, k, gf, gu in zip(k_scan.x_values, k_scan.y_values,
                                gf_scan.y_values, gu_scan.y_values)
    ]
    _write_text(args.out, _csv_text(meta, "zeta,k_over_n,g_finite,g_universal", rows))
    return EXIT_OK


def cmd_gsq(args) -> int:
    if not (args.min > 0 and args.max > args.min):
        raise ConfigError(["gsq range: need 0 < min < max"])
    if args.points < 2:
        raise ConfigError(["points: need at least 2"])
    meta = {
        "command": "gsq",
        "min": _fmt(args.min),
        "max": _fmt(args.max),
        "points": args.points,
        "fit_min": _fmt(args.fit_min),
        "fit_max": _fmt(args.fit_max),
    }
    dz = np.logspace(np.log10(args.min), np.log10(args.max), args.points)
    scan = simkit.gsq_scan(dz)
    rows = [",".join((_fmt(x), _fmt(y))) for x, y in zip(scan.x_values, scan.y_values)]
    _write_text(args.out, _csv_text(meta, "delta_zeta,g_sq_mean", rows))

    in_fit = np.flatnonzero((scan.x_values >= args.fit_min) & (scan.x_values <= args.fit_max))
    if len(in_fit) < 3:
        raise ValueError("fewer than 3 scan points inside the fit range")
    window = (int(in_fit[0]), int(in_fit[-1]))
    slope = simkit.fit_loglog_slope(scan.x_values, scan.y_values, window)
    summary = {
        "command": "gsq",
        "config": {"min": args.min, "max": args.max, "points": args.points,
                   "fit_min": args.fit_min, "fit_max": args.fit_max},
        "slope": slope,
        "fit_window": list(window),
        "n_points_in_fit": int(len(in_fit)),
    }
    summary_path = args.summary or (args.out.rsplit(".", 1)[0] + "_summary.json")
    _write_text(summary_path, _json_text(summary))
    return EXIT_OK


def cmd_adapt(args) -> int:
    overrides = {"n_reps": args.reps, "seed": args.seed,
                 "out_prefix": args.out_prefix, "fit_tail_fraction": args.fit_tail}
    cfg, harness = load_adaptive_config(args.config, overrides)
    t0 = time.perf_counter()
    agg = simkit.run_repetitions(
        cfg, harness["n_reps"], master_seed=cfg.seed,
        n_workers=args.threads, fit_tail_fraction=harness["fit_tail_fraction"])
    wall = time.perf_counter() - t0
    print(f"adapt: {harness['n_reps']} repetitions, {agg.n_common_steps} steps, "
          f"wall clock {wall:.2f} s", file=sys.stderr)
    if agg.n_aborted:
        print(f"adapt: {agg.n_aborted} repetitions aborted", file=sys.stderr)
        return EXIT_NUMERICAL

    resolved = adaptive_echo(cfg)
    resolved.update({"n_reps": harness["n_reps"],
                     "fit_tail_fraction": harness["fit_tail_fraction"]})
    meta = {"command": "adapt"}
    meta.update({k: resolved[k] for k in sorted(resolved)})
    rows = [
        ",".join((
            str(int(step)), str(int(stage)), _fmt(nu_units), _fmt(tau), _fmt(nu),
            _fmt(t), _fmt(dw), _fmt(zt), _fmt(sa),
        ))
        for step, stage, nu_units, tau, nu, t, dw, zt, sa in zip(
            agg.step_axis, agg.stage_column, agg.mean_n_units, agg.mean_tau,
            agg.mean_nu, agg.mean_cumulative_time, agg.mean_delta_omega,
            agg.mean_zeta, agg.mean_scaled_alpha)
    ]
    prefix = harness["out_prefix"]
    header = "step,stage,n_units,tau,nu,mean_time,mean_delta_omega,mean_zeta,mean_scaled_alpha"
    _write_text(prefix + "_steps.csv", _csv_text(meta, header, rows))

    summary = {
        "command": "adapt",
        "config": resolved,
        "fit_slope": agg.fit_slope,
        "fit_window": list(agg.fit_window),
        "final_mean_delta_omega": float(agg.mean_delta_omega[-1]),
        "final_mean_time": float(agg.mean_cumulative_time[-1]),
        "n_common_steps": agg.n_common_steps,
    }
    _write_text(prefix + "_summary.json", _json_text(summary))

    if args.snapshot_posterior:
        traj = run_adaptive(cfg, keep_posterior=True)
        post = traj.final_posterior
        snap_meta = {"command": "adapt snapshot", "seed": cfg.seed}
        snap_rows = [",".join((_fmt(om), _fmt(w)))
                     for om, w in zip(post.grid, post.weights)]
        _write_text(args.snapshot_posterior,
                    _csv_text(snap_meta, "omega,weight", snap_rows))
    return EXIT_OK


def cmd_compare(args) -> int:
    overrides = {"k_factor": args.k_factor, "t2": args.t2}
    kwargs = load_compare_config(args.config, overrides)
    report = compare_control(**kwargs)
    rep = {("lambda" if k == "lam" else k): v for k, v in report.as_dict().items()}
    doc = {
        "command": "compare",
        "config": {("lambda" if k == "lam" else k): v for k, v in kwargs.items()},
        "report": rep,
    }
    text = _json_text(doc)
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qsense",
        description="Oscillator-frequency sensing with a pulsed qubit probe",
    )
    sub = p.add_subparsers(dest="subcommand", required=True)

    f = sub.add_parser("fringes", help="tabulate the fringe pattern and derivative envelopes")
    f.add_argument("--n-units", type=int, default=50)
    f.add_argument("--zeta-min", type=float, default=-10.0)
    f.add_argument("--zeta-max", type=float, default=10.0)
    f.add_argument("--points", type=int, default=2001)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fringes)

    g = sub.add_parser("gsq", help="scan the windowed mean squared fringe derivative")
    g.add_argument("--min", type=float, default=0.1)
    g.add_argument("--max", type=float, default=1000.0)
    g.add_argument("--points", type=int, default=61)
    g.add_argument("--fit-min", type=float, default=10.0)
    g.add_argument("--fit-max", type=float, default=1000.0)
    g.add_argument("--out", required=True)
    g.add_argument("--summary", default=None,
                   help="summary JSON path (default: derived from --out)")
    g.set_defaults(func=cmd_gsq)

    a = sub.add_parser("adapt", help="run the adaptive-estimation ensemble")
    a.add_argument("--config", required=True)
    a.add_argument("--reps", type=int, default=None)
    a.add_argument("--seed", type=int, default=None)
    a.add_argument("--out-prefix", default=None)
    a.add_argument("--fit-tail", type=float, default=None,
                   help="fraction of the all-stage-2 span used for the slope fit")
    a.add_argument("--threads", type=int, default=None,
                   help="worker cap (QSENSE_THREADS, then CPU count, when unset)")
    a.add_argument("--snapshot-posterior", default=None,
                   help="also run one repetition and write its final posterior CSV here")
    a.set_defaults(func=cmd_adapt)

    c = sub.add_parser("compare", help="controlled vs free-evolution sensitivity report")
    c.add_argument("--config", required=True)
    c.add_argument("--k-factor", type=float, default=None)
    c.add_argument("--t2", type=float, default=None)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
