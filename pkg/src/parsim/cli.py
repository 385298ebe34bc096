"""Command-line entry point: ``parsim <subcommand> ...``.

Exit codes: 0 success, 2 persistence-of-excitation or sweep failure,
3 invalid configuration, model or unreadable input file.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .bounds import bound_reports
from .data_assembly import build_hankels, build_regressor_bank
from .errors import (
    ConfigurationError,
    ParsimError,
    PersistenceOfExcitationError,
    SweepError,
)
from .estimators import estimate_classical_projection, estimate_parsim_bank
from .harness import ExperimentConfig, _resolve_model, read_rows_csv, run_sweep, write_sweep
from .realization import align_similarity, realize, save_realization
from .system_model import Trajectory, load_model, simulate, validate_model

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 2, 3


def _model(arg, sigma_e=None):
    path = Path(arg)
    if path.exists():
        m = load_model(path)
        return m if sigma_e is None else m.with_noise(sigma_e)
    return _resolve_model(arg, sigma_e)


def cmd_validate(args):
    m = _model(args.model)
    rep = validate_model(m, noiseless=args.noiseless)
    print(json.dumps(rep.to_dict(), indent=2))
    return EXIT_OK if rep.passed else EXIT_CONFIG


def cmd_simulate(args):
    m = _model(args.model, args.sigma_e)
    rep = validate_model(m, noiseless=args.noiseless or m.sigma_e == 0)
    if not rep.passed:
        print("invalid model: " + "; ".join(rep.failures), file=sys.stderr)
        return EXIT_CONFIG
    t = simulate(m, args.length, seed=args.seed, noiseless=args.noiseless)
    t.save(args.out)
    print(f"wrote {t.length} samples to {args.out}")
    return EXIT_OK


def cmd_identify(args):
    t = Trajectory.load(args.data)
    n_u, n_y = t.u.shape[0], t.y.shape[0]
    N = args.N or t.length - args.p - args.f + 1
    h = build_hankels(t, args.p, args.f, N)
    if args.estimator == "classical":
        glp = estimate_classical_projection(h)
    else:
        glp = estimate_parsim_bank(build_regressor_bank(h)).gamma_lp
    r = realize(glp, args.n_x, args.p, args.f, n_u, n_y)
    out = {
        "A": r.A.tolist(), "B": r.B.tolist(), "C": r.C.tolist(), "K": r.K.tolist(),
        "singular_values": r.singular_values.tolist(), "sigma_gap": r.sigma_gap,
    }
    if args.truth:
        al = align_similarity(load_model(args.truth), args.f, r)
        out["aligned_errors"] = {k: getattr(al, "err_" + k) for k in "ABCK"}
    if args.out:
        save_realization(args.out, r, sigma_e=float(np.std(t.e)) or 1.0,
                         sigma_u=float(np.std(t.u)), p=args.p, f=args.f, N=N)
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_bounds(args):
    m = _model(args.model, args.sigma_e)
    reps = bound_reports(m, args.p, args.f, args.N, args.delta, args.c, args.c0)
    print(json.dumps([r.to_dict() for r in reps], indent=2))
    return EXIT_OK


def cmd_sweep(args):
    cfg = ExperimentConfig.load(args.config)
    res = run_sweep(cfg, workers=args.workers)
    out = write_sweep(res, args.out)
    print(f"wrote {len(res.rows)} rows to {out}")
    _print_summary(res.summary())
    return EXIT_OK


def cmd_report(args):
    d = Path(args.sweep_dir)
    summary = json.loads((d / "summary.json").read_text())
    rows = read_rows_csv(d / "rows.csv")
    print(f"{len(rows)} rows, {sum(r['status'] != 'ok' for r in rows)} failed")
    _print_summary(summary)
    return EXIT_OK


def _print_summary(summary):
    agg = summary["aggregates"]
    print(f"{'N':>8} {'median theta err':>18} {'median err_A':>14} {'median err_C':>14} {'coverage':>9}")
    for N, a in agg.items():
        th = a.get("err_theta_max", {}).get("median", float("nan"))
        ea = a.get("err_A", {}).get("median", float("nan"))
        ec = a.get("err_C", {}).get("median", float("nan"))
        cov = summary["coverage"].get(N, float("nan"))
        print(f"{N:>8} {th:>18.4e} {ea:>14.4e} {ec:>14.4e} {cov:>9.3f}")
    for name, fit in summary["slopes"].items():
        print(f"slope[{name}] = {fit['slope']:+.3f}")


def build_parser():
    ap = argparse.ArgumentParser(prog="parsim", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check stability and minimality of a model")
    p.add_argument("model", help="model JSON file or fixture name")
    p.add_argument("--noiseless", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="simulate a trajectory into an .npz file")
    p.add_argument("--model", default="S1")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma-e", type=float)
    p.add_argument("--noiseless", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("identify", help="identify (A, B, C, K) from a trajectory")
    p.add_argument("--data", required=True)
    p.add_argument("--n-x", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--f", type=int, required=True)
    p.add_argument("--N", type=int)
    p.add_argument("--estimator", choices=("parsim", "classical"), default="parsim")
    p.add_argument("--truth", help="true model JSON, reports aligned errors")
    p.add_argument("--out", help="write the realized model JSON here")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("bounds", help="finite-sample bound reports")
    p.add_argument("--model", default="S1")
    p.add_argument("--sigma-e", type=float)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--f", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--c0", type=float, default=1.0)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="Monte Carlo sweep over N")
    p.add_argument("config")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="summarise a finished sweep directory")
    p.add_argument("sweep_dir")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PersistenceOfExcitationError as exc:
        print(f"persistence of excitation failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except SweepError as exc:
        print(f"sweep failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except ParsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
