"""Command-line front end.

Subcommands
-----------
simulate : write a synthetic design to CSV (data plus truth columns)
compare  : small-n sampler comparison; one row of log TSPE ratios per
           replicate
bign     : single large-n replicate, conjugate sampler only
fit      : fit the model to a z,x1..xp CSV (empty z = hold-out row)
predict  : score a fitted run (by its JSON sidecar) on a hold-out CSV
basis    : write the basis matrix built from a CSV's covariates

Exit codes: 0 success, 2 invalid arguments or input, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import io as cio
from .data_model import DataModel
from .design import gen_count_design, gen_sim_design, moran_basis
from .harness import (ExperimentSpec, big_n_experiment, compare_experiment,
                      fit_command, predict_command)
from .partition import InvalidParameterError

_FAMILIES = ("poisson", "binomial", "negbinomial", "gaussian")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cmlatent",
        description="Conjugate hierarchical models for exponential-family "
                    "data")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(sp, model=True):
        if model:
            sp.add_argument("--model", choices=_FAMILIES,
                            default="binomial")
        sp.add_argument("--n", type=int, default=30)
        sp.add_argument("--p", type=int, default=3)
        sp.add_argument("--r", type=int, default=10)
        sp.add_argument("--t", type=int, default=10)
        sp.add_argument("--reps", type=int, default=20)
        sp.add_argument("--burnin", type=int, default=1000)
        sp.add_argument("--iters", type=int, default=4000)
        sp.add_argument("--thin", type=int, default=1)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--config", default=None,
                        help="JSON file; keys override the flags above")

    sp = sub.add_parser("simulate", help="emit a synthetic design")
    common(sp)

    sp = sub.add_parser("compare", help="small-n sampler comparison")
    common(sp)

    sp = sub.add_parser("bign", help="single large-n replicate")
    common(sp)
    sp.set_defaults(n=50000)

    sp = sub.add_parser("fit", help="fit a CSV data file")
    sp.add_argument("data", help="CSV with header z,x1,...,xp")
    sp.add_argument("--r-sweep", default=None,
                    help="comma-separated ranks to score by DIC")
    common(sp)
    sp.set_defaults(model="poisson", r=5)

    sp = sub.add_parser("predict", help="score a fit on hold-out rows")
    sp.add_argument("sidecar", help="JSON sidecar written by fit")
    sp.add_argument("holdout", help="hold-out CSV with truth in z")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=".", help="output directory")

    sp = sub.add_parser("basis", help="emit the basis for a CSV's "
                                      "covariates")
    sp.add_argument("data", help="CSV with header z,x1,...,xp")
    common(sp)
    return ap


def _apply_config(args: argparse.Namespace) -> None:
    path = getattr(args, "config", None)
    if not path:
        return
    rec = json.loads(Path(path).read_text())
    alias = {"family": "model"}
    for key, val in rec.items():
        key = alias.get(key, key)
        if hasattr(args, key):
            setattr(args, key, val)


def _spec(args: argparse.Namespace) -> ExperimentSpec:
    return ExperimentSpec(family=args.model, n=args.n, p=args.p, r=args.r,
                          t=args.t, reps=args.reps, burnin=args.burnin,
                          iters=args.iters, thin=args.thin, seed=args.seed,
                          out_dir=args.out)


def _cmd_simulate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.model == "poisson":
        X, Phi, Z, truth = gen_count_design(args.n, args.p, args.r,
                                            seed=args.seed)
    else:
        d = gen_sim_design(args.n, args.p, args.r, args.t, seed=args.seed)
        X = d.X
        dm = DataModel(args.model,
                       t=args.t if args.model != "gaussian" else None)
        Z = {"binomial": d.Z_binomial,
             "negbinomial": d.Z_negbinomial,
             "gaussian": d.linpred
             + np.random.default_rng(args.seed).standard_normal(args.n)
             }[args.model]
        truth = dm.predict_scale(d.linpred)
    with (out / "data.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["z"] + [f"x{j + 1}" for j in range(X.shape[1])])
        for z, row in zip(Z, X):
            w.writerow([f"{z:.17g}"] + [f"{v:.17g}" for v in row])
    with (out / "truth.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["truth_scale"])
        for v in truth:
            w.writerow([f"{v:.17g}"])
    cio.write_sidecar(out / "simulate.json",
                      {"experiment": "simulate", "family": args.model,
                       "n": args.n, "p": args.p, "r": args.r, "t": args.t,
                       "seed": args.seed})
    print(f"wrote {out / 'data.csv'} ({args.n} rows)")
    return 0


def _cmd_compare(args) -> int:
    res = compare_experiment(_spec(args))
    for row in res["rows"]:
        if "error" in row:
            print(f"rep {row['rep']}: FAILED: {row['error']}")
        else:
            print(f"rep {row['rep']}: log TSPE ratio "
                  f"{row['log_ratio']:+.4f}")
    print(f"median log ratio: {res['median_log_ratio']:+.4f} "
          f"({res['n_ok']}/{len(res['rows'])} replicates ok)")
    return 0


def _cmd_bign(args) -> int:
    res = big_n_experiment(_spec(args))
    print(f"tspe_model={res['tspe_model']:.6g} "
          f"tspe_raw={res['tspe_raw']:.6g} ratio={res['ratio']:.4f} "
          f"frac_sq_below_1={res['frac_sq_below_1']:.3f} "
          f"runtime_s={res['runtime_s']:.1f}")
    return 0


def _cmd_fit(args) -> int:
    sweep = None
    if args.r_sweep:
        sweep = [int(v) for v in str(args.r_sweep).split(",")]
    t = args.t if args.model in ("binomial", "negbinomial") else None
    res = fit_command(args.data, family=args.model, r=args.r, t=t,
                      out_dir=args.out, burnin=args.burnin,
                      iters=args.iters, thin=args.thin, seed=args.seed,
                      r_sweep=sweep)
    print(f"dic={res['dic']:.4f} p_d={res['p_d']:.4f} "
          f"artifacts in {res['out_dir']}")
    for rr, d, p_d in res["dic_by_r"]:
        print(f"r={rr}: dic={d:.4f} p_d={p_d:.4f}")
    return 0


def _cmd_predict(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = predict_command(args.sidecar, args.holdout,
                          out / "predictions.csv", seed=args.seed)
    print(f"wrote {res['out_path']}: "
          f"{100 * res['frac_exact']:.1f}% exact, "
          f"{100 * res['frac_within_1']:.1f}% within 1")
    return 0


def _cmd_basis(args) -> int:
    _, X = cio.read_data_csv(args.data)
    Phi = moran_basis(X, args.r)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "basis.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"phi{j + 1}" for j in range(args.r)])
        for row in Phi:
            w.writerow([f"{v:.17g}" for v in row])
    print(f"wrote {out / 'basis.csv'} ({X.shape[0]} x {args.r})")
    return 0


_DISPATCH = {"simulate": _cmd_simulate, "compare": _cmd_compare,
             "bign": _cmd_bign, "fit": _cmd_fit, "predict": _cmd_predict,
             "basis": _cmd_basis}


def main(argv=None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad arguments already; normalize help
        return int(exc.code or 0)
    try:
        _apply_config(args)
        return _DISPATCH[args.cmd](args)
    except (ValueError, InvalidParameterError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"runtime failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
