"""Command-line entry point (``weakgauss`` / ``python -m weakgauss``).

Exit codes: 0 success, 2 configuration/usage error, 3 runtime error,
4 self-check failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np

from weakgauss import kernels
from weakgauss.errors import ConfigError, WeakGaussError
from weakgauss.experiment import run_sweep, run_trial, summarize
from weakgauss.io import emit_rows, load_config, read_rows, result_rows, write_plot_data
from weakgauss.protocol import Scheme
from weakgauss.rng import derive_key
from weakgauss.selfcheck import run_selfcheck
from weakgauss.state import StateParams, make_state

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_SELFCHECK = 4

log = logging.getLogger("weakgauss")


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--kappa", type=float)
    p.add_argument("--n-states", type=int)
    p.add_argument("--n-runs", type=int)
    p.add_argument("--ensemble-sizes", help="comma-separated, e.g. 20,10,8,6")
    p.add_argument("--inv-dqm-grid", help="comma list or geom:START:STOP:NUM")
    p.add_argument("--u-range", help="LOW,HIGH")
    p.add_argument("--center-range", help="LOW,HIGH")
    p.add_argument("--master-seed", "--seed", dest="master_seed", type=int)
    p.add_argument("--deconvolve", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--weighting", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--average-mode", choices=["distances", "estimates"])
    p.add_argument("--printed-d2", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument(
        "--override", action="append", default=[], metavar="KEY=VALUE",
        help="set any config field; repeatable",
    )
    p.add_argument("--threads", type=int, help="worker threads (default: $WEAKGAUSS_THREADS or 1)")
    p.add_argument("--backend", choices=["cython", "python"])


def _overrides(args) -> dict:
    out = {}
    for item in args.override:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not KEY=VALUE")
        k, v = item.split("=", 1)
        out[k.strip().replace("-", "_")] = v
    for name in (
        "kappa", "n_states", "n_runs", "ensemble_sizes", "inv_dqm_grid", "u_range",
        "center_range", "master_seed", "deconvolve", "weighting", "average_mode", "printed_d2",
    ):
        v = getattr(args, name)
        if v is not None:
            out[name] = v
    return out


def cmd_sweep(args, schemes=(Scheme.PROJECTIVE_BASELINE, Scheme.WEAK_SEQUENTIAL)) -> int:
    cfg = load_config(args.config, _overrides(args))
    result = run_sweep(cfg, threads=args.threads, backend=args.backend)
    rows = result_rows(result, schemes)
    emit_rows(rows, args.format, args.out)
    log.info("wrote %d rows to %s (backend %s)", len(rows), args.out, result.backend)
    if args.summary:
        for s in summarize(result):
            for c in (s.d1, s.d2):
                print(
                    f"kappa={s.kappa} n={s.ensemble_size} {c.measure}: min weak {c.min_weak:.6g} "
                    f"at inv_dqm={c.argmin_inv_dqm:.4g}, projective {c.proj_at_min:.6g}, "
                    f"advantage {c.relative_advantage:+.3f}, crossover {c.crossover}"
                )
    return EXIT_OK


def cmd_single(args) -> int:
    state = make_state(StateParams(args.u, args.kappa, args.q0, args.p0))
    d = np.empty((args.runs, 4))
    for r in range(args.runs):
        w, p = run_trial(
            state, args.n, args.inv_dqm, derive_key(args.seed, r),
            deconvolve=args.deconvolve, weighted=args.weighting,
        )
        d[r] = (w.d1, w.d2, p.d1, p.d2)
    se = d.std(axis=0, ddof=1) / math.sqrt(args.runs) if args.runs > 1 else np.zeros(4)
    out = {
        "state": {"q0": state.q0, "p0": state.p0, "dq": state.dq, "dp": state.dp},
        "n": args.n,
        "inv_dqm": args.inv_dqm,
        "runs": args.runs,
        "seed": args.seed,
    }
    for k, name in enumerate(("d1_weak", "d2_weak", "d1_proj", "d2_proj")):
        out[name] = float(d[:, k].mean())
        out[name + "_se"] = float(se[k])
    print(json.dumps(out, indent=1))
    return EXIT_OK


def cmd_plot_data(args) -> int:
    paths = write_plot_data(read_rows(args.input), args.out_dir)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_validate(args) -> int:
    checks = run_selfcheck()
    for c in checks:
        print(c.line())
    print(f"backend: {kernels.BACKEND}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_SELFCHECK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weakgauss", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("single", help="repeat one state/meter trial and print mean distances")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--u", type=float, default=0.0)
    p.add_argument("--q0", type=float, default=0.0)
    p.add_argument("--p0", type=float, default=0.0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--inv-dqm", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--deconvolve", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--weighting", action=argparse.BooleanOptionalAction, default=False)
    p.set_defaults(func=cmd_single)

    for name, helptext, schemes in (
        ("sweep", "full weak-vs-projective sweep", (Scheme.PROJECTIVE_BASELINE, Scheme.WEAK_SEQUENTIAL)),
        ("baseline", "projective-only sweep", (Scheme.PROJECTIVE_BASELINE,)),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_config_flags(p)
        p.add_argument("--out", required=True)
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--summary", action="store_true", help="print per-size minima")
        p.set_defaults(func=lambda a, s=schemes: cmd_sweep(a, s))

    p = sub.add_parser("plot-data", help="split a result table into per-panel files")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_plot_data)

    p = sub.add_parser("validate", help="run the analytic self-checks")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (WeakGaussError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
