"""Command-line entry point: ``onebit-dme <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

from . import __version__
from .constants import (
    HellingerCheckConfig,
    T_of_f,
    check_eta_condition,
    check_hellinger_bound,
    constants_for,
    ggd_crossing,
)
from .densities import FAMILIES, make_density
from .errors import (
    BoundViolation,
    BracketError,
    ConfigError,
    ConvergenceError,
    DomainError,
    IoError,
    SimulationError,
)
from .protocols import AdaptiveConfig, FixedFractions, MultiThresholdConfig, NonAdaptiveConfig, TheoremRule
from .report_io import (
    constants_csv,
    fmt,
    mse_csv,
    report_to_dict,
    sim_json,
    sweep_beta_csv,
)
from .simulation import (
    ADAPTIVE_SPLITS,
    DEFAULT_N_VALUES,
    NONADAPTIVE_SPLITS,
    WORKERS_ENV,
    ExperimentConfig,
    equal_thirds_thresholds,
    mu_grid,
    run_experiment,
    sweep_beta,
    sweep_splits,
)

TABLE2_FAMILIES = (("ggd", 1.5), ("logistic", None), ("hypsecant", None), ("sin2", None))

SUBCOMMANDS = {
    "constants": "x*, h*, T, alpha*, C_non, C_adapt for one density (or the four reference families)",
    "table1": "Sin2 reference constants: Z_std, f(0), x*, h*, T",
    "table2": "C_non, C_adapt and their ratio for GGD(1.5), logistic, hyperbolic secant, Sin2",
    "crossing": "GGD shape beta* where C_non = C_adapt",
    "eta-check": "monotonicity of f^2/(F(x)F(-x)) required by the adaptive lower bound",
    "hellinger-check": "threshold-encoder H^2/eps^2 against T(f)",
    "simulate": "Monte Carlo MSE curves for one protocol",
    "sweep-splits": "MSE curves across group allocations",
    "sweep-beta": "C_non/C_adapt ratio across GGD shapes",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _grid(text: str) -> tuple[float, ...]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be min:max:step")
    lo, hi, step = (float(p) for p in parts)
    return mu_grid(lo, hi, step)


def _add_dist(p, required=False):
    p.add_argument("--dist", choices=FAMILIES, required=required)
    p.add_argument("--beta", type=float, help="GGD shape (required iff --dist ggd)")


def _add_output(p, default_format):
    p.add_argument("--out", help="output path (default: standard output)")
    p.add_argument("--format", choices=("csv", "json"), default=default_format)


def _add_sim(p):
    _add_dist(p, required=True)
    p.add_argument("--protocol", choices=("nonadaptive", "adaptive", "multi"), default="adaptive")
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--mu-grid", type=_grid, default=_grid("-2.5:2.5:0.5"), help="min:max:step")
    p.add_argument("--mu-range", type=_float_list, help="mu_min,mu_max for equal-thirds thresholds")
    p.add_argument("--n", type=_int_list, default=list(DEFAULT_N_VALUES), help="comma-separated user counts")
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=int(os.environ.get(WORKERS_ENV, "1")))
    p.add_argument("--k1", type=float, default=0.5, help="non-adaptive share on theta1")
    p.add_argument("--split", default="theorem", help="adaptive split: 'theorem' or 'k1,k2'")
    p.add_argument("--m", type=int, default=200, help="multi-threshold half-grid size")
    p.add_argument("--delta", type=float, default=0.05, help="multi-threshold spacing")
    _add_output(p, "json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="onebit-dme",
        description="One-bit distributed mean estimation: constants, checks and simulations.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="<subcommand>", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("constants", help=SUBCOMMANDS["constants"])
    _add_dist(p)
    p.add_argument("--branch", choices=("inner", "outer"), default="inner")
    _add_output(p, "csv")

    p = sub.add_parser("table1", help=SUBCOMMANDS["table1"])
    _add_output(p, "csv")

    p = sub.add_parser("table2", help=SUBCOMMANDS["table2"])
    _add_output(p, "csv")

    p = sub.add_parser("crossing", help=SUBCOMMANDS["crossing"])
    p.add_argument("--lo", type=float, default=1.1)
    p.add_argument("--hi", type=float, default=2.5)
    p.add_argument("--tol", type=float, default=1e-3)
    _add_output(p, "csv")

    p = sub.add_parser("eta-check", help=SUBCOMMANDS["eta-check"])
    _add_dist(p, required=True)
    _add_output(p, "csv")

    p = sub.add_parser("hellinger-check", help=SUBCOMMANDS["hellinger-check"])
    _add_dist(p, required=True)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--slack", type=float, default=0.05)
    p.add_argument("--branch", choices=("inner", "outer"), default="inner", help="h^-1 branch used for T")
    _add_output(p, "csv")

    p = sub.add_parser("simulate", help=SUBCOMMANDS["simulate"])
    _add_sim(p)

    p = sub.add_parser("sweep-splits", help=SUBCOMMANDS["sweep-splits"])
    _add_sim(p)
    p.add_argument("--splits", help="semicolon-separated k1,k2 pairs (default: standard allocations)")

    p = sub.add_parser("sweep-beta", help=SUBCOMMANDS["sweep-beta"])
    p.add_argument("--betas", type=_grid, default=_grid("1.1:2.5:0.05"), help="min:max:step")
    p.add_argument("--simulate", action="store_true", help="add simulated adaptive worst-case n MSE")
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--mu-grid", type=_grid, default=_grid("-2.5:2.5:0.5"))
    p.add_argument("--n", type=int, default=40000)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=int(os.environ.get(WORKERS_ENV, "1")))
    _add_output(p, "csv")
    return parser


def _density(args, default=None):
    dist = args.dist or default
    if dist == "ggd" and args.beta is None:
        raise UsageError("--beta is required with --dist ggd")
    if dist != "ggd" and args.beta is not None:
        raise UsageError("--beta is only valid with --dist ggd")
    return make_density(dist, args.beta)


def _emit(args, text: str, out) -> None:
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoError(f"cannot write {args.out}: {exc}") from exc
    else:
        out.write(text)


def _kv(args, pairs: list[tuple[str, object]]) -> str:
    if args.format == "json":
        return json.dumps({k: v for k, v in pairs}, indent=2) + "\n"
    buf = io.StringIO()
    buf.write("quantity,value\n")
    for k, v in pairs:
        buf.write(f"{k},{fmt(v)}\n")
    return buf.getvalue()


def _protocol(args, theta1, theta2):
    if args.protocol == "nonadaptive":
        return NonAdaptiveConfig(theta1, theta2, args.k1)
    if args.protocol == "adaptive":
        if args.split == "theorem":
            return AdaptiveConfig(theta1, theta2, TheoremRule())
        k = _float_list(args.split)
        if len(k) != 2:
            raise UsageError("--split must be 'theorem' or 'k1,k2'")
        return AdaptiveConfig(theta1, theta2, FixedFractions(*k))
    return MultiThresholdConfig(args.m, args.delta)


def _experiment(args) -> ExperimentConfig:
    if args.dist == "ggd" and args.beta is None:
        raise UsageError("--beta is required with --dist ggd")
    if args.dist != "ggd" and args.beta is not None:
        raise UsageError("--beta is only valid with --dist ggd")
    grid = args.mu_grid
    mu_range = tuple(args.mu_range) if args.mu_range else (min(grid), max(grid))
    if args.protocol == "multi":
        protocol = _protocol(args, None, None)
        if not args.mu_range:
            mu_range = None
    else:
        if len(mu_range) != 2 or not mu_range[0] < mu_range[1]:
            raise UsageError("--mu-range must be mu_min,mu_max with mu_min < mu_max")
        protocol = _protocol(args, *equal_thirds_thresholds(*mu_range))
    return ExperimentConfig(
        dist=args.dist,
        beta=args.beta,
        protocol=protocol,
        mu_grid=grid,
        sigma=args.sigma,
        n_values=tuple(args.n),
        n_trials=args.trials,
        master_seed=args.seed,
        mu_range=mu_range,
    )


def _run(args, out) -> int:
    cmd = args.command
    if cmd == "constants":
        if args.dist is None:
            if args.beta is not None:
                raise UsageError("--beta needs --dist ggd")
            rows = [constants_for(make_density(n, b), args.branch) for n, b in TABLE2_FAMILIES]
        else:
            rows = [constants_for(_density(args), args.branch)]
        if args.format == "json":
            text = json.dumps([r.as_dict() for r in rows], indent=2) + "\n"
        else:
            text = constants_csv(rows)
        _emit(args, text, out)
    elif cmd == "table1":
        c = constants_for(make_density("sin2"))
        _emit(args, _kv(args, [("Z_std", c.z_std), ("f0", c.f0), ("x_star", c.x_star),
                               ("h_star", c.h_star), ("T", c.T)]), out)
    elif cmd == "table2":
        rows = [constants_for(make_density(n, b)) for n, b in TABLE2_FAMILIES]
        if args.format == "json":
            text = json.dumps([
                {"dist": r.dist, "beta": r.beta, "c_non": r.c_non, "c_adapt": r.c_adapt, "ratio": r.ratio,
                 "c_non_rounded": r.c_non_rounded, "ratio_rounded": r.ratio_rounded} for r in rows
            ], indent=2) + "\n"
        else:
            lines = ["dist,beta,c_non,c_adapt,ratio,c_non_rounded,ratio_rounded"]
            lines += [",".join(fmt(v) for v in (r.dist, r.beta, r.c_non, r.c_adapt, r.ratio,
                                                  r.c_non_rounded, r.ratio_rounded)) for r in rows]
            text = "\n".join(lines) + "\n"
        _emit(args, text, out)
    elif cmd == "crossing":
        beta = ggd_crossing(args.lo, args.hi, args.tol)
        _emit(args, _kv(args, [("beta_star", beta)]), out)
    elif cmd == "eta-check":
        d = _density(args)
        res = check_eta_condition(d)
        pairs = [("dist", d.label), ("holds", res.ok)]
        if res.violation is not None:
            pairs += [("violation_x1", res.violation[0]), ("violation_x2", res.violation[1])]
        _emit(args, _kv(args, pairs), out)
    elif cmd == "hellinger-check":
        d = _density(args)
        cfg = HellingerCheckConfig(epsilon=args.epsilon, tolerance_slack=args.slack)
        rep = check_hellinger_bound(d, cfg, T_of_f(d, args.branch), raise_on_violation=False)
        _emit(args, _kv(args, [("dist", rep.dist), ("epsilon", rep.epsilon), ("max_ratio", rep.max_ratio),
                               ("theta_at_max", rep.theta_at_max), ("bound", rep.bound),
                               ("passed", rep.passed)]), out)
        if not rep.passed:
            print(
                f"bound violated: H^2/eps^2 = {rep.max_ratio:.6g} at theta = {rep.theta_at_max:g} "
                f"> {rep.bound:.6g} * (1 + {rep.tolerance_slack})",
                file=sys.stderr,
            )
            return 2
    elif cmd == "simulate":
        rep = run_experiment(_experiment(args), args.workers)
        _emit(args, sim_json(rep) if args.format == "json" else mse_csv(rep), out)
    elif cmd == "sweep-splits":
        cfg = _experiment(args)
        if args.splits:
            splits = [tuple(_float_list(s)) for s in args.splits.split(";") if s.strip()]
        elif args.protocol == "nonadaptive":
            splits = list(NONADAPTIVE_SPLITS)
        elif args.protocol == "adaptive":
            splits = list(ADAPTIVE_SPLITS)
        else:
            raise UsageError("sweep-splits needs --protocol nonadaptive or adaptive")
        reps = sweep_splits(cfg, splits, args.workers)
        if args.format == "json":
            text = json.dumps({"splits": [list(s) if isinstance(s, tuple) else [s.k1, s.k2] for s in splits],
                               "reports": [report_to_dict(r) for r in reps]},
                              indent=2, sort_keys=True) + "\n"
        else:
            chunks = []
            for i, (s, r) in enumerate(zip(splits, reps)):
                k = s if isinstance(s, tuple) else (s.k1, s.k2)
                body = mse_csv(r).splitlines()
                if i == 0:
                    chunks.append("k1,k2," + body[0])
                chunks += [f"{fmt(k[0])},{fmt(k[1])},{line}" for line in body[1:]]
            text = "\n".join(chunks) + "\n"
        _emit(args, text, out)
    elif cmd == "sweep-beta":
        template = None
        if args.simulate:
            grid = args.mu_grid
            t1, t2 = equal_thirds_thresholds(min(grid), max(grid))
            template = ExperimentConfig(
                dist="ggd", beta=1.5, protocol=AdaptiveConfig(t1, t2), mu_grid=grid,
                sigma=args.sigma, n_values=(args.n,), n_trials=args.trials,
                master_seed=args.seed, mu_range=(min(grid), max(grid)),
            )
        rows = sweep_beta(args.betas, template, args.workers)
        if args.format == "json":
            text = json.dumps([r.__dict__ for r in rows], indent=2) + "\n"
        else:
            text = sweep_beta_csv(rows)
        _emit(args, text, out)
    return 0


_VALUE_FLAGS = ("--mu-grid", "--betas", "--mu-range")


def _bind_negative_values(argv: list[str]) -> list[str]:
    """Turn ``--mu-grid -1:1:1`` into ``--mu-grid=-1:1:1`` so argparse does not read a flag."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1][1:2].isdigit():
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    argv = _bind_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return _run(args, out)
    except (UsageError, ConfigError, DomainError, IoError) as exc:
        print(f"onebit-dme: error: {exc}", file=sys.stderr)
        return 1
    except (ConvergenceError, BoundViolation, BracketError, SimulationError) as exc:
        print(f"onebit-dme: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
