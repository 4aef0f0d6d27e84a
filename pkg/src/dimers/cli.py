"""Command-line entry point.

Every output embeds ``format_version``, the command and the resolved
configuration (execution-only settings such as ``--threads`` and ``--out``
are left out so that results compare byte for byte). Exit status is 0 on
success, 2 on invalid input and 1 on a runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import exact1d, oracle
from .engine import SEED_MAX, bulk_mask, run_rsa, sample_wakeups
from .graphs import parse_graph_spec, path_graph
from .stats import core, estimators, field
from .stats.bounds import bound_check
from .stats.cages import cage_density_estimate

FORMAT_VERSION = 1
DEFAULT_SEED = 20240229
EXECUTION_ONLY = {"threads", "out", "config", "func", "command", "graph_obj"}


class UsageError(Exception):
    pass


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def _num(x) -> str:
    if isinstance(x, Fraction):
        return _frac(x)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return "" if x is None else str(x)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


# ---------------------------------------------------------------- output

def _resolved(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in EXECUTION_ONLY}
    return json.loads(json.dumps(cfg, default=str))


def _render_json(args, body: dict) -> str:
    doc = {"format_version": FORMAT_VERSION, "command": args.command,
           "config": _resolved(args), "seed": getattr(args, "seed", None)}
    doc.update(body)
    return json.dumps(doc, indent=2, sort_keys=True, default=_num) + "\n"


def _render_csv(args, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(f"# format_version={FORMAT_VERSION}\n")
    buf.write(f"# command={args.command}\n")
    buf.write(f"# config={json.dumps(_resolved(args), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(x) for x in row])
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _output(args, body: dict, header: list[str], rows: list[list]) -> None:
    text = _render_csv(args, header, rows) if args.format == "csv" else _render_json(args, body)
    _emit(args, text)


def _ci(e: core.EstimateWithCI) -> dict:
    return {"estimate": e.estimate, "se": e.se, "reps": e.reps}


# ---------------------------------------------------------------- commands

def cmd_exact(args) -> None:
    n_max = args.n
    means = exact1d.expected_monomers_sequence(n_max)
    vars_ = [exact1d.variance_corrected_recurrence(n) for n in range(n_max + 1)]
    mgf = exact1d.mgf_coefficients(args.lam, n_max) if args.lam is not None else None
    header = ["n", "e_n", "e_n_float", "var_n", "var_n_float"] + (["f_n"] if mgf else [])
    rows = []
    for n in range(n_max + 1):
        row = [n, means[n], float(means[n]), vars_[n], float(vars_[n])]
        rows.append(row + ([mgf[n]] if mgf else []))
    body = {"rows": [dict(zip(header, r)) for r in rows],
            "density_limit": exact1d.density_limit()}
    _output(args, body, header, rows)


def cmd_oracle(args) -> None:
    g = args.graph_obj
    dist = oracle.exact_distribution(g)
    body = {"graph": g.name, "distribution": {str(k): _frac(v) for k, v in sorted(dist.items())},
            "mean": _frac(oracle.exact_moment(g, 1)), "variance": _frac(oracle.exact_variance(g))}
    rows = [[k, v, float(v)] for k, v in sorted(dist.items())]
    _output(args, body, ["monomers", "probability", "probability_float"], rows)


def cmd_simulate(args) -> None:
    g = args.graph_obj
    out = core.replicate(g, args.reps, args.seed,
                         lambda w, c: (c.monomer_count, int(c.placed_mask.sum())), args.threads)
    rows = [[i, m, p, m / g.vertex_count] for i, (m, p) in enumerate(out)]
    counts = np.array([m for m, _ in out], dtype=float)
    body = {"graph": g.name, "vertices": g.vertex_count, "edges": g.edge_count,
            "monomer_counts": [int(m) for m, _ in out],
            "density": _ci(core.mean_estimate(counts / g.vertex_count, args.seed))
            if args.reps >= 2 else None}
    if args.dump_config:
        w = sample_wakeups(g, args.seed, 0)
        c = run_rsa(g, w)
        with open(args.dump_config, "w", encoding="utf-8") as fh:
            fh.write(c.to_json(format_version=FORMAT_VERSION, config=_resolved(args),
                               seed=args.seed, stream=0) + "\n")
    _output(args, body, ["replication", "monomers", "dimers", "density"], rows)


def cmd_covariance(args) -> None:
    g = args.graph_obj
    cc = field.covariance_curve(g, args.reps, args.seed, args.max_sep, args.threads)
    rows, ok_all = [], True
    for r, e, b in zip(cc.separations, cc.covariances, cc.bounds):
        ok = abs(e.estimate) <= b + 3 * e.se
        ok_all &= ok
        rows.append([r, e.estimate, e.se, b, ok])
    body = {"graph": g.name, "density": cc.density, "sigma2": _ci(cc.sigma2),
            "sigma2_radius": cc.sigma2_radius,
            "sigma2_ci_excludes_zero": cc.sigma2.excludes_zero(0.99),
            "curve": [dict(zip(["r", "covariance", "se", "bound", "within_bound"], x)) for x in rows],
            "all_within_bound": ok_all}
    _output(args, body, ["r", "covariance", "se", "bound", "within_bound"], rows)


def cmd_clt(args) -> None:
    g = args.graph_obj
    rep = field.clt_check(g, args.reps, args.seed, args.threads)
    body = {"graph": g.name, **rep.to_dict()}
    rows = [[i, float(u)] for i, u in enumerate(rep.normalized)]
    _output(args, body, ["replication", "normalized_sum"], rows)


def cmd_cages(args) -> None:
    g = args.graph_obj
    st = cage_density_estimate(min(g.shape), args.reps, args.seed, args.threads, graph=g)
    body = {"graph": g.name, **st.to_dict(),
            "density_ci_excludes_zero": st.density.excludes_zero(0.99),
            "expected_interior_law": {"0": "2/3", "2": "1/3"}}
    rows = [[k, e.estimate, e.se, float(Fraction(2 if k == 0 else 1, 3))]
            for k, e in st.law.items()]
    _output(args, body, ["interior_monomers", "probability", "se", "expected"], rows)


def cmd_bound(args) -> None:
    res = bound_check(args.dim, args.n, args.eps, args.reps, args.seed, args.threads, args.r)
    header = ["dim", "n", "eps", "r", "bound", "reps", "exceedances", "empirical", "ok"]
    rows = [[getattr(b, h) for h in header] for b in res]
    body = {"rows": [b.to_dict() for b in res],
            "all_ok": all(b.ok for b in res if b.ok is not None)}
    _output(args, body, header, rows)


def cmd_diagnose(args) -> None:
    g = args.graph_obj
    tail = estimators.radius_tail(g, args.reps, args.seed, threads=args.threads)
    stab = estimators.stabilization_check(g, args.reps, args.seed, args.threads)
    rows = [[t.r, t.probability, t.se, t.bound, t.exceedances,
             t.probability <= t.bound + 3 * t.se] for t in tail]
    header = ["r", "probability", "se", "bound", "exceedances", "within_bound"]
    body = {"graph": g.name, "tail": [dict(zip(header, r)) for r in rows],
            "tail_within_bound": all(r[-1] for r in rows),
            "stabilization": {"pairs": stab.pairs, "violations": stab.violations,
                              "max_radius": stab.max_radius}}
    if g.shape is not None and not g.periodic:
        bd = g.boundary_vertices()
        frac = core.replicate(g, args.reps, args.seed,
                              lambda w, c: float(bulk_mask(g, w, bd).mean()), args.threads)
        body["bulk_fraction"] = _ci(core.mean_estimate(frac, args.seed))
    _output(args, body, header, rows)


def variance_report(n_limit: int, mc_n: int, reps: int, seed: int, threads=None) -> dict:
    """Uncorrected recurrence, corrected recurrence, oracle and Monte Carlo
    side by side for the 1-D variance."""
    small = []
    for n in range(2, 13):
        g = path_graph(n)
        small.append({"n": n, "mean_exact": exact1d.expected_monomers(n),
                      "mean_oracle": oracle.exact_moment(g, 1),
                      "var_uncorrected_recurrence": exact1d.variance_paper_recurrence(n),
                      "var_corrected": exact1d.variance_corrected_recurrence(n),
                      "var_oracle": oracle.exact_variance(g)})
    limit = float(exact1d.variance_corrected_recurrence(n_limit) / n_limit)
    mc = estimators.variance_per_site_estimate(path_graph(mc_n), reps, seed, threads)
    exact_mc = float(exact1d.variance_corrected_recurrence(mc_n) / mc_n)
    return {"small_n": small, "var4_oracle": oracle.exact_variance(path_graph(4)),
            "var4_uncorrected_recurrence": exact1d.variance_paper_recurrence(4),
            "limit_n": n_limit, "corrected_limit": limit,
            "corrected_slope": float(exact1d.variance_slope()),
            "mc_n": mc_n, "mc_estimate": _ci(mc), "mc_exact": exact_mc,
            "mc_within_3se": mc.within(exact_mc, 3.0),
            "claimed_limit": math.exp(-2),
            "density_n": float(exact1d.expected_monomers(n_limit) / n_limit),
            "density_limit": exact1d.density_limit()}


def _markdown(args, rep: dict) -> str:
    lines = [f"<!-- format_version={FORMAT_VERSION} command=report "
             f"config={json.dumps(_resolved(args), sort_keys=True)} -->",
             "# One-dimensional variance study", "",
             "| n | E[N] exact | E[N] oracle | Var, uncorrected recurrence | Var, corrected | Var, oracle |",
             "|---|---|---|---|---|---|"]
    for r in rep["small_n"]:
        lines.append(f"| {r['n']} | {_frac(r['mean_exact'])} | {_frac(r['mean_oracle'])} | "
                     f"{_frac(r['var_uncorrected_recurrence'])} | {_frac(r['var_corrected'])} | "
                     f"{_frac(r['var_oracle'])} |")
    mc = rep["mc_estimate"]
    lines += ["",
              f"- Var(N) on 4 vertices: oracle {_frac(rep['var4_oracle'])}, "
              f"uncorrected recurrence {_frac(rep['var4_uncorrected_recurrence'])}.",
              f"- Corrected variance per site at n = {rep['limit_n']}: {rep['corrected_limit']!r}.",
              f"- Limit of Var(N_n) - Var(N_(n-1)): {rep['corrected_slope']!r} "
              f"(4 e^-4 = {4 * math.exp(-4)!r}).",
              f"- Monte Carlo at n = {rep['mc_n']}: {mc['estimate']!r} (se {mc['se']!r}, "
              f"{mc['reps']} reps) against exact {rep['mc_exact']!r}; "
              f"within 3 SE: {rep['mc_within_3se']}.",
              f"- Previously claimed limit e^-2 = {rep['claimed_limit']!r} (shown for comparison).",
              f"- Monomer density at n = {rep['limit_n']}: {rep['density_n']!r}; "
              f"limit e^-2 = {rep['density_limit']!r}.", ""]
    return "\n".join(lines)


def cmd_report(args) -> None:
    rep = variance_report(args.n, args.mc_n, args.reps, args.seed, args.threads)
    if args.format == "json":
        _emit(args, _render_json(args, rep))
    elif args.format == "csv":
        header = list(rep["small_n"][0])
        _emit(args, _render_csv(args, header, [[r[h] for h in header] for r in rep["small_n"]]))
    else:
        _emit(args, _markdown(args, rep))


# ---------------------------------------------------------------- parsing

COMMANDS = {
    "exact": (cmd_exact, "exact 1-D means, variances and MGF coefficients"),
    "oracle": (cmd_oracle, "exact monomer-count law of a small graph"),
    "simulate": (cmd_simulate, "run replications and report monomer counts"),
    "covariance": (cmd_covariance, "covariance decay and the variance constant"),
    "clt": (cmd_clt, "normality of box sums"),
    "cages": (cmd_cages, "cage density and caged-interior law on a 2-D torus"),
    "bound": (cmd_bound, "concentration bound against simulation"),
    "diagnose": (cmd_diagnose, "dependence radius tail and truncation stabilization"),
    "report": (cmd_report, "1-D variance discrepancy study (markdown)"),
}

DEFAULT_GRAPH = {"oracle": "path:4", "simulate": "lattice:2:64:periodic",
                 "covariance": "lattice:2:64:periodic", "clt": "lattice:2:64:periodic",
                 "cages": "lattice:2:64:periodic", "diagnose": "lattice:2:64:periodic"}
DEFAULT_REPS = {"simulate": 100, "covariance": 1000, "clt": 2000, "cages": 1000,
                "bound": 1000, "diagnose": 25, "report": 10000}
DEFAULT_FORMAT = {"exact": "csv", "oracle": "json", "simulate": "csv", "covariance": "csv",
                  "clt": "json", "cages": "json", "bound": "csv", "diagnose": "csv",
                  "report": "markdown"}
MIN_REPS = {"simulate": 1, "covariance": 2, "clt": 500, "cages": 2, "bound": 2,
            "diagnose": 2, "report": 30}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dimers", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for name, (func, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_, description=help_)
        p.set_defaults(func=func)
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--out", help="output file (default: standard output)")
        p.add_argument("--threads", type=int, default=None,
                       help=f"worker threads (default: ${core.THREADS_ENV} or 1)")
        fmt = p.add_mutually_exclusive_group()
        fmt.add_argument("--json", dest="format", action="store_const", const="json")
        fmt.add_argument("--csv", dest="format", action="store_const", const="csv")
        if name in DEFAULT_GRAPH:
            p.add_argument("--graph", default=DEFAULT_GRAPH[name],
                           help="path:N | cycle:N | lattice:DIM:SIDE:{free|periodic} | tree:DEG:DEPTH")
        if name in DEFAULT_REPS:
            p.add_argument("--reps", type=int, default=DEFAULT_REPS[name])
            p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                           help=f"64-bit seed (default {DEFAULT_SEED})")
        if name == "exact":
            p.add_argument("--n", type=int, default=20, help="largest n")
            p.add_argument("--lambda", dest="lam", type=float, default=None,
                           help="also emit MGF coefficients f_n(lambda)")
        if name == "simulate":
            p.add_argument("--dump-config", default=None,
                           help="write the final configuration of replication 0 as JSON")
        if name == "covariance":
            p.add_argument("--max-sep", type=int, default=10)
        if name == "bound":
            p.add_argument("--dim", type=int, default=1)
            p.add_argument("--n", type=_int_list, default=[1000, 5000, 10000, 30000])
            p.add_argument("--eps", type=_float_list, default=[0.05, 0.1, 0.2, 0.5])
            p.add_argument("--r", type=int, default=None, help="radius (default ceil(log n))")
        if name == "report":
            p.add_argument("--n", type=int, default=10000, help="n for the corrected limit")
            p.add_argument("--mc-n", type=int, default=10000, help="path length for Monte Carlo")
    return parser


def _read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}")
    for k, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{k}: expected key = value")
        key, value = (t.strip() for t in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _subparser(parser: argparse.ArgumentParser, argv: list[str]):
    choices = parser._subparsers._group_actions[0].choices
    return next((choices[a] for a in argv if a in choices), None)


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    values = _read_config(args.config)
    sub = _subparser(parser, [args.command])
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in values.items():
        if key == "format":
            if value not in ("json", "csv"):
                raise UsageError("config format must be json or csv")
            defaults["format"] = value
            continue
        if key in EXECUTION_ONLY - {"threads", "out"} or key not in actions:
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        defaults[key] = value  # string defaults are converted by argparse
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _validate(args) -> None:
    if args.format is None:
        args.format = DEFAULT_FORMAT[args.command]
    if getattr(args, "seed", 0) is not None and not 0 <= getattr(args, "seed", 0) < SEED_MAX:
        raise UsageError("seed must lie in [0, 2**64)")
    if args.threads is not None and args.threads < 1:
        raise UsageError("threads must be >= 1")
    if hasattr(args, "reps") and args.reps < MIN_REPS[args.command]:
        raise UsageError(f"{args.command} needs --reps >= {MIN_REPS[args.command]}")
    if hasattr(args, "graph"):
        try:
            g = parse_graph_spec(args.graph)
        except ValueError as exc:
            raise UsageError(str(exc))
        args.graph = g.name
        args.graph_obj = g
    cmd = args.command
    if cmd == "exact":
        if args.n < 0:
            raise UsageError("--n must be >= 0")
    elif cmd == "oracle":
        if args.graph_obj.vertex_count > oracle.MAX_VERTICES:
            raise UsageError(f"oracle handles at most {oracle.MAX_VERTICES} vertices")
    elif cmd in ("covariance", "clt"):
        if args.graph_obj.shape is None:
            raise UsageError(f"{cmd} needs a path, cycle or lattice graph")
        if cmd == "covariance":
            g = args.graph_obj
            top = (min(g.shape) - 1) // 2 if g.periodic else min(g.shape) - 1
            if not 0 <= args.max_sep <= top:
                raise UsageError(f"--max-sep must lie in [0, {top}] for {g.name}")
    elif cmd == "cages":
        g = args.graph_obj
        if g.shape is None or len(g.shape) != 2 or not g.periodic or min(g.shape) < 8:
            raise UsageError("cages needs a periodic 2-D lattice with side >= 8")
    elif cmd == "bound":
        if args.dim < 1 or not args.n or min(args.n) < 1 or not args.eps or min(args.eps) <= 0:
            raise UsageError("bound needs dim >= 1, n >= 1 and eps > 0")
        if args.r is not None and args.r < 1:
            raise UsageError("--r must be >= 1")
    elif cmd == "report":
        if args.n < 1 or args.mc_n < 1:
            raise UsageError("--n and --mc-n must be >= 1")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _apply_config(parser, argv)
        _validate(args)
    except SystemExit as exc:  # argparse already printed usage
        return int(exc.code or 0)
    except UsageError as exc:
        cmd = _subparser(parser, argv)
        (cmd or parser).print_usage(sys.stderr)
        print(f"dimers: error: {exc}", file=sys.stderr)
        return 2
    if args.threads is None:
        args.threads = core.default_threads()
    try:
        args.func(args)
    except (ArithmeticError, ValueError, OSError) as exc:
        print(f"dimers: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
