"""Command-line front end.

Exit codes: 0 on success, 1 on a domain error (for example an unsolvable or
out-of-range recovery input), 2 on a usage error (bad flags, malformed lists,
unreadable files).
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .cyclotomic import cyclotomic_poly, divisors, partition_gaussian, partition_rational, poly_mul
from .errors import DomainError
from .harness import (TABLE1_N, ExperimentConfig, default_seed, monte_carlo, region_map,
                      region_predicted, region_svg, theoretical_prob)
from .ident import (identifiable_full, identifiable_tail, oversampling_sufficient,
                    pbl_identifiable_HN, pbl_identifiable_roots)
from .recover import PBL_RESIDUAL_TOL, SolverConfig, pbl_recover, solve_integer_equations

MAX_N = 4096


class UsageError(Exception):
    pass


def _int_in(lo, hi):
    def conv(text):
        try:
            v = int(text, 10)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if not lo <= v <= hi:
            raise argparse.ArgumentTypeError(f"{v} outside [{lo}, {hi}]")
        return v
    return conv


def _index_list(text):
    text = text.strip()
    if text in ("", "-"):
        return []
    out = []
    for part in text.split(","):
        part = part.strip()
        try:
            out.append(int(part, 10))
        except ValueError:
            raise argparse.ArgumentTypeError(f"malformed index list {text!r}") from None
    if any(v < 0 for v in out):
        raise argparse.ArgumentTypeError("indices must be non-negative")
    return out


def _emit(args, human, doc):
    if args.format == "json":
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(human)


def _fmt_classes(classes):
    return ", ".join("{" + ",".join(str(n) for n in c) + "}" for c in classes)


def _check_indices(flag, V, N):
    bad = [v for v in V if v >= N]
    if bad:
        raise UsageError(f"argument {flag}: indices {bad} not below N={N}")


def cmd_check(args):
    N = args.n
    if args.pbl is not None:
        roots = pbl_identifiable_roots(N, args.pbl)
        hn = pbl_identifiable_HN(N, args.pbl)
        doc = {"N": N, "P": args.pbl, "identifiable": hn.identifiable, "thm3_roots": roots.to_dict(),
               "thm4_HN": hn.to_dict(), "H_N": str(_H(N)),
               "oversampling_sufficient": oversampling_sufficient(N, args.pbl)}
        if hn.reason == "n_le_2p_plus_1":
            human = f"not identifiable; N <= 2P+1 ({N} <= {2 * args.pbl + 1})"
        elif hn.identifiable:
            human = f"identifiable (H(N)={doc['H_N']} >= P+1={args.pbl + 1})"
        else:
            human = (f"not identifiable (H(N)={doc['H_N']} < P+1={args.pbl + 1}); "
                     f"classes missed by the band: {_fmt_classes(roots.failing_classes)}")
        _emit(args, human, doc)
        return 0
    if args.v is None:
        raise UsageError("check needs --v or --pbl")
    _check_indices("--v", args.v, N)
    verdict = identifiable_tail(N, args.v) if args.tail else identifiable_full(N, args.v)
    doc = {"N": N, "V": sorted(set(args.v)), **verdict.to_dict()}
    if verdict.identifiable:
        human = "identifiable"
    else:
        miss = verdict.failing_classes
        human = f"not identifiable; class{'es' if len(miss) > 1 else ''} {_fmt_classes(miss)} unhit"
    _emit(args, human, doc)
    return 0


def _H(N):
    from .cyclotomic import H_of
    return H_of(N)


def cmd_partition(args):
    part = partition_gaussian(args.n) if args.field == "gaussian" else partition_rational(args.n)
    doc = {"N": part.N, "field": part.field, "K": part.K,
           "classes": [list(c) for c in part.classes], "divisor_of": list(part.divisor_of)}
    lines = [f"N={part.N} field={part.field} K={part.K}"]
    for d, c in zip(part.divisor_of, part.classes):
        lines.append(f"  d={d:<4d} {{{','.join(str(n) for n in c)}}}")
    _emit(args, "\n".join(lines), doc)
    return 0


def _read_z(path):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise UsageError(f"argument --z: cannot read {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"argument --z: invalid JSON in {path!r}: {exc.msg}") from None
    try:
        vals = []
        for item in raw:
            if isinstance(item, (int, float)):
                vals.append(complex(item, 0.0))
            else:
                re, im = item
                vals.append(complex(float(re), float(im)))
    except (TypeError, ValueError):
        raise UsageError("argument --z: expected a JSON array of [re, im] pairs") from None
    if not vals:
        raise UsageError("argument --z: empty vector")
    return np.array(vals)


def cmd_recover(args):
    z = _read_z(args.z)
    cfg = SolverConfig(box_bound=args.box, residual_tol=args.tol, max_nodes=args.max_nodes,
                       mode=args.mode, max_solutions=args.max_solutions, method=args.method)
    if args.pbl is not None:
        if np.any(z.imag != 0):
            raise DomainError("PBL samples must be real")
        res = pbl_recover(z.real, args.pbl, cfg)
    else:
        if args.v is None:
            raise UsageError("recover needs --v or --pbl")
        _check_indices("--v", args.v, len(z))
        res = solve_integer_equations(z, args.v, cfg)
    doc = res.to_dict()
    lines = [f"status: {res.status}", f"solutions: {len(res.eps_solutions)}"
             + (" (truncated)" if res.truncated else ""), f"nodes: {res.nodes}"]
    if res.s_hat is not None:
        lines.append(f"residual: {res.residual:.3e}")
        if res.y_hat is not None:
            lines.append("y_hat: " + " ".join(f"{v:.6f}" for v in res.y_hat))
        lines.append("s_hat:")
        lines += [f"  {k:3d}  {v.real:+.9f} {v.imag:+.9f}j" for k, v in enumerate(res.s_hat)]
    _emit(args, "\n".join(lines), doc)
    return 0 if res.status in ("unique_in_box", "multiple", "feasible") else 1


def _write(path, text, flag):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"argument {flag}: cannot write {path!r}: {exc.strerror}") from None


def _report_out(args, report):
    if args.format == "json":
        text = report.to_json(timing=args.timing)
    elif args.format == "csv":
        text = report.to_csv(timing=args.timing)
    else:
        text = None
    if args.out:
        _write(args.out, text if text is not None else report.to_csv(timing=args.timing), "--out")
    if text is not None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return text


def cmd_montecarlo(args):
    seed = args.seed if args.seed is not None else default_seed()
    scenario = {"s1": "s1_hitting", "s2": "s2_uniform_random"}.get(args.scenario, args.scenario)
    cfg = ExperimentConfig(N_list=tuple(args.n), trials=args.trials, scenario=scenario, seed=seed,
                           solver=SolverConfig(box_bound=args.box, max_nodes=args.max_nodes,
                                               method=args.method))
    report = monte_carlo(cfg)
    if _report_out(args, report) is None:
        print(f"scenario={scenario} trials={args.trials} box={args.box} seed={seed}")
        print(f"{'N':>4} {'rate':>8} {'inbox':>8} {'oob':>4} {'budget':>6} {'theory':>8}")
        for r in report.rows:
            print(f"{r['N']:>4} {r['success_rate']:>8.4f} {r['inbox_success_rate']:>8.4f} "
                  f"{r['out_of_box']:>4} {r['budget_exhausted']:>6} {float(r['theoretical_prob']):>8.4f}")
    return 0


def cmd_table1(args):
    Ns = args.n or list(TABLE1_N)
    rows = []
    for N in Ns:
        p = theoretical_prob(N) if N <= 24 else theoretical_prob(N, "closed")
        rows.append({"N": N, "fraction": f"{p.numerator}/{p.denominator}", "decimal": round(float(p), 2),
                     "value": float(p)})
    human = "\n".join([f"{'N':>4}  {'exact':>12}  {'approx':>6}"]
                      + [f"{r['N']:>4}  {r['fraction']:>12}  {r['decimal']:>6.2f}" for r in rows])
    _emit(args, human, {"rows": rows})
    return 0


def cmd_region(args):
    seed = args.seed if args.seed is not None else default_seed()
    Ps = range(args.pmin, args.pmax + 1)
    Ns = range(args.nmin, args.nmax + 1)
    if not len(Ps) or not len(Ns):
        raise UsageError("argument --pmax/--nmax: empty range")
    if args.trials > 0:
        cfg = ExperimentConfig(N_list=(), trials=args.trials, seed=seed,
                               solver=SolverConfig(box_bound=args.box, max_nodes=args.max_nodes,
                                                   residual_tol=args.tol, method=args.method))
        report = region_map(Ps, Ns, cfg)
    else:
        report = region_predicted(Ps, Ns)
    if args.svg:
        _write(args.svg, region_svg(report), "--svg")
    if _report_out(args, report) is None:
        for P in reversed(Ps):
            line = "".join(" " if N <= 2 * P + 1 else
                           ("." if report.row(P=P, N=N)["predicted_identifiable"] else "#") for N in Ns)
            print(f"P={P:<2d} {line}")
        print(f"     N={args.nmin}..{args.nmax}  ('#' unidentifiable, '.' identifiable)")
        if args.svg:
            print(f"wrote {args.svg}")
    return 0


def cmd_cyclo(args):
    if args.identity is not None:
        N = args.identity
        prod = (1,)
        for d in divisors(N):
            prod = poly_mul(prod, cyclotomic_poly(d).coeffs)
        target = (-1,) + (0,) * (N - 1) + (1,)
        ok = prod == target
        _emit(args, f"prod_(d|{N}) Phi_d == x^{N} - 1: {ok}", {"N": N, "identity_holds": ok})
        return 0 if ok else 1
    phi = cyclotomic_poly(args.d)
    doc = {"d": phi.d, "degree": phi.degree, "coeffs": list(phi.coeffs)}
    human = f"Phi_{phi.d}(x) = {phi}\ndegree {phi.degree}, coefficients (ascending): {list(phi.coeffs)}"
    _emit(args, human, doc)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="moddft", description="Identifiability and recovery for "
                                "modulo-folded DFT measurements and PBL samples.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True, metavar="SUBCOMMAND")

    def fmt(sp, choices=("human", "json")):
        sp.add_argument("--format", choices=choices, default="human")

    def engine(sp):
        sp.add_argument("--method", choices=("auto", "lattice", "box"), default="auto",
                        help="search engine")

    sp = sub.add_parser("check", help="identifiability verdict for (N, V) or a PBL model (N, P)")
    sp.add_argument("--n", type=_int_in(1, MAX_N), required=True)
    sp.add_argument("--v", type=_index_list, help="comma-separated zero indices")
    sp.add_argument("--tail", action="store_true", help="ignore the {0} class")
    sp.add_argument("--pbl", type=_int_in(1, MAX_N), metavar="P", help="check a PBL model with P harmonics")
    fmt(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("partition", help="root-class partition of x^N - 1")
    sp.add_argument("--n", type=_int_in(1, MAX_N), required=True)
    sp.add_argument("--field", choices=("gaussian", "rational"), default="gaussian")
    fmt(sp)
    sp.set_defaults(func=cmd_partition)

    sp = sub.add_parser("recover", help="recover a signal from folded measurements")
    sp.add_argument("--z", required=True, help="JSON file: array of [re, im] pairs")
    sp.add_argument("--v", type=_index_list)
    sp.add_argument("--pbl", type=_int_in(1, MAX_N), metavar="P", help="treat z as real PBL samples")
    sp.add_argument("--box", type=_int_in(1, 1000), default=None)
    sp.add_argument("--tol", type=float, default=None,
                    help=f"residual threshold (default 1e-6, or {PBL_RESIDUAL_TOL:g} with --pbl)")
    sp.add_argument("--max-nodes", type=_int_in(1, 10**12), default=10**7)
    sp.add_argument("--mode", choices=("first_feasible", "enumerate_all"), default="first_feasible")
    sp.add_argument("--max-solutions", type=_int_in(1, 10**6), default=64)
    fmt(sp)
    engine(sp)
    sp.set_defaults(func=cmd_recover)

    sp = sub.add_parser("montecarlo", help="Monte Carlo recovery experiment")
    sp.add_argument("--scenario", choices=("s1", "s2", "s1_hitting", "s2_uniform_random"), default="s1")
    sp.add_argument("--n", type=_index_list, default=list(TABLE1_N))
    sp.add_argument("--trials", type=_int_in(1, 10**7), default=300)
    sp.add_argument("--seed", type=_int_in(0, 2**64 - 1), default=None,
                    help="defaults to $MODDFT_SEED, else 0")
    sp.add_argument("--box", type=_int_in(1, 1000), default=1)
    sp.add_argument("--max-nodes", type=_int_in(1, 10**12), default=10**7)
    sp.add_argument("--out", help="also write the report to this file")
    sp.add_argument("--timing", action="store_true", help="include wall times in the report")
    fmt(sp, ("human", "json", "csv"))
    engine(sp)
    sp.set_defaults(func=cmd_montecarlo)

    sp = sub.add_parser("table1", help="exact identifiability probabilities for random V")
    sp.add_argument("--n", type=_index_list, default=None)
    fmt(sp)
    sp.set_defaults(func=cmd_table1)

    sp = sub.add_parser("region", help="PBL identifiability region over (P, N)")
    sp.add_argument("--pmin", type=_int_in(1, MAX_N), default=1)
    sp.add_argument("--pmax", type=_int_in(1, MAX_N), default=6)
    sp.add_argument("--nmin", type=_int_in(2, MAX_N), default=3)
    sp.add_argument("--nmax", type=_int_in(2, MAX_N), default=40)
    sp.add_argument("--trials", type=_int_in(0, 10**6), default=0,
                    help="Monte Carlo trials per cell (0: predicted map only)")
    sp.add_argument("--seed", type=_int_in(0, 2**64 - 1), default=None)
    sp.add_argument("--box", type=_int_in(1, 1000), default=7)
    sp.add_argument("--max-nodes", type=_int_in(1, 10**12), default=10**7)
    sp.add_argument("--tol", type=float, default=PBL_RESIDUAL_TOL)
    sp.add_argument("--svg", help="write a heatmap to this file")
    sp.add_argument("--out", help="also write the report to this file")
    sp.add_argument("--timing", action="store_true")
    fmt(sp, ("human", "json", "csv"))
    engine(sp)
    sp.set_defaults(func=cmd_region)

    sp = sub.add_parser("cyclo", help="cyclotomic polynomial coefficients")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--d", type=_int_in(1, 10**5))
    g.add_argument("--identity", type=_int_in(1, 2000), metavar="N",
                   help="verify prod_{d|N} Phi_d = x^N - 1")
    fmt(sp)
    sp.set_defaults(func=cmd_cyclo)
    return p


def run(argv=None):
    """Parse ``argv`` and execute one subcommand; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    pbl = getattr(args, "pbl", None) is not None
    if getattr(args, "box", 1) is None:
        args.box = 7 if pbl else 1
    if args.cmd == "recover" and args.tol is None:
        args.tol = PBL_RESIDUAL_TOL if pbl else 1e-6
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"moddft {args.cmd}: error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"moddft {args.cmd}: domain error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
