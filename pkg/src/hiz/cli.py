"""Command-line front end: ``hiz <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 invalid arguments.
Defaults for the seed and Monte Carlo sample count can be overridden with
HIZ_SEED and HIZ_SAMPLES; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import graphexp, largey, oracle, pdesolver, recursion3
from .exactcore import (
    V_LABELS,
    ChiSeries,
    SpectralPoint,
    YPoly,
    edges,
    parse_monomial,
    parse_rational,
    render_ypoly,
    y_from_beta,
    ypoly_eval,
)
from .linalg import InconsistentSystem
from .report import VerificationReport

log = logging.getLogger("hiz")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_SEED = 0
DEFAULT_SAMPLES = 1_000_000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"environment variable {name}={raw!r} is not an integer") from None


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hiz", description="Asymptotic expansions of HCIZ-type group integrals.")
    ap.add_argument("--error-json", action="store_true", help="Report errors as JSON on stderr.")
    ap.add_argument("-v", "--verbose", action="store_true", help="Log progress to stderr.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def coupling(p, required=True):
        g = p.add_mutually_exclusive_group(required=required)
        g.add_argument("--beta", type=_rational, help="Symmetry parameter beta.")
        g.add_argument("--y", type=_rational, help="y = beta(beta/2 - 1), given directly.")

    def seed(p):
        p.add_argument("--seed", type=int, default=None, help="Random seed (default: $HIZ_SEED or 0).")

    def fmt(p):
        p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("expand", help="Emit chi as a series.")
    p.add_argument("--k", type=int, required=True)
    coupling(p)
    p.add_argument("--order", type=int, default=None, help="Truncation degree (non-terminating cases).")
    p.add_argument("--notation", choices=("tau", "v"), default="tau")
    seed(p)
    fmt(p)

    p = sub.add_parser("coeff", help="Single coefficient or weight.")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--k3", type=int, nargs=3, metavar=("N", "M", "R"), help="Three-point C_{n,m,r}.")
    g.add_argument("--complete", type=int, metavar="N", help="Complete-graph weight C_N.")
    g.add_argument("--ratio", choices=[r.value for r in graphexp.DeletionRule], help="Deletion-rule weight over C_k.")
    g.add_argument("--weight", choices=[r.value for r in graphexp.DeletionRule], help="Deletion-rule weight.")
    g.add_argument("--monomial", help="Monomial like 'v1 v6' or '12 34^2'; needs --k and an even --beta.")
    p.add_argument("--k", type=int, default=None)
    coupling(p, required=False)
    p.add_argument("--expanded", action="store_true", help="Expanded rather than factored polynomial.")
    seed(p)

    p = sub.add_parser("solve", help="Collocation solve for even beta, with the gauge report.")
    p.add_argument("--k", type=int, required=True)
    coupling(p)
    p.add_argument("--basis", choices=("monomial", "symmetric"), default="monomial")
    seed(p)
    fmt(p)

    p = sub.add_parser("graph", help="beta = 4 expansion as graphs with clique weights.")
    p.add_argument("--k", type=int, required=True)
    fmt(p)

    p = sub.add_parser("k3", help="Three-point coefficients for general y.")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--r", type=int)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--y", type=_rational)
    g.add_argument("--beta", type=_rational)
    g.add_argument("--symbolic", action="store_true", help="Polynomial in y (default).")
    p.add_argument("--table", type=int, metavar="ORDER", help="Emit all coefficients through ORDER as JSON.")

    p = sub.add_parser("largey", help="Terms of the 1/y expansion.")
    p.add_argument("--order", type=int, choices=(0, 1, 2), default=None)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--check", action="store_true", help="Run residual and recursion checks.")
    p.add_argument("--draws", type=int, default=50)
    seed(p)

    p = sub.add_parser("mc", help="Haar Monte Carlo estimate of the group integral.")
    p.add_argument("--ensemble", choices=("o", "u", "s"), required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=None, help="Default: $HIZ_SAMPLES or 1000000.")
    seed(p)
    p.add_argument("--x", type=_float_list, required=True, help="Comma-separated x values.")
    p.add_argument("--lambda", dest="lam", type=_float_list, required=True, help="Comma-separated lambda values.")

    p = sub.add_parser("verify", help="Run a verification suite.")
    p.add_argument("suite", choices=("identities", "pde", "largey", "mc", "all"))
    p.add_argument("--k", type=int, default=None)
    coupling(p, required=False)
    p.add_argument("--draws", type=int, default=100, help="Random points for exact checks.")
    p.add_argument("--points", type=int, default=50, help="Fresh points for the PDE residual.")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--series", type=Path, help="JSON series to check instead of solving.")
    seed(p)
    fmt(p)
    return ap


# --------------------------------------------------------------------------
# helpers


def _y_of(args, default=None) -> Fraction | None:
    if getattr(args, "beta", None) is not None:
        return y_from_beta(args.beta)
    if getattr(args, "y", None) is not None:
        return args.y
    return default


def _cap_of(y: Fraction) -> int | None:
    """per-edge cap j when y = 2j(j+1), i.e. beta = 2(j+1)."""
    for j in range(0, 64):
        v = 2 * j * (j + 1)
        if v == y:
            return j
        if v > y:
            break
    return None


def _even_cap(y: Fraction) -> int:
    cap = _cap_of(y)
    if cap is None:
        raise UsageError(f"y={y} is not an even beta; only beta = 2, 4, 6, ... terminate")
    return cap


def _basis_for(k: int, requested: str | None = None) -> str:
    if requested:
        return requested
    return "symmetric" if k >= 6 else "monomial"


def _series_for(k: int, y: Fraction, order: int | None, seed: int, basis: str | None = None):
    """(series, gauge or None) for the expand/verify commands."""
    if k < 2:
        raise UsageError("k must be at least 2")
    if y == 0:
        return ChiSeries.one(k), None
    cap = _cap_of(y)
    if k == 2:
        n = cap if cap is not None and order is None else (order if order is not None else 6)
        return recursion3.k2_series(n, y), None
    if k == 3:
        n = 3 * cap if cap is not None and order is None else (order if order is not None else 6)
        return recursion3.chi_k3(y, n), None
    if cap is None:
        raise UsageError("k >= 4 needs an even beta (terminating series)")
    return pdesolver.solve_chi(k, y, cap, seed=seed, basis=_basis_for(k, basis))


def _emit_series(series: ChiSeries, fmt: str, notation: str = "tau", gauge=None) -> str:
    if fmt == "json":
        obj = series.to_json_obj()
        if gauge is not None:
            obj["gauge"] = gauge.to_json_obj(series.k)
        return json.dumps(obj, indent=1)
    if notation == "v" and series.k not in V_LABELS:
        raise UsageError(f"v notation is defined for k in {sorted(V_LABELS)}")
    zero = (0,) * len(edges(series.k))
    if list(series.terms) == [zero] and series.coeff(zero) == YPoly.const(1):
        text = "1"
    else:
        text = series.to_text(notation)
    if gauge is not None and gauge.free_monomials:
        text += f"\n# gauge: {len(gauge.free_monomials)} coefficients fixed to 0, by degree {gauge.by_degree}"
    return text


def _seed(args) -> int:
    return args.seed if getattr(args, "seed", None) is not None else _env_int("HIZ_SEED", DEFAULT_SEED)


def _samples(args) -> int:
    return args.samples if getattr(args, "samples", None) is not None else _env_int("HIZ_SAMPLES", DEFAULT_SAMPLES)


def _vpoly_text(s: ChiSeries) -> str:
    names = {e: lab for lab, e in V_LABELS.get(s.k, {}).items()} if s.k == 3 else {}
    parts = []
    for m, c in s.terms.items():
        factors = []
        for e, n in zip(edges(s.k), m):
            if n:
                base = names.get(e, f"v{e[0]}{e[1]}").upper() if s.k == 3 else f"v{e[0]}{e[1]}"
                factors.append(base if n == 1 else f"{base}^{n}")
        parts.append((sum(m), " ".join(sorted(factors)), c.coeff(0)))
    return "\n".join(f"{c} {f}" for _, f, c in sorted(parts))


# --------------------------------------------------------------------------
# commands


def cmd_expand(args) -> int:
    y = _y_of(args)
    seed = _seed(args)
    series, gauge = _series_for(args.k, y, args.order, seed)
    series = series.at_y(y)
    print(_emit_series(series, args.format, args.notation, gauge))
    return EXIT_OK


def cmd_coeff(args) -> int:
    if args.complete is not None:
        if args.complete < 0:
            raise UsageError("--complete needs N >= 0")
        print(graphexp.complete_weight(args.complete))
        return EXIT_OK
    if args.ratio or args.weight:
        if args.k is None:
            raise UsageError("--ratio/--weight need --k")
        rule = args.ratio or args.weight
        w = graphexp.deletion_rule_weight(args.k, rule)
        print(w / graphexp.complete_weight(args.k) if args.ratio else w)
        return EXIT_OK
    if args.k3 is not None:
        n, m, r = args.k3
        if min(n, m, r) < 0:
            raise UsageError("indices must be non-negative")
        c = recursion3.c_triple(n, m, r)
        y = _y_of(args)
        if y is not None:
            print(ypoly_eval(c, y))
        elif args.expanded:
            print(render_ypoly(c, ascending=True))
        else:
            print(recursion3.render_factored(c))
        return EXIT_OK
    if args.k is None:
        raise UsageError("--monomial needs --k")
    y = _y_of(args)
    if y is None:
        raise UsageError("--monomial needs --beta or --y")
    mono = parse_monomial(args.k, args.monomial)
    series, _ = _series_for(args.k, y, None, _seed(args))
    print(str(series.value_coeff(mono, y)))
    return EXIT_OK


def cmd_solve(args) -> int:
    y = _y_of(args)
    cap = _even_cap(y)
    series, gauge = pdesolver.solve_chi(args.k, y, cap, seed=_seed(args), basis=args.basis)
    print(_emit_series(series, args.format, gauge=gauge))
    return EXIT_OK


def cmd_graph(args) -> int:
    series = graphexp.beta4_chi(args.k)
    if args.format == "json":
        print(series.to_json(indent=1))
        return EXIT_OK
    notation = "v" if args.k in V_LABELS else "tau"
    print(f"# beta = 4, k = {args.k}: {len(series)} graphs, top weight C_{args.k} = {graphexp.complete_weight(args.k)}")
    for m, c in series.terms.items():
        from .exactcore import render_monomial

        rule = graphexp.clique_cover_weight(args.k, m)
        mark = "" if rule == c.coeff(0) else f"  (clique rule {rule})"
        print(f"{str(series.value_coeff(m)):>12}  {render_monomial(args.k, m, notation)}{mark}")
    return EXIT_OK


def cmd_k3(args) -> int:
    if args.table is not None:
        if args.table < 0:
            raise UsageError("--table needs ORDER >= 0")
        print(json.dumps(recursion3.CoefficientTable3.build(args.table).to_json_obj(), indent=1))
        return EXIT_OK
    idx = (args.n, args.m, args.r)
    if any(v is None for v in idx):
        raise UsageError("give --n --m --r, or --table")
    if min(idx) < 0:
        raise UsageError("indices must be non-negative")
    c = recursion3.c_triple(*idx)
    y = _y_of(args)
    print(ypoly_eval(c, y) if y is not None else render_ypoly(c, ascending=True))
    return EXIT_OK


def cmd_largey(args) -> int:
    if args.k < 2:
        raise UsageError("k must be at least 2")
    if args.check:
        reports = _largey_reports(args.k, args.draws, _seed(args))
        return _finish(reports, "text")
    if args.order is None:
        raise UsageError("give --order or --check")
    if args.order == 2 and args.k != 3:
        raise UsageError("order 2 is available for k = 3 only")
    s = [largey.phi0, largey.phi1, lambda k: largey.phi2_k3()][args.order](args.k)
    print(_vpoly_text(s))
    return EXIT_OK


def cmd_mc(args) -> int:
    if len(args.x) != args.k or len(args.lam) != args.k:
        raise UsageError("--x and --lambda need exactly k values each")
    est = oracle.mc_group_integral(args.ensemble, (args.x, args.lam), _samples(args), _seed(args))
    out = est.to_dict()
    out.update({"ensemble": args.ensemble, "k": args.k, "x": args.x, "lambda": args.lam})
    print(json.dumps(out))
    return EXIT_OK


# verification suites


def _identity_reports(k: int, draws: int, seed: int) -> list[VerificationReport]:
    rng = random.Random(seed)
    if k == 3:
        bad = [0, 0, 0, 0]
        for _ in range(draws):
            pt = SpectralPoint.random(3, rng)
            for i, v in enumerate(pdesolver.id_residuals(pt)):
                bad[i] += v != 0
        return [
            VerificationReport(f"id{i} k=3", passed=bad[i] == 0, exact_zero=bad[i] == 0, seed=seed,
                               inputs={"draws": draws}, details={"nonzero": bad[i]})
            for i in range(4)
        ]
    if k < 4:
        raise UsageError("identities exist for k = 3 (id0..id3) and k >= 4 (cubic)")
    nonzero = 0
    for _ in range(draws):
        pt = SpectralPoint.random(k, rng)
        nonzero += sum(pdesolver.cubic_identity_residual(pt, q) != 0 for q in pdesolver.all_quadruples(k))
    return [VerificationReport(f"cubic identity k={k}", passed=nonzero == 0, exact_zero=nonzero == 0, seed=seed,
                               inputs={"draws": draws}, details={"nonzero": nonzero})]


def _pde_reports(k: int, y: Fraction, points: int, seed: int, series: ChiSeries | None = None):
    if series is None:
        cap = _even_cap(y)
        series, _ = _series_for(k, y, None, seed) if k <= 3 else pdesolver.solve_chi(k, y, cap, seed=seed, basis=_basis_for(k))
    # points differ from those used in assembly
    rng = random.Random(f"verify-pde-{seed}")
    nonzero = 0
    worst = 0.0
    for _ in range(points):
        pt = SpectralPoint.random(series.k, rng)
        r = pdesolver.pde_apply(series, pt, y)
        if not r.is_zero():
            nonzero += 1
            worst = max(worst, abs(r))
    return [VerificationReport(f"pde residual k={series.k} y={y}", passed=nonzero == 0, exact_zero=nonzero == 0,
                               residual=worst, seed=seed, inputs={"points": points}, details={"nonzero": nonzero})]


def _largey_reports(k: int, draws: int, seed: int) -> list[VerificationReport]:
    out = []
    for order in (0, 1, 2):
        if order == 2 and k != 3:
            continue
        reps = largey.phi_residual_suite(order, k, draws, seed)
        bad = sum(not r.passed for r in reps)
        out.append(VerificationReport(f"phi{order} residual k={k}", passed=bad == 0, exact_zero=bad == 0, seed=seed,
                                      inputs={"draws": draws}, details={"nonzero": bad}))
    if k == 3:
        out.append(largey.largey_vs_recursion(5))
    return out


MC_POINTS = {
    2: (((0.0, 0.6), (0.0, 1.5)), ((0.2, 1.1), (0.3, 1.0))),
    3: (((0.0, 0.5, 1.2), (0.0, 1.0, 2.5)), ((0.1, 0.7, 1.0), (0.2, 0.9, 2.0))),
}


def _mc_reports(k: int, y: Fraction, samples: int, seed: int) -> list[VerificationReport]:
    if k not in MC_POINTS:
        raise UsageError("mc suite runs for k = 2, 3")
    p1, p2 = MC_POINTS[k]
    if y == 0:
        return [oracle.determinant_check(k, p1, samples, seed)]
    if y == 4:
        return [oracle.reconstruction_ratio_check(graphexp.beta4_chi(k), 4, p1, p2, samples, seed)]
    raise UsageError("mc suite supports beta = 2 and beta = 4")


def _finish(reports: list[VerificationReport], fmt: str) -> int:
    if fmt == "json":
        print(json.dumps([r.to_dict() for r in reports], indent=1))
    else:
        for r in reports:
            print(r.line())
        n_bad = sum(not r.passed for r in reports)
        print(f"{len(reports) - n_bad}/{len(reports)} checks passed")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_verify(args) -> int:
    seed = _seed(args)
    y = _y_of(args)
    reports: list[VerificationReport] = []
    suite = args.suite
    if suite in ("identities", "all"):
        for k in ([args.k] if args.k else [3, 4]):
            reports += _identity_reports(k, args.draws, seed)
    if suite in ("pde", "all"):
        if args.series is not None:
            try:
                series = ChiSeries.from_json(args.series.read_text())
            except (OSError, ValueError, KeyError) as exc:
                raise UsageError(f"cannot read series: {exc}") from None
            if y is None:
                raise UsageError("--series needs --beta or --y")
            reports += _pde_reports(series.k, y, args.points, seed, series)
        elif suite == "pde":
            if args.k is None or y is None:
                raise UsageError("verify pde needs --k and --beta/--y")
            reports += _pde_reports(args.k, y, args.points, seed)
        else:
            for k, yy in ((3, Fraction(4)), (4, Fraction(4)), (4, Fraction(12))):
                reports += _pde_reports(k, yy, args.points, seed)
    if suite in ("largey", "all"):
        reports += _largey_reports(args.k or 3, min(args.draws, 50), seed)
    if suite in ("mc", "all"):
        samples = _samples(args)
        if suite == "mc":
            if args.k is None or y is None:
                raise UsageError("verify mc needs --k and --beta/--y")
            reports += _mc_reports(args.k, y, samples, seed)
        else:
            for k in (2, 3):
                reports += _mc_reports(k, Fraction(0), samples, seed)
                reports += _mc_reports(k, Fraction(4), samples, seed)
    return _finish(reports, args.format)


COMMANDS = {
    "expand": cmd_expand,
    "coeff": cmd_coeff,
    "solve": cmd_solve,
    "graph": cmd_graph,
    "k3": cmd_k3,
    "largey": cmd_largey,
    "mc": cmd_mc,
    "verify": cmd_verify,
}


def _report_error(exc: Exception, code: int, as_json: bool) -> int:
    if as_json:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), file=sys.stderr)
    else:
        print(f"hiz: error: {exc}", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    as_json = "--error-json" in argv
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except UsageError as exc:
        if not as_json:
            ap.print_usage(sys.stderr)
        return _report_error(exc, EXIT_USAGE, as_json)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        return _report_error(exc, EXIT_USAGE, as_json)
    except (InconsistentSystem, ArithmeticError) as exc:
        return _report_error(exc, EXIT_FAIL, as_json)
    except (ValueError, KeyError) as exc:
        return _report_error(exc, EXIT_USAGE, as_json)


if __name__ == "__main__":
    sys.exit(main())
