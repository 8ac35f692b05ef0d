"""Command-line surface: deterministic JSON/TSV emission and verification.

Exit codes: 0 success, 1 usage error, 2 domain error (exceptional or
otherwise unsupported input, with the exceptional case named), 3
verification failure.  Rationals are printed as "p/q" strings, never as
decimals; the Novikov variable stays symbolic unless --q 1 is passed, which
substitutes on output only.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .errors import DomainError, InternalConsistencyError, VerificationError
from .exact import QPoly, TruncSeries, rat_str
from .geometry import describe


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_d(text: str):
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise DomainError(f"cannot parse multidegree {text!r}")


def _qpoly_out(p: QPoly, q1: bool):
    if q1:
        return rat_str(p.eval_q1())
    return [[k, rat_str(c)] for k, c in p.items()]


def _matrix_out(mat, q1: bool):
    return [[_qpoly_out(entry, q1) for entry in row] for row in mat]


def _rational_matrix_out(mat):
    return [[rat_str(Fraction(entry)) for entry in row] for row in mat]


def _series_out(series: TruncSeries, q1: bool):
    return {
        "nt": series.nt,
        "degree_cap": series.degree_cap,
        "s_cap": series.s_cap,
        "qmax": series.qmax,
        "terms": [
            {"monomial": list(key), "coefficient": _qpoly_out(c, q1)}
            for key, c in series.sorted_terms()
        ],
    }


def _emit(payload, args) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _qmax_arg(args, desc):
    from .smallqh import default_qmax
    if args.qmax is not None:
        return args.qmax
    env = os.environ.get("CIQC_QMAX")
    if env:
        return int(env)
    return default_qmax(desc)


def cmd_info(args) -> int:
    desc = describe(args.n, _parse_d(args.d))
    _emit(desc.to_json(), args)
    if desc.exceptional:
        sys.stderr.write(
            f"domain error: exceptional complete intersection: "
            f"{desc.exceptional_case}\n")
        return 2
    return 0


def cmd_smallqh(args) -> int:
    from .smallqh import build_ring, c_constant
    desc = describe(args.n, _parse_d(args.d))
    ring = build_ring(desc, _qmax_arg(args, desc))
    cval, conj, match = c_constant(desc, ring)
    payload = {
        "descriptor": desc.to_json(),
        "qmax": ring.qmax,
        "multH": _matrix_out(ring.multH, args.q1),
        "powers": [[_qpoly_out(c, args.q1) for c in vec] for vec in ring.powers],
        "M": _rational_matrix_out(ring.M),
        "W": _rational_matrix_out(ring.W),
        "g": _matrix_out(ring.g, args.q1),
        "ginv": _matrix_out(ring.ginv, args.q1),
        "c": rat_str(cval),
        "c_conjecture": rat_str(conj),
        "conjecture_matches": match,
    }
    _emit(payload, args)
    return 0


def cmd_f1(args) -> int:
    from .reconstruct import f1_series
    from .smallqh import build_ring
    desc = describe(args.n, _parse_d(args.d))
    ring = build_ring(desc, _qmax_arg(args, desc))
    jet = f1_series(desc, ring)
    payload = {
        "descriptor": desc.to_json(),
        "constant": _qpoly_out(jet.constant, args.q1),
        "tau_jet": _series_out(jet.tau_jet, args.q1),
        "t_jet": _series_out(jet.t_jet, args.q1),
    }
    _emit(payload, args)
    return 0


def cmd_f2(args) -> int:
    from .reconstruct import f2_at_zero, f2_gradient, f1_series
    from .smallqh import build_ring
    desc = describe(args.n, _parse_d(args.d))
    ring = build_ring(desc, _qmax_arg(args, desc))
    f1 = f1_series(desc, ring)
    roots = f2_at_zero(desc, ring, f1)
    if args.format == "tsv":
        if not args.no_header:
            sys.stdout.write("roots\n")
        sys.stdout.write("\t".join(rat_str(r) for r in roots) + "\n")
        return 0
    payload = {
        "descriptor": desc.to_json(),
        "roots": [rat_str(r) for r in roots],
        "gradients": [
            {
                "root": rat_str(r),
                "value": _qpoly_out(f2_gradient(desc, r, ring, f1).value, args.q1),
                "tau_gradient": [_qpoly_out(c, args.q1)
                                 for c in f2_gradient(desc, r, ring, f1).tau_grad],
                "t_gradient": [_qpoly_out(c, args.q1)
                               for c in f2_gradient(desc, r, ring, f1).t_grad],
            }
            for r in roots
        ],
    }
    _emit(payload, args)
    return 0


def cmd_higherk(args) -> int:
    from .reconstruct import higher_k_coeffs
    desc = describe(args.n, _parse_d(args.d))
    records = higher_k_coeffs(desc, args.kmax)
    payload = {
        "descriptor": desc.to_json(),
        "records": [
            {"order": r.order, "k": r.k, "coefficient": rat_str(r.coefficient),
             "admissible": r.admissible, "determined": r.determined,
             "note": r.note}
            for r in records
        ],
    }
    _emit(payload, args)
    return 0


def cmd_residual(args) -> int:
    from .reduction import ReducedPotential, wdvv_residuals
    desc = describe(args.n, _parse_d(args.d))
    with open(args.load) as handle:
        F = TruncSeries.from_json(json.load(handle))
    pot = ReducedPotential(desc, F)
    res = wdvv_residuals(pot)

    def violations(series):
        return [{"monomial": list(key), "coefficient": _qpoly_out(c, args.q1)}
                for key, c in series.sorted_terms()]

    payload = {
        "descriptor": desc.to_json(),
        "eq_mixed": {f"{a},{b}": violations(series)
                     for (a, b), series in sorted(res["eq_mixed"].items())},
        "eq_pure": violations(res["eq_pure"]),
        "ambient": {f"{k}": violations(series)
                    for k, series in sorted(res["ambient"].items())
                    if not series.is_zero()},
    }
    _emit(payload, args)
    return 0


def cmd_fano_lines(args) -> int:
    from .fano_lines import (hilb2_check, hilb2_examples, omega_checks,
                             prim_square_class, rank_estimates)
    n = args.n
    payload = {"n": n, "checks": {}}
    which = args.check
    if which in ("all", "cubic7"):
        z = prim_square_class(n)
        payload["checks"]["primitive_square_class"] = {
            "z": [rat_str(v) for v in z],
            "matches_closed_form": True,  # enforced inside the computation
        }
    if which in ("all", "cubic13", "cubic16"):
        report = omega_checks(n)
        payload["checks"]["normalization"] = {
            "value": rat_str(report["normalization"]),
            "expected": rat_str(report["normalization_expected"]),
            "ok": report["normalization_ok"],
        }
        payload["checks"]["quartic"] = {
            "value": rat_str(report["quartic"]),
            "closed_form": rat_str(report["quartic_closed_form"]),
            "euler_value": rat_str(report["quartic_euler_value"]),
            "ok": report["quartic_ok"],
            "m_form_value": rat_str(report["m_form_value"]),
            "m_form_matches": report["m_form_matches"],
        }
        payload["checks"]["f2_at_zero"] = rat_str(report["f2_at_zero"])
    if which == "all":
        payload["checks"]["rank_estimates"] = rank_estimates(n)
    if which == "hilb2" or (which == "all" and n == 4):
        payload["checks"]["hilb2"] = {
            "scalar": rat_str(hilb2_check()),
            "examples": {k: rat_str(v) for k, v in hilb2_examples().items()},
        }
    _emit(payload, args)
    return 0


def cmd_genus1(args) -> int:
    from .genus_one import f2_from_genus1
    d = _parse_d(args.d) if args.d else (3,)
    report = f2_from_genus1(args.n, d)
    payload = {
        "n": report.n,
        "chi": report.chi,
        "hn11": rat_str(report.hn11),
        "h10": rat_str(report.h10),
        "psi11": rat_str(report.psi11),
        "f2": rat_str(report.f2),
        "experimental": report.experimental,
    }
    _emit(payload, args)
    return 0


def cmd_verify(args) -> int:
    from .acceptance import run_all
    only = None
    if args.n is not None and args.d is not None:
        only = (args.n, _parse_d(args.d))
    results = run_all(only=only, seed=args.seed)
    all_ok = True
    for name, ok, detail in results:
        sys.stdout.write(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}\n")
        all_ok = all_ok and ok
    return 0 if all_ok else 3


def build_parser() -> _Parser:
    parser = _Parser(prog="ciqc",
                     description="Exact quantum cohomology data for Fano "
                                 "complete intersections")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_d=True):
        p.add_argument("--n", type=int, required=True)
        if need_d:
            p.add_argument("--d", type=str, required=True,
                           help="comma-separated multidegree, e.g. 2,2")
        p.add_argument("--qmax", type=int, default=None)
        p.add_argument("--q", dest="q1", nargs="?", const="1", default=None,
                       help="substitute q = 1 on output only")
        p.add_argument("--format", choices=("json", "tsv"), default="json")
        p.add_argument("--no-header", action="store_true")

    p = sub.add_parser("info", help="descriptor invariants")
    common(p)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("smallqh", help="quantum ring data")
    common(p)
    p.set_defaults(func=cmd_smallqh)

    p = sub.add_parser("f1", help="degree-2 jet of F^(1)")
    common(p)
    p.set_defaults(func=cmd_f1)

    p = sub.add_parser("f2", help="roots and gradient of F^(2)(0)")
    common(p)
    p.set_defaults(func=cmd_f2)

    p = sub.add_parser("higherk", help="higher-order determination coefficients")
    common(p)
    p.add_argument("--kmax", type=int, default=6)
    p.set_defaults(func=cmd_higherk)

    p = sub.add_parser("residual", help="reduced-system residuals of a stored potential")
    common(p)
    p.add_argument("--load", type=str, required=True)
    p.set_defaults(func=cmd_residual)

    p = sub.add_parser("fano-lines", help="lines-variety verification report")
    common(p, need_d=False)
    p.add_argument("--check", choices=("all", "cubic7", "cubic13", "cubic16", "hilb2"),
                   default="all")
    p.set_defaults(func=cmd_fano_lines)

    p = sub.add_parser("genus1", help="genus-one determination of F^(2)(0)")
    common(p, need_d=False)
    p.add_argument("--d", type=str, default=None)
    p.set_defaults(func=cmd_genus1)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", type=str, default=None)
    p.add_argument("--seed", type=int, default=20240811)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    if getattr(args, "q1", None) is not None and args.q1 != "1":
        sys.stderr.write("only --q 1 is supported (output specialization)\n")
        return 1
    args.q1 = getattr(args, "q1", None) == "1"
    try:
        return args.func(args)
    except DomainError as exc:
        sys.stderr.write(f"domain error: {exc}\n")
        return 2
    except (VerificationError, InternalConsistencyError) as exc:
        sys.stderr.write(f"verification failure: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
