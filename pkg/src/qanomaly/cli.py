"""Command-line front end.

Exit codes: 0 on a result (an anomaly is a result), 2 on invalid input,
3 on numerical trouble or an oracle mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .cecomplex import cohomology_bruteforce, cohomology_theorem
from .config import Tolerances
from .deformation import DeformationSeries, Obstructed, anomaly_report, first_order_residual
from .errors import InputError, NotExactError, NumericalError, SpectrumError
from .problemfile import ProblemFile, encode_matrix
from .spectral import default_cluster_tol, joint_diagonalize
from .verma import check_deformation_cocycle, check_sl2_relations, verma_operators

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 2, 3


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--output", choices=("json", "text"), default=default("text"))
    parser.add_argument("--tol-cluster", type=float, default=default(None))
    parser.add_argument("--tol-rank", type=float, default=default(None))
    parser.add_argument("--tol-obstruction", type=float, default=default(None))
    parser.add_argument("--order", type=int, default=default(6), help="series order for `anomaly`")
    parser.add_argument("--seed", type=int, default=default(0), help="seed for the gauge self-check")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qanomaly", description="Perturbative symmetry anomalies of finite quantum systems."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)

    p = sub.add_parser("spectrum", parents=[common], help="joint spectrum of (H, S)")
    p.add_argument("file")
    p = sub.add_parser("cohomology", parents=[common], help="CE cohomology dimensions")
    p.add_argument("file")
    p.add_argument("--method", choices=("theorem", "brute", "both"), default="both")
    p = sub.add_parser("anomaly", parents=[common], help="first order, obstruction, series")
    p.add_argument("file")
    p = sub.add_parser("verma-check", parents=[common], help="exact sl(2) Verma cocycle check")
    p.add_argument("--lambda", dest="lam", required=True, help="highest weight as P/Q")
    p.add_argument("--degree", type=int, required=True, help="truncation degree N")
    p.add_argument("--delta-f-power", type=int, default=1, help="power of x in the f-deformation")
    return parser


def _tolerances(args, problem: ProblemFile) -> Tolerances:
    return problem.effective_tolerances(
        cluster=args.tol_cluster, rank=args.tol_rank, obstruction=args.tol_obstruction
    )


def _base_report(command: str, problem: ProblemFile, tol: Tolerances) -> dict:
    report = problem.to_dict()
    report["tolerances"] = tol.as_dict()
    report["command"] = command
    return report


def _effective(tol: Tolerances, pair, extra=None) -> dict:
    eff = tol.as_dict()
    if eff["cluster"] is None:
        eff["cluster"] = default_cluster_tol(pair)
    eff.update(extra or {})
    return eff


def cmd_spectrum(args) -> tuple[dict, int]:
    problem = ProblemFile.load(args.file)
    tol = _tolerances(args, problem)
    pair = problem.pair(tol)
    spectrum = joint_diagonalize(pair, tol.cluster)
    report = _base_report("spectrum", problem, tol)
    report["effective_tolerances"] = _effective(tol, pair)
    report["result"] = {"sectors": spectrum.summary()}
    return report, EXIT_OK


def cmd_cohomology(args) -> tuple[dict, int]:
    problem = ProblemFile.load(args.file)
    tol = _tolerances(args, problem)
    pair = problem.pair(tol)
    result = {}
    if args.method in ("theorem", "both"):
        result["theorem"] = list(cohomology_theorem(joint_diagonalize(pair, tol.cluster)).dims)
    if args.method in ("brute", "both"):
        result["brute_force"] = list(cohomology_bruteforce(pair, tol.rank).dims)
    code = EXIT_OK
    if args.method == "both":
        result["agree"] = result["theorem"] == result["brute_force"]
        if not result["agree"]:
            code = EXIT_NUMERICAL
    report = _base_report("cohomology", problem, tol)
    report["effective_tolerances"] = _effective(tol, pair)
    report["result"] = result
    return report, code


def _series_json(series) -> dict:
    if isinstance(series, Obstructed):
        return {"obstructed_at": series.order, "norm": series.obstruction.norm}
    assert isinstance(series, DeformationSeries)
    return {
        "order": series.order,
        "gauge": series.gauge,
        "delta_H": [encode_matrix(m) for m in series.h_coeffs[1:]],
        "delta_S": [encode_matrix(m) for m in series.s_coeffs[1:]],
        "residual_profile": [list(p) for p in series.residual_profile],
        "slope": series.slope,
        "low_order_defect": series.low_order_defect,
    }


def cmd_anomaly(args) -> tuple[dict, int]:
    problem = ProblemFile.load(args.file)
    tol = _tolerances(args, problem)
    prob = problem.problem(tol)
    rep = anomaly_report(prob, order=args.order, seed=args.seed)
    result = {
        "anomaly": rep.anomaly,
        "anomaly_order": rep.anomaly_order,
        "sectors": rep.spectrum.summary(),
        "cohomology": {k: list(v.dims) for k, v in rep.cohomology.items()},
    }
    if rep.first_order is None:
        result["first_order"] = {
            "obstructed_blocks": [[list(b), n] for b, n in rep.first_order_failure]
        }
    else:
        result["first_order"] = {
            "source": "input" if problem.delta_S1 is not None else "solver",
            "delta_S1": encode_matrix(rep.first_order),
            "residual": first_order_residual(prob.pair, prob.delta_h1, rep.first_order),
        }
    if rep.obstruction is not None:
        ob = rep.obstruction
        result["obstruction"] = {
            "order": ob.order,
            "matrix": encode_matrix(ob.representative.inner),
            "hermitian": encode_matrix(ob.hermitian),
            "coefficients": [float(c) + 0.0 for c in ob.coefficients],
            "norm": ob.norm,
            "tol": ob.tol,
        }
        result["feasibility_residual"] = rep.feasibility
        result["gauge_check"] = rep.gauge_check
        result["completion_residual"] = rep.completion
    if rep.series is not None:
        result["series"] = _series_json(rep.series)
    report = _base_report("anomaly", problem, tol)
    extra = {"obstruction": rep.obstruction.tol} if rep.obstruction is not None else {}
    report["effective_tolerances"] = _effective(tol, prob.pair, extra)
    report["order"] = args.order
    report["seed"] = args.seed
    report["result"] = result
    return report, EXIT_OK


def cmd_verma(args) -> tuple[dict, int]:
    try:
        lam = Fraction(args.lam)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"--lambda must be a rational P/Q, got {args.lam!r}") from None
    check = check_deformation_cocycle(lam, args.degree, args.delta_f_power)
    relations = check_sl2_relations(verma_operators(lam, args.degree))
    report = {
        "command": "verma-check",
        "lambda": str(lam),
        "degree": args.degree,
        "delta_f_power": args.delta_f_power,
        "result": {
            "cocycle": check.passed,
            "verified_degrees": [check.verified_degrees.start, check.verified_degrees.stop - 1],
            "relations": {
                name: {
                    "exact_degrees": r["exact_degrees"],
                    "window_exact": r["window_exact"],
                    "top_violation": str(r["top_violation"]),
                }
                for name, r in relations.items()
            },
        },
    }
    return report, EXIT_OK


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def render_text(report: dict) -> str:
    cmd = report["command"]
    res = report["result"]
    lines = []
    if cmd == "spectrum":
        lines.append(f"{len(res['sectors'])} sector(s)")
        lines.append(f"{'lambda':>14} {'mu':>14} {'mult':>5}")
        for s in res["sectors"]:
            lines.append(f"{s['lambda']:>14.8g} {s['mu']:>14.8g} {s['multiplicity']:>5d}")
    elif cmd == "cohomology":
        for k in ("theorem", "brute_force"):
            if k in res:
                lines.append(f"{k}: (h0, h1, h2) = {tuple(res[k])}")
        if "agree" in res:
            lines.append("methods agree" if res["agree"] else "METHODS DISAGREE")
    elif cmd == "anomaly":
        lines.append(f"anomaly: {str(res['anomaly']).lower()}")
        if res["anomaly_order"] is not None:
            lines.append(f"anomaly order: {res['anomaly_order']}")
        lines.append(f"cohomology: {res['cohomology']}")
        fo = res["first_order"]
        if "obstructed_blocks" in fo:
            lines.append(f"first order obstructed on blocks {fo['obstructed_blocks']}")
        else:
            lines.append(f"first order ({fo['source']}): residual {_fmt(fo['residual'])}")
        if "obstruction" in res:
            ob = res["obstruction"]
            lines.append(f"obstruction norm: {_fmt(ob['norm'])} (tol {_fmt(ob['tol'])})")
            lines.append("obstruction coefficients: " + " ".join(_fmt(c) for c in ob["coefficients"]))
            if res["feasibility_residual"] is not None:
                lines.append(f"least-squares residual: {_fmt(res['feasibility_residual'])}")
            lines.append(f"best over first-order completions: {_fmt(res['completion_residual'])}")
        if "series" in res:
            s = res["series"]
            if "obstructed_at" in s:
                lines.append(f"series: obstructed at order {s['obstructed_at']}")
            else:
                lines.append(f"series: reached order {s['order']}, residual slope {_fmt(s['slope'])}")
    elif cmd == "verma-check":
        lines.append(f"lambda = {report['lambda']}, N = {report['degree']}")
        lo, hi = res["verified_degrees"]
        lines.append(f"cocycle on degrees {lo}..{hi}: {'exact zero' if res['cocycle'] else 'NONZERO'}")
        for name, r in res["relations"].items():
            lines.append(f"{name}: exact on {r['exact_degrees']}, top violation {r['top_violation']}")
    return "\n".join(lines)


COMMANDS = {
    "spectrum": cmd_spectrum,
    "cohomology": cmd_cohomology,
    "anomaly": cmd_anomaly,
    "verma-check": cmd_verma,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, code = COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, SpectrumError, NotExactError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.output == "json":
        print(json.dumps(report, indent=2))
    else:
        print(render_text(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
