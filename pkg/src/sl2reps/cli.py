"""Command line front end.

JSON is the machine-readable output (``--json PATH``); the text printed on
stdout is derived from the same report.  Exit status: 0 on success, 2 when
an admissibility verdict is Inconclusive, 1 on any error.
"""

import argparse
import json
import logging
import sys

import numpy as np

from . import linalg2
from .admissibility import VerdictKind, admissibility_verdict, drift_scan
from .cohomology import cocycle_matrix, cohomology_report, slice_basis
from .deformation import DEFAULT_ORDER, extend_to_order, first_order_defect_operator
from .errors import RepresentationError, Sl2RepsError
from .presentation import abelianization, parse_presentation
from .repvar import (
    REP_TOL,
    Representation,
    abelian_representations,
    conjugate_representation,
    trivial_representation,
    weeks_geometric,
    weeks_presentation,
    weeks_sextic_roots,
)
from .serialize import dumps, encode_complex, report_schema_version

COMMANDS = ("parse", "abelian", "cohomology", "deform", "admissible", "weeks-demo")


def _positive(kind):
    def convert(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return convert


def build_parser():
    p = argparse.ArgumentParser(prog="sl2reps", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("presentation", nargs="?", help="presentation file (not used by weeks-demo)")
    p.add_argument("--rep", help="representation JSON (default: trivial representation)")
    p.add_argument("--ref", help="reference (defining) representation JSON for admissible")
    p.add_argument("--tol-rep", type=_positive(float), default=REP_TOL)
    p.add_argument("--tol-rank", type=_positive(float), default=1e-8)
    p.add_argument("--tol-coc", type=_positive(float), default=1e-8)
    p.add_argument("--tol-jet", type=_positive(float), default=1e-8)
    p.add_argument("--ball", type=_positive(int), default=6, metavar="L")
    p.add_argument("--order", type=_positive(int), default=DEFAULT_ORDER, metavar="N")
    p.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout)")
    p.add_argument("--seed", type=int, default=0, metavar="S")
    p.add_argument("--dedupe", action="store_true",
                   help="abelian: identify characters conjugate under the Weyl element")
    p.add_argument("-q", "--quiet", action="store_true", help="no text summary")
    return p


def _load_presentation(args):
    if not args.presentation:
        raise Sl2RepsError(f"{args.command} needs a presentation file")
    with open(args.presentation, encoding="utf-8") as fh:
        return parse_presentation(fh.read())


def _load_rep(path, P, tol_rep):
    if path is None:
        return trivial_representation(P)
    with open(path, encoding="utf-8") as fh:
        rho = Representation.from_json(json.load(fh), presentation=P)
    if rho.residual > tol_rep:
        raise RepresentationError(
            f"{path}: relator residual {rho.residual:.3g} exceeds --tol-rep {tol_rep:g}")
    return rho


def _dims(report):
    return {"dim_Z1": report.dim_Z1, "dim_B1": report.dim_B1, "dim_H1": report.dim_H1,
            "dim_centralizer": report.dim_centralizer}


def cmd_parse(args):
    P = _load_presentation(args)
    return {
        "presentation": P.to_text(),
        "generators": list(P.generator_names),
        "relators": [P.format_word(r) for r in P.relators],
        "relator_letters": [list(r) for r in P.relators],
    }, 0


def _abelian_block(P):
    ab = abelianization(P)
    return {"invariant_factors": list(ab.invariant_factors), "rank_free": ab.rank_free}


def cmd_abelian(args):
    P = _load_presentation(args)
    out = {"presentation": P.to_text(), "abelianization": _abelian_block(P)}
    reps = abelian_representations(P, dedupe_conjugate=args.dedupe)
    ref = _load_rep(args.ref, P, args.tol_rep) if args.ref else None
    entries = []
    for rho in reps:
        entry = rho.to_json()
        if ref is not None:
            entry["verdict"] = admissibility_verdict(P, ref, rho, args.ball).to_json()
        entries.append(entry)
    out["representations"] = entries
    out["count"] = len(reps)
    return out, 0


def cmd_cohomology(args):
    P = _load_presentation(args)
    rho = _load_rep(args.rep, P, args.tol_rep)
    report = cohomology_report(rho, args.tol_rank)
    return {"presentation": P.to_text(), "representation": rho.to_json(),
            "cohomology": report.to_json()}, 0


def cmd_deform(args):
    P = _load_presentation(args)
    rho = _load_rep(args.rep, P, args.tol_rep)
    report = cohomology_report(rho, args.tol_rank)
    directions = []
    for c in slice_basis(rho, report):
        c.check(args.tol_coc)
        D, norms = extend_to_order(c, args.order, args.tol_jet)
        directions.append({
            "reached_order": D.order,
            "obstructed": D.order < args.order,
            "obstruction_norms": norms,
            "jet": D.to_json(),
        })
    return {"presentation": P.to_text(), "dims": _dims(report), "target_order": args.order,
            "directions": directions}, 0


def cmd_admissible(args):
    P = _load_presentation(args)
    rho = _load_rep(args.rep, P, args.tol_rep)
    if not args.ref:
        raise Sl2RepsError("admissible needs --ref (the defining embedding)")
    ref = _load_rep(args.ref, P, args.tol_rep)
    verdict = admissibility_verdict(P, ref, rho, args.ball)
    code = 2 if verdict.kind is VerdictKind.INCONCLUSIVE else 0
    return {"presentation": P.to_text(), "verdict": verdict.to_json()}, code


def _random_sl2(rng):
    return linalg2.exp_traceless(0.5 * (rng.normal(size=3) + 1j * rng.normal(size=3)))


def cmd_weeks_demo(args):
    W = weeks_presentation()
    ref = weeks_geometric(0)
    rng = np.random.default_rng(args.seed)
    out = {"presentation": W.to_text(), "abelianization": _abelian_block(W)}

    abelian = []
    for rho in abelian_representations(W):
        za, zb = rho.images[0][0, 0], rho.images[1][0, 0]
        m = int(round(np.angle(za) / (2 * np.pi / 5))) % 5
        n = int(round(np.angle(zb) / (2 * np.pi / 5))) % 5
        verdict = admissibility_verdict(W, ref, rho, args.ball)
        abelian.append({"n": n, "m": m, "residual": rho.residual,
                        "verdict": verdict.kind.value,
                        "dims": _dims(cohomology_report(rho, args.tol_rank))})
    out["abelian_representations"] = abelian
    out["abelian_count"] = len(abelian)
    out["abelian_count_up_to_weyl"] = len(abelian_representations(W, dedupe_conjugate=True))

    trivial = trivial_representation(W)
    trivial_report = cohomology_report(trivial, args.tol_rank)
    out["trivial_cohomology"] = trivial_report.to_json()
    out["trivial_verdict"] = admissibility_verdict(W, ref, trivial, args.ball).kind.value

    geometric = []
    for k, x in enumerate(weeks_sextic_roots()):
        rho = weeks_geometric(k)
        self_drift = drift_scan(W, rho, rho, min(args.ball, 4))
        geometric.append({
            "root_index": k,
            "x": encode_complex(x),
            "residual": rho.residual,
            "dims": _dims(cohomology_report(rho, args.tol_rank)),
            "self_drift_max_abs": max(abs(v) for v in self_drift.min_drift + self_drift.mean_drift),
            "verdict_against_itself": admissibility_verdict(W, rho, rho, args.ball).kind.value,
            "verdict_against_root_0": admissibility_verdict(W, ref, rho, args.ball).kind.value,
        })
    out["geometric"] = geometric

    out["trivial_drift"] = drift_scan(W, ref, trivial, args.ball).to_json()

    identity_dev = 0.0
    for rho in [trivial, ref] + abelian_representations(W):
        identity_dev = max(identity_dev, float(np.max(np.abs(
            first_order_defect_operator(rho) - cocycle_matrix(rho)))))
    out["first_order_identity_max_deviation"] = identity_dev

    equivariance = []
    for _ in range(5):
        g = _random_sl2(rng)
        same = cohomology_report(conjugate_representation(ref, g), args.tol_rank).dims == \
            cohomology_report(ref, args.tol_rank).dims
        equivariance.append(bool(same))
    out["conjugation_equivariance_geometric"] = equivariance
    return out, 0


HANDLERS = {
    "parse": cmd_parse,
    "abelian": cmd_abelian,
    "cohomology": cmd_cohomology,
    "deform": cmd_deform,
    "admissible": cmd_admissible,
    "weeks-demo": cmd_weeks_demo,
}


def _summary(report, prefix=""):
    lines = []
    for key, val in sorted(report.items()):
        if isinstance(val, dict):
            lines.append(f"{prefix}{key}:")
            lines.extend(_summary(val, prefix + "  "))
        elif isinstance(val, list) and val and isinstance(val[0], (dict, list)):
            lines.append(f"{prefix}{key}: [{len(val)} entries]")
        else:
            lines.append(f"{prefix}{key}: {val}")
    return lines


def run(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    try:
        report, code = HANDLERS[args.command](args)
    except (Sl2RepsError, OSError, ValueError, KeyError) as exc:
        msg = str(exc) if isinstance(exc, Sl2RepsError) else f"{args.command}: {exc}"
        print(f"error: {msg}", file=sys.stderr)
        return 1
    report = {"schema": report_schema_version(), "command": args.command, **report}
    text = dumps(report)
    if args.json == "-":
        sys.stdout.write(text)
    elif args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text)
    if not args.quiet and args.json != "-":
        print("\n".join(_summary(report)))
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
