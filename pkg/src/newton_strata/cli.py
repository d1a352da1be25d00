"""Command-line frontend.

Exit codes: 0 pass, 1 check failure, 2 usage or input error, 3 resource bound.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import checks
from .isocrystal import (
    MonomialOperator,
    PairingSpec,
    integral_breakpoints,
    pairing_symmetry_check,
    slope_decomposition,
    slope_polygon,
)
from .newton import ResourceBoundError, construct_basic_element, is_basic, newton_point, strata
from .padic import make_split_problem, split_slopes, verify_conjugation
from .rootdata import GroupDatum, MinusculeSpec, make_group_datum

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BOUND = 0, 1, 2, 3


class InputError(ValueError):
    pass


def _load_record(source: str) -> dict:
    """A JSON record from a path, ``-`` (stdin) or an inline ``{...}`` string."""
    if source.lstrip().startswith("{"):
        text, where = source, "<inline>"
    elif source == "-":
        text, where = sys.stdin.read(), "<stdin>"
    else:
        try:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"{source}: {exc.strerror}") from exc
        where = source
    try:
        rec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{where}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(rec, dict):
        raise InputError(f"{where}: expected a JSON object")
    return rec


def _require(rec: dict, key: str, kind, where: str):
    if key not in rec:
        raise InputError(f"{where}: missing key {key!r}")
    if not isinstance(rec[key], kind) or isinstance(rec[key], bool):
        raise InputError(f"{where}: key {key!r} has the wrong type")
    return rec[key]


def group_spec_from_record(rec: dict, where: str = "<record>") -> Tuple[GroupDatum, Optional[MinusculeSpec]]:
    family = _require(rec, "family", str, where)
    rank = _require(rec, "rank", int, where)
    factors = rec.get("factors", 1)
    twist = rec.get("twist", 1)
    if not isinstance(factors, int) or not isinstance(twist, int):
        raise InputError(f"{where}: factors and twist must be integers")
    try:
        datum = make_group_datum(family, rank, factors, twist)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from exc
    mu = rec.get("mu")
    if mu is None:
        return datum, None
    try:
        if mu == "siegel":
            spec = MinusculeSpec.siegel(datum)
        elif isinstance(mu, dict) and "l" in mu:
            spec = MinusculeSpec.from_l(datum, int(mu["l"]))
        elif isinstance(mu, dict) and "weights" in mu:
            ws = mu["weights"]
            if ws and not isinstance(ws[0], list):
                ws = [ws]
            spec = MinusculeSpec.from_weights(datum, ws, mu.get("similitude"))
        else:
            raise InputError(f"{where}: key 'mu' must be \"siegel\", {{\"l\": k}} or {{\"weights\": [...]}}")
    except (ValueError, TypeError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"{where}: mu: {exc}") from exc
    return datum, spec


def _where(source: str) -> str:
    return "<inline>" if source.lstrip().startswith("{") else source


def parse_group_spec(source: str) -> Tuple[GroupDatum, Optional[MinusculeSpec]]:
    return group_spec_from_record(_load_record(source), _where(source))


def operator_from_record(rec: dict, where: str = "<record>") -> Tuple[MonomialOperator, Optional[PairingSpec]]:
    perm = _require(rec, "permutation", list, where)
    exps = _require(rec, "exponents", list, where)
    size = rec.get("size", len(perm))
    if size != len(perm) or size != len(exps):
        raise InputError(f"{where}: size, permutation and exponents disagree in length")
    try:
        op = MonomialOperator.from_one_based(perm, exps)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from exc
    pairing = None
    if rec.get("pairing") is not None:
        try:
            pairing = PairingSpec(tuple(int(i) - 1 for i in rec["pairing"]),
                                  Fraction(str(rec.get("similitude_slope", 0))))
        except ValueError as exc:
            raise InputError(f"{where}: pairing: {exc}") from exc
    return op, pairing


# ----------------------------------------------------------------------------
# output


def _emit(rows: List[dict], columns: Sequence[str], fmt: str, out) -> None:
    if fmt == "jsonl":
        for row in rows:
            out.write(json.dumps({c: row[c] for c in columns}, separators=(",", ":")) + "\n")
    elif fmt == "csv":
        out.write(",".join(columns) + "\n")
        for row in rows:
            out.write(",".join(str(row[c]) for c in columns) + "\n")
    else:
        widths = [max([len(c)] + [len(str(r[c])) for r in rows]) for c in columns]
        out.write("  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip() + "\n")
        for row in rows:
            out.write("  ".join(str(row[c]).ljust(w) for c, w in zip(columns, widths)).rstrip() + "\n")


def cmd_strata(args, out) -> int:
    datum, mu = parse_group_spec(args.spec)
    if mu is None:
        raise InputError("strata needs a 'mu' entry in the group spec")
    res = strata(datum, mu, composite=args.composite, threads=args.threads)
    rows = []
    for s in res:
        rows.append({
            "nu": str(s.nu),
            "polygon": str(s.polygon),
            "representative": s.representative.one_line(),
            "count": s.count,
            "vertices": s.polygon.vertex_string(),
        })
    columns = ["nu", "polygon", "representative", "count"] + (["vertices"] if args.vertices else [])
    _emit(rows, columns, args.format, out)
    print(f"{datum.label()}: {res.count} strata over {res.scanned} elements", file=sys.stderr)
    return EXIT_OK


def cmd_polygon(args, out) -> int:
    op, pairing = operator_from_record(_load_record(args.operator), _where(args.operator))
    poly = slope_polygon(op)
    dec = slope_decomposition(op)
    ok = True
    record = {
        "polygon": str(poly),
        "vertices": poly.vertex_string(),
        "integral_breakpoints": integral_breakpoints(poly),
        "parts": {str(g): [i + 1 for i in idx] for g, idx in dec.parts},
        "upper": {str(g): [i + 1 for i in dec.upper(g)] for g in dec.slopes},
        "lower": {str(g): [i + 1 for i in dec.lower(g)] for g in dec.slopes},
    }
    if pairing is not None:
        sym = pairing_symmetry_check(op, pairing)
        record["pairing_symmetric"] = sym
        ok = sym
    if args.format == "jsonl":
        out.write(json.dumps(record, separators=(",", ":")) + "\n")
    else:
        for key, val in record.items():
            if isinstance(val, dict):
                val = " ".join(f"{g}:{','.join(map(str, idx))}" for g, idx in val.items())
            out.write(f"{key}: {val}\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_basic(args, out) -> int:
    datum, mu = parse_group_spec(args.spec)
    if mu is None:
        mu = MinusculeSpec.siegel(datum) if datum.family == "GSp" else MinusculeSpec.from_l(datum, 1)
    w = construct_basic_element(datum, mu)
    nu = newton_point(datum, mu, w)
    ok = is_basic(datum, mu, w)
    record = {"group": datum.label(), "element": w.one_line(), "nu": str(nu), "basic": ok}
    if args.format == "jsonl":
        out.write(json.dumps(record, separators=(",", ":")) + "\n")
    else:
        _emit([record], list(record), "csv" if args.format == "csv" else "text", out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args, out) -> int:
    try:
        checks.resolve(args.name)
    except KeyError:
        print(f"unknown check {args.name!r}; known: {', '.join(sorted(checks.CHECKS))}", file=sys.stderr)
        return EXIT_USAGE
    params = checks.CheckParams(max_rank=args.max_rank, factors=args.factors, samples=args.samples,
                                seed=args.seed, threads=args.threads, composite=args.composite)
    rep = checks.run_check(args.name, params)
    out.write(rep.summary() + "\n")
    print(f"{rep.name}: {rep.wall_time:.2f}s", file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAIL


def split_problem_from_record(rec: dict, where: str = "<record>"):
    p = _require(rec, "p", int, where)
    N = _require(rec, "precision", int, where)
    blocks = _require(rec, "blocks", list, where)
    slopes = _require(rec, "slopes", list, where)
    phi = _require(rec, "phi", list, where)
    u = _require(rec, "u", list, where)
    try:
        return make_split_problem(p, N, blocks, slopes, phi, u)
    except (ValueError, IndexError) as exc:
        raise InputError(f"{where}: {exc}") from exc


def cmd_split(args, out) -> int:
    problem = split_problem_from_record(_load_record(args.problem), _where(args.problem))
    N = args.precision or problem.precision
    h = split_slopes(problem, N)
    v = verify_conjugation(h, problem.u, problem.phi, N)
    record = {
        "p": problem.p,
        "precision": N,
        "h": [[str(e.rational()) if not e.is_zero else "0" for e in row] for row in h.rows],
        "residual_valuation": v,
    }
    if args.format == "jsonl":
        out.write(json.dumps(record, separators=(",", ":")) + "\n")
    else:
        out.write(f"p={problem.p} precision={N} residual_valuation={v}\n")
        for row in record["h"]:
            out.write(" ".join(row) + "\n")
    return EXIT_OK if v >= N else EXIT_FAIL


def _factors(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected a comma-separated list of integers") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="newton-strata", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "csv", "jsonl"), default="text")
    common.add_argument("--threads", type=int, default=1)
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--composite", dest="composite", action="store_true", default=True,
                      help="reduced enumeration (default)")
    mode.add_argument("--full", dest="composite", action="store_false", help="enumerate every Weyl element")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("strata", parents=[common], help="Newton strata of a group spec")
    p.add_argument("spec", help="group-spec JSON file, '-' for stdin, or an inline JSON object")
    p.add_argument("--vertices", action="store_true", help="add polygon vertex lists")
    p.set_defaults(func=cmd_strata)

    p = sub.add_parser("polygon", parents=[common], help="polygon and slope decomposition of an operator")
    p.add_argument("operator", help="monomial-operator JSON file, '-' or inline JSON")
    p.set_defaults(func=cmd_polygon)

    p = sub.add_parser("basic", parents=[common], help="construct and verify a basic element")
    p.add_argument("spec")
    p.set_defaults(func=cmd_basic)

    p = sub.add_parser("verify", parents=[common], help="run a named verification suite")
    p.add_argument("name")
    p.add_argument("--max-rank", type=int)
    p.add_argument("--factors", type=_factors)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("split", parents=[common], help="run the slope-splitting iteration")
    p.add_argument("problem", help="split-problem JSON file, '-' or inline JSON")
    p.add_argument("--precision", type=int)
    p.set_defaults(func=cmd_split)
    return ap


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        code = args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceBoundError as exc:
        print(f"resource bound: {exc}", file=sys.stderr)
        return EXIT_BOUND
    finally:
        out.flush()
    print(f"wall time {time.perf_counter() - start:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
