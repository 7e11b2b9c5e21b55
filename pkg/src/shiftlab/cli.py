"""Command line front end.

Exit codes depend on the verdict only: 0 pass, 1 fail, 2 unreadable input,
3 undecided within the bounds.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import formats as fm
from .cohomology import CylFunction
from .cover import build_cover, graph_isomorphic
from .flow import RoofFunction, compare_flow_invariants, invariant_report, suspend, verify_flow_certificate
from .past import classify, realized_pasts, stabilization_depth
from .presentation import EmptyShiftError, Presentation, from_matrix
from .relations import (
    LEAD_BOUND,
    PERIOD_BOUND,
    MapSpecError,
    VerificationReport,
    compile_map,
    verify_coe,
    verify_conjugacy,
    verify_eventual_conjugacy,
    verify_positive_coe,
    verify_preservation,
)
from .transducer import TransducerError

EXIT = {"pass": 0, "fail": 1, "unknown": 3}
PARSE_ERROR = 2


class InputError(Exception):
    pass


@dataclass
class JobConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    period_bound: int = PERIOD_BOUND
    depth_bound: int = 4
    lead_bound: int = LEAD_BOUND
    output_format: str = "text"
    output: str | None = None

    def __post_init__(self):
        for name in ("period_bound", "depth_bound", "lead_bound"):
            if getattr(self, name) < 1:
                raise InputError(f"{name.replace('_', '-')} must be positive")


# ---------------------------------------------------------------------------
# loading


def _shift(ref: str) -> fm.LoadedShift:
    try:
        return fm.load_shift(ref)
    except EmptyShiftError as e:
        raise InputError(f"{ref}: {e}") from e


def _shift_arg(args) -> fm.LoadedShift:
    if getattr(args, "fixture", None):
        return _shift(args.fixture)
    if getattr(args, "input", None):
        return _shift(args.input)
    raise InputError("give --fixture NAME or --input FILE")


def _pair(args, doc: dict | None = None) -> tuple[Presentation, Presentation]:
    if args.fixture_pair:
        x, y = args.fixture_pair
    elif doc is not None and doc.get("domain") and doc.get("codomain"):
        x, y = doc["domain"], doc["codomain"]
    else:
        raise InputError("give --fixture-pair X Y (or a map file naming its domain and codomain)")
    return _shift(x).presentation, _shift(y).presentation


def _maps(args, X: Presentation, Y: Presentation):
    doc = fm.load_doc(args.maps)
    pair = fm.map_pair_from_json(doc, X, Y)
    try:
        h = compile_map(pair.forward, X, Y)
        hi = None if pair.inverse is None else compile_map(pair.inverse, Y, X)
    except (MapSpecError, TransducerError) as e:
        raise InputError(f"map does not compile: {e}") from e
    return h, hi


def _roof(ref: str | None, constant: int | None, p: Presentation) -> RoofFunction:
    try:
        if ref is not None:
            return RoofFunction(fm.cyl_from_json(fm.load_doc(ref), p))
        return RoofFunction(CylFunction.constant(p, constant or 1))
    except ValueError as e:
        raise InputError(f"roof function: {e}") from e


def parse_ell(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        lo, sep, hi = part.partition("..")
        try:
            out += list(range(int(lo), int(hi) + 1)) if sep else [int(lo)]
        except ValueError as e:
            raise InputError(f"bad ℓ range {text!r}") from e
    if any(v < 0 for v in out) or not out:
        raise InputError("ℓ must be natural")
    return out


# ---------------------------------------------------------------------------
# rendering


def _emit(cfg: JobConfig, doc: dict, text: str) -> None:
    body = json.dumps(doc, indent=2, ensure_ascii=False, default=str) if cfg.output_format == "json" else text
    if cfg.output:
        Path(cfg.output).write_text(body + "\n")
    else:
        print(body)


def _report_text(rep: VerificationReport, title: str) -> str:
    lines = [f"{title}: {rep.verdict}"]
    lines += [f"  checked {c}" for c in rep.checked]
    if rep.counterexample:
        shown = {k: v for k, v in rep.counterexample.items() if k != "points"}
        lines.append("  counterexample " + json.dumps(shown, ensure_ascii=False, default=str))
    return "\n".join(lines)


def _report_json(rep: VerificationReport) -> dict:
    doc = rep.to_json()
    if doc["counterexample"]:
        doc["counterexample"] = {k: v for k, v in doc["counterexample"].items() if k != "points"}
    doc["details"] = [{k: str(v) if k in ("x", "point") else v for k, v in d.items()} for d in rep.details]
    return doc


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args, cfg: JobConfig) -> int:
    s = _shift_arg(args)
    flags = classify(s.presentation)
    pasts = realized_pasts(s.presentation)
    doc = {
        "format": fm.FORMAT,
        "shift": s.presentation.name,
        "flags": flags.to_json(),
        "pasts": {"realized": len(pasts), "stabilization_depth": stabilization_depth(s.presentation)},
    }
    text = "\n".join(
        [f"{k}: {str(v).lower()}" for k, v in doc["flags"].items() if k != "witnesses"]
        + [f"witness {k}: {', '.join(str(w) for w in ws)}" for k, ws in flags.witnesses.items()]
        + [f"realized pasts: {len(pasts)}", f"stabilization depth: {doc['pasts']['stabilization_depth']}"]
    )
    _emit(cfg, doc, text)
    return 0


def cmd_cover(args, cfg: JobConfig) -> int:
    s = _shift_arg(args)
    c = build_cover(s.presentation)
    doc = c.to_json()
    text = "\n".join(f"{a} --{lab}--> {b}" for a, b, lab in c.edges)
    code = 0
    if args.expect:
        ref = _shift(args.expect)
        iso = graph_isomorphic(c, ref.presentation, ref.factor_labels)
        doc["isomorphic_to_expected"] = iso is not None
        doc["vertex_map"] = iso
        text += f"\nisomorphic to {args.expect}: {'yes' if iso else 'no'}"
        code = 0 if iso else 1
    _emit(cfg, doc, text)
    return code


def _cocycles(args, X, Y):
    if not args.cocycles:
        raise InputError("this check needs --cocycles FILE")
    return fm.cocycles_from_json(fm.load_doc(args.cocycles), X, Y)


def cmd_verify(args, cfg: JobConfig) -> int:
    kind = args.kind
    if kind == "flow-cert":
        return _flow_cert(args, cfg)
    doc = fm.load_doc(args.maps) if args.maps else None
    X, Y = _pair(args, doc)
    if kind == "positivity":
        cx, cy = _cocycles(args, X, Y)
        rep = verify_positive_coe(cx, cy, cfg.depth_bound)
        _emit(cfg, _report_json(rep), _report_text(rep, "positivity"))
        return EXIT[rep.verdict]
    if not args.maps:
        raise InputError("this check needs --maps FILE")
    h, hi = _maps(args, X, Y)
    if hi is None:
        raise InputError("the map file has no inverse")
    if kind == "conjugacy":
        rep = verify_conjugacy(h, hi, cfg.lead_bound)
    elif kind == "eventual":
        reps = [verify_eventual_conjugacy(h, hi, ell, cfg.lead_bound) for ell in parse_ell(args.ell)]
        verdicts = [r.verdict for r in reps]
        overall = "pass" if "pass" in verdicts else ("unknown" if "unknown" in verdicts else "fail")
        body = {"format": fm.FORMAT, "verdict": overall, "per_ell": [_report_json(r) for r in reps]}
        text = "\n".join(_report_text(r, f"ℓ = {r.bounds['ell']}") for r in reps)
        _emit(cfg, body, text)
        return EXIT[overall]
    elif kind == "coe":
        cx, cy = _cocycles(args, X, Y)
        rep = verify_coe(h, hi, cx, cy, cfg.lead_bound)
    elif kind == "preservation":
        cx, cy = _cocycles(args, X, Y)
        rep = verify_preservation(h, hi, cx, cy, args.mode, cfg.period_bound, args.scope, args.max_transient)
    else:
        raise InputError(f"unknown check {kind!r}")
    _emit(cfg, _report_json(rep), _report_text(rep, kind))
    return EXIT[rep.verdict]


def _flow_cert(args, cfg: JobConfig) -> int:
    doc = fm.load_doc(args.maps) if args.maps else None
    X, Y = _pair(args, doc)
    f = _roof(args.roof_x, args.roof_x_constant, X)
    g = _roof(args.roof_y, args.roof_y_constant, Y)
    if not args.maps:
        raise InputError("flow-cert needs --maps FILE over the suspension alphabets")
    sx, sy = suspend(X, f), suspend(Y, g)
    pair = fm.map_pair_from_json(doc, sx.presentation, sy.presentation)
    try:
        rep = verify_flow_certificate(X, Y, f, g, pair.forward, pair.inverse, parse_ell(args.ell)[0], cfg.lead_bound)
    except (MapSpecError, TransducerError) as e:
        raise InputError(f"map does not compile: {e}") from e
    _emit(cfg, _report_json(rep), _report_text(rep, "flow certificate"))
    return EXIT[rep.verdict]


def _presentations_for_invariants(args) -> list[tuple[str, Presentation]]:
    out = []
    for ref in args.matrix or []:
        m, kind = fm.matrix_from_json(fm.load_doc(ref))
        out.append((ref, from_matrix(m, kind)))
    for ref in args.fixture or []:
        out.append((ref, _shift(ref).presentation))
    for ref in args.input or []:
        out.append((ref, _shift(ref).presentation))
    if not out:
        raise InputError("give at least one --matrix, --fixture or --input")
    return out


def cmd_invariants(args, cfg: JobConfig) -> int:
    items = _presentations_for_invariants(args)
    if args.compare:
        if len(items) != 2:
            raise InputError("--compare needs exactly two shifts")
        cmp = compare_flow_invariants(items[0][1], items[1][1])
        _emit(cfg, cmp.to_json(), str(cmp))
        return 0
    reports = [(name, invariant_report(p)) for name, p in items]
    doc = {"format": fm.FORMAT, "reports": {name: r.to_json() for name, r in reports}}
    text = "\n".join(f"{name}: BF {r.bowen_franks}, det(I - A) = {r.det}" for name, r in reports)
    _emit(cfg, doc, text)
    return 0


def cmd_suspend(args, cfg: JobConfig) -> int:
    s = _shift_arg(args)
    f = _roof(args.roof, args.constant, s.presentation)
    sp = suspend(s.presentation, f)
    text = "\n".join(f"{a} --{lab}--> {b}" for a, b, lab in sp.presentation.edges)
    _emit(cfg, sp.to_json(), text)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shiftlab", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="output_format", choices=["json", "text"], default="text")
    common.add_argument("--output", "-o")
    common.add_argument("--period-bound", type=int, default=PERIOD_BOUND)
    common.add_argument("--depth-bound", type=int, default=4)
    common.add_argument("--lead-bound", type=int, default=LEAD_BOUND)
    sub = ap.add_subparsers(dest="command", required=True)

    def one_shift(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--fixture")
        g.add_argument("--input")

    p = sub.add_parser("analyze", parents=[common], help="classification flags and past classes")
    one_shift(p)
    p = sub.add_parser("cover", parents=[common], help="cover graph, optionally compared with a reference")
    one_shift(p)
    p.add_argument("--expect")

    p = sub.add_parser("verify", parents=[common], help="verify a relation between two shifts")
    p.add_argument("kind", choices=["conjugacy", "eventual", "coe", "preservation", "positivity", "flow-cert"])
    p.add_argument("--fixture-pair", nargs=2, metavar=("X", "Y"))
    p.add_argument("--maps", "--map", dest="maps")
    p.add_argument("--cocycles")
    p.add_argument("--ell", default="0")
    p.add_argument("--mode", choices=["least_period", "stabilizer"], default="least_period")
    p.add_argument("--scope", choices=["periodic", "eventually_periodic"], default="periodic")
    p.add_argument("--max-transient", type=int, default=2)
    p.add_argument("--roof-x")
    p.add_argument("--roof-y")
    p.add_argument("--roof-x-constant", type=int)
    p.add_argument("--roof-y-constant", type=int)

    p = sub.add_parser("invariants", parents=[common], help="Bowen-Franks data of covers")
    p.add_argument("--matrix", action="append")
    p.add_argument("--fixture", action="append")
    p.add_argument("--input", action="append")
    p.add_argument("--compare", action="store_true")

    p = sub.add_parser("suspend", parents=[common], help="discrete suspension under a roof function")
    one_shift(p)
    p.add_argument("--roof")
    p.add_argument("--constant", type=int)
    return ap


COMMANDS = {
    "analyze": cmd_analyze,
    "cover": cmd_cover,
    "verify": cmd_verify,
    "invariants": cmd_invariants,
    "suspend": cmd_suspend,
}


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return PARSE_ERROR if e.code else 0
    try:
        cfg = JobConfig(args.command, [], args.period_bound, args.depth_bound, args.lead_bound, args.output_format, args.output)
        return COMMANDS[args.command](args, cfg)
    except (InputError, fm.FormatError, MapSpecError) as e:
        print(f"shiftlab: {e}", file=sys.stderr)
        return PARSE_ERROR


if __name__ == "__main__":
    sys.exit(main())
