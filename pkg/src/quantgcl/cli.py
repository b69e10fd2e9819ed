"""Command-line front end.

Six commands, one analysis each:

    transform   print the transformed quantity and its convergence status
    annotate    interleave a program listing with per-point annotations
    oracle      compare the symbolic transformer against the reference
                interpreter on every state of a finite domain
    check       verify triples from a file, or a loop induction / one-shot
                rule given explicitly
    props       run the randomized law suites and report falsifications
    leak        per observable value, the interval of secret initial values

Exit codes are uniform across commands: 0 for success / holds / exact /
converged, 1 for usage or parse errors, 2 for unknown / truncated
(fuel-limited) outcomes, 3 for a failure with a concrete counterexample.
Machine-readable output is available behind ``--format table``
(comma-separated with a header row; free-text fields come last so rows
split cleanly on the leading commas).
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from .generators import GenConfig
from .infoflow import leak, leak_report_table, leak_report_text
from .oracle import (
    DomainEscapeError, EscapePolicy, FuelExhaustedError, ref_slp, ref_sp,
    ref_wlp, ref_wp,
)
from .parser import (
    ParseError, parse_domain, parse_program, parse_quantity,
)
from .proofs import (
    Verdict, check_induction, check_one_shot, check_triple, load_triples,
)
from .props import ALL_SUITES, run_all
from .simplify import simplify
from .syntax import (
    Assign, Choice, Diverge, DomainSpec, If, Iverson, MissingVariableError,
    Not, Program, QMax, QMin, Quantity, Seq, Skip, While, bexpr_to_str,
    eval_quantity, program_to_lines, program_to_str, quantity_to_str,
)
from .transformers import (
    AnalysisResult, ConvergedAt, Exact, Mode, Status, TransformConfig,
    TruncatedAt, transform,
)

_REF = {Mode.WP: ref_wp, Mode.WLP: ref_wlp, Mode.SP: ref_sp, Mode.SLP: ref_slp}

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNKNOWN = 2
EXIT_FAILS = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags; our contract reserves 2 for
    inconclusive analyses, so usage errors are remapped to 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _status_fields(status: Status) -> tuple[str, str, str]:
    if isinstance(status, Exact):
        return "exact", "", ""
    if isinstance(status, ConvergedAt):
        return "converged", str(status.iteration), ""
    return "truncated", str(status.fuel), status.bound


def _status_exit(status: Status) -> int:
    return EXIT_UNKNOWN if isinstance(status, TruncatedAt) else EXIT_OK


def _verdict_exit(v: Verdict) -> int:
    if v.is_holds:
        return EXIT_OK
    if v.is_fails:
        return EXIT_FAILS
    return EXIT_UNKNOWN


def _verdict_fields(v: Verdict) -> tuple[str, str, str, str]:
    lhs = str(v.lhs) if v.lhs is not None else ""
    rhs = str(v.rhs) if v.rhs is not None else ""
    detail = str(v.witness) if v.witness is not None else (v.reason or "")
    if v.note:
        detail = f"{detail} {v.note}".strip()
    return v.status, lhs, rhs, detail


# ---------------------------------------------------------------------------
# transform
# ---------------------------------------------------------------------------


def _transform_config(args) -> TransformConfig:
    probe: Optional[DomainSpec] = None
    if args.probe_domain:
        probe = parse_domain(args.probe_domain)
    fuel = args.fuel if args.fuel is not None else (
        probe.fuel if probe is not None else 64)
    return TransformConfig(fuel=fuel, probe=probe)


def cmd_transform(args) -> int:
    c = parse_program(_read(args.program))
    f = parse_quantity(args.quantity)
    res = transform(Mode(args.mode), c, f, _transform_config(args))
    if args.format == "table":
        kind, detail, bound = _status_fields(res.status)
        print("status, iterations, bound, quantity")
        print(f"{kind}, {detail}, {bound}, {quantity_to_str(res.quantity)}")
    else:
        print(f"{quantity_to_str(res.quantity)}  ({res.status})")
    return _status_exit(res.status)


# ---------------------------------------------------------------------------
# annotate
# ---------------------------------------------------------------------------


def _annot(q: Quantity, indent: int) -> str:
    return "  " * indent + f"// {{{{ {quantity_to_str(q)} }}}}"


def _annotate(mode: Mode, c: Program, f: Quantity, cfg: TransformConfig,
              indent: int) -> tuple[list[str], AnalysisResult]:
    """Annotated listing of ``c``.  Forward modes thread ``f`` in as the
    prequantity and return the final quantity; backward modes thread it in
    as the postquantity and return the initial one.  The boundary
    annotations (input at one end, result at the other) are the caller's to
    print, so sequencing glues segments with exactly one annotation per
    intermediate point."""
    pad = "  " * indent
    if isinstance(c, (Skip, Diverge, Assign, While)):
        res = transform(mode, c, f, cfg)
        lines = (program_to_lines(c, indent) if isinstance(c, While)
                 else [pad + program_to_str(c)])
        return lines, res
    if isinstance(c, Seq):
        if mode.forward:
            first, fres = _annotate(mode, c.first, f, cfg, indent)
            second, sres = _annotate(mode, c.second, fres.quantity, cfg,
                                     indent)
            mid = fres.quantity
        else:
            second, sres = _annotate(mode, c.second, f, cfg, indent)
            first, fres = _annotate(mode, c.first, sres.quantity, cfg, indent)
            mid = sres.quantity
        status = _merge_status(fres.status, sres.status)
        out = sres.quantity if mode.forward else fres.quantity
        return (first + [_annot(mid, indent)] + second,
                AnalysisResult(out, status))
    if isinstance(c, If):
        head = f"if ({bexpr_to_str(c.cond)}) {{"
        yes, no = Iverson(c.cond), Iverson(Not(c.cond))
        if mode.forward:
            if mode is Mode.SP:
                f_then = simplify(QMin(yes, f))
                f_else = simplify(QMin(no, f))
            else:
                f_then = simplify(QMax(no, f))
                f_else = simplify(QMax(yes, f))
            return _annotate_branches(mode, head, c.then, f_then, c.orelse,
                                      f_else, cfg, indent)
        then_lines, tres = _annotate(mode, c.then, f, cfg, indent + 1)
        else_lines, eres = _annotate(mode, c.orelse, f, cfg, indent + 1)
        joined = simplify(QMax(QMin(yes, tres.quantity),
                               QMin(no, eres.quantity)))
        lines = ([pad + head, _annot(tres.quantity, indent + 1)] + then_lines
                 + [pad + "} else {", _annot(eres.quantity, indent + 1)]
                 + else_lines + [pad + "}"])
        return lines, AnalysisResult(
            joined, _merge_status(tres.status, eres.status))
    if isinstance(c, Choice):
        if mode.forward:
            return _annotate_branches(mode, "{", c.left, f, c.right, f, cfg,
                                      indent, middle="} [] {")
        left_lines, lres = _annotate(mode, c.left, f, cfg, indent + 1)
        right_lines, rres = _annotate(mode, c.right, f, cfg, indent + 1)
        ctor = QMin if mode.liberal else QMax
        joined = simplify(ctor(lres.quantity, rres.quantity))
        lines = ([pad + "{", _annot(lres.quantity, indent + 1)] + left_lines
                 + [pad + "} [] {", _annot(rres.quantity, indent + 1)]
                 + right_lines + [pad + "}"])
        return lines, AnalysisResult(
            joined, _merge_status(lres.status, rres.status))
    raise TypeError(f"not a program: {c!r}")


def _annotate_branches(mode: Mode, head: str, left: Program, f_left: Quantity,
                       right: Program, f_right: Quantity,
                       cfg: TransformConfig, indent: int,
                       middle: str = "} else {"
                       ) -> tuple[list[str], AnalysisResult]:
    """Forward-mode two-branch layout: each branch shows its entry quantity,
    its annotated body, and its exit quantity; the join after the closing
    brace is the enclosing context's annotation."""
    pad = "  " * indent
    left_lines, lres = _annotate(mode, left, f_left, cfg, indent + 1)
    right_lines, rres = _annotate(mode, right, f_right, cfg, indent + 1)
    ctor = QMin if mode.liberal else QMax
    joined = simplify(ctor(lres.quantity, rres.quantity))
    lines = ([pad + head, _annot(f_left, indent + 1)] + left_lines
             + [_annot(lres.quantity, indent + 1), pad + middle,
                _annot(f_right, indent + 1)] + right_lines
             + [_annot(rres.quantity, indent + 1), pad + "}"])
    return lines, AnalysisResult(
        joined, _merge_status(lres.status, rres.status))


def _merge_status(a: Status, b: Status) -> Status:
    if isinstance(a, TruncatedAt):
        return a
    if isinstance(b, TruncatedAt):
        return b
    if isinstance(a, ConvergedAt) and isinstance(b, ConvergedAt):
        return ConvergedAt(max(a.iteration, b.iteration))
    if isinstance(a, ConvergedAt):
        return a
    if isinstance(b, ConvergedAt):
        return b
    return Exact()


def cmd_annotate(args) -> int:
    mode = Mode(args.mode)
    c = parse_program(_read(args.program))
    f = simplify(parse_quantity(args.quantity))
    cfg = _transform_config(args)
    lines, res = _annotate(mode, c, f, cfg, 0)
    top = f if mode.forward else res.quantity
    bottom = res.quantity if mode.forward else f
    print("\n".join([_annot(top, 0)] + lines + [_annot(bottom, 0)]))
    return _status_exit(res.status)


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------


def cmd_oracle(args) -> int:
    mode = Mode(args.mode)
    c = parse_program(_read(args.program))
    f = parse_quantity(args.quantity)
    dom = parse_domain(args.domain)
    policy = EscapePolicy(args.escape)
    fuel = args.fuel if args.fuel is not None else dom.fuel
    res = transform(mode, c, f, TransformConfig(fuel=fuel, probe=dom))
    table = args.format == "table"
    if table:
        print("result, states, symbolic, reference, witness")
    if not res.trustworthy:
        msg = f"symbolic transform inconclusive: {res.status}"
        print(f"unknown, 0, , , {msg}" if table else f"unknown: {msg}")
        return EXIT_UNKNOWN
    ref = _REF[mode]
    refdom = dom.widened(args.pad)
    checked = 0
    for sigma in dom.states():
        sym = eval_quantity(res.quantity, sigma, dom)
        try:
            exp = ref(c, f, sigma, refdom, policy)
        except (FuelExhaustedError, DomainEscapeError) as exc:
            msg = f"reference gave up at {sigma}: {exc}"
            print(f"unknown, {checked}, , , {msg}" if table
                  else f"unknown: {msg}")
            return EXIT_UNKNOWN
        if sym != exp:
            if table:
                print(f"fail, {checked}, {sym}, {exp}, {sigma}")
            else:
                print(f"fail at {sigma}: symbolic = {sym}, reference = {exp}")
            return EXIT_FAILS
        checked += 1
    if table:
        print(f"pass, {checked}, , , ")
    else:
        print(f"pass: {mode.value} agrees with the reference at all "
              f"{checked} states  ({res.status})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    chosen = [bool(args.triples), args.induction is not None,
              args.one_shot is not None]
    if sum(chosen) != 1:
        raise ValueError(
            "check needs exactly one of: a triple file, --induction, "
            "or --one-shot")
    dom = parse_domain(args.domain)
    table = args.format == "table"

    if args.triples:
        triples = load_triples(args.triples)
        if not triples:
            raise ValueError(f"no triples in {args.triples}")
        if table:
            print("index, kind, status, lhs, rhs, detail")
        worst = EXIT_OK
        for i, t in enumerate(triples, start=1):
            v = check_triple(t, dom)
            if table:
                status, lhs, rhs, detail = _verdict_fields(v)
                print(f"{i}, {t.kind.value}, {status}, {lhs}, {rhs}, {detail}")
            else:
                print(f"[{i}] {t.kind.value}: {v}")
            code = _verdict_exit(v)
            worst = max(worst, code, key=(EXIT_OK, EXIT_UNKNOWN,
                                          EXIT_FAILS).index)
        return worst

    c = parse_program(_read(args.program))
    if args.induction is not None:
        for flag, value in (("--f", args.f), ("--g", args.g),
                            ("--invariant", args.invariant)):
            if value is None:
                raise ValueError(f"--induction needs {flag}")
        v = check_induction(Mode(args.induction), c,
                            parse_quantity(args.f), parse_quantity(args.g),
                            parse_quantity(args.invariant), dom)
        if table:
            status, lhs, rhs, detail = _verdict_fields(v)
            print("rule, status, lhs, rhs, detail")
            print(f"{args.induction}, {status}, {lhs}, {rhs}, {detail}")
        else:
            print(f"induction ({args.induction}): {v}")
        return _verdict_exit(v)

    if args.f is None:
        raise ValueError("--one-shot needs --f")
    outcome = check_one_shot(Mode(args.one_shot), c,
                             parse_quantity(args.f), dom)
    if table:
        print("rule, applies, result, reason")
        result = quantity_to_str(outcome.result) if outcome.applies else ""
        print(f"{args.one_shot}, {outcome.applies}, {result}, "
              f"{outcome.reason or ''}")
    elif outcome.applies:
        print(f"applies: {quantity_to_str(outcome.result)}")
    elif outcome.reason:
        print(f"unknown: {outcome.reason}")
    else:
        print("does not apply: the body premise fails on the domain")
    if outcome.applies:
        return EXIT_OK
    return EXIT_UNKNOWN if outcome.reason else EXIT_FAILS


# ---------------------------------------------------------------------------
# props
# ---------------------------------------------------------------------------


def _gen_config(args) -> GenConfig:
    base = GenConfig()
    box, window, fuel = base.box, base.window, base.fuel
    if args.domain:
        dom = parse_domain(args.domain)
        if dom.intervals:
            box = (min(lo for _, (lo, _) in dom.intervals),
                   max(hi for _, (_, hi) in dom.intervals))
        window = dom.alpha_window
        fuel = dom.fuel
    return GenConfig(max_vars=args.max_vars, depth=args.depth, box=box,
                     window=window, fuel=fuel)


def cmd_props(args) -> int:
    names = args.suite or None
    results = run_all(args.seed, args.count, _gen_config(args), names)
    total = sum(r.falsified for r in results)
    if args.format == "table":
        print("suite, instances, falsified, inconclusive")
        for r in results:
            print(f"{r.name}, {r.instances}, {r.falsified}, {r.inconclusive}")
    else:
        for r in results:
            print(r.summary_line())
            if r.first_failure:
                print(f"    {r.first_failure}")
        print()
        print(f"{total} falsified")
    return EXIT_OK if total == 0 else EXIT_FAILS


# ---------------------------------------------------------------------------
# leak
# ---------------------------------------------------------------------------


def cmd_leak(args) -> int:
    c = parse_program(_read(args.program))
    dom = parse_domain(args.domain)
    report = leak(c, args.secret, args.observable, dom)
    if args.format == "table":
        print(leak_report_table(report))
    else:
        print(leak_report_text(report))
    return EXIT_OK if report.trustworthy else EXIT_UNKNOWN


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------

_MODES = [m.value for m in Mode]


def _add_format(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "table"), default="text",
                   help="output style; 'table' is comma-separated with a "
                        "header row")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quantgcl",
                     description="Quantitative pre/post analyses for guarded "
                                 "commands.")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="command")

    p = sub.add_parser("transform", parents=[], help="transform a quantity "
                       "through a program and print the simplified result")
    p.add_argument("program", help="program file")
    p.add_argument("--mode", choices=_MODES, required=True)
    p.add_argument("--quantity", required=True, help="quantity expression")
    p.add_argument("--fuel", type=int, default=None,
                   help="loop iteration budget (default 64)")
    p.add_argument("--probe-domain", default=None,
                   help="domain used for the semantic convergence check, "
                        "e.g. 'x=0..7; alpha=-16..16; fuel=64'")
    _add_format(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("annotate", help="print the program listing with a "
                       "quantity annotation at every program point")
    p.add_argument("program", help="program file")
    p.add_argument("--mode", choices=_MODES, required=True)
    p.add_argument("--quantity", required=True)
    p.add_argument("--fuel", type=int, default=None)
    p.add_argument("--probe-domain", default=None)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("oracle", help="compare the symbolic transformer "
                       "against the reference interpreter on a finite box")
    p.add_argument("program", help="program file")
    p.add_argument("--mode", choices=_MODES, required=True)
    p.add_argument("--quantity", required=True)
    p.add_argument("--domain", required=True,
                   help="state box, e.g. 'x=0..7, y=-2..2; fuel=128'")
    p.add_argument("--escape", choices=[e.value for e in EscapePolicy],
                   default=EscapePolicy.DROP.value,
                   help="what the reference does when an assignment leaves "
                        "the box")
    p.add_argument("--pad", type=int, default=8,
                   help="how far beyond the stated box the reference "
                        "explores; fibers and trajectories passing farther "
                        "out than this are missed (default 8)")
    p.add_argument("--fuel", type=int, default=None,
                   help="symbolic iteration budget (default: domain fuel)")
    _add_format(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("check", help="check triples from a file, or one "
                       "induction / one-shot rule application")
    p.add_argument("triples", nargs="?", default=None,
                   help="triple file: 'kind; pre; program-file; post' lines")
    p.add_argument("--induction", choices=_MODES, default=None,
                   metavar="RULE", help="check the loop induction rule for "
                   "this transformer")
    p.add_argument("--one-shot", choices=("sp", "slp"), default=None,
                   metavar="RULE", help="check the single-premise closed-"
                   "form rule (sp or slp)")
    p.add_argument("--program", default=None,
                   help="loop file (for --induction / --one-shot)")
    p.add_argument("--f", default=None,
                   help="the transformed quantity in the rule's conclusion")
    p.add_argument("--g", default=None,
                   help="the bounding quantity in the rule's conclusion")
    p.add_argument("--invariant", default=None,
                   help="the inductive quantity supporting the premise")
    p.add_argument("--domain", required=True)
    _add_format(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("props", help="run the randomized law suites")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--count", type=int, default=50,
                   help="instances per suite (default 50)")
    p.add_argument("--suite", action="append", choices=sorted(ALL_SUITES),
                   default=None, metavar="NAME",
                   help="run only this suite (repeatable); default: all")
    p.add_argument("--max-vars", type=int, default=GenConfig.max_vars,
                   help="variables per generated program (default 3)")
    p.add_argument("--depth", type=int, default=GenConfig.depth,
                   help="generator recursion depth (default 4)")
    p.add_argument("--domain", default=None,
                   help="generator ranges: the hull of the intervals is the "
                        "per-variable box; alpha and fuel carry over")
    _add_format(p)
    p.set_defaults(func=cmd_props)

    p = sub.add_parser("leak", help="report which initial secret values are "
                       "compatible with each observable final value")
    p.add_argument("program", help="program file")
    p.add_argument("--secret", required=True, help="initial-state variable")
    p.add_argument("--observable", required=True,
                   help="final-state variable")
    p.add_argument("--domain", required=True)
    _add_format(p)
    p.set_defaults(func=cmd_leak)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, MissingVariableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FuelExhaustedError, DomainEscapeError) as exc:
        print(f"unknown: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN


def entry() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entry()
