"""Order checking, loop proof rules, triple validity, and Galois checks.

Everything here reduces to the pointwise order f ⪯ g between quantities,
decided by exhaustive evaluation over a finite domain box.  Loop rules and
triple checkers call the symbolic transformers; when a needed fixpoint only
converged to a fuel-limited bound, verdicts degrade to unknown rather than
guessing, with one exception: ``check_triple`` falls back to the brute-force
reference transformers (exact on the finite box) so that triples about
loops whose Kleene chain has no finite syntactic fixpoint can still be
decided.  A disagreement between two formulations that the transformer laws
force equal raises :class:`InternalSoundnessError` when both were decided
symbolically; if the reference fallback was involved, the verdict is
unknown instead, since reference fibers are truncated to the run box.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional

from .lattice import ExtReal, IndeterminateFormError
from .oracle import (
    DomainEscapeError, EscapePolicy, FuelExhaustedError, _finals_from,
    ref_slp, ref_sp, ref_wlp, ref_wp,
)
from .parser import parse_program, parse_quantity
from .simplify import simplify
from .syntax import (
    DomainSpec, Iverson, MissingVariableError, Not, Program, QMax, QMin,
    Quantity, State, While, eval_quantity,
)
from .transformers import Mode, TransformConfig, transform


class InternalSoundnessError(AssertionError):
    """Two formulations the transformer laws force equal disagreed."""


@dataclass(frozen=True)
class Verdict:
    status: str  # "holds" | "fails" | "unknown"
    witness: Optional[State] = None
    lhs: Optional[ExtReal] = None
    rhs: Optional[ExtReal] = None
    reason: Optional[str] = None
    note: Optional[str] = None

    @staticmethod
    def holds(note: Optional[str] = None) -> "Verdict":
        return Verdict("holds", note=note)

    @staticmethod
    def fails(witness: State, lhs: ExtReal, rhs: ExtReal,
              note: Optional[str] = None) -> "Verdict":
        return Verdict("fails", witness=witness, lhs=lhs, rhs=rhs, note=note)

    @staticmethod
    def unknown(reason: str) -> "Verdict":
        return Verdict("unknown", reason=reason)

    @property
    def is_holds(self) -> bool:
        return self.status == "holds"

    @property
    def is_fails(self) -> bool:
        return self.status == "fails"

    @property
    def is_unknown(self) -> bool:
        return self.status == "unknown"

    def __str__(self) -> str:
        if self.is_holds:
            return f"holds  ({self.note})" if self.note else "holds"
        if self.is_fails:
            base = f"fails at {self.witness}: {self.lhs} > {self.rhs}"
            return f"{base}  ({self.note})" if self.note else base
        return f"unknown: {self.reason}"


def check_order(g: Quantity, f: Quantity, dom: DomainSpec) -> Verdict:
    """Does g ⪯ f hold, i.e. g(σ) ≤ f(σ) for every state of the domain box?

    Fails with the lexicographically first violating state and the two
    offending values; evaluation errors degrade to unknown.
    """
    for sigma in dom.states():
        try:
            a = eval_quantity(g, sigma, dom)
            b = eval_quantity(f, sigma, dom)
        except (IndeterminateFormError, MissingVariableError) as exc:
            return Verdict.unknown(f"evaluation failed at {sigma}: {exc}")
        if not a <= b:
            return Verdict.fails(sigma, a, b)
    return Verdict.holds()


def _cfg(dom: DomainSpec) -> TransformConfig:
    return TransformConfig(fuel=dom.fuel, probe=dom)


def _body_value(mode: Mode, body: Program, arg: Quantity, dom: DomainSpec
                ) -> tuple[Optional[Quantity], Optional[str]]:
    res = transform(mode, body, arg, _cfg(dom))
    if not res.trustworthy:
        return None, f"{mode.value} of the loop body truncated ({res.status})"
    return res.quantity, None


def check_induction(rule: Mode, loop: Program, f: Quantity, g: Quantity,
                    i: Quantity, dom: DomainSpec) -> Verdict:
    """Check the premises of the loop induction rule for ``rule``.

    The letters follow the rules' conclusions: wlp concludes g ⪯ wlp(loop, f),
    wp concludes wp(loop, f) ⪯ g, sp concludes sp(loop, g) ⪯ f, and slp
    concludes f ⪯ slp(loop, g).  A passing verdict carries the conclusion as
    its note.
    """
    if not isinstance(loop, While):
        raise ValueError("check_induction needs a while loop")
    guard, body = loop.cond, loop.body
    yes = Iverson(guard)
    no = Iverson(Not(guard))

    if rule is Mode.WLP:
        step, err = _body_value(rule, body, i, dom)
        if err:
            return Verdict.unknown(err)
        unrolled = simplify(QMax(QMin(no, f), QMin(yes, step)))
        for prem, (lhs, rhs) in (("g ⪯ i", (g, i)),
                                 ("i ⪯ [¬φ]⋏f ⋎ [φ]⋏wlp(body, i)",
                                  (i, unrolled))):
            v = check_order(lhs, rhs, dom)
            if not v.is_holds:
                return _premise_verdict(v, prem)
        return Verdict.holds("g ⪯ wlp(loop, f)")

    if rule is Mode.WP:
        step, err = _body_value(rule, body, i, dom)
        if err:
            return Verdict.unknown(err)
        unrolled = simplify(QMax(QMin(no, f), QMin(yes, step)))
        for prem, (lhs, rhs) in (("[¬φ]⋏f ⋎ [φ]⋏wp(body, i) ⪯ i",
                                  (unrolled, i)),
                                 ("i ⪯ g", (i, g))):
            v = check_order(lhs, rhs, dom)
            if not v.is_holds:
                return _premise_verdict(v, prem)
        return Verdict.holds("wp(loop, f) ⪯ g")

    if rule is Mode.SP:
        step, err = _body_value(rule, body, simplify(QMin(yes, i)), dom)
        if err:
            return Verdict.unknown(err)
        for prem, (lhs, rhs) in (("g ⋎ sp(body, [φ]⋏i) ⪯ i",
                                  (simplify(QMax(g, step)), i)),
                                 ("[¬φ]⋏i ⪯ f", (simplify(QMin(no, i)), f))):
            v = check_order(lhs, rhs, dom)
            if not v.is_holds:
                return _premise_verdict(v, prem)
        return Verdict.holds("sp(loop, g) ⪯ f")

    if rule is Mode.SLP:
        step, err = _body_value(rule, body, simplify(QMax(no, i)), dom)
        if err:
            return Verdict.unknown(err)
        for prem, (lhs, rhs) in (("i ⪯ g ⋏ slp(body, [¬φ]⋎i)",
                                  (i, simplify(QMin(g, step)))),
                                 ("f ⪯ [φ]⋎i", (f, simplify(QMax(yes, i))))):
            v = check_order(lhs, rhs, dom)
            if not v.is_holds:
                return _premise_verdict(v, prem)
        return Verdict.holds("f ⪯ slp(loop, g)")

    raise ValueError(f"no induction rule for {rule!r}")


def _premise_verdict(v: Verdict, premise: str) -> Verdict:
    if v.is_unknown:
        return v
    return Verdict.fails(v.witness, v.lhs, v.rhs, note=f"premise {premise}")


@dataclass(frozen=True)
class OneShotOutcome:
    applies: bool
    result: Optional[Quantity] = None
    reason: Optional[str] = None

    @property
    def is_unknown(self) -> bool:
        return self.reason is not None and not self.applies


def check_one_shot(mode: Mode, loop: Program, f: Quantity, dom: DomainSpec
                   ) -> OneShotOutcome:
    """The single-premise convergence rules: if sp(body, f) ⪯ f then
    sp(loop, f) = [¬φ]⋏f, and dually if f ⪯ slp(body, f) then
    slp(loop, f) = [φ]⋎f."""
    if mode not in (Mode.SP, Mode.SLP):
        raise ValueError("one-shot rules exist for sp and slp only")
    if not isinstance(loop, While):
        raise ValueError("check_one_shot needs a while loop")
    f = simplify(f)
    step, err = _body_value(mode, loop.body, f, dom)
    if err:
        return OneShotOutcome(False, reason=err)
    if mode is Mode.SP:
        v = check_order(step, f, dom)
        closed = simplify(QMin(Iverson(Not(loop.cond)), f))
    else:
        v = check_order(f, step, dom)
        closed = simplify(QMax(Iverson(loop.cond), f))
    if v.is_unknown:
        return OneShotOutcome(False, reason=v.reason)
    if v.is_fails:
        return OneShotOutcome(False)
    return OneShotOutcome(True, result=closed)


class TripleKind(Enum):
    PARTIAL_CORRECTNESS = "partial_correctness"
    TOTAL_CORRECTNESS = "total_correctness"
    TOTAL_INCORRECTNESS = "total_incorrectness"
    PARTIAL_INCORRECTNESS = "partial_incorrectness"
    NECESSARY_LIBERAL_PRE = "necessary_liberal_pre"
    NECESSARY_LIBERAL_POST = "necessary_liberal_post"


@dataclass(frozen=True)
class Triple:
    kind: TripleKind
    pre: Quantity
    program: Program
    post: Quantity


_REF = {Mode.WP: ref_wp, Mode.WLP: ref_wlp, Mode.SP: ref_sp, Mode.SLP: ref_slp}

# how far the reference fallback widens every interval of the run box
_FALLBACK_PAD = 16


def _order_with_transform(mode: Mode, c: Program, arg: Quantity,
                          other: Quantity, transformed_left: bool,
                          dom: DomainSpec) -> tuple[Verdict, bool]:
    """Check ``t(c, arg) ⪯ other`` (or the flipped order), preferring the
    symbolic transformer and falling back to per-state reference values when
    the fixpoint was truncated.  Returns (verdict, fallback_used)."""
    res = transform(mode, c, arg, _cfg(dom))
    if res.trustworthy:
        if transformed_left:
            return check_order(res.quantity, other, dom), False
        return check_order(other, res.quantity, dom), False
    ref = _REF[mode]
    run_dom = dom.widened(_FALLBACK_PAD)
    for sigma in dom.states():
        try:
            tv = ref(c, arg, sigma, run_dom, EscapePolicy.ERROR)
            ov = eval_quantity(other, sigma, dom)
        except (DomainEscapeError, FuelExhaustedError, IndeterminateFormError,
                MissingVariableError) as exc:
            return Verdict.unknown(
                f"transform truncated and reference fallback failed: {exc}"
            ), True
        lhs, rhs = (tv, ov) if transformed_left else (ov, tv)
        if not lhs <= rhs:
            return Verdict.fails(sigma, lhs, rhs), True
    return Verdict.holds(), True


def check_triple(t: Triple, dom: DomainSpec) -> Verdict:
    """Decide a triple by its defining transformer inequality; the two kinds
    with equivalent formulations check both and must agree."""
    g, c, f = t.pre, t.program, t.post
    if t.kind is TripleKind.TOTAL_CORRECTNESS:
        v, _ = _order_with_transform(Mode.WP, c, f, g, False, dom)
        return v
    if t.kind is TripleKind.TOTAL_INCORRECTNESS:
        v, _ = _order_with_transform(Mode.SP, c, g, f, False, dom)
        return v
    if t.kind is TripleKind.NECESSARY_LIBERAL_PRE:
        v, _ = _order_with_transform(Mode.WLP, c, f, g, True, dom)
        return v
    if t.kind is TripleKind.NECESSARY_LIBERAL_POST:
        v, _ = _order_with_transform(Mode.SLP, c, g, f, True, dom)
        return v
    if t.kind is TripleKind.PARTIAL_CORRECTNESS:
        sides = [("via wlp", _order_with_transform(Mode.WLP, c, f, g, False, dom)),
                 ("via sp", _order_with_transform(Mode.SP, c, g, f, True, dom))]
    elif t.kind is TripleKind.PARTIAL_INCORRECTNESS:
        sides = [("via slp", _order_with_transform(Mode.SLP, c, g, f, False, dom)),
                 ("via wp", _order_with_transform(Mode.WP, c, f, g, True, dom))]
    else:
        raise ValueError(f"unhandled triple kind {t.kind!r}")

    (name1, (v1, fb1)), (name2, (v2, fb2)) = sides
    if v1.is_unknown:
        return v1
    if v2.is_unknown:
        return v2
    if v1.status != v2.status:
        detail = (f"{name1} says {v1.status}, {name2} says {v2.status} "
                  f"for {t.kind.value}")
        if fb1 or fb2:
            return Verdict.unknown(
                f"{detail} (reference fallback involved; its fibers are "
                f"truncated to the run box)")
        raise InternalSoundnessError(detail)
    if v1.is_fails:
        return Verdict.fails(v1.witness, v1.lhs, v1.rhs, note=name1)
    return Verdict.holds(f"agreed {name1} and {name2}")


def _violated_at_final(c: Program, sigma: State, lhs: Quantity,
                       rhs: Quantity, dom: DomainSpec) -> Optional[bool]:
    """Is lhs ⪯ rhs violated at some final state of a run from sigma?
    None when execution cannot be traced within the widened box."""
    wdom = dom.widened(_FALLBACK_PAD)
    try:
        finals = _finals_from(c, sigma, wdom, EscapePolicy.DROP)
        return any(not eval_quantity(lhs, tau, wdom)
                   <= eval_quantity(rhs, tau, wdom) for tau in finals)
    except (FuelExhaustedError, IndeterminateFormError,
            MissingVariableError):
        return None


def _violated_at_initial(c: Program, tau: State, lhs: Quantity,
                         rhs: Quantity, dom: DomainSpec) -> Optional[bool]:
    """Is lhs ⪯ rhs violated at some initial state whose run can end in
    tau? None when execution cannot be traced within the widened box."""
    wdom = dom.widened(_FALLBACK_PAD)
    try:
        for sigma in wdom.states():
            if (not eval_quantity(lhs, sigma, wdom)
                    <= eval_quantity(rhs, sigma, wdom)
                    and tau in _finals_from(c, sigma, wdom,
                                            EscapePolicy.DROP)):
                return True
        return False
    except (FuelExhaustedError, IndeterminateFormError,
            MissingVariableError):
        return None


def check_galois(which: str, c: Program, f: Quantity, g: Quantity,
                 dom: DomainSpec) -> Verdict:
    """Biconditional agreement of the adjunction pairs: for ``wlp_sp``,
    g ⪯ wlp(c, f) iff sp(c, g) ⪯ f; for ``wp_slp``, wp(c, f) ⪯ g iff
    f ⪯ slp(c, g).

    The two orders quantify over different roles (initial versus final
    states), so on a finite box one side can fail while the matching
    witness for the other side sits just outside the box. When the box
    verdicts disagree, the witness implied by the adjunction is chased
    through execution: a failing initial state must produce a failing
    final state among its runs, and a failing final state must have a
    failing initial state in its fiber. Only a chase that comes up empty
    counts as a falsification."""
    if which == "wlp_sp":
        back = transform(Mode.WLP, c, f, _cfg(dom))
        forth = transform(Mode.SP, c, g, _cfg(dom))
        if not (back.trustworthy and forth.trustworthy):
            return Verdict.unknown("a transform was truncated")
        left = check_order(g, back.quantity, dom)
        right = check_order(forth.quantity, f, dom)
        fwd_lhs, fwd_rhs = forth.quantity, f
        bwd_lhs, bwd_rhs = g, back.quantity
    elif which == "wp_slp":
        back = transform(Mode.WP, c, f, _cfg(dom))
        forth = transform(Mode.SLP, c, g, _cfg(dom))
        if not (back.trustworthy and forth.trustworthy):
            return Verdict.unknown("a transform was truncated")
        left = check_order(back.quantity, g, dom)
        right = check_order(f, forth.quantity, dom)
        fwd_lhs, fwd_rhs = f, forth.quantity
        bwd_lhs, bwd_rhs = back.quantity, g
    else:
        raise ValueError("which must be 'wlp_sp' or 'wp_slp'")
    if left.is_unknown:
        return left
    if right.is_unknown:
        return right
    if left.status == right.status:
        return Verdict.holds(f"both sides {left.status}")
    if left.is_fails:
        chased = _violated_at_final(c, left.witness, fwd_lhs, fwd_rhs, dom)
        side = "final-state"
    else:
        chased = _violated_at_initial(c, right.witness, bwd_lhs, bwd_rhs, dom)
        side = "initial-state"
    if chased:
        return Verdict.holds(
            f"both sides fail; the {side} witness lies outside the box")
    failing = left if left.is_fails else right
    if chased is None:
        return Verdict.unknown(
            "box verdicts disagree and the witness chase could not trace"
            " execution in the widened box")
    side = "left" if left.is_fails else "right"
    return Verdict.fails(failing.witness, failing.lhs, failing.rhs,
                         note=f"adjunction sides disagree ({side} side fails)")


def load_triples(path: str | Path) -> list[Triple]:
    """Parse a triple file: one `kind; pre; program-file; post` per line,
    with blank lines and #-comments skipped.  Program paths are resolved
    relative to the triple file."""
    path = Path(path)
    out: list[Triple] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(";")]
        if len(parts) != 4:
            raise ValueError(
                f"{path}:{lineno}: expected 'kind; pre; program-file; post'")
        kind_text, pre_text, prog_name, post_text = parts
        try:
            kind = TripleKind(kind_text)
        except ValueError:
            names = ", ".join(k.value for k in TripleKind)
            raise ValueError(
                f"{path}:{lineno}: unknown kind {kind_text!r} "
                f"(one of: {names})") from None
        program = parse_program((path.parent / prog_name).read_text())
        out.append(Triple(kind, parse_quantity(pre_text), program,
                          parse_quantity(post_text)))
    return out
