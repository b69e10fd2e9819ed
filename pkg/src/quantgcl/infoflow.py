"""Reachability and information-flow analyses built on the forward
transformers.

``reachable_states`` characterizes the final states a program can reach as
the +inf set of sp applied to the everywhere-+inf quantity.  ``leak`` tracks
a secret variable's initial value: for each value the observable variable
can end with, slp and sp of the secret's prequantity bound the initial
secrets compatible with that observation from below and above.  Both return
domain-relative answers; intervals are truncated to the domain box, which
the report records so that endpoint artifacts stay interpretable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .lattice import ExtReal, NEG_INF, POS_INF, join, meet
from .oracle import EscapePolicy, FuelExhaustedError, reachable_from_box
from .proofs import InternalSoundnessError
from .syntax import (
    Arith, BoolLit, DomainSpec, Iverson, Program, State, Var, eval_quantity,
    program_vars,
)
from .transformers import Mode, Status, TransformConfig, transform


@dataclass(frozen=True)
class ReachableStates:
    states: frozenset[State]
    status: Status

    @property
    def trustworthy(self) -> bool:
        """False when sp was fuel-truncated: the set is then only a sound
        under-approximation of the reachable states."""
        from .transformers import TruncatedAt
        return not isinstance(self.status, TruncatedAt)

    def __contains__(self, tau: State) -> bool:
        return tau in self.states


def _cfg(dom: DomainSpec) -> TransformConfig:
    return TransformConfig(fuel=dom.fuel, probe=dom)


def reachable_states(c: Program, dom: DomainSpec) -> ReachableStates:
    """Final states in the domain box that some run can reach, read off the
    +inf set of sp(c, [true]); cross-checked against the collecting
    semantics, which must not find a reachable state sp missed."""
    res = transform(Mode.SP, c, Iverson(BoolLit(True)), _cfg(dom))
    hit = frozenset(tau for tau in dom.states()
                    if eval_quantity(res.quantity, tau, dom) == POS_INF)
    out = ReachableStates(hit, res.status)
    if out.trustworthy:
        try:
            found = reachable_from_box(c, dom, EscapePolicy.DROP)
        except FuelExhaustedError:
            found = None
        if found is not None and not found <= hit:
            missing = next(iter(found - hit))
            raise InternalSoundnessError(
                f"collecting semantics reaches {missing} but sp says "
                f"unreachable")
    return out


@dataclass(frozen=True)
class LeakEntry:
    status: str  # "unreachable" | "interval" | "unknown"
    lower: Optional[ExtReal] = None
    upper: Optional[ExtReal] = None

    def __str__(self) -> str:
        if self.status == "interval":
            return f"[{self.lower}, {self.upper}]"
        return self.status


@dataclass
class LeakReport:
    secret: str
    observable: str
    domain: DomainSpec
    entries: dict[int, LeakEntry]
    sp_status: Status
    slp_status: Status

    @property
    def trustworthy(self) -> bool:
        from .transformers import TruncatedAt
        return not (isinstance(self.sp_status, TruncatedAt)
                    or isinstance(self.slp_status, TruncatedAt))


def leak(c: Program, secret: str, observable: str, dom: DomainSpec
         ) -> LeakReport:
    """Per final value of ``observable``, the interval of initial values of
    ``secret`` compatible with observing it: lower endpoint from slp, upper
    from sp, aggregated over all domain final states showing that value."""
    names = program_vars(c) | {secret, observable}
    missing = [n for n in sorted(names) if n not in dict(dom.intervals)]
    if missing:
        raise ValueError(f"domain lacks intervals for: {', '.join(missing)}")
    query = Arith(Var(secret))
    sp_res = transform(Mode.SP, c, query, _cfg(dom))
    slp_res = transform(Mode.SLP, c, query, _cfg(dom))

    lo, hi = dict(dom.intervals)[observable]
    if not (sp_res.trustworthy and slp_res.trustworthy):
        entries = {v: LeakEntry("unknown") for v in range(lo, hi + 1)}
        return LeakReport(secret, observable, dom, entries,
                          sp_res.status, slp_res.status)

    lowers = {v: POS_INF for v in range(lo, hi + 1)}
    uppers = {v: NEG_INF for v in range(lo, hi + 1)}
    for tau in dom.states():
        sval = eval_quantity(sp_res.quantity, tau, dom)
        lval = eval_quantity(slp_res.quantity, tau, dom)
        if (sval == NEG_INF) != (lval == POS_INF):
            raise InternalSoundnessError(
                f"sp/slp reachability disagree at {tau}: sp={sval}, "
                f"slp={lval}")
        if sval != NEG_INF and not lval <= sval:
            raise InternalSoundnessError(
                f"leak interval inverted at {tau}: slp={lval} > sp={sval}")
        v = tau[observable]
        uppers[v] = join(uppers[v], sval)
        lowers[v] = meet(lowers[v], lval)

    entries: dict[int, LeakEntry] = {}
    for v in range(lo, hi + 1):
        if uppers[v] == NEG_INF:
            entries[v] = LeakEntry("unreachable")
        else:
            entries[v] = LeakEntry("interval", lowers[v], uppers[v])
    return LeakReport(secret, observable, dom, entries,
                      sp_res.status, slp_res.status)


def _collapse_runs(values: list[int]) -> str:
    runs: list[str] = []
    start = prev = values[0]
    for v in values[1:] + [None]:
        if v is not None and v == prev + 1:
            prev = v
            continue
        runs.append(str(start) if start == prev else f"{start}..{prev}")
        if v is not None:
            start = prev = v
    return ", ".join(runs)


def leak_report_text(report: LeakReport) -> str:
    """Human-readable report; consecutive same-status non-interval values
    are collapsed into ranges."""
    lines = [f"leak of secret '{report.secret}' via observable "
             f"'{report.observable}'  (domain: {report.domain})"]
    pending: dict[str, list[int]] = {}
    for v in sorted(report.entries):
        e = report.entries[v]
        if e.status == "interval":
            lines.append(f"  {report.observable} = {v}: {report.secret} "
                         f"in [{e.lower}, {e.upper}]")
        else:
            pending.setdefault(e.status, []).append(v)
    for status in sorted(pending):
        lines.append(f"  {report.observable} = "
                     f"{_collapse_runs(pending[status])}: {status}")
    return "\n".join(lines)


def leak_report_table(report: LeakReport) -> str:
    """Machine-readable table: one `value, status, lower, upper` line per
    observable value."""
    lines = ["value, status, lower, upper"]
    for v in sorted(report.entries):
        e = report.entries[v]
        lo = str(e.lower) if e.lower is not None else ""
        hi = str(e.upper) if e.upper is not None else ""
        lines.append(f"{v}, {e.status}, {lo}, {hi}")
    return "\n".join(lines)
