"""Brute-force reference semantics over finite state boxes.

``collect`` runs a program on a *set* of states and returns the set of
reachable final states (the collecting semantics): assignments map states
pointwise, branching unions both arms, conditionals split on the guard, and
loops iterate ``X ↦ S ∪ step(body, guard-filtered X)`` from the empty set
until the set stabilizes, then keep the states falsifying the guard.
Divergence contributes no final states.

Escape handling: when an assignment produces a value outside the domain's
interval for that variable, the ``error`` policy raises
:class:`DomainEscapeError` and the ``drop`` policy silently discards that
state (treating it as divergence, which under-approximates the true final
set).  Loop iteration that fails to stabilize within the domain's fuel
raises :class:`FuelExhaustedError`.

The four reference transformers fold a quantity over runs:

* ``ref_wp(c, f, σ)``  = join of f(τ) over τ in collect(c, {σ}); -inf if none.
* ``ref_wlp(c, f, σ)`` = meet of the same; +inf if none.
* ``ref_sp(c, f, τ)``  = join of f(σ) over candidate initial states σ in the
  domain box with τ in collect(c, {σ}); -inf if none.
* ``ref_slp(c, f, τ)`` = meet of the same; +inf if none.

The forward references enumerate initial candidates over the domain box
only; fibers of programs whose terminating runs start outside every finite
box are inherently truncated, so callers choose boxes wide enough for the
programs they test (see the generator's shift bounds).
"""

from __future__ import annotations

from enum import Enum
from functools import lru_cache

from .lattice import ExtReal, NEG_INF, POS_INF, join_all, meet_all
from .syntax import (
    Assign, Choice, Diverge, DomainSpec, If, Not, Program, Quantity, Seq,
    Skip, State, While, eval_aexpr, eval_bexpr, eval_quantity, BExpr,
)

Config = frozenset[State]


class EscapePolicy(Enum):
    ERROR = "error"
    DROP = "drop"


class DomainEscapeError(Exception):
    def __init__(self, var: str, value: int, interval: tuple[int, int]):
        lo, hi = interval
        super().__init__(
            f"assignment drove {var} to {value}, outside {lo}..{hi}")
        self.var = var
        self.value = value
        self.interval = interval


class FuelExhaustedError(Exception):
    def __init__(self, fuel: int):
        super().__init__(f"loop did not stabilize within fuel {fuel}")
        self.fuel = fuel


def filter_config(b: BExpr, states: Config) -> Config:
    """Keep the states satisfying the guard."""
    return frozenset(s for s in states if eval_bexpr(b, s))


def collect(c: Program, states: Config, dom: DomainSpec,
            policy: EscapePolicy = EscapePolicy.ERROR) -> Config:
    if isinstance(c, Skip):
        return states
    if isinstance(c, Diverge):
        return frozenset()
    if isinstance(c, Assign):
        out = set()
        for s in states:
            v = eval_aexpr(c.expr, s)
            if not dom.contains(c.var, v):
                if policy is EscapePolicy.ERROR:
                    raise DomainEscapeError(c.var, v, dom.interval(c.var))
                continue
            out.add(s.set(c.var, v))
        return frozenset(out)
    if isinstance(c, Seq):
        return collect(c.second, collect(c.first, states, dom, policy),
                       dom, policy)
    if isinstance(c, Choice):
        return (collect(c.left, states, dom, policy)
                | collect(c.right, states, dom, policy))
    if isinstance(c, If):
        yes = collect(c.then, filter_config(c.cond, states), dom, policy)
        no = collect(c.orelse, filter_config(Not(c.cond), states), dom, policy)
        return yes | no
    if isinstance(c, While):
        reached: Config = frozenset()
        for _ in range(dom.fuel):
            stepped = collect(c.body, filter_config(c.cond, reached), dom, policy)
            nxt = states | stepped
            if nxt == reached:
                return frozenset(s for s in reached if not eval_bexpr(c.cond, s))
            reached = nxt
        # one more check: the last expansion may already be stable
        stepped = collect(c.body, filter_config(c.cond, reached), dom, policy)
        if states | stepped == reached:
            return frozenset(s for s in reached if not eval_bexpr(c.cond, s))
        raise FuelExhaustedError(dom.fuel)
    raise TypeError(f"not a program: {c!r}")


@lru_cache(maxsize=1 << 14)
def _finals_from(c: Program, sigma: State, dom: DomainSpec,
                 policy: EscapePolicy) -> Config:
    """Final states of runs from one initial state; cached because the
    randomized suites query the same start repeatedly with different
    quantities."""
    return collect(c, frozenset({sigma}), dom, policy)


def ref_wp(c: Program, f: Quantity, sigma: State, dom: DomainSpec,
           policy: EscapePolicy = EscapePolicy.ERROR) -> ExtReal:
    finals = _finals_from(c, sigma, dom, policy)
    return join_all(eval_quantity(f, t, dom) for t in finals)


def ref_wlp(c: Program, f: Quantity, sigma: State, dom: DomainSpec,
            policy: EscapePolicy = EscapePolicy.ERROR) -> ExtReal:
    finals = _finals_from(c, sigma, dom, policy)
    return meet_all(eval_quantity(f, t, dom) for t in finals)


@lru_cache(maxsize=256)
def _fibers(c: Program, dom: DomainSpec, policy: EscapePolicy
            ) -> dict[State, frozenset[State]]:
    """Map each final state to the set of domain-box initial states that can
    reach it."""
    acc: dict[State, set[State]] = {}
    for sigma in dom.states():
        for tau in collect(c, frozenset({sigma}), dom, policy):
            acc.setdefault(tau, set()).add(sigma)
    return {t: frozenset(ss) for t, ss in acc.items()}


def ref_sp(c: Program, f: Quantity, tau: State, dom: DomainSpec,
           policy: EscapePolicy = EscapePolicy.ERROR) -> ExtReal:
    fiber = _fibers(c, dom, policy).get(tau, frozenset())
    return join_all(eval_quantity(f, s, dom) for s in fiber)


def ref_slp(c: Program, f: Quantity, tau: State, dom: DomainSpec,
            policy: EscapePolicy = EscapePolicy.ERROR) -> ExtReal:
    fiber = _fibers(c, dom, policy).get(tau, frozenset())
    return meet_all(eval_quantity(f, s, dom) for s in fiber)


def reachable_from_box(c: Program, dom: DomainSpec,
                       policy: EscapePolicy = EscapePolicy.ERROR) -> Config:
    """All final states of runs starting anywhere in the domain box."""
    return collect(c, frozenset(dom.states()), dom, policy)
