"""Symbolic backward (wp/wlp) and forward (sp/slp) quantity transformers.

Each mode is a structural recursion over the program; loops run a Kleene
iteration of the mode's characteristic function, starting from -inf for the
least-fixpoint modes (wp, sp) and +inf for the greatest-fixpoint modes
(wlp, slp).  Convergence of the iteration is declared only when consecutive
iterates are structurally equal after normalization AND evaluate equally on
every state of a finite probe domain; the second check is deliberately
redundant (structural equality implies semantic equality) and exists to
surface normalizer bugs rather than silently absorb them.

When the fuel runs out first, the last iterate is still reported, tagged
with its bound direction: ascending chains (wp, sp) give lower bounds,
descending chains (wlp, slp) upper bounds.  A truncated nested loop makes
every enclosing result truncated as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .lattice import NEG_INF, POS_INF
from .simplify import collapse_guards, simplify
from .syntax import (
    Assign, BExpr, Choice, Cmp, Const, Diverge, DomainSpec, If, Inf, Iverson,
    Not, Program, QMax, QMin, Quantity, Seq, Skip, Sup, Var, While,
    bound_vars, eval_quantity, fresh_var, fv_aexpr, fv_quantity,
    program_vars, quantities_equal, subst_aexpr, subst_quantity,
)


class Mode(Enum):
    WP = "wp"
    WLP = "wlp"
    SP = "sp"
    SLP = "slp"

    @property
    def forward(self) -> bool:
        return self in (Mode.SP, Mode.SLP)

    @property
    def liberal(self) -> bool:
        """Liberal modes value nontermination/unreachability at +inf and
        iterate downward from it."""
        return self in (Mode.WLP, Mode.SLP)

    @property
    def bound_direction(self) -> str:
        return "upper" if self.liberal else "lower"


@dataclass(frozen=True)
class Exact:
    def __str__(self) -> str:
        return "exact"


@dataclass(frozen=True)
class ConvergedAt:
    iteration: int

    def __str__(self) -> str:
        return f"converged at {self.iteration} iterations"


@dataclass(frozen=True)
class TruncatedAt:
    fuel: int
    bound: str  # "lower" | "upper"

    def __str__(self) -> str:
        return f"truncated at {self.fuel} iterations, {self.bound} bound"


Status = Union[Exact, ConvergedAt, TruncatedAt]


@dataclass(frozen=True)
class AnalysisResult:
    quantity: Quantity
    status: Status

    @property
    def trustworthy(self) -> bool:
        """True when the quantity is the transformer's exact value rather
        than a fuel-limited bound."""
        return not isinstance(self.status, TruncatedAt)


@dataclass(frozen=True)
class TransformConfig:
    fuel: int = 64
    probe: Optional[DomainSpec] = None

    def probe_for(self, c: Program, f: Quantity) -> DomainSpec:
        if self.probe is not None:
            return self.probe
        names = sorted(program_vars(c) | fv_quantity(f))
        return DomainSpec.of({n: (-4, 4) for n in names})


def _merge(a: Status, b: Status) -> Status:
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


def _neg_guard(b: BExpr) -> BExpr:
    return Not(b)


def _iverson(b: BExpr) -> Quantity:
    return Iverson(b)


def iverson_embed(b: BExpr) -> Quantity:
    """Lift a predicate to the quantity taking +inf where it holds and -inf
    where it does not."""
    return Iverson(b)


def _fresh_binder(f: Quantity, assign: Assign) -> str:
    avoid = (fv_quantity(f) | bound_vars(f) | fv_aexpr(assign.expr)
             | {assign.var})
    return fresh_var(avoid)


def _iterates_equal(cur: Quantity, prev: Quantity, probe: DomainSpec) -> bool:
    if not quantities_equal(cur, prev):
        return False
    for sigma in probe.states():
        if eval_quantity(cur, sigma, probe) != eval_quantity(prev, sigma, probe):
            return False
    return True


def _char(mode: Mode, guard: BExpr, body: Program, f: Quantity, x: Quantity,
          cfg: TransformConfig) -> tuple[Quantity, Status]:
    if mode in (Mode.WP, Mode.WLP):
        inner, st = _transform(mode, body, x, cfg)
        q = QMax(QMin(_iverson(_neg_guard(guard)), f),
                 QMin(_iverson(guard), inner))
        return simplify(q), st
    if mode is Mode.SP:
        arg = simplify(QMin(_iverson(guard), x))
        inner, st = _transform(mode, body, arg, cfg)
        return simplify(QMax(f, inner)), st
    arg = simplify(QMax(_iverson(_neg_guard(guard)), x))
    inner, st = _transform(Mode.SLP, body, arg, cfg)
    return simplify(QMin(f, inner)), st


def char_step(mode: Mode, guard: BExpr, body: Program, f: Quantity,
              x: Quantity, cfg: Optional[TransformConfig] = None) -> Quantity:
    """One application of the loop's characteristic function for the mode."""
    q, _ = _char(mode, guard, body, simplify(f), simplify(x),
                 cfg or TransformConfig())
    return q


def _loop(mode: Mode, loop: While, f: Quantity, cfg: TransformConfig
          ) -> tuple[Quantity, Status]:
    probe = cfg.probe_for(loop, f)
    prev: Quantity = Const(POS_INF if mode.liberal else NEG_INF)
    status: Status = Exact()
    truncated = False
    fixpoint = prev
    for n in range(1, cfg.fuel + 1):
        cur, inner_status = _char(mode, loop.cond, loop.body, f, prev, cfg)
        # Unrolling stacks guarded branches; resolving brackets against
        # the enclosing min/max layers is what lets consecutive iterates
        # close up to a common form.
        cur = collapse_guards(cur)
        status = _merge(status, inner_status)
        if isinstance(status, TruncatedAt):
            # a fuel-limited iterate is only a bound; stop looking for a
            # fixpoint of bounds
            fixpoint = cur
            truncated = True
            break
        if _iterates_equal(cur, prev, probe):
            fixpoint = cur
            status = _merge(status, ConvergedAt(n))
            break
        prev = cur
    else:
        fixpoint = prev
        truncated = True
    if truncated:
        status = TruncatedAt(cfg.fuel, mode.bound_direction)
    return fixpoint, status


def _transform(mode: Mode, c: Program, f: Quantity, cfg: TransformConfig
               ) -> tuple[Quantity, Status]:
    if isinstance(c, Skip):
        return f, Exact()
    if isinstance(c, Diverge):
        return Const(POS_INF if mode.liberal else NEG_INF), Exact()
    if isinstance(c, Assign):
        if not mode.forward:
            return simplify(subst_quantity(f, c.var, c.expr)), Exact()
        alpha = _fresh_binder(f, c)
        e_alpha = subst_aexpr(c.expr, c.var, Var(alpha))
        f_alpha = subst_quantity(f, c.var, Var(alpha))
        if mode is Mode.SP:
            q = Sup(alpha, QMin(_iverson(Cmp(Var(c.var), "=", e_alpha)),
                                f_alpha))
        else:
            q = Inf(alpha, QMax(_iverson(Cmp(Var(c.var), "!=", e_alpha)),
                                f_alpha))
        return simplify(q), Exact()
    if isinstance(c, Seq):
        first, second = (c.first, c.second)
        if mode.forward:
            mid, st1 = _transform(mode, first, f, cfg)
            out, st2 = _transform(mode, second, mid, cfg)
        else:
            mid, st1 = _transform(mode, second, f, cfg)
            out, st2 = _transform(mode, first, mid, cfg)
        return out, _merge(st1, st2)
    if isinstance(c, Choice):
        left, st1 = _transform(mode, c.left, f, cfg)
        right, st2 = _transform(mode, c.right, f, cfg)
        ctor = QMin if mode.liberal else QMax
        return simplify(ctor(left, right)), _merge(st1, st2)
    if isinstance(c, If):
        if not mode.forward:
            then_q, st1 = _transform(mode, c.then, f, cfg)
            else_q, st2 = _transform(mode, c.orelse, f, cfg)
            q = QMax(QMin(_iverson(c.cond), then_q),
                     QMin(_iverson(_neg_guard(c.cond)), else_q))
            return simplify(q), _merge(st1, st2)
        if mode is Mode.SP:
            then_q, st1 = _transform(
                mode, c.then, simplify(QMin(_iverson(c.cond), f)), cfg)
            else_q, st2 = _transform(
                mode, c.orelse,
                simplify(QMin(_iverson(_neg_guard(c.cond)), f)), cfg)
            return simplify(QMax(then_q, else_q)), _merge(st1, st2)
        then_q, st1 = _transform(
            mode, c.then, simplify(QMax(_iverson(_neg_guard(c.cond)), f)), cfg)
        else_q, st2 = _transform(
            mode, c.orelse, simplify(QMax(_iverson(c.cond), f)), cfg)
        return simplify(QMin(then_q, else_q)), _merge(st1, st2)
    if isinstance(c, While):
        fix, status = _loop(mode, c, f, cfg)
        if mode is Mode.SP:
            return simplify(QMin(_iverson(_neg_guard(c.cond)), fix)), status
        if mode is Mode.SLP:
            return simplify(QMax(_iverson(c.cond), fix)), status
        return fix, status
    raise TypeError(f"not a program: {c!r}")


def transform(mode: Mode, c: Program, f: Quantity,
              cfg: Optional[TransformConfig] = None) -> AnalysisResult:
    """Apply the mode's transformer to program ``c`` and quantity ``f``."""
    cfg = cfg or TransformConfig()
    q, status = _transform(mode, c, simplify(f), cfg)
    return AnalysisResult(q, status)
