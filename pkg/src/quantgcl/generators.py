"""Seeded random generators for programs, quantities, and predicates.

These feed the property suites and the randomized soundness tests. All
generation draws from an explicit ``random.Random``, so any run is
reproducible from its seed.

Generated programs are deliberately constrained so that the collecting
reference semantics can evaluate them exactly over a finite box:

* Assignments only shift a variable by a small constant (``x := x + k``
  with ``|k| <= 3``). Arbitrary right-hand sides would give forward
  transformers fibers with unbounded suprema over the integers, which no
  finite box can reproduce.
* Every variable carries a cumulative shift budget (``SHIFT_BUDGET``).
  The sum of ``|k|`` over all assignments to a variable never exceeds
  it, so any run started in the domain box stays inside the box widened
  by ``ORACLE_PAD``, and every initial state that can reach a box state
  lies inside that widened box as well.
* Loops test a bounded band (``lo < v < hi`` with ``-3 <= lo < hi <= 3``)
  and step the tested variable monotonically through it, so iteration
  counts are bounded by the band width and side-variable drift stays
  within ``ORACLE_PAD``.

Quantities are quantifier-free and built in two strata: a finite-valued
stratum closed under addition and scaling, and a general stratum that
adds Iverson brackets but only ever combines them with min and max.
Sums of opposite infinities therefore never arise during evaluation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .lattice import NEG_INF, POS_INF, ExtReal
from .syntax import (
    AExpr,
    Add,
    And,
    Arith,
    Assign,
    BExpr,
    BoolLit,
    Choice,
    Cmp,
    Const,
    Diverge,
    DomainSpec,
    If,
    IntLit,
    Iverson,
    Mul,
    Not,
    Or,
    Program,
    QAdd,
    QMax,
    QMin,
    QNeg,
    QScale,
    Quantity,
    Seq,
    Skip,
    Sub,
    Var,
    While,
)

__all__ = [
    "GenConfig",
    "ORACLE_PAD",
    "SHIFT_BUDGET",
    "domain_for",
    "gen_bounded_loop",
    "gen_finite_quantity",
    "gen_guard",
    "gen_loop_free",
    "gen_predicate",
    "gen_quantity",
    "gen_vars",
]

VAR_POOL = ("x", "y", "z")

# Cumulative |shift| allowed per variable in one program. With the box at
# -4..4 this keeps every relevant run inside the box widened by ORACLE_PAD
# and every quantifier witness inside the -12..12 evaluation window.
SHIFT_BUDGET = 4

# How much to widen the domain box when evaluating the reference
# transformers on a generated program. Covers the shift budget plus loop
# band overshoot with slack.
ORACLE_PAD = 8

SCALE_FACTORS = (Fraction(0), Fraction(1), Fraction(2), Fraction(1, 2))


@dataclass(frozen=True)
class GenConfig:
    """Knobs for the program and quantity generators."""

    max_vars: int = 3
    depth: int = 4
    box: tuple[int, int] = (-4, 4)
    window: tuple[int, int] = (-12, 12)
    fuel: int = 64
    allow_choice: bool = True
    allow_diverge: bool = True


def gen_vars(rng: random.Random, cfg: GenConfig) -> tuple[str, ...]:
    """Pick how many variables the instance uses; small counts dominate
    so the reference enumeration stays cheap."""
    weights = [3, 3, 1][: cfg.max_vars]
    n = rng.choices(range(1, cfg.max_vars + 1), weights=weights)[0]
    return VAR_POOL[:n]


def domain_for(variables: tuple[str, ...], cfg: GenConfig) -> DomainSpec:
    return DomainSpec.of(
        {v: cfg.box for v in variables},
        alpha_window=cfg.window,
        fuel=cfg.fuel,
    )


# ---------------------------------------------------------------------------
# Programs
# ---------------------------------------------------------------------------


def _shift(var: str, k: int) -> AExpr:
    if k >= 0:
        return Add(Var(var), IntLit(k))
    return Sub(Var(var), IntLit(-k))


def _gen_assign(rng: random.Random, variables: tuple[str, ...],
                budget: dict[str, int]) -> Program:
    open_vars = [v for v in variables if budget[v] > 0]
    if not open_vars:
        return Skip()
    var = rng.choice(open_vars)
    k = rng.randint(1, min(3, budget[var])) * rng.choice((-1, 1))
    budget[var] -= abs(k)
    return Assign(var, _shift(var, k))


def gen_guard(rng: random.Random, variables: tuple[str, ...],
              depth: int = 1) -> BExpr:
    """A boolean test over the given variables with constant offsets of
    at most 3, so guards split the domain box nontrivially."""
    if depth > 0 and rng.random() < 0.3:
        kind = rng.randrange(3)
        if kind == 0:
            return And(gen_guard(rng, variables, depth - 1),
                       gen_guard(rng, variables, depth - 1))
        if kind == 1:
            return Or(gen_guard(rng, variables, depth - 1),
                      gen_guard(rng, variables, depth - 1))
        return Not(gen_guard(rng, variables, depth - 1))
    if rng.random() < 0.05:
        return BoolLit(rng.random() < 0.5)
    op = rng.choice(("<", "<=", "=", "!=", ">=", ">"))
    left = Var(rng.choice(variables))
    if len(variables) > 1 and rng.random() < 0.4:
        other = rng.choice([v for v in variables if v != left.name])
        right: AExpr = _shift(other, rng.randint(-3, 3))
    else:
        right = IntLit(rng.randint(-3, 3))
    return Cmp(left, op, right)


def gen_loop_free(rng: random.Random, variables: tuple[str, ...],
                  cfg: GenConfig,
                  budget: dict[str, int] | None = None,
                  depth: int | None = None) -> Program:
    """A loop-free program over ``variables`` whose assignments respect
    the per-variable shift budget."""
    if budget is None:
        budget = {v: SHIFT_BUDGET for v in variables}
    if depth is None:
        depth = cfg.depth
    if depth <= 0:
        roll = rng.random()
        if roll < 0.70:
            return _gen_assign(rng, variables, budget)
        if roll < 0.90 or not cfg.allow_diverge:
            return Skip()
        return Diverge()
    roll = rng.random()
    if roll < 0.40:
        return Seq(gen_loop_free(rng, variables, cfg, budget, depth - 1),
                   gen_loop_free(rng, variables, cfg, budget, depth - 1))
    if roll < 0.60:
        return If(gen_guard(rng, variables),
                  gen_loop_free(rng, variables, cfg, budget, depth - 1),
                  gen_loop_free(rng, variables, cfg, budget, depth - 1))
    if roll < 0.75 and cfg.allow_choice:
        return Choice(gen_loop_free(rng, variables, cfg, budget, depth - 1),
                      gen_loop_free(rng, variables, cfg, budget, depth - 1))
    return gen_loop_free(rng, variables, cfg, budget, depth=0)


def gen_bounded_loop(rng: random.Random, cfg: GenConfig
                     ) -> tuple[Program, tuple[str, ...]]:
    """A terminating loop: the guard confines one variable to a band of
    width at most 6 inside the box and the body steps it monotonically,
    so the loop runs at most 6 iterations from any integer state.

    Side effects on a second variable use a fixed direction, keeping
    runs monotone and inside the widened box. Returns the program and
    the variables it ranges over.
    """
    variables = gen_vars(rng, cfg)
    main = rng.choice(variables)
    if rng.random() < 0.7:
        # One step crosses the whole band, so the loop body runs at most
        # once from any state and the iteration sequence closes quickly.
        width = rng.randint(1, 3)
        lo = rng.randint(-3, 3 - width)
        hi = lo + width
        step = rng.randint(width, 3) * rng.choice((-1, 1))
    else:
        # A gradual walk through the band; its unrolling typically has
        # no closed form, so these exercise honest truncation.
        lo = rng.randint(-3, 0)
        hi = rng.randint(lo + 2, 3)
        step = rng.randint(1, max(1, (hi - lo) // 2)) * rng.choice((-1, 1))
    guard = And(Cmp(IntLit(lo), "<", Var(main)), Cmp(Var(main), "<", IntLit(hi)))
    body: Program = Assign(main, _shift(main, step))
    side_vars = [v for v in variables if v != main]
    if side_vars and rng.random() < 0.6:
        side = rng.choice(side_vars)
        drift = Assign(side, _shift(side, rng.choice((-1, 1))))
        body = Seq(drift, body) if rng.random() < 0.5 else Seq(body, drift)
    loop: Program = While(guard, body)
    if rng.random() < 0.4:
        budget = {v: SHIFT_BUDGET for v in variables}
        loop = Seq(_gen_assign(rng, variables, budget), loop)
    return loop, variables


# ---------------------------------------------------------------------------
# Quantities
# ---------------------------------------------------------------------------


def _gen_linear(rng: random.Random, variables: tuple[str, ...]) -> AExpr:
    v = Var(rng.choice(variables))
    roll = rng.random()
    if roll < 0.4:
        return v
    if roll < 0.8:
        return _shift(v.name, rng.randint(-3, 3))
    w = Var(rng.choice(variables))
    return Add(v, w)


def _as_aexpr(q: Quantity) -> AExpr | None:
    """The arithmetic payload of a quantity living entirely in the
    arithmetic layer: an embedded expression or an integral constant."""
    if isinstance(q, Arith):
        return q.expr
    if isinstance(q, Const) and q.value.is_finite \
            and q.value.finite.denominator == 1:
        return IntLit(int(q.value.finite))
    return None


def gen_finite_quantity(rng: random.Random, variables: tuple[str, ...],
                        depth: int = 3) -> Quantity:
    """A quantity that evaluates to a finite value on every state, so it
    can appear under addition and scaling without risking a sum of
    opposite infinities.

    Addition, integral scaling and negation over purely arithmetic
    operands are built inside the arithmetic layer; the quantity-level
    forms of those operators would print identically and reparse into
    the arithmetic layer, breaking the printed round trip.
    """
    if depth <= 0 or rng.random() < 0.3:
        if rng.random() < 0.3:
            return Const(ExtReal(rng.randint(-3, 3)))
        return Arith(_gen_linear(rng, variables))
    kind = rng.randrange(5)
    if kind == 0:
        return QMin(gen_finite_quantity(rng, variables, depth - 1),
                    gen_finite_quantity(rng, variables, depth - 1))
    if kind == 1:
        return QMax(gen_finite_quantity(rng, variables, depth - 1),
                    gen_finite_quantity(rng, variables, depth - 1))
    if kind == 2:
        a = gen_finite_quantity(rng, variables, depth - 1)
        b = gen_finite_quantity(rng, variables, depth - 1)
        ea, eb = _as_aexpr(a), _as_aexpr(b)
        if ea is not None and eb is not None:
            return Arith(Add(ea, eb))
        return QAdd(a, b)
    if kind == 3:
        factor = rng.choice(SCALE_FACTORS)
        a = gen_finite_quantity(rng, variables, depth - 1)
        ea = _as_aexpr(a)
        if ea is not None and factor.denominator == 1:
            return Arith(Mul(int(factor), ea))
        return QScale(factor, a)
    a = gen_finite_quantity(rng, variables, depth - 1)
    ea = _as_aexpr(a)
    if ea is not None:
        return Arith(Mul(-1, ea))
    return QNeg(a)


def gen_quantity(rng: random.Random, variables: tuple[str, ...],
                 depth: int = 3) -> Quantity:
    """A general quantity: the finite stratum extended with Iverson
    brackets and infinite constants, combined only by min and max."""
    roll = rng.random()
    if roll < 0.25:
        return Iverson(gen_guard(rng, variables))
    if roll < 0.30:
        return Const(POS_INF if rng.random() < 0.5 else NEG_INF)
    if roll < 0.55 or depth <= 0:
        return gen_finite_quantity(rng, variables, depth)
    if rng.random() < 0.5:
        return QMin(gen_quantity(rng, variables, depth - 1),
                    gen_quantity(rng, variables, depth - 1))
    return QMax(gen_quantity(rng, variables, depth - 1),
                gen_quantity(rng, variables, depth - 1))


def gen_predicate(rng: random.Random, variables: tuple[str, ...]) -> BExpr:
    """A predicate for the embedding checks; just a guard with a little
    extra structure."""
    return gen_guard(rng, variables, depth=2)
