"""ASTs and core operations for guarded commands and quantities.

Three expression layers share a variable namespace:

* arithmetic expressions over integer-valued program variables (literals,
  variables, sums, differences, products by an integer constant, euclidean
  remainder by a positive constant);
* boolean guards (comparisons, conjunction, disjunction, negation, literals);
* quantities: maps from states to exact extended reals, built from
  extended-real constants, embedded arithmetic, indicator brackets ``[b]``
  (+inf where the guard holds, -inf elsewhere), pointwise min/max, addition,
  scaling by a nonnegative rational, negation, and Sup/Inf binders over an
  integer-valued bound variable.

States are immutable finite maps from variable names to integers.  A
DomainSpec fixes a finite box of states (one closed interval per variable),
the evaluation window for Sup/Inf binders, and an iteration fuel; quantity
evaluation is total on that data except for ``+inf + -inf``, which raises.

Bound variables are kept distinct from program variables and from enclosing
binders by construction (parsing and the transformer rules allocate binder
names with :func:`fresh_var`), so substitution never needs on-the-fly
renaming; it simply stops at a shadowing binder, which well-formed input
never contains.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterator, Mapping, Optional, Union

from .lattice import ExtReal, NEG_INF, POS_INF, Rational, join, meet

VAR_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")

RESERVED_WORDS = frozenset(
    {"skip", "diverge", "if", "else", "while", "true", "false",
     "min", "max", "Sup", "Inf", "inf"}
)


def is_valid_var(name: str) -> bool:
    return bool(VAR_RE.match(name)) and name not in RESERVED_WORDS


def fresh_var(avoid: frozenset[str] | set[str]) -> str:
    """First name of the form alpha0, alpha1, ... not in ``avoid``."""
    i = 0
    while f"alpha{i}" in avoid:
        i += 1
    return f"alpha{i}"


# ---------------------------------------------------------------------------
# Arithmetic expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Add:
    left: "AExpr"
    right: "AExpr"


@dataclass(frozen=True)
class Sub:
    left: "AExpr"
    right: "AExpr"


@dataclass(frozen=True)
class Mul:
    """Product by an integer constant (general products are not closed)."""

    coeff: int
    arg: "AExpr"


@dataclass(frozen=True)
class Mod:
    """Euclidean remainder by a positive constant: result in [0, modulus)."""

    arg: "AExpr"
    modulus: int

    def __post_init__(self):
        if self.modulus <= 0:
            raise ValueError("modulus must be positive")


AExpr = Union[IntLit, Var, Add, Sub, Mul, Mod]


# ---------------------------------------------------------------------------
# Boolean guards
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoolLit:
    value: bool


CMP_OPS = ("<", "<=", "=", "!=", ">=", ">")


@dataclass(frozen=True)
class Cmp:
    left: AExpr
    op: str
    right: AExpr

    def __post_init__(self):
        if self.op not in CMP_OPS:
            raise ValueError(f"bad comparison operator {self.op!r}")


@dataclass(frozen=True)
class And:
    left: "BExpr"
    right: "BExpr"


@dataclass(frozen=True)
class Or:
    left: "BExpr"
    right: "BExpr"


@dataclass(frozen=True)
class Not:
    arg: "BExpr"


BExpr = Union[BoolLit, Cmp, And, Or, Not]


# ---------------------------------------------------------------------------
# Programs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Diverge:
    pass


@dataclass(frozen=True)
class Assign:
    var: str
    expr: AExpr


@dataclass(frozen=True)
class Seq:
    first: "Program"
    second: "Program"


@dataclass(frozen=True)
class Choice:
    """Nondeterministic branching: either side may run."""

    left: "Program"
    right: "Program"


@dataclass(frozen=True)
class If:
    cond: BExpr
    then: "Program"
    orelse: "Program"


@dataclass(frozen=True)
class While:
    cond: BExpr
    body: "Program"


Program = Union[Skip, Diverge, Assign, Seq, Choice, If, While]


# ---------------------------------------------------------------------------
# Quantities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: ExtReal


@dataclass(frozen=True)
class Arith:
    expr: AExpr


@dataclass(frozen=True)
class Iverson:
    cond: BExpr


@dataclass(frozen=True)
class QMin:
    left: "Quantity"
    right: "Quantity"


@dataclass(frozen=True)
class QMax:
    left: "Quantity"
    right: "Quantity"


@dataclass(frozen=True)
class QAdd:
    left: "Quantity"
    right: "Quantity"


@dataclass(frozen=True)
class QScale:
    factor: Fraction
    arg: "Quantity"

    def __post_init__(self):
        if self.factor < 0:
            raise ValueError("scale factor must be nonnegative")


@dataclass(frozen=True)
class QNeg:
    arg: "Quantity"


@dataclass(frozen=True)
class Sup:
    var: str
    body: "Quantity"


@dataclass(frozen=True)
class Inf:
    var: str
    body: "Quantity"


Quantity = Union[Const, Arith, Iverson, QMin, QMax, QAdd, QScale, QNeg, Sup, Inf]


def iverson(b: BExpr) -> Quantity:
    return Iverson(b)


# ---------------------------------------------------------------------------
# States and domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class State:
    """Immutable finite map from variable names to integers."""

    items: tuple[tuple[str, int], ...]

    @staticmethod
    def of(mapping: Mapping[str, int]) -> "State":
        return State(tuple(sorted(mapping.items())))

    def get(self, name: str) -> int:
        for k, v in self.items:
            if k == name:
                return v
        raise MissingVariableError(
            f"variable {name!r} is not bound in this state")

    def __getitem__(self, name: str) -> int:
        return self.get(name)

    def __contains__(self, name: str) -> bool:
        return any(k == name for k, _ in self.items)

    def set(self, name: str, value: int) -> "State":
        out = [(k, v) for k, v in self.items if k != name]
        out.append((name, value))
        out.sort()
        return State(tuple(out))

    @property
    def vars(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.items)

    def as_dict(self) -> dict[str, int]:
        return dict(self.items)

    def __str__(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in self.items)
        return "{" + inner + "}"


class MissingVariableError(KeyError):
    """A domain spec lacks an interval for a required variable."""


@dataclass(frozen=True)
class DomainSpec:
    """A finite state box, a Sup/Inf evaluation window, and iteration fuel."""

    intervals: tuple[tuple[str, tuple[int, int]], ...]
    alpha_window: tuple[int, int] = (-16, 16)
    fuel: int = 64

    def __post_init__(self):
        names = [n for n, _ in self.intervals]
        if names != sorted(names):
            object.__setattr__(self, "intervals", tuple(sorted(self.intervals)))
        for name, (lo, hi) in self.intervals:
            if lo > hi:
                raise ValueError(f"empty interval for {name}: {lo}..{hi}")
        lo, hi = self.alpha_window
        if lo > hi:
            raise ValueError(f"empty alpha window: {lo}..{hi}")
        if self.fuel <= 0:
            raise ValueError("fuel must be positive")

    @staticmethod
    def of(intervals: Mapping[str, tuple[int, int]],
           alpha_window: tuple[int, int] = (-16, 16),
           fuel: int = 64) -> "DomainSpec":
        return DomainSpec(tuple(sorted(intervals.items())), alpha_window, fuel)

    @property
    def vars(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.intervals)

    def interval(self, name: str) -> tuple[int, int]:
        for n, iv in self.intervals:
            if n == name:
                return iv
        raise MissingVariableError(f"domain has no interval for {name!r}")

    def contains(self, name: str, value: int) -> bool:
        lo, hi = self.interval(name)
        return lo <= value <= hi

    def require(self, names) -> None:
        declared = set(self.vars)
        missing = sorted(set(names) - declared)
        if missing:
            raise MissingVariableError(
                f"domain lacks intervals for: {', '.join(missing)}")

    def states(self) -> Iterator[State]:
        """All states of the box in lexicographic order of sorted names."""
        names = self.vars
        ranges = [range(lo, hi + 1) for _, (lo, hi) in self.intervals]
        for combo in product(*ranges):
            yield State(tuple(zip(names, combo)))

    def size(self) -> int:
        n = 1
        for _, (lo, hi) in self.intervals:
            n *= hi - lo + 1
        return n

    def widened(self, pad: int) -> "DomainSpec":
        return DomainSpec(
            tuple((n, (lo - pad, hi + pad)) for n, (lo, hi) in self.intervals),
            self.alpha_window, self.fuel)

    def with_fuel(self, fuel: int) -> "DomainSpec":
        return DomainSpec(self.intervals, self.alpha_window, fuel)

    def __str__(self) -> str:
        vars_part = ", ".join(f"{n}={lo}..{hi}" for n, (lo, hi) in self.intervals)
        lo, hi = self.alpha_window
        return f"{vars_part}; alpha={lo}..{hi}; fuel={self.fuel}"


# ---------------------------------------------------------------------------
# Free variables
# ---------------------------------------------------------------------------


def fv_aexpr(e: AExpr) -> frozenset[str]:
    if isinstance(e, IntLit):
        return frozenset()
    if isinstance(e, Var):
        return frozenset({e.name})
    if isinstance(e, (Add, Sub)):
        return fv_aexpr(e.left) | fv_aexpr(e.right)
    if isinstance(e, Mul):
        return fv_aexpr(e.arg)
    if isinstance(e, Mod):
        return fv_aexpr(e.arg)
    raise TypeError(f"not an arithmetic expression: {e!r}")


def fv_bexpr(b: BExpr) -> frozenset[str]:
    if isinstance(b, BoolLit):
        return frozenset()
    if isinstance(b, Cmp):
        return fv_aexpr(b.left) | fv_aexpr(b.right)
    if isinstance(b, (And, Or)):
        return fv_bexpr(b.left) | fv_bexpr(b.right)
    if isinstance(b, Not):
        return fv_bexpr(b.arg)
    raise TypeError(f"not a guard: {b!r}")


def fv_quantity(q: Quantity) -> frozenset[str]:
    if isinstance(q, Const):
        return frozenset()
    if isinstance(q, Arith):
        return fv_aexpr(q.expr)
    if isinstance(q, Iverson):
        return fv_bexpr(q.cond)
    if isinstance(q, (QMin, QMax, QAdd)):
        return fv_quantity(q.left) | fv_quantity(q.right)
    if isinstance(q, (QScale, QNeg)):
        return fv_quantity(q.arg)
    if isinstance(q, (Sup, Inf)):
        return fv_quantity(q.body) - {q.var}
    raise TypeError(f"not a quantity: {q!r}")


def bound_vars(q: Quantity) -> frozenset[str]:
    if isinstance(q, (Const, Arith, Iverson)):
        return frozenset()
    if isinstance(q, (QMin, QMax, QAdd)):
        return bound_vars(q.left) | bound_vars(q.right)
    if isinstance(q, (QScale, QNeg)):
        return bound_vars(q.arg)
    if isinstance(q, (Sup, Inf)):
        return bound_vars(q.body) | {q.var}
    raise TypeError(f"not a quantity: {q!r}")


def program_vars(c: Program) -> frozenset[str]:
    if isinstance(c, (Skip, Diverge)):
        return frozenset()
    if isinstance(c, Assign):
        return frozenset({c.var}) | fv_aexpr(c.expr)
    if isinstance(c, Seq):
        return program_vars(c.first) | program_vars(c.second)
    if isinstance(c, Choice):
        return program_vars(c.left) | program_vars(c.right)
    if isinstance(c, If):
        return fv_bexpr(c.cond) | program_vars(c.then) | program_vars(c.orelse)
    if isinstance(c, While):
        return fv_bexpr(c.cond) | program_vars(c.body)
    raise TypeError(f"not a program: {c!r}")


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------


def subst_aexpr(e: AExpr, x: str, r: AExpr) -> AExpr:
    if isinstance(e, IntLit):
        return e
    if isinstance(e, Var):
        return r if e.name == x else e
    if isinstance(e, Add):
        return Add(subst_aexpr(e.left, x, r), subst_aexpr(e.right, x, r))
    if isinstance(e, Sub):
        return Sub(subst_aexpr(e.left, x, r), subst_aexpr(e.right, x, r))
    if isinstance(e, Mul):
        return Mul(e.coeff, subst_aexpr(e.arg, x, r))
    if isinstance(e, Mod):
        return Mod(subst_aexpr(e.arg, x, r), e.modulus)
    raise TypeError(f"not an arithmetic expression: {e!r}")


def subst_bexpr(b: BExpr, x: str, r: AExpr) -> BExpr:
    if isinstance(b, BoolLit):
        return b
    if isinstance(b, Cmp):
        return Cmp(subst_aexpr(b.left, x, r), b.op, subst_aexpr(b.right, x, r))
    if isinstance(b, And):
        return And(subst_bexpr(b.left, x, r), subst_bexpr(b.right, x, r))
    if isinstance(b, Or):
        return Or(subst_bexpr(b.left, x, r), subst_bexpr(b.right, x, r))
    if isinstance(b, Not):
        return Not(subst_bexpr(b.arg, x, r))
    raise TypeError(f"not a guard: {b!r}")


def subst_quantity(q: Quantity, x: str, r: AExpr) -> Quantity:
    """Replace free occurrences of ``x`` in ``q`` by ``r``.

    Binders never capture because bound names are fresh against all program
    variables; a binder that happens to equal ``x`` simply shadows it.
    """
    if isinstance(q, Const):
        return q
    if isinstance(q, Arith):
        return Arith(subst_aexpr(q.expr, x, r))
    if isinstance(q, Iverson):
        return Iverson(subst_bexpr(q.cond, x, r))
    if isinstance(q, QMin):
        return QMin(subst_quantity(q.left, x, r), subst_quantity(q.right, x, r))
    if isinstance(q, QMax):
        return QMax(subst_quantity(q.left, x, r), subst_quantity(q.right, x, r))
    if isinstance(q, QAdd):
        return QAdd(subst_quantity(q.left, x, r), subst_quantity(q.right, x, r))
    if isinstance(q, QScale):
        return QScale(q.factor, subst_quantity(q.arg, x, r))
    if isinstance(q, QNeg):
        return QNeg(subst_quantity(q.arg, x, r))
    if isinstance(q, Sup):
        if q.var == x:
            return q
        return Sup(q.var, subst_quantity(q.body, x, r))
    if isinstance(q, Inf):
        if q.var == x:
            return q
        return Inf(q.var, subst_quantity(q.body, x, r))
    raise TypeError(f"not a quantity: {q!r}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


_CMP_FUNCS = {
    "<": int.__lt__, "<=": int.__le__, "=": int.__eq__,
    "!=": int.__ne__, ">=": int.__ge__, ">": int.__gt__,
}


def eval_aexpr(e: AExpr, state: State) -> int:
    # exact-type dispatch, hottest node kinds first; these evaluators run
    # millions of times inside the reference semantics and the suites
    t = type(e)
    if t is Var:
        return state.get(e.name)
    if t is IntLit:
        return e.value
    if t is Add:
        return eval_aexpr(e.left, state) + eval_aexpr(e.right, state)
    if t is Sub:
        return eval_aexpr(e.left, state) - eval_aexpr(e.right, state)
    if t is Mul:
        return e.coeff * eval_aexpr(e.arg, state)
    if t is Mod:
        # Python's % on ints with positive modulus is euclidean.
        return eval_aexpr(e.arg, state) % e.modulus
    raise TypeError(f"not an arithmetic expression: {e!r}")


def eval_bexpr(b: BExpr, state: State) -> bool:
    t = type(b)
    if t is Cmp:
        return _CMP_FUNCS[b.op](eval_aexpr(b.left, state),
                                eval_aexpr(b.right, state))
    if t is And:
        return eval_bexpr(b.left, state) and eval_bexpr(b.right, state)
    if t is Or:
        return eval_bexpr(b.left, state) or eval_bexpr(b.right, state)
    if t is Not:
        return not eval_bexpr(b.arg, state)
    if t is BoolLit:
        return b.value
    raise TypeError(f"not a guard: {b!r}")


@lru_cache(maxsize=None)
def _ext_int(value: int) -> ExtReal:
    # evaluation only ever sees window-bounded integers, so the cache
    # stays small
    return ExtReal(value)


def eval_quantity(q: Quantity, state: State, dom: DomainSpec) -> ExtReal:
    """Evaluate a quantity; Sup/Inf range over the domain's alpha window."""
    t = type(q)
    if t is QMin:
        return meet(eval_quantity(q.left, state, dom),
                    eval_quantity(q.right, state, dom))
    if t is QMax:
        return join(eval_quantity(q.left, state, dom),
                    eval_quantity(q.right, state, dom))
    if t is Iverson:
        return POS_INF if eval_bexpr(q.cond, state) else NEG_INF
    if t is Arith:
        return _ext_int(eval_aexpr(q.expr, state))
    if t is Const:
        return q.value
    if t is QAdd:
        return eval_quantity(q.left, state, dom) + eval_quantity(q.right, state, dom)
    if t is QScale:
        return eval_quantity(q.arg, state, dom).scale(q.factor)
    if t is QNeg:
        return -eval_quantity(q.arg, state, dom)
    if t is Sup or t is Inf:
        lo, hi = dom.alpha_window
        best: Optional[ExtReal] = None
        for a in range(lo, hi + 1):
            v = eval_quantity(q.body, state.set(q.var, a), dom)
            if best is None:
                best = v
            elif t is Sup:
                best = join(best, v)
            else:
                best = meet(best, v)
        assert best is not None  # windows are nonempty by construction
        return best
    raise TypeError(f"not a quantity: {q!r}")


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

_AEXPR_PREC = {"add": 1, "mul": 2, "atom": 3}


def _aexpr_str(e: AExpr, min_prec: int) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, (Add, Sub)):
        op = "+" if isinstance(e, Add) else "-"
        s = f"{_aexpr_str(e.left, 1)} {op} {_aexpr_str(e.right, 2)}"
        return f"({s})" if min_prec > 1 else s
    if isinstance(e, Mul):
        s = f"{e.coeff} * {_aexpr_str(e.arg, 3)}"
        return f"({s})" if min_prec > 2 else s
    if isinstance(e, Mod):
        s = f"{_aexpr_str(e.arg, 3)} % {e.modulus}"
        return f"({s})" if min_prec > 2 else s
    raise TypeError(f"not an arithmetic expression: {e!r}")


def aexpr_to_str(e: AExpr) -> str:
    return _aexpr_str(e, 1)


_BEXPR_PREC = {"or": 1, "and": 2, "not": 3}


def _bexpr_str(b: BExpr, min_prec: int) -> str:
    if isinstance(b, BoolLit):
        return "true" if b.value else "false"
    if isinstance(b, Cmp):
        return f"{aexpr_to_str(b.left)} {b.op} {aexpr_to_str(b.right)}"
    if isinstance(b, Or):
        s = f"{_bexpr_str(b.left, 1)} || {_bexpr_str(b.right, 2)}"
        return f"({s})" if min_prec > 1 else s
    if isinstance(b, And):
        s = f"{_bexpr_str(b.left, 2)} && {_bexpr_str(b.right, 3)}"
        return f"({s})" if min_prec > 2 else s
    if isinstance(b, Not):
        arg = _bexpr_str(b.arg, 4)
        return f"!{arg}"
    raise TypeError(f"not a guard: {b!r}")


def bexpr_to_str(b: BExpr) -> str:
    return _bexpr_str(b, 1)


def _cmp_needs_parens(b: BExpr) -> bool:
    return isinstance(b, Cmp)


def _quantity_str(q: Quantity, min_prec: int) -> str:
    # precedence: Sup/Inf body and QAdd = 1, QScale = 2, atoms = 3
    if isinstance(q, Const):
        return str(q.value)
    if isinstance(q, Arith):
        # parenthesize sums inside scale operands to keep reparses exact
        return _aexpr_str(q.expr, 1) if min_prec <= 1 else _aexpr_str(q.expr, 2)
    if isinstance(q, Iverson):
        return f"[{bexpr_to_str(q.cond)}]"
    if isinstance(q, QMin):
        return f"min({quantity_to_str(q.left)}, {quantity_to_str(q.right)})"
    if isinstance(q, QMax):
        return f"max({quantity_to_str(q.left)}, {quantity_to_str(q.right)})"
    if isinstance(q, QAdd):
        # operands at scale precedence: a loose scale or binder on either
        # side would swallow the continuation of the sum when reparsed
        s = f"{_quantity_str(q.left, 2)} + {_quantity_str(q.right, 2)}"
        return f"({s})" if min_prec > 1 else s
    if isinstance(q, QScale):
        f = q.factor
        fs = str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
        s = f"{fs} * {_quantity_str(q.arg, 3)}"
        return f"({s})" if min_prec > 1 else s
    if isinstance(q, QNeg):
        return f"-{_quantity_str(q.arg, 3)}"
    if isinstance(q, (Sup, Inf)):
        kw = "Sup" if isinstance(q, Sup) else "Inf"
        s = f"{kw} {q.var}. {_quantity_str(q.body, 1)}"
        return f"({s})" if min_prec > 1 else s
    raise TypeError(f"not a quantity: {q!r}")


def quantity_to_str(q: Quantity) -> str:
    return _quantity_str(q, 1)


def program_to_str(c: Program) -> str:
    if isinstance(c, Skip):
        return "skip"
    if isinstance(c, Diverge):
        return "diverge"
    if isinstance(c, Assign):
        return f"{c.var} := {aexpr_to_str(c.expr)}"
    if isinstance(c, Seq):
        left = program_to_str(c.first)
        if isinstance(c.first, Seq):
            left = "{" + left + "}"
        return f"{left}; {program_to_str(c.second)}"
    if isinstance(c, Choice):
        return f"{{{program_to_str(c.left)}}} [] {{{program_to_str(c.right)}}}"
    if isinstance(c, If):
        return (f"if ({bexpr_to_str(c.cond)}) {{{program_to_str(c.then)}}}"
                f" else {{{program_to_str(c.orelse)}}}")
    if isinstance(c, While):
        return f"while ({bexpr_to_str(c.cond)}) {{{program_to_str(c.body)}}}"
    raise TypeError(f"not a program: {c!r}")


def program_to_lines(c: Program, indent: int = 0) -> list[str]:
    """Multi-line rendering used by the annotating pretty-printer."""
    pad = "  " * indent
    if isinstance(c, (Skip, Diverge, Assign)):
        return [pad + program_to_str(c)]
    if isinstance(c, Seq):
        return program_to_lines(c.first, indent) + program_to_lines(c.second, indent)
    if isinstance(c, Choice):
        return ([pad + "{"] + program_to_lines(c.left, indent + 1)
                + [pad + "} [] {"] + program_to_lines(c.right, indent + 1)
                + [pad + "}"])
    if isinstance(c, If):
        return ([pad + f"if ({bexpr_to_str(c.cond)}) {{"]
                + program_to_lines(c.then, indent + 1)
                + [pad + "} else {"]
                + program_to_lines(c.orelse, indent + 1)
                + [pad + "}"])
    if isinstance(c, While):
        return ([pad + f"while ({bexpr_to_str(c.cond)}) {{"]
                + program_to_lines(c.body, indent + 1)
                + [pad + "}"])
    raise TypeError(f"not a program: {c!r}")


# ---------------------------------------------------------------------------
# Canonical structural keys (binder-name-insensitive)
# ---------------------------------------------------------------------------


def _akey(e: AExpr, env: dict[str, int]) -> str:
    if isinstance(e, IntLit):
        return f"i{e.value}"
    if isinstance(e, Var):
        if e.name in env:
            return f"b{env[e.name]}"
        return f"v:{e.name}"
    if isinstance(e, Add):
        return f"(+ {_akey(e.left, env)} {_akey(e.right, env)})"
    if isinstance(e, Sub):
        return f"(- {_akey(e.left, env)} {_akey(e.right, env)})"
    if isinstance(e, Mul):
        return f"(* {e.coeff} {_akey(e.arg, env)})"
    if isinstance(e, Mod):
        return f"(% {_akey(e.arg, env)} {e.modulus})"
    raise TypeError(f"not an arithmetic expression: {e!r}")


def _bkey(b: BExpr, env: dict[str, int]) -> str:
    if isinstance(b, BoolLit):
        return "#t" if b.value else "#f"
    if isinstance(b, Cmp):
        return f"(cmp {b.op} {_akey(b.left, env)} {_akey(b.right, env)})"
    if isinstance(b, And):
        return f"(and {_bkey(b.left, env)} {_bkey(b.right, env)})"
    if isinstance(b, Or):
        return f"(or {_bkey(b.left, env)} {_bkey(b.right, env)})"
    if isinstance(b, Not):
        return f"(not {_bkey(b.arg, env)})"
    raise TypeError(f"not a guard: {b!r}")


def _qkey(q: Quantity, env: dict[str, int], depth: int) -> str:
    if isinstance(q, Const):
        return f"c:{q.value}"
    if isinstance(q, Arith):
        return f"(a {_akey(q.expr, env)})"
    if isinstance(q, Iverson):
        return f"(iv {_bkey(q.cond, env)})"
    if isinstance(q, QMin):
        return f"(min {_qkey(q.left, env, depth)} {_qkey(q.right, env, depth)})"
    if isinstance(q, QMax):
        return f"(max {_qkey(q.left, env, depth)} {_qkey(q.right, env, depth)})"
    if isinstance(q, QAdd):
        return f"(add {_qkey(q.left, env, depth)} {_qkey(q.right, env, depth)})"
    if isinstance(q, QScale):
        return f"(scale {q.factor} {_qkey(q.arg, env, depth)})"
    if isinstance(q, QNeg):
        return f"(neg {_qkey(q.arg, env, depth)})"
    if isinstance(q, (Sup, Inf)):
        kw = "sup" if isinstance(q, Sup) else "inf"
        inner = dict(env)
        inner[q.var] = depth
        return f"({kw} {_qkey(q.body, inner, depth + 1)})"
    raise TypeError(f"not a quantity: {q!r}")


@lru_cache(maxsize=1 << 15)
def quantity_key(q: Quantity) -> str:
    """A canonical string key; equal keys mean structural equality up to
    consistent renaming of bound variables. Cached: the simplifier sorts
    by this key constantly, and nodes recur across rebuilds."""
    return _qkey(q, {}, 0)


def quantities_equal(a: Quantity, b: Quantity) -> bool:
    return quantity_key(a) == quantity_key(b)


def bexpr_key(b: BExpr) -> str:
    return _bkey(b, {})


def aexpr_key(e: AExpr) -> str:
    return _akey(e, {})
