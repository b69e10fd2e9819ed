"""Concrete syntax for programs, quantities, and domain specs.

Program grammar (``;`` binds weakest; branch/loop bodies and both arms of the
box choice require braces)::

    program ::= stmt (';' stmt)*                     -- sequencing, right-nested
    stmt    ::= 'skip' | 'diverge' | ident ':=' aexpr
              | '{' program '}' ('[]' '{' program '}')+
              | '{' program '}'                      -- grouping
              | 'if' '(' bexpr ')' '{' program '}' 'else' '{' program '}'
              | 'while' '(' bexpr ')' '{' program '}'

Arithmetic: ``+ -`` (left), then ``* %``; a product needs an integer-literal
factor and a remainder a positive integer-literal divisor.  Guards: ``||``,
``&&``, ``!``, comparisons ``< <= = != >= >``, ``true``/``false``.

Quantities: ``+`` (left), then ``r * q`` scaling, then atoms
``+inf  -inf  p/q  [b]  min(q, q)  max(q, q)  -q  Sup x. q  Inf x. q  (q)``
and embedded arithmetic expressions.

Disambiguation picks a canonical reading (mirrored by the printer, so
parse/print round-trips are exact on parser-canonical ASTs):

* a maximal arithmetic expression is preferred: ``hi - 5`` is one embedded
  arithmetic operand, never quantity-level subtraction; ``2 * x`` is the
  arithmetic product, so scaling nodes with an integral factor occur only
  over non-arithmetic operands (``2 * [b]``);
* a bare integer literal in quantity position is an extended-real constant;
  inside a larger arithmetic expression it stays an arithmetic literal;
* unary minus over an arithmetic operand folds into the arithmetic
  expression (``-x`` is ``(-1) * x``); ``negate`` nodes are produced only
  over non-arithmetic operands.

Rational literals ``p/q`` must be written without spaces.  Line comments
start with ``#``.  All errors raise :class:`ParseError` with a position in
the original source.

Domain specs look like ``x=0..7, hi=-8..8; alpha=-16..16; fuel=64``; the
``alpha`` and ``fuel`` sections are optional (defaults -16..16 and 64).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .lattice import ExtReal, NEG_INF, POS_INF
from .syntax import (
    Add, And, Arith, Assign, BExpr, BoolLit, Choice, Cmp, Const, Diverge,
    DomainSpec, If, Inf, IntLit, Iverson, Mod, Mul, Not, Or, Program, QAdd,
    QMax, QMin, QNeg, QScale, Quantity, RESERVED_WORDS, Seq, Skip, Sub, Sup,
    Var, While, fresh_var, fv_quantity, AExpr,
)


@dataclass(frozen=True)
class SourceSpan:
    offset: int
    line: int
    column: int
    text: str = ""

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}"


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


class _SoftFail(Exception):
    """Internal backtracking signal; never escapes the parser."""


_PUNCT = [
    ":=", "<=", ">=", "!=", "&&", "||", "[]", "..",
    ";", ",", ".", "(", ")", "{", "}", "[", "]",
    "<", ">", "=", "!", "+", "-", "*", "%", "/",
]


@dataclass(frozen=True)
class _Token:
    kind: str          # 'int' | 'rat' | 'ident' | punctuation | 'eof'
    text: str
    span: SourceSpan


def _tokenize(src: str) -> list[_Token]:
    toks: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        ch = src[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and src[i] != "\n":
                i += 1
            continue
        span = SourceSpan(i, line, col)
        if ch.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            # adjacency-based rational literal: digits '/' digits
            if j < n and src[j] == "/" and j + 1 < n and src[j + 1].isdigit():
                k = j + 1
                while k < n and src[k].isdigit():
                    k += 1
                text = src[i:k]
                toks.append(_Token("rat", text, span))
                col += k - i
                i = k
                continue
            text = src[i:j]
            toks.append(_Token("int", text, span))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] in "_'"):
                j += 1
            text = src[i:j]
            toks.append(_Token("ident", text, span))
            col += j - i
            i = j
            continue
        matched = None
        for p in _PUNCT:
            if src.startswith(p, i):
                matched = p
                break
        if matched is None:
            raise ParseError(f"unexpected character {ch!r}", span)
        toks.append(_Token(matched, matched, span))
        i += len(matched)
        col += len(matched)
    toks.append(_Token("eof", "", SourceSpan(n, line, col)))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.pos = 0

    # -- token plumbing -----------------------------------------------------

    def peek(self, ahead: int = 0) -> _Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> _Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def expect(self, kind: str, what: Optional[str] = None) -> _Token:
        t = self.peek()
        if t.kind != kind:
            want = what or f"{kind!r}"
            raise ParseError(f"expected {want}, found {t.text or 'end of input'!r}",
                             t.span)
        return self.next()

    def fail(self) -> "_SoftFail":
        return _SoftFail()

    def err(self, message: str) -> ParseError:
        return ParseError(message, self.peek().span)

    def expect_eof(self):
        t = self.peek()
        if t.kind != "eof":
            raise ParseError(f"unexpected trailing input {t.text!r}", t.span)

    def ident(self, what: str) -> str:
        t = self.expect("ident", what)
        if t.text in RESERVED_WORDS:
            raise ParseError(f"{t.text!r} is a reserved word", t.span)
        return t.text

    # -- arithmetic (soft-failing, used with backtracking) --------------------

    def aexpr(self) -> AExpr:
        left = self.term()
        while self.at("+") or self.at("-"):
            save = self.pos
            op = self.next().text
            try:
                right = self.term()
            except _SoftFail:
                self.pos = save
                break
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def term(self) -> AExpr:
        left = self.factor()
        while self.at("*") or self.at("%"):
            save = self.pos
            op = self.next().text
            if op == "%":
                if not self.at("int"):
                    raise self.err("remainder needs a positive integer divisor")
                m = int(self.next().text)
                if m <= 0:
                    self.pos = save
                    raise self.err("remainder divisor must be positive")
                left = Mod(left, m)
                continue
            try:
                right = self.factor()
            except _SoftFail:
                self.pos = save
                break
            if isinstance(left, IntLit):
                left = Mul(left.value, right)
            elif isinstance(right, IntLit):
                left = Mul(right.value, left)
            else:
                raise ParseError("a product needs an integer-constant factor",
                                 self.toks[save].span)
        return left

    def factor(self) -> AExpr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return IntLit(int(t.text))
        if t.kind == "-":
            self.next()
            inner = self.factor()
            if isinstance(inner, IntLit):
                return IntLit(-inner.value)
            return Mul(-1, inner)
        if t.kind == "ident":
            if t.text in RESERVED_WORDS:
                raise self.fail()
            self.next()
            return Var(t.text)
        if t.kind == "(":
            save = self.pos
            self.next()
            try:
                inner = self.aexpr()
            except _SoftFail:
                self.pos = save
                raise
            if not self.at(")"):
                self.pos = save
                raise self.fail()
            self.next()
            return inner
        raise self.fail()

    def try_aexpr(self) -> Optional[AExpr]:
        save = self.pos
        try:
            return self.aexpr()
        except _SoftFail:
            self.pos = save
            return None

    # -- guards ---------------------------------------------------------------

    def bexpr(self) -> BExpr:
        left = self.band()
        while self.at("||"):
            self.next()
            left = Or(left, self.band())
        return left

    def band(self) -> BExpr:
        left = self.bfactor()
        while self.at("&&"):
            self.next()
            left = And(left, self.bfactor())
        return left

    def bfactor(self) -> BExpr:
        t = self.peek()
        if t.kind == "!":
            self.next()
            return Not(self.bfactor())
        if t.kind == "ident" and t.text in ("true", "false"):
            self.next()
            return BoolLit(t.text == "true")
        if t.kind == "(":
            save = self.pos
            self.next()
            try:
                inner = self.bexpr()
                if not self.at(")"):
                    raise self.fail()
                self.next()
                return inner
            except _SoftFail:
                self.pos = save
            # fall through: parenthesized arithmetic inside a comparison
        return self.comparison()

    def comparison(self) -> BExpr:
        left = self.try_aexpr()
        if left is None:
            raise self.fail()
        t = self.peek()
        if t.kind not in ("<", "<=", "=", "!=", ">=", ">"):
            raise self.fail()
        self.next()
        right = self.try_aexpr()
        if right is None:
            raise ParseError("expected an arithmetic expression after "
                             f"{t.text!r}", self.peek().span)
        return Cmp(left, t.kind, right)

    def bexpr_hard(self, what: str = "a guard") -> BExpr:
        save = self.pos
        try:
            return self.bexpr()
        except _SoftFail:
            self.pos = save
            raise self.err(f"expected {what}")

    # -- programs ---------------------------------------------------------------

    def program(self) -> Program:
        first = self.stmt()
        if self.at(";"):
            self.next()
            return Seq(first, self.program())
        return first

    def braced_program(self) -> Program:
        self.expect("{")
        body = self.program()
        self.expect("}")
        return body

    def stmt(self) -> Program:
        t = self.peek()
        if t.kind == "ident" and t.text == "skip":
            self.next()
            return Skip()
        if t.kind == "ident" and t.text == "diverge":
            self.next()
            return Diverge()
        if t.kind == "ident" and t.text == "if":
            self.next()
            self.expect("(")
            cond = self.bexpr_hard()
            self.expect(")")
            then = self.braced_program()
            el = self.expect("ident", "'else'")
            if el.text != "else":
                raise ParseError("expected 'else'", el.span)
            orelse = self.braced_program()
            return If(cond, then, orelse)
        if t.kind == "ident" and t.text == "while":
            self.next()
            self.expect("(")
            cond = self.bexpr_hard()
            self.expect(")")
            body = self.braced_program()
            return While(cond, body)
        if t.kind == "{":
            left = self.braced_program()
            while self.at("[]"):
                self.next()
                right = self.braced_program()
                left = Choice(left, right)
            return left
        if t.kind == "ident":
            if t.text in RESERVED_WORDS:
                raise ParseError(f"unexpected keyword {t.text!r}", t.span)
            name = self.next().text
            self.expect(":=", "':='")
            save = self.pos
            expr = self.try_aexpr()
            if expr is None:
                self.pos = save
                raise self.err("expected an arithmetic expression")
            return Assign(name, expr)
        raise ParseError(f"expected a statement, found {t.text or 'end of input'!r}",
                         t.span)

    # -- quantities ---------------------------------------------------------------

    def quantity(self) -> Quantity:
        left = self.qterm()
        while self.at("+"):
            self.next()
            left = QAdd(left, self.qterm())
        return left

    def qterm(self) -> Quantity:
        t = self.peek()
        # rational-led scale or constant
        if t.kind == "rat":
            self.next()
            num, den = t.text.split("/")
            r = Fraction(int(num), int(den))
            if self.at("*"):
                self.next()
                return QScale(r, self.qterm())
            return Const(ExtReal(r))
        # greedy arithmetic attempt
        expr = self.try_aexpr()
        if expr is not None:
            if isinstance(expr, IntLit) and self.at("*"):
                # integer scale over a non-arithmetic operand, e.g. 2 * [b]
                if expr.value < 0:
                    raise self.err("scale factors must be nonnegative")
                self.next()
                return QScale(Fraction(expr.value), self.qterm())
            if isinstance(expr, IntLit):
                return Const(ExtReal(expr.value))
            return Arith(expr)
        return self.qatom()

    def qatom(self) -> Quantity:
        t = self.peek()
        if t.kind == "+":
            nxt = self.peek(1)
            if nxt.kind == "ident" and nxt.text == "inf":
                self.next()
                self.next()
                return Const(POS_INF)
            raise self.err("expected a quantity")
        if t.kind == "-":
            nxt = self.peek(1)
            if nxt.kind == "ident" and nxt.text == "inf":
                self.next()
                self.next()
                return Const(NEG_INF)
            if nxt.kind == "rat":
                self.next()
                tok = self.next()
                num, den = tok.text.split("/")
                return Const(ExtReal(-Fraction(int(num), int(den))))
            self.next()
            return QNeg(self.qterm())
        if t.kind == "ident" and t.text == "inf":
            self.next()
            return Const(POS_INF)
        if t.kind == "ident" and t.text in ("min", "max"):
            self.next()
            self.expect("(")
            a = self.quantity()
            self.expect(",")
            b = self.quantity()
            self.expect(")")
            return QMin(a, b) if t.text == "min" else QMax(a, b)
        if t.kind == "ident" and t.text in ("Sup", "Inf"):
            self.next()
            v = self.ident("a bound variable")
            self.expect(".", "'.'")
            body = self.quantity()
            return Sup(v, body) if t.text == "Sup" else Inf(v, body)
        if t.kind == "[":
            self.next()
            cond = self.bexpr_hard("a guard inside [ ]")
            self.expect("]")
            return Iverson(cond)
        if t.kind == "(":
            self.next()
            inner = self.quantity()
            self.expect(")")
            return inner
        raise self.err(f"expected a quantity, found {t.text or 'end of input'!r}")


# ---------------------------------------------------------------------------
# Binder canonicalisation
# ---------------------------------------------------------------------------


def _canonicalize_binders(q: Quantity) -> Quantity:
    """Rename every binder, in pre-order, to the next fresh name that avoids
    the quantity's free variables and all previously assigned binder names.
    The numbering is deterministic, so printing and reparsing is stable."""
    taken = set(fv_quantity(q))

    def walk(node: Quantity, env: dict[str, str]) -> Quantity:
        if isinstance(node, (Const,)):
            return node
        if isinstance(node, Arith):
            return Arith(_rename_aexpr(node.expr, env))
        if isinstance(node, Iverson):
            return Iverson(_rename_bexpr(node.cond, env))
        if isinstance(node, QMin):
            return QMin(walk(node.left, env), walk(node.right, env))
        if isinstance(node, QMax):
            return QMax(walk(node.left, env), walk(node.right, env))
        if isinstance(node, QAdd):
            return QAdd(walk(node.left, env), walk(node.right, env))
        if isinstance(node, QScale):
            return QScale(node.factor, walk(node.arg, env))
        if isinstance(node, QNeg):
            return QNeg(walk(node.arg, env))
        if isinstance(node, (Sup, Inf)):
            new = fresh_var(frozenset(taken))
            taken.add(new)
            inner = dict(env)
            inner[node.var] = new
            body = walk(node.body, inner)
            return Sup(new, body) if isinstance(node, Sup) else Inf(new, body)
        raise TypeError(f"not a quantity: {node!r}")

    def _rename_aexpr(e, env):
        if isinstance(e, IntLit):
            return e
        if isinstance(e, Var):
            return Var(env.get(e.name, e.name))
        if isinstance(e, Add):
            return Add(_rename_aexpr(e.left, env), _rename_aexpr(e.right, env))
        if isinstance(e, Sub):
            return Sub(_rename_aexpr(e.left, env), _rename_aexpr(e.right, env))
        if isinstance(e, Mul):
            return Mul(e.coeff, _rename_aexpr(e.arg, env))
        if isinstance(e, Mod):
            return Mod(_rename_aexpr(e.arg, env), e.modulus)
        raise TypeError(f"not an arithmetic expression: {e!r}")

    def _rename_bexpr(b, env):
        if isinstance(b, BoolLit):
            return b
        if isinstance(b, Cmp):
            return Cmp(_rename_aexpr(b.left, env), b.op, _rename_aexpr(b.right, env))
        if isinstance(b, And):
            return And(_rename_bexpr(b.left, env), _rename_bexpr(b.right, env))
        if isinstance(b, Or):
            return Or(_rename_bexpr(b.left, env), _rename_bexpr(b.right, env))
        if isinstance(b, Not):
            return Not(_rename_bexpr(b.arg, env))
        raise TypeError(f"not a guard: {b!r}")

    return walk(q, {})


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def parse_program(text: str) -> Program:
    p = _Parser(text)
    try:
        prog = p.program()
    except _SoftFail:
        raise p.err("expected a statement")
    p.expect_eof()
    return prog


def parse_quantity(text: str) -> Quantity:
    p = _Parser(text)
    try:
        q = p.quantity()
    except _SoftFail:
        raise p.err("expected a quantity")
    p.expect_eof()
    return _canonicalize_binders(q)


def parse_bexpr(text: str) -> BExpr:
    p = _Parser(text)
    try:
        b = p.bexpr()
    except _SoftFail:
        raise p.err("expected a guard")
    p.expect_eof()
    return b


def parse_aexpr(text: str) -> AExpr:
    p = _Parser(text)
    e = p.try_aexpr()
    if e is None:
        raise p.err("expected an arithmetic expression")
    p.expect_eof()
    return e


def parse_domain(text: str) -> DomainSpec:
    """Parse ``x=0..7, y=-2..2; alpha=-16..16; fuel=64``."""
    p = _Parser(text)

    def parse_int() -> int:
        neg = False
        if p.at("-"):
            p.next()
            neg = True
        t = p.expect("int", "an integer")
        v = int(t.text)
        return -v if neg else v

    def parse_range() -> tuple[int, int]:
        lo = parse_int()
        p.expect("..", "'..'")
        hi = parse_int()
        return lo, hi

    intervals: dict[str, tuple[int, int]] = {}
    alpha: tuple[int, int] | None = None
    fuel: int | None = None

    while not p.at("eof"):
        t = p.expect("ident", "a variable, 'alpha', or 'fuel'")
        name = t.text
        p.expect("=", "'='")
        if name == "fuel":
            if fuel is not None:
                raise ParseError("duplicate fuel section", t.span)
            fuel = parse_int()
            if fuel <= 0:
                raise ParseError("fuel must be positive", t.span)
        elif name == "alpha":
            if alpha is not None:
                raise ParseError("duplicate alpha section", t.span)
            alpha = parse_range()
            if alpha[0] > alpha[1]:
                raise ParseError("empty alpha window", t.span)
        else:
            if name in RESERVED_WORDS:
                raise ParseError(f"{name!r} is a reserved word", t.span)
            if name in intervals:
                raise ParseError(f"duplicate interval for {name!r}", t.span)
            lo, hi = parse_range()
            if lo > hi:
                raise ParseError(f"empty interval for {name!r}", t.span)
            intervals[name] = (lo, hi)
        if p.at(",") or p.at(";"):
            p.next()
            continue
    p.expect_eof()
    return DomainSpec.of(
        intervals,
        alpha_window=alpha if alpha is not None else (-16, 16),
        fuel=fuel if fuel is not None else 64,
    )
