"""Exact extended-real values: the complete lattice quantities take values in.

A value is either a rational number (``fractions.Fraction``, kept exact) or
one of the two infinities.  The order is the usual one with -inf at the
bottom and +inf at the top; meet and join are min and max.  Arithmetic is
the extended-real arithmetic used by quantitative transformers:

* ``a + b`` is ordinary addition lifted to infinities, except that
  ``+inf + -inf`` has no sensible value and raises
  :class:`IndeterminateFormError`.
* ``scale(r, a)`` multiplies by a *nonnegative* rational.  Scaling by zero
  yields zero even for infinite ``a`` (the "0 times anything is 0"
  convention, which keeps scaling total and monotone).
* ``-a`` flips the sign and swaps the infinities.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

Rational = Union[int, Fraction]


class IndeterminateFormError(ArithmeticError):
    """Raised when evaluating ``+inf + -inf`` (in either order)."""


class ExtReal:
    """An exact extended real: a Fraction, ``-inf``, or ``+inf``.

    Instances are immutable, hashable and totally ordered.  Use
    :data:`NEG_INF`, :data:`POS_INF` or the constructor with an int /
    Fraction.
    """

    __slots__ = ("_tag", "_num")

    # _tag: -1 for -inf, 0 for finite, +1 for +inf.  _num is the Fraction
    # payload for finite values and None otherwise.

    def __init__(self, value: Rational):
        object.__setattr__(self, "_tag", 0)
        object.__setattr__(self, "_num", Fraction(value))

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("ExtReal is immutable")

    @classmethod
    def _make_inf(cls, sign: int) -> "ExtReal":
        inst = object.__new__(cls)
        object.__setattr__(inst, "_tag", sign)
        object.__setattr__(inst, "_num", None)
        return inst

    # -- predicates ---------------------------------------------------------

    @property
    def is_finite(self) -> bool:
        return self._tag == 0

    @property
    def is_pos_inf(self) -> bool:
        return self._tag > 0

    @property
    def is_neg_inf(self) -> bool:
        return self._tag < 0

    @property
    def finite(self) -> Fraction:
        """The Fraction payload; raises ValueError on infinities."""
        if self._tag != 0:
            raise ValueError(f"{self} is not finite")
        return self._num

    # -- order and equality -------------------------------------------------
    # ordering: -inf < every finite value < +inf, i.e. tags -1 < 0 < +1
    # with finite payloads compared within tag 0.

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExtReal):
            return NotImplemented
        return self._tag == other._tag and self._num == other._num

    def __hash__(self) -> int:
        return hash((self._tag, self._num))

    def __lt__(self, other: "ExtReal") -> bool:
        if not isinstance(other, ExtReal):
            return NotImplemented
        if self._tag != other._tag:
            return self._tag < other._tag
        return self._tag == 0 and self._num < other._num

    def __le__(self, other: "ExtReal") -> bool:
        if not isinstance(other, ExtReal):
            return NotImplemented
        if self._tag != other._tag:
            return self._tag < other._tag
        return self._tag != 0 or self._num <= other._num

    def __gt__(self, other: "ExtReal") -> bool:
        return not self.__le__(other)

    def __ge__(self, other: "ExtReal") -> bool:
        return not self.__lt__(other)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: "ExtReal") -> "ExtReal":
        if not isinstance(other, ExtReal):
            return NotImplemented
        if self._tag == 0 and other._tag == 0:
            return ExtReal(self._num + other._num)
        if self._tag == 0:
            return other
        if other._tag == 0:
            return self
        if self._tag != other._tag:
            raise IndeterminateFormError("+inf + -inf has no value")
        return self

    def __neg__(self) -> "ExtReal":
        if self._tag == 0:
            return ExtReal(-self._num)
        return NEG_INF if self._tag > 0 else POS_INF

    def scale(self, r: Rational) -> "ExtReal":
        """Multiply by a nonnegative rational; scale(0, ±inf) = 0."""
        r = Fraction(r)
        if r < 0:
            raise ValueError("scale factor must be nonnegative")
        if r == 0:
            return ExtReal(0)
        if self._tag == 0:
            return ExtReal(self._num * r)
        return self

    # -- rendering -----------------------------------------------------------

    def __str__(self) -> str:
        if self._tag > 0:
            return "+inf"
        if self._tag < 0:
            return "-inf"
        if self._num.denominator == 1:
            return str(self._num.numerator)
        return f"{self._num.numerator}/{self._num.denominator}"

    def __repr__(self) -> str:
        return f"ExtReal({self})"


NEG_INF = ExtReal._make_inf(-1)
POS_INF = ExtReal._make_inf(1)


def meet(a: ExtReal, b: ExtReal) -> ExtReal:
    """Pointwise minimum (the lattice meet)."""
    return a if a <= b else b


def join(a: ExtReal, b: ExtReal) -> ExtReal:
    """Pointwise maximum (the lattice join)."""
    return a if a >= b else b


def add(a: ExtReal, b: ExtReal) -> ExtReal:
    return a + b


def scale(r: Rational, a: ExtReal) -> ExtReal:
    return a.scale(r)


def negate(a: ExtReal) -> ExtReal:
    return -a


def meet_all(values, empty=POS_INF) -> ExtReal:
    """Meet of an iterable; the empty meet is the top element."""
    out = empty
    for v in values:
        if v < out:
            out = v
    return out


def join_all(values, empty=NEG_INF) -> ExtReal:
    """Join of an iterable; the empty join is the bottom element."""
    out = empty
    for v in values:
        if v > out:
            out = v
    return out


def parse_extreal(text: str) -> ExtReal:
    """Parse ``+inf``, ``-inf``, ``p/q`` or an integer literal."""
    s = text.strip()
    if s in ("+inf", "inf"):
        return POS_INF
    if s == "-inf":
        return NEG_INF
    try:
        return ExtReal(Fraction(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not an extended real literal: {text!r}") from exc
