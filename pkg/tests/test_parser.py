import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quantgcl.generators import GenConfig, gen_loop_free, gen_quantity
from quantgcl.lattice import NEG_INF, POS_INF
from quantgcl.parser import (
    ParseError, parse_aexpr, parse_bexpr, parse_domain, parse_program,
    parse_quantity,
)
from quantgcl.syntax import (
    Add, Arith, Assign, Choice, Cmp, Const, If, IntLit, Iverson, QMin,
    QScale, Seq, Skip, Sup, Var, While, program_to_str, quantity_key,
    quantity_to_str,
)


def test_parse_program_shapes():
    c = parse_program("x := x + 1; y := 2")
    assert isinstance(c, Seq)
    assert c.first == Assign("x", Add(Var("x"), IntLit(1)))
    assert c.second == Assign("y", IntLit(2))

    c = parse_program("if (x > 0) { skip } else { diverge }")
    assert isinstance(c, If)

    c = parse_program("{ x := 1 } [] { x := 2 }")
    assert isinstance(c, Choice)

    c = parse_program("while (x < 10) { x := x + 4 }")
    assert isinstance(c, While)
    assert c.cond == Cmp(Var("x"), "<", IntLit(10))


def test_seq_associates_to_the_right():
    c = parse_program("x := 1; y := 2; z := 3")
    assert isinstance(c, Seq)
    assert isinstance(c.second, Seq)
    assert isinstance(c.first, Assign)


def test_parse_quantity_shapes():
    assert parse_quantity("+inf") == Const(POS_INF)
    assert parse_quantity("-inf") == Const(NEG_INF)
    assert parse_quantity("7") == Const(POS_INF.scale(0).__class__(7))
    assert parse_quantity("[x > 0]") == Iverson(Cmp(Var("x"), ">", IntLit(0)))
    q = parse_quantity("min([x > 0], x + 1)")
    assert isinstance(q, QMin)
    assert q.right == Arith(Add(Var("x"), IntLit(1)))
    q = parse_quantity("Sup a. min([a <= x], a)")
    assert isinstance(q, Sup)


def test_integer_stays_arithmetic_next_to_operators():
    assert parse_quantity("5") == Const(POS_INF.scale(0).__class__(5))
    assert parse_quantity("x + 5") == Arith(Add(Var("x"), IntLit(5)))


def test_fractional_scale_parses():
    q = parse_quantity("1/2 * x")
    assert isinstance(q, QScale)
    assert q.factor == Fraction(1, 2)


def test_bound_variable_may_shadow():
    q = parse_quantity("Sup x. x")
    assert isinstance(q, Sup)
    assert quantity_key(q) == quantity_key(parse_quantity("Sup b. b"))


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as exc:
        parse_program("x := ")
    assert "line 1" in str(exc.value)
    with pytest.raises(ParseError):
        parse_quantity("min(x")
    with pytest.raises(ParseError):
        parse_program("while x < 1 { skip }")
    with pytest.raises(ParseError):
        parse_aexpr("1 +")
    with pytest.raises(ParseError):
        parse_bexpr("x >")


def test_reserved_words_are_not_variables():
    with pytest.raises(ParseError):
        parse_program("skip := 1")
    with pytest.raises(ParseError):
        parse_quantity("min")


def test_parse_domain():
    dom = parse_domain("x=0..7, y=-2..2; alpha=-16..16; fuel=64")
    assert dom.interval("x") == (0, 7)
    assert dom.interval("y") == (-2, 2)
    assert dom.alpha_window == (-16, 16)
    assert dom.fuel == 64


def test_parse_domain_defaults_and_errors():
    dom = parse_domain("x=0..3")
    assert dom.alpha_window == (-16, 16)
    assert dom.fuel == 64
    with pytest.raises(ParseError):
        parse_domain("x=3..0")
    with pytest.raises(ParseError):
        parse_domain("x=0..1, x=0..2")
    with pytest.raises(ParseError):
        parse_domain("fuel=0")


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_program_round_trip(seed):
    rng = random.Random(seed)
    cfg = GenConfig()
    variables = ("x", "y")
    c = gen_loop_free(rng, variables, cfg)
    assert parse_program(program_to_str(c)) == c


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_quantity_round_trip(seed):
    rng = random.Random(seed)
    q = gen_quantity(rng, ("x", "y"))
    reparsed = parse_quantity(quantity_to_str(q))
    assert quantity_key(reparsed) == quantity_key(q)
