import pytest

from quantgcl.lattice import ExtReal, NEG_INF, POS_INF
from quantgcl.syntax import (
    Add, And, Arith, Assign, BoolLit, Cmp, Const, DomainSpec, If, Inf, IntLit,
    Iverson, MissingVariableError, Mod, Mul, Not, Or, QAdd, QMax, QMin, QNeg,
    QScale, Seq, Skip, State, Sub, Sup, Var, While, eval_aexpr, eval_bexpr,
    eval_quantity, fv_quantity, program_vars, quantity_key, subst_quantity,
)


def _st(**kv):
    return State.of(kv)


_DOM = DomainSpec.of({"x": (-4, 4), "y": (-4, 4)}, alpha_window=(-8, 8))


def test_state_lookup_and_update():
    s = _st(x=3, y=-1)
    assert s["x"] == 3
    assert s.get("y") == -1
    assert "x" in s and "z" not in s
    assert s.set("x", 7)["x"] == 7
    assert s["x"] == 3
    assert str(_st(b=2, a=1)) == "{a=1, b=2}"
    with pytest.raises(MissingVariableError):
        s.get("z")


def test_eval_aexpr():
    s = _st(x=5, y=2)
    assert eval_aexpr(Add(Var("x"), IntLit(1)), s) == 6
    assert eval_aexpr(Sub(Var("x"), Var("y")), s) == 3
    assert eval_aexpr(Mul(3, Var("y")), s) == 6
    assert eval_aexpr(Mod(Var("x"), 4), s) == 1


def test_mod_is_nonnegative_for_negative_operands():
    assert eval_aexpr(Mod(Var("x"), 4), _st(x=-1)) == 3
    assert eval_aexpr(Mod(Var("x"), 4), _st(x=-8)) == 0


def test_eval_bexpr():
    s = _st(x=5, y=2)
    assert eval_bexpr(Cmp(Var("x"), ">", Var("y")), s)
    assert not eval_bexpr(Cmp(Var("x"), "<=", IntLit(4)), s)
    assert eval_bexpr(And(BoolLit(True), Not(BoolLit(False))), s)
    assert eval_bexpr(Or(BoolLit(False), Cmp(Var("y"), "=", IntLit(2))), s)


def test_iverson_is_infinite_valued():
    q = Iverson(Cmp(Var("x"), ">=", IntLit(0)))
    assert eval_quantity(q, _st(x=1), _DOM) == POS_INF
    assert eval_quantity(q, _st(x=-1), _DOM) == NEG_INF


def test_quantity_operators():
    s = _st(x=3)
    assert eval_quantity(QMin(Const(ExtReal(2)), Arith(Var("x"))), s, _DOM) \
        == ExtReal(2)
    assert eval_quantity(QMax(Const(ExtReal(2)), Arith(Var("x"))), s, _DOM) \
        == ExtReal(3)
    assert eval_quantity(QAdd(Arith(Var("x")), Const(ExtReal(10))), s, _DOM) \
        == ExtReal(13)
    assert eval_quantity(QNeg(Arith(Var("x"))), s, _DOM) == ExtReal(-3)
    assert eval_quantity(QScale(2, Arith(Var("x"))), s, _DOM) == ExtReal(6)


def test_sup_and_inf_range_over_the_alpha_window():
    sup = Sup("a", Arith(Var("a")))
    inf = Inf("a", Arith(Var("a")))
    assert eval_quantity(sup, _st(), _DOM) == ExtReal(8)
    assert eval_quantity(inf, _st(), _DOM) == ExtReal(-8)
    guarded = Sup("a", QMin(Iverson(Cmp(Var("a"), "<=", Var("x"))), Arith(Var("a"))))
    assert eval_quantity(guarded, _st(x=3), _DOM) == ExtReal(3)


def test_binder_shadows_state_variable():
    q = Sup("x", QMin(Iverson(Cmp(Var("x"), "<=", IntLit(2))), Arith(Var("x"))))
    assert eval_quantity(q, _st(x=100), _DOM) == ExtReal(2)


def test_substitution_respects_binders():
    q = QAdd(Arith(Var("x")), Sup("x", Arith(Var("x"))))
    out = subst_quantity(q, "x", IntLit(9))
    assert eval_quantity(out, _st(), _DOM) == ExtReal(9 + 8)


def test_free_variables():
    q = QAdd(Arith(Var("x")), Sup("a", QMin(Arith(Var("a")), Arith(Var("y")))))
    assert fv_quantity(q) == frozenset({"x", "y"})
    c = Seq(Assign("x", Add(Var("z"), IntLit(1))),
            While(Cmp(Var("y"), "<", IntLit(3)), Skip()))
    assert program_vars(c) == frozenset({"x", "y", "z"})


def test_quantity_key_ignores_binder_names():
    a = Sup("a", QMin(Arith(Var("a")), Arith(Var("x"))))
    b = Sup("fresh", QMin(Arith(Var("fresh")), Arith(Var("x"))))
    assert quantity_key(a) == quantity_key(b)
    assert quantity_key(a) != quantity_key(Sup("a", QMin(Arith(Var("a")), Arith(Var("y")))))


def test_domain_spec_enumeration_and_widening():
    dom = DomainSpec.of({"x": (0, 1), "y": (5, 6)})
    states = list(dom.states())
    assert len(states) == dom.size() == 4
    assert states[0] == _st(x=0, y=5)
    assert states[-1] == _st(x=1, y=6)
    wide = dom.widened(2)
    assert wide.interval("x") == (-2, 3)
    assert wide.alpha_window == dom.alpha_window
    assert wide.fuel == dom.fuel


def test_domain_spec_validation():
    with pytest.raises(ValueError):
        DomainSpec.of({"x": (3, 1)})
    with pytest.raises(ValueError):
        DomainSpec.of({"x": (0, 1)}, fuel=0)
    dom = DomainSpec.of({"x": (0, 1)})
    with pytest.raises(MissingVariableError):
        dom.require({"x", "q"})


def test_program_nodes_are_hashable_and_comparable():
    c1 = If(Cmp(Var("x"), ">", IntLit(0)), Assign("x", IntLit(1)), Skip())
    c2 = If(Cmp(Var("x"), ">", IntLit(0)), Assign("x", IntLit(1)), Skip())
    assert c1 == c2
    assert hash(c1) == hash(c2)
