import pytest

from quantgcl.lattice import ExtReal, NEG_INF, POS_INF
from quantgcl.oracle import (
    DomainEscapeError, EscapePolicy, FuelExhaustedError, collect,
    filter_config, reachable_from_box, ref_slp, ref_sp, ref_wlp, ref_wp,
)
from quantgcl.parser import parse_program, parse_quantity
from quantgcl.syntax import DomainSpec, State


def _states(*dicts):
    return frozenset(State.of(d) for d in dicts)


def test_collect_drops_the_escaping_run():
    c = parse_program("while (x > 5) { x := x + 1 }")
    dom = DomainSpec.of({"x": (0, 64)}, fuel=128)
    out = collect(c, _states({"x": 0}, {"x": 8}), dom, EscapePolicy.DROP)
    assert out == _states({"x": 0})


def test_collect_error_policy_raises_on_escape():
    c = parse_program("x := x + 1")
    dom = DomainSpec.of({"x": (0, 4)})
    with pytest.raises(DomainEscapeError):
        collect(c, _states({"x": 4}), dom, EscapePolicy.ERROR)
    out = collect(c, _states({"x": 4}), dom, EscapePolicy.DROP)
    assert out == frozenset()


def test_collect_structural_cases():
    dom = DomainSpec.of({"x": (-8, 8)})
    skip = parse_program("skip")
    assert collect(skip, _states({"x": 1}), dom) == _states({"x": 1})
    assert collect(parse_program("diverge"), _states({"x": 1}), dom) \
        == frozenset()
    choice = parse_program("{ x := 1 } [] { x := 2 }")
    assert collect(choice, _states({"x": 0}), dom) \
        == _states({"x": 1}, {"x": 2})
    ite = parse_program("if (x > 0) { x := 1 } else { x := -1 }")
    assert collect(ite, _states({"x": 5}, {"x": -5}), dom) \
        == _states({"x": 1}, {"x": -1})


def test_collect_loop_gathers_every_exit():
    c = parse_program("while (x < 3) { x := x + 1 }")
    dom = DomainSpec.of({"x": (-2, 10)})
    out = collect(c, _states({"x": -2}, {"x": 0}, {"x": 7}), dom)
    assert out == _states({"x": 3}, {"x": 7})


def test_collect_fuel_exhaustion():
    c = parse_program("while (x < 100) { x := x + 1 }")
    dom = DomainSpec.of({"x": (0, 100)}, fuel=5)
    with pytest.raises(FuelExhaustedError):
        collect(c, _states({"x": 0}), dom)


def test_infinite_chatter_inside_the_box_stabilizes():
    c = parse_program("while (x < 2) { x := 1 }")
    dom = DomainSpec.of({"x": (0, 4)})
    assert collect(c, _states({"x": 3}), dom) == _states({"x": 3})
    assert collect(c, _states({"x": 0}), dom) == frozenset()


def test_filter_config():
    cond = parse_program("if (x > 0) { skip } else { skip }").cond
    states = _states({"x": -1}, {"x": 0}, {"x": 1})
    assert filter_config(cond, states) == _states({"x": 1})


def test_ref_wp_wlp_on_a_choice():
    c = parse_program("{ x := 1 } [] { x := 2 }")
    dom = DomainSpec.of({"x": (0, 4)})
    f = parse_quantity("x")
    sigma = State.of({"x": 0})
    assert ref_wp(c, f, sigma, dom) == ExtReal(2)
    assert ref_wlp(c, f, sigma, dom) == ExtReal(1)


def test_ref_wp_wlp_value_divergence():
    c = parse_program("diverge")
    dom = DomainSpec.of({"x": (0, 4)})
    f = parse_quantity("x")
    sigma = State.of({"x": 3})
    assert ref_wp(c, f, sigma, dom) == NEG_INF
    assert ref_wlp(c, f, sigma, dom) == POS_INF


def test_ref_sp_slp_fibers():
    c = parse_program("{ skip } [] { x := x + 1 }")
    dom = DomainSpec.of({"x": (0, 4)})
    f = parse_quantity("x")
    tau = State.of({"x": 3})
    assert ref_sp(c, f, tau, dom, EscapePolicy.DROP) == ExtReal(3)
    assert ref_slp(c, f, tau, dom, EscapePolicy.DROP) == ExtReal(2)


def test_ref_sp_slp_value_unreachable():
    c = parse_program("x := 1")
    dom = DomainSpec.of({"x": (0, 4)})
    f = parse_quantity("x")
    tau = State.of({"x": 3})
    assert ref_sp(c, f, tau, dom) == NEG_INF
    assert ref_slp(c, f, tau, dom) == POS_INF


def test_reachable_from_box():
    c = parse_program("if (x > 1) { x := 0 } else { skip }")
    dom = DomainSpec.of({"x": (0, 3)})
    assert reachable_from_box(c, dom) == _states({"x": 0}, {"x": 1})
