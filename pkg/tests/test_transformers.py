from quantgcl.oracle import EscapePolicy, ref_sp, ref_wp
from quantgcl.parser import parse_program, parse_quantity
from quantgcl.simplify import simplify
from quantgcl.syntax import DomainSpec, State, eval_quantity, quantity_key
from quantgcl.transformers import (
    ConvergedAt, Exact, Mode, TransformConfig, TruncatedAt, transform,
)

_ADD_FIVE = "hi := hi + 5; while (lo < hi) { lo := lo + 1 }"


def _run(mode, program, quantity, fuel=64):
    return transform(mode, parse_program(program),
                     parse_quantity(quantity), TransformConfig(fuel=fuel))


def _expect(result, expected_text, dom):
    want = simplify(parse_quantity(expected_text))
    assert quantity_key(result.quantity) == quantity_key(want)
    for s in dom.states():
        assert eval_quantity(result.quantity, s, dom) \
            == eval_quantity(want, s, dom)


def test_assignment_rules_match_closed_forms():
    dom = DomainSpec.of({"x": (-16, 16)})
    cases = [
        (Mode.SP, "x := x + 1", "x", "x - 1"),
        (Mode.SP, "x := 10", "x", "[x = 10]"),
        (Mode.SLP, "x := 10", "x", "[x != 10]"),
        (Mode.SLP, "x := x + 1", "x", "x - 1"),
        (Mode.WLP, "x := x + 1", "2 * x", "2 * x + 2"),
    ]
    for mode, program, quantity, expected in cases:
        r = _run(mode, program, quantity)
        assert r.status == Exact()
        _expect(r, expected, dom)


def test_add_five_loop_converges_at_two_iterations():
    dom = DomainSpec.of({"lo": (-4, 12), "hi": (-4, 12)})
    sp = _run(Mode.SP, _ADD_FIVE, "hi")
    assert sp.status == ConvergedAt(2)
    _expect(sp, "min([lo >= hi], hi - 5)", dom)
    slp = _run(Mode.SLP, _ADD_FIVE, "hi")
    assert slp.status == ConvergedAt(2)
    _expect(slp, "max([lo < hi], hi - 5)", dom)


def test_mod_four_loop_converges_both_directions():
    dom = DomainSpec.of({"x": (-2, 14)})
    sp = _run(Mode.SP, "while (x < 10) { x := x + 4 }", "[x % 4 = 0]")
    assert sp.status == ConvergedAt(2)
    _expect(sp, "[x % 4 = 0 && x >= 10]", dom)
    slp = _run(Mode.SLP, "while (x < 10) { x := x + 4 }", "[x % 4 = 0]")
    assert slp.status == ConvergedAt(2)
    _expect(slp, "[x % 4 = 0 || x <= 9]", dom)


def test_wp_of_add_five_truncates_to_a_lower_bound():
    dom = DomainSpec.of({"lo": (0, 9), "hi": (0, 9)})
    refdom = dom.widened(8)
    for fuel in (4, 8, 16):
        r = _run(Mode.WP, _ADD_FIVE, "[lo = 7]", fuel=fuel)
        assert r.status == TruncatedAt(fuel, "lower")
        assert not r.trustworthy
        for s in dom.states():
            got = eval_quantity(r.quantity, s, dom)
            ref = ref_wp(parse_program(_ADD_FIVE),
                         parse_quantity("[lo = 7]"), s, refdom,
                         EscapePolicy.DROP)
            assert got <= ref


def test_wp_truncation_sharpens_with_more_fuel():
    dom = DomainSpec.of({"lo": (0, 9), "hi": (0, 9)})
    small = _run(Mode.WP, _ADD_FIVE, "[lo = 7]", fuel=4)
    big = _run(Mode.WP, _ADD_FIVE, "[lo = 7]", fuel=12)
    for s in dom.states():
        assert eval_quantity(small.quantity, s, dom) \
            <= eval_quantity(big.quantity, s, dom)


def test_diverge_collapses_to_the_mode_unit():
    dom = DomainSpec.of({"x": (-4, 4)})
    for mode, expected in [(Mode.WP, "-inf"), (Mode.WLP, "+inf"),
                           (Mode.SP, "-inf"), (Mode.SLP, "+inf")]:
        r = _run(mode, "diverge", "x")
        assert r.status == Exact()
        _expect(r, expected, dom)


def test_skip_is_the_identity_in_every_mode():
    dom = DomainSpec.of({"x": (-4, 4)})
    for mode in Mode:
        r = _run(mode, "skip", "min(x, [x >= 0])")
        assert r.status == Exact()
        _expect(r, "min(x, [x >= 0])", dom)


def test_choice_joins_or_meets_the_branches():
    dom = DomainSpec.of({"x": (-4, 4)})
    cases = [
        (Mode.WP, "max(x + 1, x)"),
        (Mode.WLP, "min(x + 1, x)"),
        (Mode.SP, "max(x - 1, x)"),
        (Mode.SLP, "min(x - 1, x)"),
    ]
    for mode, expected in cases:
        r = _run(mode, "{ skip } [] { x := x + 1 }", "x")
        assert r.status == Exact()
        _expect(r, expected, dom)


def test_if_guards_the_branches():
    dom = DomainSpec.of({"x": (-4, 4)})
    program = "if (x > 0) { x := x + 1 } else { x := x - 1 }"
    r = _run(Mode.WP, program, "x")
    refdom = dom.widened(2)
    for s in dom.states():
        assert eval_quantity(r.quantity, s, dom) \
            == ref_wp(parse_program(program), parse_quantity("x"), s,
                      refdom, EscapePolicy.DROP)


def test_forward_modes_agree_with_the_reference_on_a_loop():
    dom = DomainSpec.of({"x": (0, 14)})
    refdom = dom.widened(8)
    program = parse_program("while (x < 10) { x := x + 4 }")
    f = parse_quantity("[x % 4 = 0]")
    r = transform(Mode.SP, program, f, TransformConfig(fuel=32))
    assert r.trustworthy
    for s in dom.states():
        assert eval_quantity(r.quantity, s, dom) \
            == ref_sp(program, f, s, refdom, EscapePolicy.DROP)


def test_status_of_a_sequence_takes_the_weakest_link():
    exact = _run(Mode.SP, "x := x + 1; x := x * 1", "x")
    assert exact.status == Exact()
    conv = _run(Mode.SP, _ADD_FIVE, "hi")
    assert conv.status == ConvergedAt(2)
    trunc = _run(Mode.WP, _ADD_FIVE + "; skip", "[lo = 7]", fuel=4)
    assert trunc.status == TruncatedAt(4, "lower")


def test_liberal_truncation_reports_an_upper_bound():
    r = _run(Mode.WLP, _ADD_FIVE, "[lo = 7]", fuel=2)
    if isinstance(r.status, TruncatedAt):
        assert r.status.bound == "upper"
    else:
        assert r.trustworthy


def test_probe_domain_controls_convergence_detection():
    loop = parse_program(_ADD_FIVE)
    f = parse_quantity("hi")
    probe = DomainSpec.of({"lo": (-4, 12), "hi": (-4, 12)})
    r = transform(Mode.SP, loop, f, TransformConfig(fuel=64, probe=probe))
    assert r.status == ConvergedAt(2)
