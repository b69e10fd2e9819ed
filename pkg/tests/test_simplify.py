import random

from hypothesis import given, settings
from hypothesis import strategies as st

from quantgcl.generators import gen_quantity
from quantgcl.lattice import IndeterminateFormError, NEG_INF, POS_INF
from quantgcl.parser import parse_quantity
from quantgcl.simplify import collapse_guards, simplify
from quantgcl.syntax import (
    DomainSpec, eval_quantity, quantity_key, quantity_to_str,
)

_DOM = DomainSpec.of({"x": (-4, 4), "y": (-4, 4)})


def _simp(text):
    return quantity_to_str(simplify(parse_quantity(text)))


def test_iverson_units():
    assert _simp("[true]") == "+inf"
    assert _simp("[false]") == "-inf"
    assert _simp("min([x > 0], +inf)") == "[x >= 1]"
    assert _simp("max([x > 0], -inf)") == "[x >= 1]"


def test_strict_comparisons_normalize_to_inclusive():
    assert _simp("[x < 3]") == "[x <= 2]"
    assert _simp("[x > 0]") == "[x >= 1]"
    assert _simp("[3 <= x]") == "[x >= 3]"


def test_complementary_brackets_collapse():
    assert _simp("max([x > 0], [x <= 0])") == "+inf"
    assert _simp("min([x > 0], [x <= 0])") == "-inf"
    assert _simp("min([x > 0 && x < 0], y)") == "-inf"
    assert _simp("[x > 0 || x <= 0]") == "+inf"


def test_duplicate_and_nested_members_merge():
    assert _simp("min([x > 0], [x > 0])") == "[x >= 1]"
    assert _simp("max(x, x)") == "x"
    assert _simp("min([x>0], min([x>0], y))") == "min(y, [x >= 1])"
    assert _simp("min(max(x, 3), max(x, 3))") == "max(x, 3)"


def test_linear_arithmetic_canonicalizes():
    assert _simp("min(x + 1 - 1, x)") == "x"
    assert _simp("2 * (x + 1)") == "2 * x + 2"
    assert _simp("-(x - 2)") == "2 - x"


def test_one_point_binders_are_eliminated():
    assert _simp("Sup a. min([x = a + 1], a)") == "x - 1"
    assert _simp("Inf a. max([x != a + 1], a + a)") == "2 * x - 2"


def test_one_point_elimination_is_pointwise_exact():
    q = parse_quantity("Sup a. min([x = a + 1], a)")
    r = simplify(q)
    for s in _DOM.states():
        assert eval_quantity(q, s, _DOM) == eval_quantity(r, s, _DOM)


def test_collapse_guards_resolves_cross_level_contradiction():
    q = simplify(parse_quantity("min([x <= 2], max(min([x >= 5], y), z))"))
    out = collapse_guards(q)
    assert quantity_to_str(out) == "min(z, [x <= 2])"


def test_collapse_guards_resolves_cross_level_entailment():
    q = simplify(parse_quantity("max([x <= 0], min(y, max([x >= 1], z)))"))
    out = collapse_guards(q)
    assert quantity_to_str(out) == "max(y, [x <= 0])"
    dom = DomainSpec.of({"x": (-6, 6), "y": (-6, 6), "z": (-6, 6)})
    for s in dom.states():
        assert eval_quantity(out, s, dom) == eval_quantity(q, s, dom)


def _agree(a, b, s):
    try:
        va = eval_quantity(a, s, _DOM)
    except IndeterminateFormError:
        try:
            eval_quantity(b, s, _DOM)
        except IndeterminateFormError:
            return True
        return False
    return va == eval_quantity(b, s, _DOM)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_simplify_preserves_evaluation(seed):
    rng = random.Random(seed)
    q = gen_quantity(rng, ("x", "y"))
    r = simplify(q)
    for s in _DOM.states():
        assert _agree(q, r, s)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_simplify_is_idempotent(seed):
    rng = random.Random(seed)
    r = simplify(gen_quantity(rng, ("x", "y")))
    assert quantity_key(simplify(r)) == quantity_key(r)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_collapse_guards_preserves_evaluation(seed):
    rng = random.Random(seed)
    q = simplify(gen_quantity(rng, ("x", "y")))
    out = collapse_guards(q)
    for s in _DOM.states():
        assert _agree(q, out, s)


def test_infinity_constants_fold_in_lattice_ops():
    assert _simp("min(-inf, [x > 0])") == "-inf"
    assert _simp("max(+inf, x)") == "+inf"
    assert eval_quantity(simplify(parse_quantity("max(-inf, -inf)")),
                         _DOM.states().__next__(), _DOM) == NEG_INF
    assert eval_quantity(simplify(parse_quantity("min(+inf, +inf)")),
                         _DOM.states().__next__(), _DOM) == POS_INF
