import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiophantine.diophantine import (
    CoefficientRangeError,
    EvaluationRangeError,
    MinOverBox,
    ParseError,
    Polynomial,
    VariableSemantics,
    WorkCapExceeded,
    brute_force_search,
    evaluate,
    min_over_box,
    parse_equation,
    substitute_shift,
    to_text,
)


# -- parsing -----------------------------------------------------------------


def test_parse_linear_two_vars():
    p = parse_equation("x + y - 5")
    assert p.variable_names == ("x", "y")
    assert p.num_vars == 2
    assert p.term_map() == {(1, 0): 1, (0, 1): 1, (0, 0): -5}


def test_parse_binomial_expansion():
    p = parse_equation("(x+1)^3 - 8")
    assert p.term_map() == {(3,): 1, (2,): 3, (1,): 3, (0,): -7}


def test_parse_coefficient_times_var():
    p = parse_equation("2*x - 3")
    assert p.num_vars == 1
    assert p.term_map() == {(1,): 2, (0,): -3}


def test_parse_equals_normalization():
    assert parse_equation("x + y = 5") == parse_equation("x + y - 5")
    assert parse_equation("x^2 = 4") == parse_equation("x^2 - 4")


def test_parse_leading_minus():
    assert parse_equation("-x + 7") == parse_equation("7 - x")


def test_parse_non_literal_exponent_rejected():
    with pytest.raises(ParseError) as err:
        parse_equation("x^y")
    assert err.value.position == 2


def test_parse_syntax_error_position():
    with pytest.raises(ParseError) as err:
        parse_equation("x + * y")
    assert err.value.position == 4


def test_parse_unexpected_character():
    with pytest.raises(ParseError):
        parse_equation("x + $")


def test_parse_adjacent_factors_need_star():
    with pytest.raises(ParseError):
        parse_equation("2x - 3")


def test_parse_variable_cap():
    ok = "a+b+c+d+e+f+g+h"
    assert parse_equation(ok).num_vars == 8
    with pytest.raises(ParseError):
        parse_equation(ok + "+i")


def test_parse_coefficient_overflow():
    with pytest.raises(CoefficientRangeError):
        parse_equation(str(2**63))
    with pytest.raises(CoefficientRangeError):
        parse_equation("(x+1)^100")
    assert parse_equation(str(2**63 - 1)).term_map() == {(): 2**63 - 1}


def test_parse_constant_and_zero():
    five = parse_equation("5")
    assert five.num_vars == 0
    assert five.term_map() == {(): 5}
    zero = parse_equation("x - x")
    assert zero.is_zero()
    assert zero.num_vars == 0
    assert to_text(zero) == "0"
    assert parse_equation("0") == zero


def test_canonical_variable_order_is_lexicographic():
    assert parse_equation("y + x").variable_names == ("x", "y")
    assert parse_equation("y + x") == parse_equation("x + y")


def test_cancelled_variable_is_dropped():
    p = parse_equation("x + y - y")
    assert p.variable_names == ("x",)


def test_round_trip_examples():
    for text in ["x + y - 5", "(x+1)^3 - 8", "2*x - 3", "x^2 - 4", "-x + 7"]:
        p = parse_equation(text)
        assert parse_equation(to_text(p)) == p


# -- hypothesis strategies ---------------------------------------------------

_names = st.lists(
    st.sampled_from(["x", "y", "z", "u", "v"]), min_size=1, max_size=3, unique=True
)


@st.composite
def polynomials(draw, names=None):
    if names is None:
        names = draw(_names)
    k = len(names)
    n_terms = draw(st.integers(0, 4))
    terms = {}
    for _ in range(n_terms):
        e = tuple(draw(st.integers(0, 3)) for _ in range(k))
        c = draw(st.integers(-50, 50))
        terms[e] = c
    return Polynomial.from_terms(terms, names)


@settings(max_examples=150, deadline=None)
@given(polynomials())
def test_round_trip_property(p):
    assert parse_equation(to_text(p)) == p


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_ring_axioms(data):
    names = data.draw(_names)
    p = data.draw(polynomials(names=names))
    q = data.draw(polynomials(names=names))
    point = tuple(data.draw(st.integers(0, 5)) for _ in names)

    def at(poly):
        # operands may have dropped different unused variables
        full = {n: v for n, v in zip(names, point)}
        return evaluate(poly, tuple(full[n] for n in poly.variable_names))

    assert at(p + q) == at(p) + at(q)
    assert at(p * q) == at(p) * at(q)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_positive_shift_matches_shifted_evaluation(data):
    p = data.draw(polynomials())
    point = tuple(data.draw(st.integers(0, 4)) for _ in p.variable_names)
    shifted = substitute_shift(p, VariableSemantics.POSITIVE)
    assert evaluate(shifted, point) == evaluate(p, tuple(v + 1 for v in point))


# -- shift -------------------------------------------------------------------


def test_shift_examples():
    p = parse_equation("x - 1")
    assert substitute_shift(p, VariableSemantics.POSITIVE) == parse_equation("x")
    assert substitute_shift(p, VariableSemantics.NON_NEGATIVE) == p
    q = parse_equation("x^2 - 4")
    assert substitute_shift(q, VariableSemantics.POSITIVE) == parse_equation(
        "x^2 + 2*x - 3"
    )


# -- evaluation --------------------------------------------------------------


def test_evaluate_examples():
    assert evaluate(parse_equation("x + y - 5"), (2, 3)) == 0
    assert evaluate(parse_equation("2*x - 3"), (1,)) == -1
    cubes = parse_equation("(x+1)^3 + (y+1)^3 - (z+1)^3")
    assert evaluate(cubes, (2, 3, 4)) == 3**3 + 4**3 - 5**3 == -34


def test_evaluate_arity_and_domain():
    p = parse_equation("x + y")
    with pytest.raises(ValueError):
        evaluate(p, (1,))
    with pytest.raises(ValueError):
        evaluate(p, (1, -2))


def test_evaluate_range_guard():
    p = parse_equation("x^2")
    assert evaluate(p, (2**63,)) == 2**126
    with pytest.raises(EvaluationRangeError):
        evaluate(p, (2**64,))


# -- brute-force search ------------------------------------------------------


def test_search_linear():
    assert brute_force_search(parse_equation("x + y - 5"), 10) == (0, 5)


def test_search_parity_unsolvable():
    assert brute_force_search(parse_equation("2*x - 3"), 100) is None


def test_search_pythagorean_shifted():
    # independent oracle: exhaustive scan picking the graded-lex first zero
    p = parse_equation("(x+1)^2 + (y+1)^2 - (z+1)^2")
    expected = None
    for point in sorted(
        itertools.product(range(7), repeat=3), key=lambda t: (sum(t), t)
    ):
        x, y, z = point
        if (x + 1) ** 2 + (y + 1) ** 2 - (z + 1) ** 2 == 0:
            expected = point
            break
    assert expected == (2, 3, 4)
    assert brute_force_search(p, 6) == expected


def test_search_certificate_and_exhaustiveness():
    for text, bound in [("x^2 - 3*x + 2", 5), ("x*y - 7", 9), ("x^2 + 1", 9)]:
        p = parse_equation(text)
        witness = brute_force_search(p, bound)
        box = itertools.product(range(bound + 1), repeat=p.num_vars)
        zeros = [v for v in box if evaluate(p, v) == 0]
        if witness is None:
            assert zeros == []
        else:
            assert evaluate(p, witness) == 0
            assert witness == min(zeros, key=lambda t: (sum(t), t))


def test_work_cap():
    p = parse_equation("a + b + c + d")
    with pytest.raises(WorkCapExceeded):
        brute_force_search(p, 100)
    with pytest.raises(WorkCapExceeded):
        min_over_box(p, 100)
    assert brute_force_search(p, 100, work_cap=10**9) == (0, 0, 0, 0)


# -- min over box ------------------------------------------------------------


def test_min_over_box_examples():
    assert min_over_box(parse_equation("x - 1"), 3) == MinOverBox(0, (1,), 1)
    assert min_over_box(parse_equation("2*x - 3"), 3) == MinOverBox(1, (1,), 2)
    assert min_over_box(parse_equation("x + y - 5"), 7) == MinOverBox(0, (0, 5), 6)


@settings(max_examples=60, deadline=None)
@given(polynomials(), st.integers(0, 4))
def test_min_zero_iff_witness(p, bound):
    result = min_over_box(p, bound)
    witness = brute_force_search(p, bound)
    if result.value == 0:
        assert witness is not None and witness == result.argmin
    else:
        assert witness is None
