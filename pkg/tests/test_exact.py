"""Exact tower arithmetic, checked against sympy as an independent oracle."""

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from modcomm.errors import DivisionByZero, FieldMismatch, InvalidField, ParseError
from modcomm.exact import (
    QQ,
    Mat2,
    ProjMat,
    QuadElem,
    TraceClass,
    classify_by_trace,
    galois_sigma,
    is_rational,
    join,
    lowest_form,
    matrix_from_dict,
    parse_matrix,
    parse_scalar,
    pmat,
    quad_k,
    quad_l,
    rational_sqrt,
    sign,
    sqrt_in,
    sqrtq_membership,
    squarefree_part,
    to_text,
)

RADICANDS = [2, 3, 5, 6, 7, 10, 11]
fracs = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def to_sympy(x):
    if isinstance(x, QuadElem):
        return to_sympy(x.a) + to_sympy(x.b) * sympy.sqrt(to_sympy(x.field.radicand))
    x = Fraction(x)
    return sympy.Rational(x.numerator, x.denominator)


def same(x, expr) -> bool:
    return sympy.simplify(sympy.radsimp(to_sympy(x) - expr)) == 0


@st.composite
def k_elems(draw, d=None):
    d = d or draw(st.sampled_from(RADICANDS))
    return QuadElem(quad_k(d), draw(fracs), draw(fracs))


# --- arithmetic in Q(sqrt d) against sympy


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(RADICANDS), st.data())
def test_field_operations_match_sympy(d, data):
    x, y = data.draw(k_elems(d)), data.draw(k_elems(d))
    sx, sy = to_sympy(x), to_sympy(y)
    assert same(x + y, sx + sy)
    assert same(x - y, sx - sy)
    assert same(x * y, sympy.expand(sx * sy))
    if y:
        assert same(x / y, sx / sy)
    else:
        with pytest.raises(DivisionByZero):
            x / y


@settings(max_examples=80, deadline=None)
@given(k_elems())
def test_sign_matches_high_precision_evaluation(x):
    val = sympy.N(to_sympy(x), 60)
    expect = 0 if val == 0 else (1 if val > 0 else -1)
    assert sign(x) == expect


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_second_level_tower_against_sympy(data):
    d = data.draw(st.sampled_from([2, 3, 5]))
    K = quad_k(d)
    zeta = K.coerce(1) + K.gen  # 1 + sqrt d, positive and not a square in K
    L = quad_l(d, zeta)
    x = QuadElem(L, data.draw(k_elems(d)), data.draw(k_elems(d)))
    y = QuadElem(L, data.draw(k_elems(d)), data.draw(k_elems(d)))
    assert same(x * y, sympy.expand(to_sympy(x) * to_sympy(y)))
    val = sympy.N(to_sympy(x), 60)
    assert sign(x) == (0 if val == 0 else (1 if val > 0 else -1))


@settings(max_examples=60, deadline=None)
@given(k_elems())
def test_galois_sigma_negates_the_root(x):
    d = x.field.radicand
    expr = to_sympy(x).subs(sympy.sqrt(to_sympy(d)), -sympy.sqrt(to_sympy(d)))
    assert same(galois_sigma(x), expr)
    assert galois_sigma(galois_sigma(x)) == x


@settings(max_examples=60, deadline=None)
@given(k_elems())
def test_text_round_trip(x):
    assert parse_scalar(to_text(x), x.field) == x


# --- small facts


@pytest.mark.parametrize("n", [1, 8, 12, 50, 18, 30, 72, 1001, 2 ** 7 * 3 ** 4 * 5])
def test_squarefree_part(n):
    expect = 1
    for p, e in sympy.factorint(n).items():
        if e % 2:
            expect *= p
    assert squarefree_part(n) == expect
    with pytest.raises(ValueError):
        squarefree_part(-n)


def test_rational_sqrt():
    assert rational_sqrt(Fraction(9, 4)) == Fraction(3, 2)
    assert rational_sqrt(Fraction(2)) is None
    assert rational_sqrt(Fraction(0)) == 0


def test_sqrt_in_fields():
    K = quad_k(2)
    assert sqrt_in(K, 2) == K.gen
    assert sqrt_in(QQ, Fraction(4, 9)) == Fraction(2, 3)
    assert sqrt_in(QQ, 2) is None
    r = sqrt_in(K, 3 + 2 * K.gen)  # (1 + sqrt 2)^2
    assert r is not None and r * r == 3 + 2 * K.gen


def test_invalid_fields_and_mismatch():
    with pytest.raises(InvalidField):
        quad_k(4)
    with pytest.raises(InvalidField):
        quad_l(2, 2)  # 2 is a square in Q(sqrt 2)
    with pytest.raises(FieldMismatch):
        join(quad_k(2), quad_k(3))
    assert not (quad_k(2).gen == quad_k(3).gen)


def test_lowest_form_and_rationality():
    K = quad_k(5)
    x = QuadElem(K, Fraction(3, 2), 0)
    assert is_rational(x) and lowest_form(x) == Fraction(3, 2)


def test_parse_errors():
    for bad in ["", "1 +", "sqrt(", "1.5", "abc"]:
        with pytest.raises(ParseError):
            parse_scalar(bad)
    with pytest.raises(ParseError):
        parse_matrix("1, 2; 3")


# --- matrices


def test_projective_canonical_sign_and_inverse():
    m = parse_matrix("-1, -1; 0, -1")
    assert m.entries() == pmat(1, 1, 0, 1).entries()
    assert (m * m.inverse()).entries() == pmat(1, 0, 0, 1).entries()
    assert m.conj(pmat(0, -1, 1, 0)).entries() == pmat(1, 0, -1, 1).entries()


def test_non_unimodular_input_is_rejected():
    with pytest.raises(ParseError):
        parse_matrix("2, 0; 0, 1")


def test_matrix_dict_round_trip():
    g = parse_matrix("sqrt(2), 0; 0, 1/sqrt(2)")
    assert matrix_from_dict(g.to_dict()).entries() == g.entries()


@pytest.mark.parametrize("text, cls", [
    ("1, 1; 0, 1", TraceClass.PARABOLIC),
    ("0, -1; 1, 0", TraceClass.ELLIPTIC),
    ("2, 1; 1, 1", TraceClass.HYPERBOLIC),
])
def test_trace_classification(text, cls):
    assert classify_by_trace(parse_matrix(text)) is cls


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=4, max_size=4))
def test_sqrtq_membership_recovers_the_radicand(ents):
    B = Mat2(*(Fraction(e) for e in ents))
    D = B.det()
    if D <= 0:
        return
    # oracle: sympy writes sqrt(D) as m * sqrt(q) with q squarefree
    root = sympy.sqrt(sympy.Rational(D.numerator, D.denominator))
    q = 1
    for fac in sympy.Mul.make_args(root):
        if isinstance(fac, sympy.Pow):
            q = int(fac.base)
    if q == 1:
        g = ProjMat.of(B.scale(1 / rational_sqrt(D)))
    else:
        m = rational_sqrt(D / q)
        g = ProjMat.of(B.scale(quad_k(q).gen / (m * q)))
    dec = sqrtq_membership(g)
    assert dec is not None and dec.q == q
    assert dec.matrix().entries() == g.entries()
    ratio = [x / y for x, y in zip(dec.B, B) if y != 0]
    assert len(set(ratio)) == 1 and all(x == 0 for x, y in zip(dec.B, B) if y == 0)


def test_sqrtq_membership_rejects_mixed_entries():
    assert sqrtq_membership(parse_matrix("1, sqrt(2); 0, 1")) is None
