"""Free-group words, Magnus expansion, Fox calculus and series membership."""

from collections import defaultdict

import pytest
from hypothesis import given, settings, strategies as st
from sympy.combinatorics.free_groups import free_group

from modcomm.errors import EmptyWord, ParseError
from modcomm.freegrp import (
    GroupRingElem,
    Membership,
    MoreThan,
    SeriesSpec,
    Word,
    abelianize,
    commutator,
    derived,
    fox_derivative,
    gen,
    in_series,
    lcs_depth,
    lower_central,
    magnus,
    parse_word,
)

RANK = 3
FS, *SYMS = free_group("a b c")
letters = st.sampled_from([1, 2, 3, -1, -2, -3])
words = st.lists(letters, max_size=14).map(lambda ls: Word(tuple(ls)))
raw = st.lists(letters, max_size=14)

x, y, z = gen(1), gen(2), gen(3)


def to_sympy(letters):
    out = FS.identity
    for l in letters:
        g = SYMS[abs(l) - 1]
        out = out * (g if l > 0 else g ** -1)
    return out


# --- free reduction against sympy's free groups


@settings(max_examples=200, deadline=None)
@given(raw)
def test_reduction_matches_sympy(ls):
    w = Word(tuple(ls))
    assert to_sympy(w.letters) == to_sympy(ls)
    assert all(w.letters[i] != -w.letters[i + 1] for i in range(len(w.letters) - 1))


@settings(max_examples=100, deadline=None)
@given(words, words)
def test_group_laws(u, v):
    assert (u * v).inverse() == v.inverse() * u.inverse()
    assert u * u.inverse() == Word()
    assert to_sympy((u * v).letters) == to_sympy(u.letters) * to_sympy(v.letters)


# --- Fox calculus: fundamental identity and product rule on 500 pairs


def _monomial(vec):
    return GroupRingElem.monomial(vec)


def _ab(w):
    return abelianize(w, RANK)


@settings(max_examples=500, deadline=None)
@given(words, words)
def test_fox_identities(u, v):
    one = _monomial((0,) * RANK)
    # w - 1 = sum_i (dw/dx_i)(x_i - 1), abelianized
    for w in (u, v, u * v):
        rhs = GroupRingElem()
        for i in range(1, RANK + 1):
            e = [0] * RANK
            e[i - 1] = 1
            rhs = rhs + fox_derivative(w, i, RANK) * (_monomial(e) - one)
        assert rhs == _monomial(_ab(w)) - one
    # product rule d(uv) = du + u dv
    for i in range(1, RANK + 1):
        lhs = fox_derivative(u * v, i, RANK)
        assert lhs == fox_derivative(u, i, RANK) + _monomial(_ab(u)) * fox_derivative(v, i, RANK)


def test_fox_commutator_fixture():
    dx = fox_derivative(commutator(x, y), 1, 2)
    dy = fox_derivative(commutator(x, y), 2, 2)
    assert dx.to_list() == [[[0, 0], 1], [[0, 1], -1]]
    assert dy.to_list() == [[[0, 0], -1], [[1, 0], 1]]


# --- Magnus expansion


@settings(max_examples=200, deadline=None)
@given(words)
def test_magnus_degree_one_is_abelianization(w):
    m = magnus(w, 1)
    assert tuple(m.get((i,), 0) for i in range(1, RANK + 1)) == _ab(w)


@settings(max_examples=100, deadline=None)
@given(words, words)
def test_magnus_is_multiplicative(u, v):
    deg = 3
    mu, mv = magnus(u, deg), magnus(v, deg)
    prod = defaultdict(int)
    for a, c in mu.items():
        for b, d in mv.items():
            if len(a) + len(b) <= deg:
                prod[a + b] += c * d
    assert {k: c for k, c in prod.items() if c} == magnus(u * v, deg)


# --- lower central and derived series


def test_series_fixtures():
    assert lcs_depth(commutator(x, y)) == 2
    assert lcs_depth(commutator(commutator(x, y), y)) == 3
    assert lcs_depth(x) == 1
    assert in_series(commutator(x, y), derived(2)) is Membership.IN
    assert in_series(commutator(x, y), derived(3)) is Membership.NOT_IN
    assert in_series(commutator(commutator(x, y), commutator(x, z)), derived(3), 3) is Membership.IN


def test_lcs_depth_bounds():
    with pytest.raises(EmptyWord):
        lcs_depth(Word())
    deep = commutator(commutator(commutator(x, y), x), y)
    assert lcs_depth(deep, cmax=3) == MoreThan(3)
    assert lcs_depth(deep, cmax=6) == 4
    assert in_series(deep, lower_central(8), 2, cmax=6) is Membership.UNDECIDABLE


def test_derived_beyond_three_is_undecidable():
    assert in_series(commutator(x, y), derived(4)) is Membership.UNDECIDABLE


@settings(max_examples=100, deadline=None)
@given(words.filter(lambda w: bool(w.letters)), words)
def test_lcs_depth_is_conjugation_invariant(w, g):
    assert lcs_depth(w.conj(g)) == lcs_depth(w)


@settings(max_examples=100, deadline=None)
@given(words.filter(lambda w: bool(w.letters)), words.filter(lambda w: bool(w.letters)))
def test_commutators_descend(u, v):
    c = commutator(u, v)
    if not c.letters:
        return
    du, dv, dc = lcs_depth(u), lcs_depth(v), lcs_depth(c)
    if isinstance(dc, MoreThan):
        return
    assert dc >= du + dv


def test_parse_word_and_series_spec():
    assert parse_word("x y X Y") == commutator(x, y)
    assert parse_word("1 2 -1 -2") == commutator(x, y)
    assert SeriesSpec.parse("gamma3") == lower_central(3)
    assert SeriesSpec.parse("D2") == derived(2)
    with pytest.raises(ParseError):
        SeriesSpec.parse("gamma1")
    with pytest.raises(ParseError):
        SeriesSpec.parse("E2")
