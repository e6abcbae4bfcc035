"""Coset tables of PSL2(Z) and of free groups, Schreier bases, cusps, cache."""

import random

import pytest
import sympy
from hypothesis import given, settings, strategies as st
from sympy.combinatorics import Permutation, PermutationGroup

from modcomm.cache import cached_table, request_key
from modcomm.errors import NotAMember, NotTransitive, ParseError
from modcomm.exact import S, T, pmat
from modcomm.freegrp import Word, abelianize
from modcomm.modgroup import (
    FreeCosetTable,
    cusps,
    free_schreier_basis,
    from_permutations,
    intersect,
    is_normal,
    normal_kernel,
    parse_cycles,
    principal_congruence,
    psl2_order,
    schreier_basis,
    su_eval,
    table_from_oracle,
    table_from_text,
    torsion_free,
    word_in_SU,
)


def psl_order_oracle(k: int) -> int:
    """|PSL2(Z/k)| from the product formula over primes dividing k."""
    if k == 1:
        return 1
    n = k ** 3
    for p in sympy.primefactors(k):
        n = n * (p * p - 1) // (p * p)
    return n if k == 2 else n // 2


def random_sl2(rng: random.Random, length: int):
    M = pmat(1, 0, 0, 1)
    for _ in range(length):
        M = M * (S if rng.random() < 0.4 else T if rng.random() < 0.5 else T.inverse())
    return M


# --- indices, ranks and cusps of principal congruence subgroups


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6, 7])
def test_index_rank_and_cusps(k):
    G = principal_congruence(k)
    assert G.index == psl_order_oracle(k) == psl2_order(k)
    cd = cusps(G)
    assert len(cd) == G.index // k
    assert set(cd.widths) == {k}
    if k >= 2:
        assert torsion_free(G)
        assert schreier_basis(G).rank == 1 + G.index // 6
    else:
        assert not torsion_free(G)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_prime_level_cusp_count(p):
    assert len(cusps(principal_congruence(p))) == (p + 1) * (p - 1) // 2


def test_level_two_has_three_cusps():
    assert len(cusps(principal_congruence(2))) == 3


@pytest.mark.parametrize("k", [2, 3, 5])
def test_cusp_classes_distinct_and_nonzero(k):
    G = principal_congruence(k)
    B = schreier_basis(G)
    classes = [B.class_of(P) for P in cusps(G).representatives]
    assert all(any(c) for c in classes)
    assert len(set(classes)) == len(classes)


# --- membership against the congruence condition


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
def test_membership_matches_congruence(k):
    G = principal_congruence(k)
    rng = random.Random(k)
    for _ in range(150):
        M = random_sl2(rng, rng.randint(0, 16))
        a, b, c, d = M.to_ints()
        plus = (a - 1) % k == 0 and (d - 1) % k == 0
        minus = (a + 1) % k == 0 and (d + 1) % k == 0
        assert G.contains(M) == (b % k == 0 and c % k == 0 and (plus or minus))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 20))
def test_su_word_round_trip(seed, length):
    M = random_sl2(random.Random(seed), length)
    assert su_eval(word_in_SU(M)).entries() == M.entries()


@pytest.mark.parametrize("k", [2, 3, 4])
def test_schreier_rewrite_evaluates_back(k):
    G = principal_congruence(k)
    B = schreier_basis(G)
    rng = random.Random(100 + k)
    seen = 0
    while seen < 40:
        M = random_sl2(rng, rng.randint(1, 20))
        if not G.contains(M):
            with pytest.raises(NotAMember):
                B.rewrite(M)
            continue
        seen += 1
        assert B.evaluate(B.rewrite(M)).entries() == M.entries()


def test_intersections():
    assert intersect(principal_congruence(2), principal_congruence(3)).to_text() == principal_congruence(6).to_text()
    assert intersect(principal_congruence(4), principal_congruence(2)).to_text() == principal_congruence(4).to_text()


def test_normality():
    for k in (2, 3, 4):
        assert is_normal(principal_congruence(k))
    gamma0 = table_from_oracle(lambda m: m[2] % 2 == 0, max_index=10)
    assert gamma0.index == 3 and not is_normal(gamma0)


def test_table_text_round_trip_and_corruption():
    G = principal_congruence(3)
    assert table_from_text(G.to_text()).to_text() == G.to_text()
    lines = G.to_text().splitlines()
    for bad in (lines[:-1], lines[:2] + ["index 99"] + lines[3:], [lines[0], "kind psl", lines[2], "alphabet S T"] + lines[4:]):
        with pytest.raises(ParseError):
            table_from_text("\n".join(bad))
    with pytest.raises(ParseError):
        table_from_text("nonsense")


def test_from_permutations_rejects_intransitive():
    with pytest.raises((NotTransitive, ParseError, ValueError)):
        from_permutations([1, 0, 3, 2], [0, 1, 2, 3])


# --- free groups: kernels of maps to permutation groups


PERM_SETS = [
    [(1, 0), (0, 1)],
    [(1, 2, 0), (0, 1, 2)],
    [(1, 0, 2), (1, 2, 0)],
    [(1, 2, 3, 0), (1, 0, 3, 2)],
    [(1, 2, 3, 4, 0), (1, 0, 2, 3, 4)],
]


@pytest.mark.parametrize("images", PERM_SETS)
def test_kernel_index_is_group_order(images):
    N = normal_kernel(2, images)
    order = PermutationGroup([Permutation(list(p)) for p in images]).order()
    assert N.index == order
    assert is_normal(N)
    B = free_schreier_basis(N)
    assert B.rank == 1 + N.index * (2 - 1)
    for w in B.gens:
        img = list(range(len(images[0])))
        for l in w.letters:
            p = images[abs(l) - 1]
            inv = [0] * len(p)
            for i, v in enumerate(p):
                inv[v] = i
            img = [(p if l > 0 else inv)[v] for v in img]
        assert img == list(range(len(images[0])))


def test_free_rewrite_round_trip():
    N = normal_kernel(2, [(1, 2, 0), (1, 0, 2)])
    B = free_schreier_basis(N)
    rng = random.Random(7)
    for _ in range(100):
        w = Word(tuple(rng.choice([1, -1, 2, -2]) for _ in range(rng.randint(0, 12))))
        if N.contains(w):
            assert B.evaluate(B.rewrite(w)) == w
            assert len(abelianize(B.rewrite(w), B.rank)) == B.rank
        else:
            with pytest.raises(NotAMember):
                B.rewrite(w)


def test_non_normal_free_subgroup():
    stab = FreeCosetTable(((1, 0, 2), (1, 2, 0)), "F")  # point stabilizer in S3
    assert stab.index == 3 and not is_normal(stab)


def test_parse_cycles():
    assert parse_cycles("(0 1)(2 3)") == (1, 0, 3, 2)
    assert parse_cycles("id", 3) == (0, 1, 2)
    assert parse_cycles("1,2,0") == (1, 2, 0)
    with pytest.raises(ParseError):
        parse_cycles("0, 0")
    with pytest.raises(ParseError):
        parse_cycles("(0 x)")


# --- cache


def test_cache_builds_once_and_survives_corruption(tmp_path):
    calls = []

    def build():
        calls.append(1)
        return principal_congruence(3)

    t1 = cached_table("gamma 3", build, tmp_path)
    t2 = cached_table("gamma 3", build, tmp_path)
    assert len(calls) == 1 and t1.to_text() == t2.to_text()
    path = tmp_path / f"{request_key('gamma 3')}.table"
    path.write_text("request gamma 3\ngarbage\n")
    t3 = cached_table("gamma 3", build, tmp_path)
    assert len(calls) == 2 and t3.to_text() == t1.to_text()
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".tmp-")]
