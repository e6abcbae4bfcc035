"""Non-commensurability witnesses for commutator subgroups of finite-index subgroups.

Given K1, K2 of finite index in a free group F with K2 normal and K1 not
contained in K2, ``gaschutz_witness`` builds x_b = [a, b] with a in K1 \\ K2
and b in K1 ∩ K2.  Then x_b lies in K1' while no power of it lies in K2', so
K1' ∩ K2' has infinite index in K1'.  ``filtration_chain`` pushes the same
element down the lower central and derived series.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .chevweil import find_moved_class, homology_action
from .errors import DepthBeyondDecidable, NoSeparator, NotNormal, SearchExhausted
from .freegrp import (
    DEFAULT_CMAX,
    AbelVector,
    Membership,
    Word,
    abelianize,
    commutator,
    derived,
    in_series,
    lower_central,
)
from .linalg import integer_solve
from .modgroup import FreeCosetTable, free_schreier_basis, intersect, is_normal

DEFAULT_MULTIPLE_BOUND = 1000
POWER_CHECKS = 5


@dataclass(frozen=True)
class ChainEntry:
    """y at ``level``: expected In for the K1 term and NotIn for the K2 term."""

    series: str          # "gamma" or "D"
    level: int
    word: Word
    k1_verdict: Membership
    k2_verdict: Membership

    def to_dict(self) -> dict:
        return {
            "series": self.series,
            "level": self.level,
            "word": list(self.word.letters),
            "k1": self.k1_verdict.value,
            "k2": self.k2_verdict.value,
        }


@dataclass(frozen=True)
class WitnessCert:
    ambient: str
    K1: FreeCosetTable
    K2: FreeCosetTable
    a: Word
    b: Word
    x_b: Word
    n: int
    z: AbelVector
    hom_class: AbelVector
    power_classes: tuple[AbelVector, ...]
    chain: tuple[ChainEntry, ...] = field(default=())

    def with_chain(self, chain) -> "WitnessCert":
        return WitnessCert(self.ambient, self.K1, self.K2, self.a, self.b, self.x_b, self.n,
                           self.z, self.hom_class, self.power_classes, tuple(chain))

    def to_dict(self) -> dict:
        return {
            "ambient": self.ambient,
            "rank": self.K1.rank,
            "K1": self.K1.to_text(),
            "K2": self.K2.to_text(),
            "a": list(self.a.letters),
            "b": list(self.b.letters),
            "x_b": list(self.x_b.letters),
            "n": self.n,
            "z": list(self.z),
            "hom_class": list(self.hom_class),
            "power_classes": [list(v) for v in self.power_classes],
            "chain": [e.to_dict() for e in self.chain],
        }


def separating_element(K1: FreeCosetTable, K2: FreeCosetTable) -> Word:
    """Shortest (then shortlex-least) word lying in K1 but not in K2."""
    if K1.rank != K2.rank:
        raise ValueError("subgroups of free groups of different rank")
    start = (0, 0)
    parent: dict = {start: None}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for x in K1.letters:
            t = (K1.step(s[0], x), K2.step(s[1], x))
            if t in parent:
                continue
            parent[t] = (s, x)
            if t[0] == 0 and t[1] != 0:
                letters = []
                while parent[t] is not None:
                    t, x = parent[t]
                    letters.append(x)
                return Word(tuple(reversed(letters)), K1.ambient)
            queue.append(t)
    raise NoSeparator("K1 is contained in K2")


def _proportional(u: AbelVector, v: AbelVector) -> bool:
    return all(u[i] * v[j] == u[j] * v[i] for i in range(len(u)) for j in range(i + 1, len(u)))


def gaschutz_witness(K1: FreeCosetTable, K2: FreeCosetTable,
                     max_multiple: int = DEFAULT_MULTIPLE_BOUND) -> WitnessCert:
    if not is_normal(K2):
        raise NotNormal("K2 must be normal in F")
    a = separating_element(K1, K2)
    B2 = free_schreier_basis(K2)
    act = homology_action(K2.rank, K2, B2)
    qa = K2.act(0, a)
    z = find_moved_class(act, qa)
    K12 = intersect(K1, K2)
    B12 = free_schreier_basis(K12)
    gens = [g for g in B12.gens]
    classes = [B2.class_of(g) for g in gens]
    for n in range(1, max_multiple + 1):
        coeffs = integer_solve(classes, [n * v for v in z])
        if coeffs is not None:
            break
    else:
        raise SearchExhausted(f"no multiple n <= {max_multiple} of z is a class from K1 ∩ K2")
    b = Word((), K1.ambient)
    for g, c in zip(gens, coeffs):
        if c:
            b = b * g ** c
    x_b = commutator(a, b)
    hom = B2.class_of(x_b)
    expected = tuple(u - v for u, v in zip(act.apply(qa, B2.class_of(b)), B2.class_of(b)))
    assert hom == expected and any(hom), "commutator class disagrees with the action"
    powers = tuple(B2.class_of(x_b ** N) for N in range(1, POWER_CHECKS + 1))
    return WitnessCert(K1.ambient, K1, K2, a, b, x_b, n, z, hom, powers)


def default_chain_element(cert: WitnessCert) -> Word:
    """First Schreier generator of K1 ∩ K2 whose K2-class is not proportional to [x_b]."""
    B2 = free_schreier_basis(cert.K2)
    for g in free_schreier_basis(intersect(cert.K1, cert.K2)).gens:
        c = B2.class_of(g)
        if any(c) and not _proportional(c, cert.hom_class):
            return g
    raise SearchExhausted("no generator of K1 ∩ K2 has a suitable homology class")


def filtration_chain(cert: WitnessCert, depth: int, xclass: Optional[Word] = None,
                     cmax: int = DEFAULT_CMAX) -> tuple[ChainEntry, ...]:
    """Lower central chain y_2 = x_b, y_(l+1) = [y_l, x] for levels 2..depth.

    At level l the entry records y_l in gamma_l(K1) (In) and y_l in
    gamma_l(K2) (NotIn).  The K2 verdicts need [x] to be nonzero and not
    proportional to [x_b] in H_1(K2); otherwise [x_b, x] already falls into
    gamma_3(K2).
    """
    if depth > cmax:
        raise DepthBeyondDecidable(f"depth {depth} exceeds the Magnus bound {cmax}")
    if depth < 2:
        raise ValueError("chains start at level 2")
    B1, B2 = free_schreier_basis(cert.K1), free_schreier_basis(cert.K2)
    x = xclass if xclass is not None else default_chain_element(cert)
    if not (cert.K1.contains(x) and cert.K2.contains(x)):
        raise ValueError("the chain element must lie in K1 ∩ K2")
    cx = B2.class_of(x)
    if not any(cx) or _proportional(cx, cert.hom_class):
        raise ValueError("the chain element's K2-class must be nonzero and independent of [x_b]")
    out, y = [], cert.x_b
    for level in range(2, depth + 1):
        if level > 2:
            y = commutator(y, x)
        spec = lower_central(level)
        out.append(ChainEntry(
            "gamma", level, y,
            in_series(B1.rewrite(y), spec, B1.rank, cmax),
            in_series(B2.rewrite(y), spec, B2.rank, cmax),
        ))
    return tuple(out)


def _power_into(tbl: FreeCosetTable, w: Word) -> int:
    n, c = 1, tbl.act(0, w)
    while c != 0:
        c = tbl.act(c, w)
        n += 1
    return n


def derived_chain(cert: WitnessCert, max_power: int = 10) -> tuple[ChainEntry, ...]:
    """Derived chain through D_3: x_b at level 2, then y = [x_b^N, x] at level 3.

    x = [b1^n1, b2^n2] for the first two K2 Schreier generators, each raised to
    the least power landing in K1, so x lies in K1' ∩ K2'.
    """
    B1, B2 = free_schreier_basis(cert.K1), free_schreier_basis(cert.K2)
    if B2.rank < 2:
        raise SearchExhausted("K2 has rank < 2")
    b1, b2 = B2.gens[0], B2.gens[1]
    x = commutator(b1 ** _power_into(cert.K1, b1), b2 ** _power_into(cert.K1, b2))
    d2 = derived(2)
    entries = [ChainEntry(
        "D", 2, cert.x_b,
        in_series(B1.rewrite(cert.x_b), d2, B1.rank),
        in_series(B2.rewrite(cert.x_b), d2, B2.rank),
    )]
    d3 = derived(3)
    for N in range(1, max_power + 1):
        y = commutator(cert.x_b ** N, x)
        k2 = in_series(B2.rewrite(y), d3, B2.rank)
        if k2 is Membership.NOT_IN:
            entries.append(ChainEntry("D", 3, y, in_series(B1.rewrite(y), d3, B1.rank), k2))
            return tuple(entries)
    raise SearchExhausted(f"no power N <= {max_power} gives an element outside D3(K2)")


def chain_ok(chain) -> bool:
    return all(e.k1_verdict is Membership.IN and e.k2_verdict is Membership.NOT_IN for e in chain)


def replay_witness(cert: WitnessCert) -> list[str]:
    """Re-derive every claim of a witness from its tables and words.

    Returns the list of failed checks (empty when the witness holds).
    """
    fails = []
    K1, K2 = cert.K1, cert.K2
    if not K1.contains(cert.a):
        fails.append("a not in K1")
    if K2.contains(cert.a):
        fails.append("a in K2")
    if not (K1.contains(cert.b) and K2.contains(cert.b)):
        fails.append("b not in K1 ∩ K2")
    if commutator(cert.a, cert.b) != cert.x_b:
        fails.append("x_b != [a, b]")
    if not is_normal(K2):
        fails.append("K2 not normal")
    B1, B2 = free_schreier_basis(K1), free_schreier_basis(K2)
    if any(abelianize(B1.rewrite(cert.x_b), B1.rank)):
        fails.append("x_b not in K1'")
    hom = B2.class_of(cert.x_b)
    if hom != tuple(cert.hom_class) or not any(hom):
        fails.append("hom_class mismatch or zero")
    for N, v in enumerate(cert.power_classes, start=1):
        c = B2.class_of(cert.x_b ** N)
        if c != tuple(v) or not any(c):
            fails.append(f"x_b^{N} class mismatch or zero")
    return fails
