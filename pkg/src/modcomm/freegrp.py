"""Words in free groups: reduction, abelianization, Magnus expansion and Fox calculus."""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

from .errors import EmptyWord, NotAMember, ParseError

DEFAULT_CMAX = 6

AbelVector = tuple[int, ...]


def _free_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if x == 0 or not isinstance(x, int):
            raise ValueError(f"letters must be nonzero integers, got {x!r}")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class Word:
    """A freely reduced word; letter i stands for x_i and -i for its inverse."""

    letters: tuple[int, ...] = ()
    basis_id: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "letters", _free_reduce(self.letters))

    def _check(self, other: "Word") -> Optional[str]:
        if self.basis_id and other.basis_id and self.basis_id != other.basis_id:
            raise ValueError(f"words over different bases: {self.basis_id} vs {other.basis_id}")
        return self.basis_id or other.basis_id

    def __mul__(self, other: "Word") -> "Word":
        if not isinstance(other, Word):
            return NotImplemented
        return Word(self.letters + other.letters, self._check(other))

    def inverse(self) -> "Word":
        return Word(tuple(-x for x in reversed(self.letters)), self.basis_id)

    __invert__ = inverse

    def __pow__(self, n: int) -> "Word":
        base = self if n >= 0 else self.inverse()
        return Word(base.letters * abs(n), self.basis_id)

    def conj(self, g: "Word") -> "Word":
        """g^-1 * self * g."""
        return g.inverse() * self * g

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def rank_hint(self) -> int:
        return max((abs(x) for x in self.letters), default=0)

    def to_list(self) -> list[int]:
        return list(self.letters)

    def __repr__(self) -> str:
        return f"Word({list(self.letters)})"


def word(*letters: int, basis_id: Optional[str] = None) -> Word:
    return Word(tuple(letters), basis_id)


def gen(i: int, basis_id: Optional[str] = None) -> Word:
    return Word((i,), basis_id)


def reduce(w: Union[Word, Sequence[int]]) -> Word:
    if isinstance(w, Word):
        return Word(w.letters, w.basis_id)
    return Word(tuple(w))


def commutator(a: Word, b: Word) -> Word:
    """[a, b] = a b a^-1 b^-1."""
    return a * b * a.inverse() * b.inverse()


def parse_word(text: str) -> Word:
    """Parse ``1 2 -1 -2`` or ``x y X Y`` (capital letter = inverse)."""
    text = text.strip()
    if not text:
        return Word()
    if re.fullmatch(r"[-+\d,\s\[\]]+", text):
        try:
            return Word(tuple(int(t) for t in re.split(r"[,\s\[\]]+", text) if t))
        except ValueError as exc:
            raise ParseError(str(exc)) from exc
    letters = []
    for ch in text:
        if ch.isspace():
            continue
        if not ch.isalpha():
            raise ParseError(f"bad letter {ch!r} in word {text!r}")
        idx = "xyzwvutsrq".find(ch.lower())
        if idx < 0:
            raise ParseError(f"unknown generator {ch!r}")
        letters.append(-(idx + 1) if ch.isupper() else idx + 1)
    return Word(tuple(letters))


def abelianize(w: Word, rank: Optional[int] = None) -> AbelVector:
    r = w.rank_hint() if rank is None else rank
    v = [0] * r
    for x in w.letters:
        v[abs(x) - 1] += 1 if x > 0 else -1
    return tuple(v)


def rewrite_member(tbl, basis, w) -> Word:
    """Express a member of a subgroup over the subgroup's Schreier basis."""
    if not tbl.contains(w):
        raise NotAMember(f"{w!r} does not lie in the subgroup")
    return basis.rewrite(w)


# ---------------------------------------------------------------------------
# Magnus expansion and lower central series


def magnus(w: Word, degree: int) -> dict[tuple[int, ...], int]:
    """Magnus expansion x_i -> 1 + X_i truncated above ``degree``.

    Monomials are tuples of generator indices; the constant term is ``()``.
    """
    s: dict[tuple[int, ...], int] = {(): 1}
    for x in w.letters:
        i = abs(x)
        new: dict[tuple[int, ...], int] = defaultdict(int, s)
        for mono, c in s.items():
            room = degree - len(mono)
            if x > 0:
                if room >= 1:
                    new[mono + (i,)] += c
            else:
                # (1 + X)^-1 = 1 - X + X^2 - ...
                ext = mono
                for k in range(1, room + 1):
                    ext = ext + (i,)
                    new[ext] += c if k % 2 == 0 else -c
        s = {m: c for m, c in new.items() if c}
    return s


@dataclass(frozen=True)
class MoreThan:
    bound: int

    def __repr__(self) -> str:
        return f"MoreThan({self.bound})"


def lcs_depth(w: Word, cmax: int = DEFAULT_CMAX) -> Union[int, MoreThan]:
    """Largest c with w in gamma_c, or MoreThan(cmax) when w lies in gamma_{cmax+1}."""
    if not w.letters:
        raise EmptyWord("the empty word lies in every term of the series")
    if cmax < 1:
        raise ValueError("cmax must be at least 1")
    s = magnus(w, cmax)
    degrees = [len(m) for m in s if m]
    return min(degrees) if degrees else MoreThan(cmax)


# ---------------------------------------------------------------------------
# Fox calculus


@dataclass(frozen=True)
class GroupRingElem:
    """Element of Z[Z^r]: sorted (exponent vector, coefficient) pairs, no zeros."""

    terms: tuple[tuple[tuple[int, ...], int], ...] = ()

    @classmethod
    def from_dict(cls, d: dict) -> "GroupRingElem":
        return cls(tuple(sorted((tuple(k), v) for k, v in d.items() if v)))

    @classmethod
    def monomial(cls, exps: Sequence[int], coeff: int = 1) -> "GroupRingElem":
        return cls.from_dict({tuple(exps): coeff})

    def as_dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, other: "GroupRingElem") -> "GroupRingElem":
        d = defaultdict(int, self.as_dict())
        for k, v in other.terms:
            d[k] += v
        return GroupRingElem.from_dict(d)

    def __neg__(self) -> "GroupRingElem":
        return GroupRingElem(tuple((k, -v) for k, v in self.terms))

    def __sub__(self, other: "GroupRingElem") -> "GroupRingElem":
        return self + (-other)

    def __mul__(self, other: "GroupRingElem") -> "GroupRingElem":
        d: dict = defaultdict(int)
        for k1, v1 in self.terms:
            for k2, v2 in other.terms:
                d[tuple(a + b for a, b in zip(k1, k2))] += v1 * v2
        return GroupRingElem.from_dict(d)

    def is_zero(self) -> bool:
        return not self.terms

    def to_list(self) -> list:
        return [[list(k), v] for k, v in self.terms]


def fox_derivative(w: Word, i: int, rank: Optional[int] = None) -> GroupRingElem:
    """Abelianized Fox derivative of w with respect to x_i, in Z[Z^r]."""
    r = max(w.rank_hint(), i) if rank is None else rank
    prefix = [0] * r
    d: dict = defaultdict(int)
    for x in w.letters:
        j = abs(x)
        if x > 0:
            if j == i:
                d[tuple(prefix)] += 1
            prefix[j - 1] += 1
        else:
            prefix[j - 1] -= 1
            if j == i:
                d[tuple(prefix)] -= 1
    return GroupRingElem.from_dict(d)


# ---------------------------------------------------------------------------
# series membership


class SeriesKind(Enum):
    LOWER_CENTRAL = "LowerCentral"
    DERIVED = "Derived"


@dataclass(frozen=True)
class SeriesSpec:
    kind: SeriesKind
    index: int

    def __post_init__(self):
        if self.index < 2:
            raise ValueError("only proper terms (index >= 2) are allowed")

    def __str__(self) -> str:
        return f"{'gamma' if self.kind is SeriesKind.LOWER_CENTRAL else 'D'}{self.index}"

    @classmethod
    def parse(cls, text: str) -> "SeriesSpec":
        m = re.fullmatch(r"\s*(gamma|lcs|g|D|derived)(\d+)\s*", text, re.IGNORECASE)
        if not m:
            raise ParseError(f"series spec must look like gamma3 or D2, got {text!r}")
        tag = m.group(1).lower()
        kind = SeriesKind.DERIVED if tag in ("d", "derived") else SeriesKind.LOWER_CENTRAL
        try:
            return cls(kind, int(m.group(2)))
        except ValueError as exc:
            raise ParseError(str(exc)) from exc


def lower_central(n: int) -> SeriesSpec:
    return SeriesSpec(SeriesKind.LOWER_CENTRAL, n)


def derived(n: int) -> SeriesSpec:
    return SeriesSpec(SeriesKind.DERIVED, n)


class Membership(Enum):
    IN = "In"
    NOT_IN = "NotIn"
    UNDECIDABLE = "Undecidable"


def in_series(w: Word, spec: SeriesSpec, rank: Optional[int] = None,
              cmax: int = DEFAULT_CMAX) -> Membership:
    if spec.kind is SeriesKind.LOWER_CENTRAL:
        if spec.index - 1 > cmax:
            return Membership.UNDECIDABLE
        if not w.letters:
            return Membership.IN
        return Membership.IN if isinstance(lcs_depth(w, spec.index - 1), MoreThan) else Membership.NOT_IN
    if spec.index >= 4:
        return Membership.UNDECIDABLE
    r = w.rank_hint() if rank is None else rank
    if any(abelianize(w, r)):
        return Membership.NOT_IN
    if spec.index == 2:
        return Membership.IN
    for i in range(1, r + 1):
        if not fox_derivative(w, i, r).is_zero():
            return Membership.NOT_IN
    return Membership.IN
