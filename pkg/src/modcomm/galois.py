"""Quadratic-tower tools: which field a matrix lives in, conjugators between
integral matrices, Galois pairs and the trace obstruction to preserving the
product foliation of S^1 x S^1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

from .errors import (
    BaseFieldHasNoConjugation,
    NoRealScaling,
    NotConjugate,
    ZeroLeadingCoefficient,
)
from .exact import (
    QQ,
    Mat2,
    ProjMat,
    QuadElem,
    Scalar,
    TraceClass,
    classify_by_trace,
    field_of,
    galois_sigma,
    is_rational,
    quad_k,
    rational_sqrt,
    sign,
    squarefree_part,
    sqrtq_membership,
    to_rational,
    to_text,
)
from .linalg import nullspace


class FieldTag(Enum):
    RATIONAL = "Rational"
    SQRTQ = "SqrtQ"
    QUAD_K = "QuadK"
    QUAD_L = "QuadL"
    UNSUPPORTED = "Unsupported"


@dataclass(frozen=True)
class FieldClass:
    tag: FieldTag
    d: Optional[int] = None
    zeta: Optional[Scalar] = None

    def __str__(self) -> str:
        if self.tag is FieldTag.QUAD_K:
            return f"QuadK({self.d})"
        if self.tag is FieldTag.QUAD_L:
            return f"QuadL({self.d}, {to_text(self.zeta)})"
        return self.tag.value


def _rational_part(x) -> Fraction:
    while isinstance(x, QuadElem):
        x = x.a
    return Fraction(x)


def quadratic_radicand(x) -> Optional[int]:
    """1 if x is rational, m if x generates Q(sqrt m), None if its degree is 4.

    The 1-coordinate of x in the basis of products of square roots is its
    rational part; x lies in a quadratic subfield iff (x - that part)^2 is rational.
    """
    if is_rational(x):
        return 1
    y = x - _rational_part(x)
    s = y * y
    if not is_rational(s):
        return None
    s = to_rational(s)
    return squarefree_part(s.numerator * s.denominator)


def classify_field(g: Mat2) -> FieldClass:
    if g.is_rational():
        return FieldClass(FieldTag.RATIONAL)
    if sqrtq_membership(g) is not None:
        return FieldClass(FieldTag.SQRTQ)
    rads = {quadratic_radicand(x) for x in g} - {1}
    if None not in rads and len(rads) == 1:
        return FieldClass(FieldTag.QUAD_K, rads.pop())
    f = g.field
    if f is not QQ and f.level == "QuadL":
        return FieldClass(FieldTag.QUAD_L, f.d, f.zeta)
    return FieldClass(FieldTag.UNSUPPORTED)


# ---------------------------------------------------------------------------
# conjugators


def _commutation_rows(A: Mat2, B: Mat2) -> list[list[Fraction]]:
    """Rows of the linear system A X - X B = 0 in X = (x11, x12, x21, x22)."""
    a = [[A.a, A.b], [A.c, A.d]]
    b = [[B.a, B.b], [B.c, B.d]]
    rows = []
    for i in range(2):
        for j in range(2):
            row = [Fraction(0)] * 4
            for k in range(2):
                row[2 * k + j] += to_rational(a[i][k])
                row[2 * i + k] -= to_rational(b[k][j])
            rows.append(row)
    return rows


# pivot on x22, x21 first so that x11, x12 are the free variables
_PIVOT_ORDER = (3, 2, 1, 0)


def solution_space(A: Mat2, B: Mat2) -> list[list[Fraction]]:
    return nullspace(_commutation_rows(A, B), 4, _PIVOT_ORDER)


def _det(v: Sequence) -> Fraction:
    return v[0] * v[3] - v[1] * v[2]


def _positive_combination(basis: list[list[Fraction]]) -> list[Fraction]:
    """Deterministically pick a solution with positive determinant."""
    if not basis:
        raise NotConjugate("only the zero matrix intertwines A and B")
    n1 = basis[0]
    if len(basis) == 1:
        if _det(n1) > 0:
            return n1
        if _det(n1) == 0:
            raise NotConjugate("every intertwiner is singular")
        raise NoRealScaling("every intertwiner has negative determinant")
    n2 = basis[1]
    comb = lambda u, v: [u * p + v * q for p, q in zip(n1, n2)]
    # det(u n1 + v n2) = qa u^2 + qb u v + qc v^2
    qa, qc = _det(n1), _det(n2)
    qb = _det(comb(1, 1)) - qa - qc
    if qa > 0:
        return n1
    if qc > 0:
        return n2
    if qc < 0:
        t = -qb / (2 * qc)
        if qa + qb * t + qc * t * t > 0:
            return comb(1, t)
    elif qb != 0:
        return comb(1, (1 - qa) / qb)
    if qa == qb == qc == 0:
        raise NotConjugate("every intertwiner is singular")
    raise NoRealScaling("no intertwiner has positive determinant")


def _scale_to_det_one(v: list[Fraction]) -> ProjMat:
    det = _det(v)
    r = rational_sqrt(det)
    if r is not None:
        return ProjMat(*(x / r for x in v))
    m = squarefree_part(det.numerator * det.denominator)
    root = rational_sqrt(det / m)
    # 1/sqrt(det) = 1/(root * sqrt m) = sqrt(m) / (root * m)
    s = QuadElem(quad_k(m), 0, 1 / (root * m))
    return ProjMat(*(x * s for x in v))


def conjugator_between(A: Mat2, B: Mat2) -> ProjMat:
    """A det-1 real x with x^-1 A x = B projectively (rational A, B)."""
    if not (A.is_rational() and B.is_rational()):
        raise ValueError("conjugator_between expects rational matrices")
    if A.b == A.c == 0 and A.a == A.d:
        raise ValueError("A is central; every matrix conjugates it")
    tA, tB = A.trace(), B.trace()
    if tA * tA != tB * tB:
        raise NotConjugate(f"traces {to_text(tA)} and {to_text(tB)} differ")
    if tA == 0:
        lifts = [B, -B]
    else:
        lifts = [B] if tA == tB else [-B]
    errors: list[Exception] = []
    for lift in lifts:
        try:
            x = _scale_to_det_one(_positive_combination(solution_space(A, lift)))
        except (NotConjugate, NoRealScaling) as exc:
            errors.append(exc)
            continue
        assert ProjMat.of(x.inverse() * A * x) == ProjMat.of(B)
        return x
    # a real-scaling failure is more informative than an empty solution space
    raise next((e for e in errors if isinstance(e, NoRealScaling)), errors[0])


def eta_roots(A: Mat2, B: Mat2) -> tuple[Scalar, Scalar]:
    """Roots of b*eta^2 + (a - d)*eta - (c + f) = 0, A = [[a,b],[c,d]], B = [[e,f],[g,h]]."""
    a, b, c, d = (to_rational(x) for x in A)
    f = to_rational(B.b)
    if b == 0:
        raise ZeroLeadingCoefficient("b = 0: the relation is not quadratic in eta")
    disc = (a - d) ** 2 + 4 * b * (c + f)
    if disc < 0:
        raise NoRealScaling(f"discriminant {disc} is negative")
    r = rational_sqrt(disc)
    if r is None:
        m = squarefree_part(disc.numerator * disc.denominator)
        r = QuadElem(quad_k(m), 0, rational_sqrt(disc / m))
    return ((-(a - d) + r) / (2 * b), (-(a - d) - r) / (2 * b))


def eta_conjugator(A: Mat2, B: Mat2, eta) -> Optional[Mat2]:
    """The intertwiner X (A X = X B) with upper-right entry 1 and lower-right eta."""
    basis = solution_space(A, B)
    if len(basis) != 2:
        return None
    n1, n2 = basis
    # solve u*n1 + v*n2 at positions 1 (x12) and 3 (x22)
    det = n1[1] * n2[3] - n2[1] * n1[3]
    if det == 0:
        return None
    u = (n2[3] - n2[1] * eta) / det
    v = (n1[1] * eta - n1[3]) / det
    return Mat2(*(u * p + v * q for p, q in zip(n1, n2)))


# ---------------------------------------------------------------------------
# Galois pairs


@dataclass(frozen=True)
class GaloisPair:
    first: ProjMat
    second: ProjMat


def galois_pair(x: Mat2) -> GaloisPair:
    p = ProjMat.of(x)
    return GaloisPair(p, p.sigma())


class SelfConjugacy(Enum):
    PLUS = "Plus"
    MINUS = "Minus"
    NEITHER = "Neither"


def check_self_conjugate(x: Mat2) -> SelfConjugacy:
    """Compare x with sigma(x) on a det-1 lift, sigma the top-level conjugation."""
    f = x.field
    if f is QQ:
        raise BaseFieldHasNoConjugation("rational matrices have no top-level conjugation")
    ents = [f.coerce(e) for e in x]
    if all(e.b == 0 for e in ents):
        return SelfConjugacy.PLUS
    if all(e.a == 0 for e in ents):
        return SelfConjugacy.MINUS
    return SelfConjugacy.NEITHER


# ---------------------------------------------------------------------------
# trace obstruction


@dataclass(frozen=True)
class TraceObstruction:
    word: tuple[int, ...]     # letters: +-i for H generator i, +-(r+1) for the extra matrix
    first: ProjMat
    second: ProjMat
    trace_sq_first: Scalar
    trace_sq_second: Scalar

    def to_dict(self) -> dict:
        return {
            "word": list(self.word),
            "first": self.first.to_dict(),
            "second": self.second.to_dict(),
            "trace_sq_first": to_text(self.trace_sq_first),
            "trace_sq_second": to_text(self.trace_sq_second),
        }


def trace_obstruction(H_basis, extra: Mat2, word_bound: int) -> Optional[TraceObstruction]:
    """First word (by length, then letter order) whose Galois pair has two
    hyperbolic components with different projective traces."""
    f = extra.field
    if f is QQ:
        return None
    gens = [ProjMat.of(m.map(f.coerce)) for m in H_basis.gen_mats] + [ProjMat.of(extra)]
    mats = {}
    for i, g in enumerate(gens, start=1):
        mats[i], mats[-i] = g, g.inverse()
    letters = [x for i in range(1, len(gens) + 1) for x in (i, -i)]
    extra_letter = len(gens)
    for length in range(1, word_bound + 1):
        for w in product(letters, repeat=length):
            if any(w[i] == -w[i + 1] for i in range(length - 1)):
                continue
            if extra_letter not in w and -extra_letter not in w:
                continue
            W = mats[w[0]]
            for x in w[1:]:
                W = W * mats[x]
            sW = W.sigma(f)
            if classify_by_trace(W) is not TraceClass.HYPERBOLIC:
                continue
            if classify_by_trace(sW) is not TraceClass.HYPERBOLIC:
                continue
            t1, t2 = W.trace() ** 2, sW.trace() ** 2
            if t1 != t2:
                return TraceObstruction(tuple(w), W, sW, t1, t2)
    return None
