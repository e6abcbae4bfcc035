"""Exact arithmetic over Q and real quadratic towers Q < K = Q(sqrt d) < L = K(sqrt zeta).

Rationals are plain ``fractions.Fraction`` values.  An element of a quadratic
field ``F = E(sqrt r)`` is a :class:`QuadElem` ``a + b*sqrt(r)`` with ``a, b`` in
``E``.  Every field carries the real embedding sending each square root to its
positive value, so order comparisons are exact sign computations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import isqrt
from typing import Iterator, Optional, Union

from .errors import (
    BaseFieldHasNoConjugation,
    DivisionByZero,
    FieldMismatch,
    InvalidField,
    ParseError,
)

Scalar = Union[Fraction, "QuadElem"]


# ---------------------------------------------------------------------------
# integer helpers


def squarefree_part(n: int) -> int:
    """Return the squarefree integer s with n = s * m**2 (n > 0)."""
    if n <= 0:
        raise ValueError("squarefree_part needs a positive integer")
    s = 1
    p = 2
    while p * p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e % 2:
            s *= p
        p += 1 if p == 2 else 2
    # what is left has at most two prime factors, all larger than the cube root
    r = isqrt(n)
    if r * r != n:
        s *= n
    return s


def rational_sqrt(q: Fraction) -> Optional[Fraction]:
    """Nonnegative rational square root of q, or None."""
    q = Fraction(q)
    if q < 0:
        return None
    rn, rd = isqrt(q.numerator), isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


# ---------------------------------------------------------------------------
# fields


class RationalField:
    """The base field Q.  A singleton, exposed as ``QQ``."""

    level = "Base"
    base = None
    depth = 0

    def __repr__(self) -> str:
        return "QQ"

    def __reduce__(self):
        return "QQ"

    def contains(self, other) -> bool:
        return other is self

    def coerce(self, x) -> Fraction:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, QuadElem):
            raise FieldMismatch(f"{x} is not a rational number")
        raise TypeError(f"cannot coerce {type(x).__name__} to a rational")

    @property
    def zero(self) -> Fraction:
        return Fraction(0)

    @property
    def one(self) -> Fraction:
        return Fraction(1)


QQ = RationalField()
Field = Union[RationalField, "QuadField"]


@dataclass(frozen=True)
class QuadField:
    """The real quadratic extension ``base(sqrt(radicand))``.

    Over Q the radicand must be a squarefree integer d > 1.  Over K = Q(sqrt d)
    it must be positive in the designated embedding and not a square in K.
    Towers deeper than Q < K < L are rejected.
    """

    base: Field
    radicand: Scalar

    def __post_init__(self):
        if self.base is QQ:
            r = QQ.coerce(self.radicand)
            if r.denominator != 1 or r <= 1 or squarefree_part(r.numerator) != r.numerator:
                raise InvalidField(f"d must be a squarefree integer > 1, got {r}")
        elif isinstance(self.base, QuadField) and self.base.base is QQ:
            r = self.base.coerce(self.radicand)
            if sign(r) <= 0:
                raise InvalidField("zeta must be positive in the designated embedding")
            if sqrt_in(self.base, r) is not None:
                raise InvalidField(f"zeta = {to_text(r)} is a square in {self.base}")
        else:
            raise InvalidField("only towers Q < K < L are supported")
        object.__setattr__(self, "radicand", r)

    @property
    def depth(self) -> int:
        return self.base.depth + 1

    @property
    def level(self) -> str:
        return "QuadK" if self.base is QQ else "QuadL"

    @property
    def d(self) -> int:
        k = self if self.base is QQ else self.base
        return int(k.radicand)

    @property
    def zeta(self) -> Optional[Scalar]:
        return None if self.base is QQ else self.radicand

    def __repr__(self) -> str:
        return field_to_text(self)

    def contains(self, other) -> bool:
        return other == self or self.base.contains(other)

    def coerce(self, x) -> "QuadElem":
        if isinstance(x, QuadElem):
            if x.field == self:
                return x
            if self.base.contains(x.field):
                return QuadElem(self, x, 0)
            raise FieldMismatch(f"no promotion from {x.field} to {self}")
        if isinstance(x, (int, Fraction)):
            return QuadElem(self, x, 0)
        raise TypeError(f"cannot coerce {type(x).__name__} into {self}")

    @property
    def zero(self) -> "QuadElem":
        return QuadElem(self, 0, 0)

    @property
    def one(self) -> "QuadElem":
        return QuadElem(self, 1, 0)

    @property
    def gen(self) -> "QuadElem":
        """The element sqrt(radicand)."""
        return QuadElem(self, 0, 1)


def quad_k(d: int) -> QuadField:
    return QuadField(QQ, Fraction(d))


def quad_l(d: int, zeta) -> QuadField:
    return QuadField(quad_k(d), zeta)


def field_of(x) -> Field:
    if isinstance(x, QuadElem):
        return x.field
    if isinstance(x, (int, Fraction)):
        return QQ
    raise TypeError(f"not a tower scalar: {x!r}")


def join(f: Field, g: Field) -> Field:
    """The smaller of two fields containing the other; FieldMismatch otherwise."""
    if f.contains(g):
        return f
    if g.contains(f):
        return g
    raise FieldMismatch(f"{f} and {g} do not lie in a common supported tower")


def promote(x, field: Field) -> Scalar:
    """Explicitly view x as an element of a larger field of its tower."""
    return field.coerce(x)


# ---------------------------------------------------------------------------
# quadratic elements


@dataclass(frozen=True, eq=False)
class QuadElem:
    field: QuadField
    a: Scalar
    b: Scalar

    def __post_init__(self):
        object.__setattr__(self, "a", self.field.base.coerce(self.a))
        object.__setattr__(self, "b", self.field.base.coerce(self.b))

    def _lift(self, other):
        if isinstance(other, (int, Fraction)):
            return self.field, self, self.field.coerce(other)
        if isinstance(other, QuadElem):
            f = join(self.field, other.field)
            return f, f.coerce(self), f.coerce(other)
        return None, None, None

    def __add__(self, other):
        f, x, y = self._lift(other)
        if f is None:
            return NotImplemented
        return QuadElem(f, x.a + y.a, x.b + y.b)

    __radd__ = __add__

    def __neg__(self):
        return QuadElem(self.field, -self.a, -self.b)

    def __pos__(self):
        return self

    def __sub__(self, other):
        f, x, y = self._lift(other)
        if f is None:
            return NotImplemented
        return QuadElem(f, x.a - y.a, x.b - y.b)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        f, x, y = self._lift(other)
        if f is None:
            return NotImplemented
        r = f.radicand
        return QuadElem(f, x.a * y.a + x.b * y.b * r, x.a * y.b + x.b * y.a)

    __rmul__ = __mul__

    def inverse(self) -> "QuadElem":
        n = self.a * self.a - self.b * self.b * self.field.radicand
        if n == 0:
            raise DivisionByZero("division by zero in a quadratic field")
        return QuadElem(self.field, self.a / n, -self.b / n)

    def __truediv__(self, other):
        f, x, y = self._lift(other)
        if f is None:
            return NotImplemented
        return x * y.inverse()

    def __rtruediv__(self, other):
        f, x, y = self._lift(other)
        if f is None:
            return NotImplemented
        return y * x.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        base = self if n >= 0 else self.inverse()
        out = self.field.one
        for _ in range(abs(n)):
            out = out * base
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if isinstance(other, QuadElem):
            if other.field == self.field:
                return self.a == other.a and self.b == other.b
            try:
                f = join(self.field, other.field)
            except FieldMismatch:
                return False
            return f.coerce(self) == f.coerce(other)
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.field, self.a, self.b))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __lt__(self, other):
        return sign(self - other) < 0

    def __le__(self, other):
        return sign(self - other) <= 0

    def __gt__(self, other):
        return sign(self - other) > 0

    def __ge__(self, other):
        return sign(self - other) >= 0

    def __repr__(self) -> str:
        return to_text(self)


def sign(x) -> int:
    """Sign of x in the designated real embedding, computed exactly."""
    if isinstance(x, QuadElem):
        sa, sb = sign(x.a), sign(x.b)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb if sa == 0 else sa
        # a and b*sqrt(r) have opposite signs; the larger magnitude wins
        return sa if sign(x.a * x.a - x.b * x.b * x.field.radicand) > 0 else sb
    return (x > 0) - (x < 0)


def is_rational(x) -> bool:
    while isinstance(x, QuadElem):
        if x.b != 0:
            return False
        x = x.a
    return True


def to_rational(x) -> Fraction:
    """Demote x all the way to Q; ValueError if it is irrational."""
    if not is_rational(x):
        raise ValueError(f"{to_text(x)} is not rational")
    while isinstance(x, QuadElem):
        x = x.a
    return Fraction(x)


def demote(x) -> Scalar:
    """Drop x one level down the tower when its top coordinate is zero."""
    if isinstance(x, QuadElem) and x.b == 0:
        return x.a
    return x


def lowest_form(x) -> Scalar:
    """Demote x as far as possible."""
    while isinstance(x, QuadElem) and x.b == 0:
        x = x.a
    return x


def galois_sigma(x, field: Optional[Field] = None) -> Scalar:
    """Apply the nontrivial automorphism of ``field`` over its base field.

    ``field`` defaults to the field of x, so an element of K gets the K/Q
    conjugation and an element of L gets the L/K conjugation.  Pass ``field``
    explicitly to view a lower-level element inside a bigger field.
    """
    f = field_of(x) if field is None else field
    if f is QQ:
        raise BaseFieldHasNoConjugation("Q has no nontrivial automorphism")
    y = f.coerce(x)
    return QuadElem(f, y.a, -y.b)


def sqrt_in(field: Field, x) -> Optional[Scalar]:
    """Nonnegative square root of x inside ``field``, or None."""
    x = field.coerce(x)
    if field is QQ:
        return rational_sqrt(x)
    if sign(x) < 0:
        return None
    base, r = field.base, field.radicand
    p, q = x.a, x.b
    if q == 0:
        s = sqrt_in(base, p)
        if s is not None:
            return QuadElem(field, s, 0)
        t = sqrt_in(base, p / r)
        if t is not None:
            return QuadElem(field, 0, t)
        return None
    # (u + v sqrt r)^2 = p + q sqrt r  <=>  u^2 + r v^2 = p and 2uv = q
    n = sqrt_in(base, p * p - r * q * q)
    if n is None:
        return None
    for u2 in ((p + n) / 2, (p - n) / 2):
        u = sqrt_in(base, u2)
        if u is None or u == 0:
            continue
        v = q / (2 * u)
        if u * u + r * v * v == p:
            root = QuadElem(field, u, v)
            return root if sign(root) >= 0 else -root
    return None


# ---------------------------------------------------------------------------
# text forms


def to_text(x) -> str:
    """Canonical text: ``p/q``, ``(a)+(b)*sqrt(d)``, nested for L."""
    if isinstance(x, QuadElem):
        return f"({to_text(x.a)})+({to_text(x.b)})*sqrt({to_text(x.field.radicand)})"
    return str(Fraction(x))


def field_to_text(f: Field) -> str:
    if f is QQ:
        return "Base"
    if f.base is QQ:
        return f"QuadK d={f.d}"
    return f"QuadL d={f.d} zeta={to_text(f.radicand)}"


def parse_field(text: str) -> Field:
    text = text.strip()
    if text == "Base":
        return QQ
    m = re.fullmatch(r"QuadK d=(\d+)", text)
    if m:
        return _checked(lambda: quad_k(int(m.group(1))))
    m = re.fullmatch(r"QuadL d=(\d+) zeta=(\S+)", text)
    if m:
        k = _checked(lambda: quad_k(int(m.group(1))))
        zeta = parse_scalar(m.group(2), k)
        return _checked(lambda: QuadField(k, zeta))
    raise ParseError(f"unrecognised field descriptor: {text!r}")


def _checked(fn):
    try:
        return fn()
    except InvalidField as exc:
        raise ParseError(str(exc)) from exc


_TOKEN = re.compile(r"\s*(?:(\d+)|(sqrt)|([-+*/^()]))")


class _ExprParser:
    """Recursive-descent evaluator for exact scalar expressions.

    Accepts integers, + - * / ^, parentheses and sqrt(...).  A square root
    outside the current field extends it one level (Q -> K -> L) unless the
    field was fixed by the caller.
    """

    def __init__(self, text: str, field: Optional[Field], fixed: bool):
        self.tokens = self._tokenize(text)
        self.pos = 0
        self.fixed = fixed
        self.field: Field = QQ if field is None else field

    @staticmethod
    def _tokenize(text: str) -> list[str]:
        out, i = [], 0
        text = text.strip()
        while i < len(text):
            m = _TOKEN.match(text, i)
            if not m or m.end() == i:
                raise ParseError(f"unexpected character at {i} in {text!r}")
            out.append(m.group(1) or m.group(2) or m.group(3))
            i = m.end()
            while i < len(text) and text[i].isspace():
                i += 1
        return out

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected: Optional[str] = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ParseError(f"expected {expected or 'a token'}, found {tok!r}")
        self.pos += 1
        return tok

    def parse(self) -> Scalar:
        if not self.tokens:
            raise ParseError("empty expression")
        v = self.expr()
        if self.peek() is not None:
            raise ParseError(f"trailing input at token {self.peek()!r}")
        return v

    def expr(self):
        v = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self):
        v = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()
            w = self.unary()
            if op == "*":
                v = v * w
            else:
                if w == 0:
                    raise ParseError("division by zero")
                v = v / w
        return v

    def unary(self):
        if self.peek() == "-":
            self.take()
            return -self.unary()
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        v = self.atom()
        if self.peek() == "^":
            self.take()
            neg = False
            if self.peek() == "-":
                self.take()
                neg = True
            tok = self.take()
            if not tok.isdigit():
                raise ParseError("exponent must be an integer")
            n = -int(tok) if neg else int(tok)
            if n < 0 and v == 0:
                raise ParseError("division by zero")
            v = Fraction(v) ** n if isinstance(v, Fraction) else v ** n
        return v

    def atom(self):
        tok = self.take()
        if tok.isdigit():
            return Fraction(int(tok))
        if tok == "(":
            v = self.expr()
            self.take(")")
            return v
        if tok == "sqrt":
            self.take("(")
            v = self.expr()
            self.take(")")
            return self.sqrt(v)
        raise ParseError(f"unexpected token {tok!r}")

    def sqrt(self, v):
        try:
            f = join(self.field, field_of(v))
        except FieldMismatch as exc:
            raise ParseError(str(exc)) from exc
        if sign(v) < 0:
            raise ParseError("square root of a negative number")
        root = sqrt_in(f, v)
        if root is not None:
            return root
        if self.fixed:
            raise ParseError(f"sqrt({to_text(v)}) does not lie in {field_to_text(self.field)}")
        if f is QQ:
            q = Fraction(v)
            d = squarefree_part(q.numerator * q.denominator)
            new = quad_k(d)
        elif f.base is QQ:
            new = _checked(lambda: QuadField(f, v))
        else:
            raise ParseError("square roots beyond a degree-4 tower are unsupported")
        self.field = new
        root = sqrt_in(new, v)
        assert root is not None
        return root


def parse_scalar(text: str, field: Optional[Field] = None) -> Scalar:
    """Parse an exact scalar expression such as ``(1/2)+(3)*sqrt(5)`` or ``1/sqrt(2)``.

    With ``field`` given, the value must lie in that field and is returned as
    an element of it.
    """
    return parse_scalars([text], field)[0]


def parse_scalars(texts: list[str], field: Optional[Field] = None) -> list[Scalar]:
    """Parse several expressions sharing one field context."""
    out = []
    current = field
    for t in texts:
        p = _ExprParser(t, current, fixed=field is not None)
        out.append(p.parse())
        current = p.field
    top = current or QQ
    try:
        return [top.coerce(v) for v in out]
    except FieldMismatch as exc:
        raise ParseError(str(exc)) from exc


# ---------------------------------------------------------------------------
# matrices


def _common_field(values) -> Field:
    f = QQ
    for v in values:
        f = join(f, field_of(v))
    return f


@dataclass(frozen=True)
class Mat2:
    """A 2x2 matrix over a tower field (no determinant condition)."""

    a: Scalar
    b: Scalar
    c: Scalar
    d: Scalar

    def __post_init__(self):
        vals = (self.a, self.b, self.c, self.d)
        f = _common_field(vals)
        for name, v in zip("abcd", vals):
            object.__setattr__(self, name, f.coerce(v))

    @property
    def field(self) -> Field:
        return field_of(self.a)

    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def __iter__(self) -> Iterator[Scalar]:
        return iter(self.entries())

    def det(self) -> Scalar:
        return self.a * self.d - self.b * self.c

    def trace(self) -> Scalar:
        return self.a + self.d

    def adjugate(self) -> "Mat2":
        return Mat2(self.d, -self.b, -self.c, self.a)

    def inverse(self) -> "Mat2":
        det = self.det()
        if det == 0:
            raise DivisionByZero("singular matrix")
        return Mat2(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def scale(self, s) -> "Mat2":
        return Mat2(self.a * s, self.b * s, self.c * s, self.d * s)

    def __mul__(self, other):
        if isinstance(other, Mat2):
            e = (
                self.a * other.a + self.b * other.c,
                self.a * other.b + self.b * other.d,
                self.c * other.a + self.d * other.c,
                self.c * other.b + self.d * other.d,
            )
            if isinstance(self, ProjMat) and isinstance(other, ProjMat):
                return ProjMat(*e)
            return Mat2(*e)
        if isinstance(other, (int, Fraction, QuadElem)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, QuadElem)):
            return self.scale(other)
        return NotImplemented

    def __neg__(self):
        return Mat2(-self.a, -self.b, -self.c, -self.d)

    def __add__(self, other):
        if not isinstance(other, Mat2):
            return NotImplemented
        return Mat2(*(x + y for x, y in zip(self, other)))

    def __sub__(self, other):
        if not isinstance(other, Mat2):
            return NotImplemented
        return Mat2(*(x - y for x, y in zip(self, other)))

    def map(self, fn) -> "Mat2":
        return Mat2(*(fn(x) for x in self))

    def is_rational(self) -> bool:
        return all(is_rational(x) for x in self)

    def is_integral(self) -> bool:
        return all(is_rational(x) and to_rational(x).denominator == 1 for x in self)

    def to_rational(self) -> "Mat2":
        return Mat2(*(to_rational(x) for x in self))

    def to_ints(self) -> tuple[int, int, int, int]:
        if not self.is_integral():
            raise ValueError("matrix is not integral")
        return tuple(int(to_rational(x)) for x in self)

    def to_text(self) -> str:
        return ", ".join(to_text(x) for x in self.entries()[:2]) + "; " + ", ".join(
            to_text(x) for x in self.entries()[2:]
        )

    def to_dict(self) -> dict:
        return {"field": field_to_text(self.field), "entries": [to_text(x) for x in self]}

    def __repr__(self) -> str:
        return f"{type(self).__name__}[{self.to_text()}]"


@dataclass(frozen=True, repr=False)
class ProjMat(Mat2):
    """A determinant-one matrix modulo +-I, stored with canonical sign."""

    def __post_init__(self):
        super().__post_init__()
        if self.det() != 1:
            raise ValueError(f"determinant is {to_text(self.det())}, not 1")
        for x in self.entries():
            if x != 0:
                if sign(x) < 0:
                    for name in "abcd":
                        object.__setattr__(self, name, -getattr(self, name))
                break

    @classmethod
    def of(cls, m: Mat2) -> "ProjMat":
        return cls(*m.entries())

    def inverse(self) -> "ProjMat":
        return ProjMat(self.d, -self.b, -self.c, self.a)

    def __neg__(self) -> "ProjMat":
        return self

    def __pow__(self, n: int) -> "ProjMat":
        base = self if n >= 0 else self.inverse()
        out = IDENTITY
        for _ in range(abs(n)):
            out = out * base
        return out

    def conj(self, g: Mat2) -> "ProjMat":
        """self^g = g^-1 * self * g."""
        return ProjMat.of(g.inverse() * self * g)

    def sigma(self, field: Optional[Field] = None) -> "ProjMat":
        return ProjMat(*(galois_sigma(x, field or self.field) for x in self))


def parse_matrix(text: str, field: Optional[Field] = None, projective: bool = True) -> Mat2:
    """Parse ``a, b; c, d`` with exact scalar expressions as entries."""
    rows = [r for r in text.strip().strip("[]").split(";")]
    cells = [c.strip() for r in rows for c in r.split(",")]
    if len(rows) != 2 or len(cells) != 4 or any(not c for c in cells):
        raise ParseError(f"expected a 2x2 matrix 'a, b; c, d', got {text!r}")
    vals = parse_scalars(cells, field)
    try:
        return ProjMat(*vals) if projective else Mat2(*vals)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def matrix_from_dict(data: dict, projective: bool = True) -> Mat2:
    f = parse_field(data["field"])
    vals = [parse_scalar(t, f) for t in data["entries"]]
    return ProjMat(*vals) if projective else Mat2(*vals)


def pmat(a, b, c, d) -> ProjMat:
    return ProjMat(Fraction(a), Fraction(b), Fraction(c), Fraction(d))


IDENTITY = pmat(1, 0, 0, 1)
S = pmat(0, -1, 1, 0)
T = pmat(1, 1, 0, 1)
U = S * T


# ---------------------------------------------------------------------------
# PSL2(Q) sqrt(Q)


@dataclass(frozen=True)
class SqrtQDecomp:
    """g = sqrt(q) * B projectively, q a squarefree positive integer, B rational."""

    q: Fraction
    B: Mat2

    def conj(self, A: Mat2) -> ProjMat:
        """A^g = B^-1 A B; the scalar part cancels."""
        return ProjMat.of(self.B.inverse() * A * self.B)

    def conj_inverse(self, A: Mat2) -> ProjMat:
        """A^(g^-1) = B A B^-1."""
        return ProjMat.of(self.B * A * self.B.inverse())

    def matrix(self) -> ProjMat:
        if self.q == 1:
            return ProjMat.of(self.B)
        r = quad_k(int(self.q)).gen
        return ProjMat.of(self.B.scale(r))

    def to_dict(self) -> dict:
        return {"q": str(self.q), "B": [str(x) for x in self.B]}

    @classmethod
    def from_dict(cls, data: dict) -> "SqrtQDecomp":
        return cls(Fraction(data["q"]), Mat2(*(Fraction(x) for x in data["B"])))


def sqrtq_membership(g: Mat2) -> Optional[SqrtQDecomp]:
    """Decompose g as sqrt(q)*B with B rational, or return None."""
    ents = g.entries()
    e = next(x for x in ents if x != 0)
    if not is_rational(e * e):
        return None
    prods = [e * x for x in ents]
    if not all(is_rational(p) for p in prods):
        return None
    s = to_rational(e * e)
    q = squarefree_part(s.numerator * s.denominator)
    m = rational_sqrt(s / q)
    assert m is not None
    scale = sign(e) * m * q  # e * sqrt(q)
    B = Mat2(*(to_rational(p) / scale for p in prods))
    for x in B:
        if x != 0:
            if x < 0:
                B = -B
            break
    return SqrtQDecomp(Fraction(q), B)


def rational_conjugate(A: Mat2, g: SqrtQDecomp) -> ProjMat:
    """A^g = g^-1 A g for integral A and g in PSL2(Q)sqrt(Q); exactly rational."""
    return g.conj(A)


class TraceClass(Enum):
    ELLIPTIC = "Elliptic"
    PARABOLIC = "Parabolic"
    HYPERBOLIC = "Hyperbolic"


def classify_by_trace(A: Mat2) -> TraceClass:
    t = A.trace()
    s = sign(t * t - 4)
    if s < 0:
        return TraceClass.ELLIPTIC
    if s == 0:
        return TraceClass.PARABOLIC
    return TraceClass.HYPERBOLIC
