"""Finite-index subgroups as coset tables.

Subgroups of PSL2(Z) are stored through the permutation action of the
generators S = [[0,-1],[1,0]] and U = S*T (order 3) on right cosets, with the
subgroup itself the stabilizer of coset 0.  Words in S, U are strings over the
letters ``S``, ``U`` and ``u`` (= U^-1).

Subgroups of an abstract free group F of rank r use the same idea with one
permutation per free generator; they are a separate type so the two kinds of
table are never mixed up.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence, Union

from .errors import NotAMember, NotTorsionFree, NotTransitive, ParseError
from .exact import Mat2, ProjMat, pmat
from .freegrp import AbelVector, Word, abelianize

TABLE_MAGIC = "MODCOMM-TABLE 1"

IntMat = tuple[int, int, int, int]

SU_LETTERS = ("S", "U", "u")
_GEN_INT: dict[str, IntMat] = {"S": (0, -1, 1, 0), "U": (0, -1, 1, 1), "u": (1, 1, -1, 0)}
_COMBINE = {("S", "S"): "", ("U", "U"): "u", ("u", "u"): "U", ("U", "u"): "", ("u", "U"): ""}
_INV = {"S": "S", "U": "u", "u": "U"}


# ---------------------------------------------------------------------------
# words in S and U


def imul(x: IntMat, y: IntMat) -> IntMat:
    a, b, c, d = x
    e, f, g, h = y
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def iinv(x: IntMat) -> IntMat:
    a, b, c, d = x
    return (d, -b, -c, a)


def icanon(x: IntMat) -> IntMat:
    for v in x:
        if v:
            return x if v > 0 else (-x[0], -x[1], -x[2], -x[3])
    return x


def as_intmat(M) -> IntMat:
    if isinstance(M, Mat2):
        return M.to_ints()
    return tuple(int(v) for v in M)


def su_reduce(w: str) -> str:
    """Normal form in Z/2 * Z/3: cancel SS, UUU and U u."""
    stack: list[str] = []
    for x in w:
        if x not in _GEN_INT:
            raise ValueError(f"bad letter {x!r} in S/U word")
        cur = x
        while cur:
            if stack and (stack[-1], cur) in _COMBINE:
                cur = _COMBINE[(stack.pop(), cur)]
            else:
                stack.append(cur)
                cur = ""
    return "".join(stack)


def su_inverse(w: str) -> str:
    return "".join(_INV[x] for x in reversed(w))


def su_eval_int(w: str) -> IntMat:
    m: IntMat = (1, 0, 0, 1)
    for x in w:
        m = imul(m, _GEN_INT[x])
    return icanon(m)


def su_eval(w: str) -> ProjMat:
    return pmat(*su_eval_int(w))


def word_in_SU(M) -> str:
    """A reduced S/U word evaluating to the integral matrix M (continued fractions)."""
    a, b, c, d = as_intmat(M)
    if a * d - b * c != 1:
        raise ValueError("matrix must have determinant 1")
    parts: list[str] = []

    def tpow(n: int) -> str:
        return "SU" * n if n >= 0 else "uS" * (-n)

    while c != 0:
        q = a // c
        parts.append(tpow(q))
        a1, b1 = a - q * c, b - q * d
        parts.append("S")
        a, b, c, d = c, d, -a1, -b1
    parts.append(tpow(a * b))
    return su_reduce("".join(parts))


# ---------------------------------------------------------------------------
# permutation helpers


def _check_perm(p: Sequence[int], n: int) -> tuple[int, ...]:
    p = tuple(int(x) for x in p)
    if len(p) != n or sorted(p) != list(range(n)):
        raise ValueError(f"not a permutation of 0..{n - 1}: {p}")
    return p


def _inverse_perm(p: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


def _bfs(letters: Sequence, step: Callable) -> tuple[list[int], dict]:
    parent: dict = {0: None}
    order = [0]
    queue = deque([0])
    while queue:
        c = queue.popleft()
        for x in letters:
            d = step(c, x)
            if d not in parent:
                parent[d] = (c, x)
                order.append(d)
                queue.append(d)
    return order, parent


def _orbit(start, letters: Sequence, step: Callable) -> tuple[list, dict]:
    """BFS orbit of an arbitrary hashable state; returns states and transitions."""
    index = {start: 0}
    states = [start]
    trans: dict = {}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for x in letters:
            t = step(s, x)
            if t not in index:
                index[t] = len(states)
                states.append(t)
                queue.append(t)
            trans[(index[s], x)] = index[t]
    return states, trans


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# subgroups of PSL2(Z)


@dataclass(frozen=True)
class CosetTable:
    """A finite-index subgroup of PSL2(Z): the stabilizer of coset 0."""

    perm_S: tuple[int, ...]
    perm_U: tuple[int, ...]

    kind = "psl"
    letters = SU_LETTERS

    def __post_init__(self):
        n = len(self.perm_S)
        if n == 0:
            raise ValueError("empty table")
        s = _check_perm(self.perm_S, n)
        u = _check_perm(self.perm_U, n)
        object.__setattr__(self, "perm_S", s)
        object.__setattr__(self, "perm_U", u)
        if any(s[s[c]] != c for c in range(n)):
            raise ValueError("perm_S does not square to the identity")
        if any(u[u[u[c]]] != c for c in range(n)):
            raise ValueError("perm_U does not cube to the identity")
        order, _ = _bfs(SU_LETTERS, self.step)
        if len(order) != n:
            raise NotTransitive("S and U do not act transitively")

    @property
    def n(self) -> int:
        return len(self.perm_S)

    @property
    def index(self) -> int:
        return self.n

    @cached_property
    def perm_u(self) -> tuple[int, ...]:
        return _inverse_perm(self.perm_U)

    def step(self, c: int, x: str) -> int:
        if x == "S":
            return self.perm_S[c]
        if x == "U":
            return self.perm_U[c]
        return self.perm_u[c]

    def act(self, c: int, w: str) -> int:
        for x in w:
            c = self.step(c, x)
        return c

    def word_of(self, M) -> str:
        return M if isinstance(M, str) else word_in_SU(M)

    def contains(self, M) -> bool:
        return self.act(0, self.word_of(M)) == 0

    @cached_property
    def _tree(self) -> tuple[list[int], dict]:
        return _bfs(SU_LETTERS, self.step)

    @cached_property
    def transversal(self) -> tuple[str, ...]:
        """Coset representatives from the breadth-first tree (order S, U, u)."""
        _, parent = self._tree
        words = [""] * self.n
        for c in self._tree[0]:
            if parent[c] is not None:
                p, x = parent[c]
                words[c] = words[p] + x
        return tuple(words)

    def standardize(self) -> "CosetTable":
        order, _ = self._tree
        relabel = {c: i for i, c in enumerate(order)}
        s = [0] * self.n
        u = [0] * self.n
        for c in range(self.n):
            s[relabel[c]] = relabel[self.perm_S[c]]
            u[relabel[c]] = relabel[self.perm_U[c]]
        return CosetTable(tuple(s), tuple(u))

    def schreier_words(self) -> list[str]:
        """Words g_c x g_(cx)^-1 over all non-tree edges; they generate the subgroup."""
        tv = self.transversal
        out = []
        for c in range(self.n):
            for x in ("S", "U"):
                w = su_reduce(tv[c] + x + su_inverse(tv[self.step(c, x)]))
                if w and w not in out:
                    out.append(w)
        return out

    def to_text(self) -> str:
        lines = [TABLE_MAGIC, "kind psl", f"index {self.n}", "alphabet S U"]
        lines += [f"{c}: {self.perm_S[c]} {self.perm_U[c]}" for c in range(self.n)]
        return "\n".join(lines) + "\n"

    @cached_property
    def content_id(self) -> str:
        return _digest(self.to_text())


def torsion_free(tbl: CosetTable) -> bool:
    return all(tbl.perm_S[c] != c for c in range(tbl.n)) and all(
        tbl.perm_U[c] != c for c in range(tbl.n)
    )


def contains(tbl, M) -> bool:
    return tbl.contains(M)


def principal_congruence(k: int) -> CosetTable:
    """Gamma(k): the kernel of PSL2(Z) -> PSL2(Z/k), enumerated through PSL2(Z/k)."""
    if k < 1:
        raise ValueError("level must be >= 1")
    if k == 1:
        return CosetTable((0,), (0,))

    def canon(m: IntMat) -> IntMat:
        m = tuple(x % k for x in m)
        neg = tuple((-x) % k for x in m)
        return min(m, neg)

    def step(m: IntMat, x: str) -> IntMat:
        return canon(imul(m, _GEN_INT[x]))

    states, trans = _orbit(canon((1, 0, 0, 1)), SU_LETTERS, step)
    n = len(states)
    s = tuple(trans[(c, "S")] for c in range(n))
    u = tuple(trans[(c, "U")] for c in range(n))
    return CosetTable(s, u).standardize()


def psl2_order(k: int) -> int:
    """|PSL2(Z/k)| from the standard product formula."""
    if k == 1:
        return 1
    n, m, p = k ** 3, k, 2
    while p * p <= m:
        if m % p == 0:
            n = n * (p * p - 1) // (p * p)
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        n = n * (m * m - 1) // (m * m)
    return n // 2 if k > 2 else n


def from_permutations(perm_S: Sequence[int], perm_U: Sequence[int]) -> CosetTable:
    """Stabilizer of point 0 for a transitive action of PSL2(Z) given by S, U images."""
    return CosetTable(tuple(perm_S), tuple(perm_U)).standardize()


def intersect(A, B):
    """A ∩ B via the diagonal action on coset pairs (orbit of (0, 0))."""
    if type(A) is not type(B):
        raise TypeError("cannot intersect tables of different kinds")
    if isinstance(A, FreeCosetTable) and A.rank != B.rank:
        raise ValueError("free tables over different ranks")

    def step(p, x):
        return (A.step(p[0], x), B.step(p[1], x))

    if isinstance(A, CosetTable):
        states, trans = _orbit((0, 0), SU_LETTERS, step)
        n = len(states)
        return CosetTable(
            tuple(trans[(c, "S")] for c in range(n)), tuple(trans[(c, "U")] for c in range(n))
        ).standardize()
    states, trans = _orbit((0, 0), A.letters, step)
    n = len(states)
    perms = tuple(tuple(trans[(c, i)] for c in range(n)) for i in range(1, A.rank + 1))
    return FreeCosetTable(perms, A.ambient).standardize()


def is_normal(tbl) -> bool:
    """Normality test: conjugate every Schreier generator by each ambient generator."""
    words = tbl.schreier_words()
    if isinstance(tbl, CosetTable):
        return all(
            tbl.contains(su_reduce(g + w + su_inverse(g))) for w in words for g in ("S", "U")
        )
    gens = [Word((i,)) for i in range(1, tbl.rank + 1)]
    return all(tbl.contains(w.conj(g)) for w in words for g in gens)


def table_from_oracle(is_member: Callable[[IntMat], bool], max_index: int) -> CosetTable:
    """Coset enumeration for a subgroup of PSL2(Z) known only by a membership test."""
    reps: list[IntMat] = [(1, 0, 0, 1)]
    inv_reps: list[IntMat] = [(1, 0, 0, 1)]
    images: dict = {}
    queue = deque([0])
    while queue:
        c = queue.popleft()
        for x in ("S", "U"):
            m = imul(reps[c], _GEN_INT[x])
            for j, ij in enumerate(inv_reps):
                if is_member(icanon(imul(m, ij))):
                    images[(c, x)] = j
                    break
            else:
                if len(reps) >= max_index:
                    raise NotTransitive(f"more than {max_index} cosets")
                images[(c, x)] = len(reps)
                reps.append(m)
                inv_reps.append(iinv(m))
                queue.append(len(reps) - 1)
    n = len(reps)
    return CosetTable(
        tuple(images[(c, "S")] for c in range(n)), tuple(images[(c, "U")] for c in range(n))
    ).standardize()


# ---------------------------------------------------------------------------
# cusps


@dataclass(frozen=True)
class CuspData:
    orbits: tuple[tuple[int, ...], ...]
    widths: tuple[int, ...]
    rep_words: tuple[str, ...]
    representatives: tuple[ProjMat, ...]

    def __len__(self) -> int:
        return len(self.orbits)


def cusps(tbl: CosetTable) -> CuspData:
    """Orbits of T = S*U on cosets, with one parabolic g_c T^w g_c^-1 per orbit."""
    seen: set[int] = set()
    orbits, widths, words = [], [], []
    tv = tbl.transversal
    for c in range(tbl.n):
        if c in seen:
            continue
        cyc = [c]
        d = tbl.perm_U[tbl.perm_S[c]]
        while d != c:
            cyc.append(d)
            d = tbl.perm_U[tbl.perm_S[d]]
        seen.update(cyc)
        orbits.append(tuple(cyc))
        widths.append(len(cyc))
        words.append(su_reduce(tv[c] + "SU" * len(cyc) + su_inverse(tv[c])))
    return CuspData(tuple(orbits), tuple(widths), tuple(words), tuple(su_eval(w) for w in words))


# ---------------------------------------------------------------------------
# Schreier bases


@dataclass(frozen=True, eq=False)
class SchreierBasis:
    """Free basis of a torsion-free subgroup of PSL2(Z) from its coset table."""

    table: CosetTable
    transversal: tuple[str, ...]
    gen_words: tuple[str, ...]
    gen_mats: tuple[ProjMat, ...]
    basis_id: str
    _expr: dict = field(repr=False)

    @property
    def rank(self) -> int:
        return len(self.gen_words)

    @property
    def gens(self) -> tuple[tuple[str, ProjMat], ...]:
        return tuple(zip(self.gen_words, self.gen_mats))

    def rewrite(self, x) -> Word:
        """Rewrite a member (S/U word or integral matrix) over the basis."""
        w = self.table.word_of(x)
        c, out = 0, []
        for l in w:
            if l == "S":
                d = self.table.perm_S[c]
                e = self._expr[("S", min(c, d))]
                out.extend(e if c < d else _inv_letters(e))
            elif l == "U":
                d = self.table.perm_U[c]
                out.extend(self._expr[("U", c)])
            else:
                d = self.table.perm_u[c]
                out.extend(_inv_letters(self._expr[("U", d)]))
            c = d
        if c != 0:
            raise NotAMember("element does not lie in the subgroup")
        return Word(tuple(out), self.basis_id)

    def class_of(self, x) -> AbelVector:
        return abelianize(self.rewrite(x), self.rank)

    def evaluate(self, w: Word) -> ProjMat:
        m: IntMat = (1, 0, 0, 1)
        ints = [g.to_ints() for g in self.gen_mats]
        for l in w.letters:
            g = ints[abs(l) - 1]
            m = imul(m, g if l > 0 else iinv(g))
        return pmat(*icanon(m))

    def su_word(self, w: Word) -> str:
        return su_reduce("".join(
            self.gen_words[abs(l) - 1] if l > 0 else su_inverse(self.gen_words[abs(l) - 1])
            for l in w.letters
        ))


def _inv_letters(e: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(-x for x in reversed(e))


def schreier_basis(tbl: CosetTable) -> SchreierBasis:
    """Reidemeister-Schreier basis of a torsion-free subgroup; rank 1 + n/6."""
    if not torsion_free(tbl):
        raise NotTorsionFree("subgroup contains elements of order 2 or 3")
    n = tbl.n
    order, parent = tbl._tree
    tv = tbl.transversal
    tree = set()
    for c in order[1:]:
        p, x = parent[c]
        if x == "S":
            tree.add(("S", min(p, c)))
        elif x == "U":
            tree.add(("U", p))
        else:
            tree.add(("U", c))
    # each U-cycle c -> cU -> cU^2 -> c gives one relation; drop one non-tree edge per cycle
    dropped = set()
    seen: set[int] = set()
    for c in range(n):
        if c in seen:
            continue
        cyc = (c, tbl.perm_U[c], tbl.perm_U[tbl.perm_U[c]])
        seen.update(cyc)
        nontree = [("U", x) for x in cyc if ("U", x) not in tree]
        dropped.add(nontree[-1])
    words: list[str] = []
    expr: dict = {}
    for c in range(n):
        d = tbl.perm_S[c]
        if c < d:
            e = ("S", c)
            if e in tree:
                expr[e] = ()
            else:
                words.append(su_reduce(tv[c] + "S" + su_inverse(tv[d])))
                expr[e] = (len(words),)
        e = ("U", c)
        if e in tree:
            expr[e] = ()
        elif e not in dropped:
            words.append(su_reduce(tv[c] + "U" + su_inverse(tv[tbl.perm_U[c]])))
            expr[e] = (len(words),)
    for e in dropped:
        c1 = tbl.perm_U[e[1]]
        c2 = tbl.perm_U[c1]
        expr[e] = _inv_letters(expr[("U", c2)]) + _inv_letters(expr[("U", c1)])
    assert len(words) == 1 + n // 6, "rank disagrees with the Euler characteristic"
    mats = tuple(su_eval(w) for w in words)
    return SchreierBasis(tbl, tv, tuple(words), mats, "H:" + tbl.content_id, expr)


# ---------------------------------------------------------------------------
# subgroups of a free group


@dataclass(frozen=True)
class FreeCosetTable:
    """A finite-index subgroup of the free group F = <x_1..x_r>."""

    perms: tuple[tuple[int, ...], ...]
    ambient: str = field(default="F", compare=False)

    kind = "free"

    def __post_init__(self):
        if not self.perms:
            raise ValueError("free table needs at least one generator")
        n = len(self.perms[0])
        perms = tuple(_check_perm(p, n) for p in self.perms)
        object.__setattr__(self, "perms", perms)
        order, _ = _bfs(self.letters, self.step)
        if len(order) != n:
            raise NotTransitive("generators do not act transitively")

    @property
    def n(self) -> int:
        return len(self.perms[0])

    @property
    def index(self) -> int:
        return self.n

    @property
    def rank(self) -> int:
        """Rank of the ambient free group."""
        return len(self.perms)

    @cached_property
    def letters(self) -> tuple[int, ...]:
        return tuple(x for i in range(1, self.rank + 1) for x in (i, -i))

    @cached_property
    def _inverses(self) -> tuple[tuple[int, ...], ...]:
        return tuple(_inverse_perm(p) for p in self.perms)

    def step(self, c: int, x: int) -> int:
        return self.perms[x - 1][c] if x > 0 else self._inverses[-x - 1][c]

    def act(self, c: int, w: Word) -> int:
        for x in w.letters:
            c = self.step(c, x)
        return c

    def contains(self, w: Word) -> bool:
        return self.act(0, w) == 0

    @cached_property
    def _tree(self) -> tuple[list[int], dict]:
        return _bfs(self.letters, self.step)

    @cached_property
    def transversal(self) -> tuple[Word, ...]:
        _, parent = self._tree
        words: list[tuple[int, ...]] = [()] * self.n
        for c in self._tree[0]:
            if parent[c] is not None:
                p, x = parent[c]
                words[c] = words[p] + (x,)
        return tuple(Word(w, self.ambient) for w in words)

    def standardize(self) -> "FreeCosetTable":
        order, _ = self._tree
        relabel = {c: i for i, c in enumerate(order)}
        perms = []
        for p in self.perms:
            q = [0] * self.n
            for c in range(self.n):
                q[relabel[c]] = relabel[p[c]]
            perms.append(tuple(q))
        return FreeCosetTable(tuple(perms), self.ambient)

    def schreier_words(self) -> list[Word]:
        tv = self.transversal
        out = []
        for c in range(self.n):
            for i in range(1, self.rank + 1):
                w = tv[c] * Word((i,), self.ambient) * tv[self.step(c, i)].inverse()
                if w.letters and w not in out:
                    out.append(w)
        return out

    def quotient(self) -> list[list[int]]:
        """Multiplication table of F/K for a normal K (cosets are group elements)."""
        tv = self.transversal
        return [[self.act(c1, tv[c2]) for c2 in range(self.n)] for c1 in range(self.n)]

    def to_text(self) -> str:
        lines = [TABLE_MAGIC, "kind free", f"index {self.n}",
                 "alphabet " + " ".join(f"x{i}" for i in range(1, self.rank + 1))]
        lines += [f"{c}: " + " ".join(str(p[c]) for p in self.perms) for c in range(self.n)]
        return "\n".join(lines) + "\n"

    @cached_property
    def content_id(self) -> str:
        return _digest(self.ambient + "\n" + self.to_text())


@dataclass(frozen=True, eq=False)
class FreeSchreierBasis:
    """Free basis of a finite-index subgroup of F, as words over F's generators."""

    table: FreeCosetTable
    transversal: tuple[Word, ...]
    gens: tuple[Word, ...]
    basis_id: str
    _expr: dict = field(repr=False)

    @property
    def rank(self) -> int:
        return len(self.gens)

    def rewrite(self, w: Word) -> Word:
        c, out = 0, []
        for x in w.letters:
            if x > 0:
                out.extend(self._expr[(x, c)])
                c = self.table.step(c, x)
            else:
                d = self.table.step(c, x)
                out.extend(_inv_letters(self._expr[(-x, d)]))
                c = d
        if c != 0:
            raise NotAMember("word does not lie in the subgroup")
        return Word(tuple(out), self.basis_id)

    def class_of(self, w: Word) -> AbelVector:
        return abelianize(self.rewrite(w), self.rank)

    def evaluate(self, w: Word) -> Word:
        """The word over F represented by a word over this basis."""
        out = Word((), self.table.ambient)
        for l in w.letters:
            g = self.gens[abs(l) - 1]
            out = out * (g if l > 0 else g.inverse())
        return out


def free_schreier_basis(tbl: FreeCosetTable) -> FreeSchreierBasis:
    """Schreier basis of a subgroup of F; rank 1 + n(r - 1)."""
    order, parent = tbl._tree
    tv = tbl.transversal
    tree = set()
    for c in order[1:]:
        p, x = parent[c]
        tree.add((x, p) if x > 0 else (-x, c))
    gens: list[Word] = []
    expr: dict = {}
    for c in range(tbl.n):
        for i in range(1, tbl.rank + 1):
            if (i, c) in tree:
                expr[(i, c)] = ()
            else:
                gens.append(tv[c] * Word((i,), tbl.ambient) * tv[tbl.step(c, i)].inverse())
                expr[(i, c)] = (len(gens),)
    assert len(gens) == 1 + tbl.n * (tbl.rank - 1)
    return FreeSchreierBasis(tbl, tv, tuple(gens), "K:" + tbl.content_id, expr)


def normal_kernel(F, images: Sequence[Sequence[int]]) -> FreeCosetTable:
    """Kernel of F -> Q where generator x_i maps to the permutation images[i-1].

    ``F`` is the ambient free group, given as its rank, a SchreierBasis or a
    FreeSchreierBasis.  Q is the permutation group the images generate; the
    kernel's cosets are the elements of Q, so its index is |Q|.
    """
    if isinstance(F, int):
        rank, ambient = F, "F"
    else:
        rank, ambient = F.rank, F.basis_id
    if len(images) != rank:
        raise ValueError(f"need {rank} images, got {len(images)}")
    m = len(images[0]) if images else 1
    imgs = [_check_perm(p, m) for p in images]
    # the images must act transitively on their points
    reach, queue = {0}, deque([0])
    while queue:
        p = queue.popleft()
        for g in imgs + [_inverse_perm(g) for g in imgs]:
            if g[p] not in reach:
                reach.add(g[p])
                queue.append(g[p])
    if len(reach) != m:
        raise NotTransitive("the images do not generate a transitive group")

    def step(q, x):
        g = imgs[x - 1] if x > 0 else _inverse_perm(imgs[-x - 1])
        return tuple(g[j] for j in q)

    letters = tuple(x for i in range(1, rank + 1) for x in (i, -i))
    states, trans = _orbit(tuple(range(m)), letters, step)
    n = len(states)
    perms = tuple(tuple(trans[(c, i)] for c in range(n)) for i in range(1, rank + 1))
    return FreeCosetTable(perms, ambient).standardize()


def restrict_to_free(tbl: CosetTable, F: SchreierBasis) -> FreeCosetTable:
    """View K = stab(0) ∩ F as a subgroup of the free group F with basis F.gens."""
    acts = [(w, su_inverse(w)) for w in F.gen_words]

    def step(c, x):
        w = acts[x - 1][0] if x > 0 else acts[-x - 1][1]
        return tbl.act(c, w)

    letters = tuple(x for i in range(1, F.rank + 1) for x in (i, -i))
    states, trans = _orbit(0, letters, step)
    n = len(states)
    perms = tuple(tuple(trans[(c, i)] for c in range(n)) for i in range(1, F.rank + 1))
    return FreeCosetTable(perms, F.basis_id).standardize()


# ---------------------------------------------------------------------------
# serialization


def table_from_text(text: str, ambient: str = "F") -> Union[CosetTable, FreeCosetTable]:
    lines = [l.strip() for l in text.strip().splitlines() if l.strip()]
    try:
        if not lines or lines[0] != TABLE_MAGIC:
            raise ParseError("missing table header")
        kind = lines[1].split()
        index = lines[2].split()
        alphabet = lines[3].split()
        if kind[0] != "kind" or index[0] != "index" or alphabet[0] != "alphabet":
            raise ParseError("malformed table header")
        n = int(index[1])
        rows = lines[4:]
        if len(rows) != n:
            raise ParseError(f"expected {n} coset lines, found {len(rows)}")
        cols: list[list[int]] = [[] for _ in alphabet[1:]]
        for c, row in enumerate(rows):
            head, _, rest = row.partition(":")
            if int(head) != c:
                raise ParseError(f"coset lines out of order at {c}")
            vals = [int(v) for v in rest.split()]
            if len(vals) != len(cols):
                raise ParseError(f"wrong number of images on line {c}")
            for col, v in zip(cols, vals):
                col.append(v)
        if kind[1] == "psl":
            if alphabet[1:] != ["S", "U"]:
                raise ParseError("a psl table must use the alphabet S U")
            return CosetTable(tuple(cols[0]), tuple(cols[1]))
        if kind[1] == "free":
            if alphabet[1:] != [f"x{i}" for i in range(1, len(cols) + 1)]:
                raise ParseError("a free table must use the alphabet x1 .. xr")
            return FreeCosetTable(tuple(tuple(c) for c in cols), ambient)
        raise ParseError(f"unknown table kind {kind[1]!r}")
    except (IndexError, ValueError, NotTransitive) as exc:
        raise ParseError(f"bad table record: {exc}") from exc


def parse_cycles(text: str, degree: Optional[int] = None) -> tuple[int, ...]:
    """Permutation from cycle notation such as ``(0 1)(2 3)`` or an image list ``1,0,3,2``."""
    text = text.strip()
    try:
        if not text.startswith("(") and text not in ("", "id", "()"):
            img = [int(t) for t in text.replace(",", " ").split()]
            if sorted(img) != list(range(len(img))):
                raise ParseError(f"bad permutation {text!r}")
            m = max(len(img), degree or 0)
            return tuple(img + list(range(len(img), m)))
        cycles = [c for c in text.replace(")", "").split("(") if c.strip()] if text != "id" else []
        pts = [[int(t) for t in c.replace(",", " ").split()] for c in cycles]
    except ValueError as exc:
        raise ParseError(f"bad permutation {text!r}") from exc
    m = max([p for c in pts for p in c], default=-1) + 1
    m = max(m, degree or 0)
    img = list(range(m))
    for c in pts:
        for i, p in enumerate(c):
            img[p] = c[(i + 1) % len(c)]
    if sorted(img) != list(range(m)):
        raise ParseError(f"bad permutation {text!r}")
    return tuple(img)
