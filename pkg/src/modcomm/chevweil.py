"""Action of a finite quotient Q = F/N on H_1(N) for N normal in a free group F."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .errors import IdentityElement, NotNormal
from .freegrp import AbelVector
from .linalg import identity, matmul, nullspace, primitive, trace
from .modgroup import FreeCosetTable, FreeSchreierBasis, free_schreier_basis, is_normal

IntMatrix = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class HomologyAction:
    """Q as a multiplication table, with one integer matrix per element.

    ``mats[q]`` acts on column vectors of Schreier-basis coordinates and
    sends the class of w to the class of t_q w t_q^-1.
    """

    mul: tuple[tuple[int, ...], ...]
    mats: tuple[IntMatrix, ...]
    rank_F: int
    basis_id: str
    identity: int = 0

    @property
    def order(self) -> int:
        return len(self.mul)

    @property
    def dim(self) -> int:
        return len(self.mats[0])

    def apply(self, q: int, v: Sequence[int]) -> AbelVector:
        return tuple(sum(m * x for m, x in zip(row, v)) for row in self.mats[q])

    def homomorphism_ok(self) -> bool:
        for q1 in range(self.order):
            for q2 in range(self.order):
                prod = matmul(self.mats[q1], self.mats[q2])
                if [list(r) for r in self.mats[self.mul[q1][q2]]] != prod:
                    return False
        return [list(r) for r in self.mats[self.identity]] == identity(self.dim)

    def to_dict(self) -> dict:
        return {
            "mul": [list(r) for r in self.mul],
            "mats": [[list(r) for r in m] for m in self.mats],
            "rank_F": self.rank_F,
            "basis_id": self.basis_id,
        }


def _rank_of(F) -> int:
    return F if isinstance(F, int) else F.rank


def homology_action(F_basis, N_tbl: FreeCosetTable,
                    N_basis: Optional[FreeSchreierBasis] = None) -> HomologyAction:
    """Action matrices of F/N on H_1(N, Z) in N's Schreier basis.

    ``F_basis`` is the ambient free group (its rank, or a basis object).
    """
    k = _rank_of(F_basis)
    if N_tbl.rank != k:
        raise ValueError(f"table is over a rank-{N_tbl.rank} group, expected {k}")
    if not is_normal(N_tbl):
        raise NotNormal("the kernel table is not normal in F")
    NB = N_basis or free_schreier_basis(N_tbl)
    mul = tuple(tuple(r) for r in N_tbl.quotient())
    tv = N_tbl.transversal
    mats = []
    for q in range(N_tbl.n):
        cols = [NB.class_of(tv[q] * g * tv[q].inverse()) for g in NB.gens]
        mats.append(tuple(tuple(col[i] for col in cols) for i in range(NB.rank)))
    return HomologyAction(mul, tuple(mats), k, NB.basis_id)


@dataclass(frozen=True)
class CWReport:
    dim_ok: bool
    char_ok: bool
    fixed_dim_ok: bool
    homomorphism_ok: bool = True

    @property
    def all_ok(self) -> bool:
        return self.dim_ok and self.char_ok and self.fixed_dim_ok and self.homomorphism_ok


def fixed_subspace(act: HomologyAction) -> list[list[int]]:
    """Primitive integer basis of the vectors fixed by every element of Q."""
    r = act.dim
    rows = []
    for q, m in enumerate(act.mats):
        if q == act.identity:
            continue
        rows.extend([Fraction(m[i][j] - (i == j)) for j in range(r)] for i in range(r))
    if not rows:
        return identity(r)
    return [primitive(v) for v in nullspace(rows, r)]


def chevalley_weil_check(act: HomologyAction) -> CWReport:
    k, r = act.rank_F, act.dim
    dim_ok = r == k + (k - 1) * (act.order - 1)
    char_ok = all(
        trace(m) == (r if q == act.identity else 1) for q, m in enumerate(act.mats)
    )
    fixed_ok = len(fixed_subspace(act)) == k
    return CWReport(dim_ok, char_ok, fixed_ok, act.homomorphism_ok())


def find_moved_class(act: HomologyAction, q: int) -> AbelVector:
    """First standard basis vector e_j with q * e_j != e_j."""
    if q == act.identity:
        raise IdentityElement("the identity moves nothing")
    m = act.mats[q]
    for j in range(act.dim):
        if any(m[i][j] != (i == j) for i in range(act.dim)):
            return tuple(int(i == j) for i in range(act.dim))
    raise ValueError(f"element {q} acts trivially; the action is not faithful")


# ---------------------------------------------------------------------------
# a few small quotients, given by regular permutation representations


def regular_images(mul: Sequence[Sequence[int]], gens: Sequence[int]) -> list[tuple[int, ...]]:
    """Right-regular permutations of the listed group elements."""
    return [tuple(mul[p][g] for p in range(len(mul))) for g in gens]


def cyclic_images(n: int, rank: int) -> list[tuple[int, ...]]:
    """x_1 -> generator of Z/n, the other generators -> identity."""
    shift = tuple((i + 1) % n for i in range(n))
    return [shift] + [tuple(range(n))] * (rank - 1)


def quotient_battery(rank: int) -> dict[str, list[tuple[int, ...]]]:
    """Surjections from F_rank onto Z/2, Z/3, Z/4, Z/2xZ/2, S_3 and Z/6."""
    ident = lambda n: tuple(range(n))
    pad = lambda imgs, n: imgs + [ident(n)] * (rank - len(imgs))
    v4a, v4b = (1, 0, 3, 2), (2, 3, 0, 1)
    s3_t, s3_r = (1, 0, 2), (1, 2, 0)
    z6 = tuple((i + 1) % 6 for i in range(6))
    return {
        "Z2": cyclic_images(2, rank),
        "Z3": cyclic_images(3, rank),
        "Z4": cyclic_images(4, rank),
        "Z2xZ2": pad([v4a, v4b], 4),
        "S3": pad([s3_t, s3_r], 3),
        "Z6": pad([z6], 6),
    }
