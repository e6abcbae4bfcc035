"""Necessary conditions for a matrix g to commensurate a proper term Phi(H)
of the lower central or derived series of a normal subgroup H <= Gamma(k).

The test is staged:

1. g (or failing that g^2) must lie in PSL2(Q)sqrt(Q); call that element c.
2. the pseudo-action of each generator y of H^c on H_1(H) must be trivial;
3. parabolics of H at infinity and at 0 must be carried back with scale r = 1;
4. H^c must lie in Gamma(k) and coincide with H, and then g^2 must be integral.

A failure at stages 2 or 4 yields an explicit element of Phi(H^c) no power of
which lies in Phi(H); that element is the replayable part of a Reject.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import product
from math import gcd, lcm
from typing import Optional

from .errors import (
    DepthBeyondDecidable,
    NBoundExceeded,
    NoSolution,
    NonRationalTSquare,
    NoStabilizingElement,
    NotInConjugate,
    NotNormal,
    SearchExhausted,
    SpanSearchExhausted,
)
from .exact import (
    Mat2,
    ProjMat,
    SqrtQDecomp,
    field_of,
    is_rational,
    pmat,
    rational_sqrt,
    sign,
    squarefree_part,
    sqrtq_membership,
    to_rational,
    to_text,
)
from .freegrp import (
    DEFAULT_CMAX,
    AbelVector,
    Membership,
    SeriesKind,
    SeriesSpec,
    Word,
    commutator,
    in_series,
)
from .linalg import nullspace, rank
from .modgroup import (
    CosetTable,
    SchreierBasis,
    is_normal,
    principal_congruence,
    restrict_to_free,
    schreier_basis,
    table_from_oracle,
)
from .witness import (
    WitnessCert,
    chain_ok,
    derived_chain,
    filtration_chain,
    gaschutz_witness,
)

POWER_CHECKS = 5


@dataclass(frozen=True)
class PipelineConfig:
    cmax: int = DEFAULT_CMAX
    n_max: Optional[int] = None          # None: [PSL2(Z) : H ∩ H^c] * k
    span_length: int = 4
    witness_multiple_bound: int = 1000
    derived_power_bound: int = 10


# ---------------------------------------------------------------------------
# helpers


def in_table(tbl: CosetTable, M: Mat2) -> bool:
    """Integral and a member of the table's subgroup."""
    return M.is_integral() and tbl.contains(ProjMat.of(M))


def _congruent_pm_identity(M: Mat2, k: int) -> bool:
    a, b, c, d = M.to_ints()
    return (b % k == 0 and c % k == 0) and ((a - 1) % k == 0 and (d - 1) % k == 0
                                            or (a + 1) % k == 0 and (d + 1) % k == 0)


def contained_in_gamma_k(HB: SchreierBasis, k: int) -> bool:
    return all(_congruent_pm_identity(m, k) for m in HB.gen_mats)


def _proportional(u, v) -> bool:
    return all(u[i] * v[j] == u[j] * v[i] for i in range(len(u)) for j in range(i + 1, len(u)))


def _mpow(M: ProjMat, n: int) -> ProjMat:
    out, base = pmat(1, 0, 0, 1), M if n >= 0 else M.inverse()
    for _ in range(abs(n)):
        out = out * base
    return out


def _conj_in(y: ProjMat, M: ProjMat) -> ProjMat:
    """y^-1 M y."""
    return ProjMat.of(y.inverse() * M * y)


# ---------------------------------------------------------------------------
# quaternion span and the t*a decomposition


def quaternion_span(HB: SchreierBasis, max_length: int = 4) -> tuple[tuple[Word, ProjMat], ...]:
    """Four elements of H, products of at most ``max_length`` basis letters,
    that are linearly independent in the 2x2 rational matrices."""
    if HB.rank < 2:
        raise ValueError("the subgroup must have rank at least 2")
    letters = [x for i in range(1, HB.rank + 1) for x in (i, -i)]
    chosen: list[tuple[Word, ProjMat]] = []
    vecs: list[list[Fraction]] = []
    for length in range(1, max_length + 1):
        for w in product(letters, repeat=length):
            if any(w[i] == -w[i + 1] for i in range(length - 1)):
                continue
            word = Word(w, HB.basis_id)
            m = HB.evaluate(word)
            v = [to_rational(x) for x in m]
            if rank(vecs + [v]) > len(vecs):
                vecs.append(v)
                chosen.append((word, m))
                if len(chosen) == 4:
                    return tuple(chosen)
    raise SpanSearchExhausted(f"no spanning set among words of length <= {max_length}")


@dataclass(frozen=True)
class TADecomp:
    """x = t * a projectively with t^2 a squarefree integer and a rational."""

    t_sq: Fraction
    a: Mat2


def skolem_noether_decompose(x: Mat2, span) -> TADecomp:
    """Solve a*h = (x h x^-1)*a over the span; a rational forces x = t*a."""
    mats = [m for _, m in span] if span and isinstance(span[0], tuple) else list(span)
    f = x.field
    # plain matrices: a projective product could flip the sign of x h x^-1
    xm = Mat2(*x.entries())
    xi = xm.inverse()
    rows = []
    for h in mats:
        hh = [[f.coerce(v) for v in h.entries()[:2]], [f.coerce(v) for v in h.entries()[2:]]]
        cm = xm * Mat2(*h.entries()) * xi
        c = [[cm.a, cm.b], [cm.c, cm.d]]
        # (a h)_ij - (c a)_ij with unknowns a = (a11, a12, a21, a22)
        for i in range(2):
            for j in range(2):
                row = [f.coerce(0) for _ in range(4)]
                for k in range(2):
                    row[2 * i + k] = row[2 * i + k] + hh[k][j]
                    row[2 * k + j] = row[2 * k + j] - c[i][k]
                rows.append(row)
    basis = nullspace(rows, 4)
    if len(basis) != 1:
        raise NoSolution(f"solution space has dimension {len(basis)}, expected 1")
    v = basis[0]
    lead = next(e for e in v if e != 0)
    v = [e / lead for e in v]
    if not all(is_rational(e) for e in v):
        raise NoSolution("x does not conjugate the span by a rational matrix")
    a = Mat2(*(to_rational(e) for e in v))
    lam = x.a / a.a if a.a != 0 else x.b / a.b
    scaled = [lam * e for e in a]
    if any(u != v for u, v in zip(scaled, x)):
        raise NoSolution("x is not a scalar multiple of the solution")
    lam_sq = lam * lam
    if not is_rational(lam_sq):
        raise NonRationalTSquare(f"t^2 = {to_text(lam_sq)} is not rational")
    t_sq = to_rational(lam_sq)
    q = squarefree_part(t_sq.numerator * t_sq.denominator)
    m = rational_sqrt(t_sq / q)
    a = Mat2(*(m * e for e in a))
    lead = next(e for e in a if e != 0)
    if lead < 0:
        a = -a
    return TADecomp(Fraction(q), a)


# ---------------------------------------------------------------------------
# pseudo-action


@dataclass(frozen=True)
class PseudoActionResult:
    y: ProjMat
    N_used: int
    Ns: tuple[Optional[int], ...]
    deltas: tuple[Optional[AbelVector], ...]
    defined_mask: tuple[bool, ...]

    @property
    def trivial(self) -> bool:
        return all(d is None or not any(d) for d in self.deltas)


def _admissible_power(H: CosetTable, c: SqrtQDecomp, y: ProjMat, x: ProjMat,
                      bound: int) -> Optional[int]:
    """Least N <= bound with x^N in H^c and y^-1 x^N y in H."""
    cx = c.conj_inverse(x)
    yx = _conj_in(y, x)
    P, Q = cx, yx
    for N in range(1, bound + 1):
        if in_table(H, Q) and in_table(H, P):
            return N
        P, Q = ProjMat.of(P * cx), ProjMat.of(Q * yx)
    return None


def _delta(HB: SchreierBasis, y: ProjMat, x: ProjMat, N: int) -> AbelVector:
    """Class of y^-1 x^N y x^-N in H_1(H)."""
    xN = _mpow(x, N)
    a = HB.class_of(ProjMat.of(_conj_in(y, xN)))
    b = HB.class_of(xN)
    return tuple(u - v for u, v in zip(a, b))


def n_bound(H: CosetTable, c: SqrtQDecomp, k: int) -> int:
    """[PSL2(Z) : H ∩ H^c] * k."""
    both = table_from_oracle(
        lambda m: H.contains(m) and in_table(H, c.conj_inverse(pmat(*m))), max_index=H.n ** 3)
    return both.n * k


def pseudo_action(H: CosetTable, HB: SchreierBasis, c: SqrtQDecomp, y: ProjMat,
                  n_max: int) -> PseudoActionResult:
    if not in_table(H, c.conj_inverse(y)):
        raise NotInConjugate("y does not lie in H^c")
    Ns = [_admissible_power(H, c, y, x, n_max) for x in HB.gen_mats]
    if all(n is None for n in Ns):
        raise NBoundExceeded(f"no admissible N <= {n_max} for any generator")
    N_used = lcm(*(n for n in Ns if n is not None))
    deltas = tuple(None if n is None else _delta(HB, y, x, N_used)
                   for x, n in zip(HB.gen_mats, Ns))
    return PseudoActionResult(y, N_used, tuple(Ns), deltas, tuple(n is not None for n in Ns))


# ---------------------------------------------------------------------------
# parabolic normalization


@dataclass(frozen=True)
class ParabolicData:
    cusp: str                 # "inf" or "0"
    r: Fraction
    t: Fraction               # upper-right entry at infinity, lower-left at 0
    h: ProjMat
    h_word: Word

    def to_dict(self) -> dict:
        return {"cusp": self.cusp, "r": str(self.r), "t": str(self.t),
                "h": self.h.to_dict(), "h_word": list(self.h_word.letters)}


def cusp_width_at_infinity(H: CosetTable) -> int:
    w, c = 1, H.act(0, "SU")
    while c != 0:
        c = H.act(c, "SU")
        w += 1
    return w


def _ext_gcd(a: int, b: int) -> tuple[int, int]:
    """u, v with a*u + b*v = gcd(a, b)."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return x0, y0


def _column_completion(p: int, q: int, column: int) -> ProjMat:
    """An integral det-1 matrix with the given primitive column."""
    if q == 0:
        return pmat(1, 0, 0, 1) if column == 0 else pmat(0, -1, 1, 0)
    u, v = _ext_gcd(p, q)          # p*u + q*v = 1
    if column == 0:
        return pmat(p, -v, q, u)
    return pmat(v, p, -u, q)


def parabolic_normalize(H: CosetTable, HB: SchreierBasis, y: ProjMat, cusp: str = "inf") -> ParabolicData:
    """h in H with y*h upper triangular (cusp "inf") or lower triangular (cusp "0")."""
    yi = y.inverse()
    num, den = (yi.a, yi.c) if cusp == "inf" else (yi.b, yi.d)
    num, den = to_rational(num), to_rational(den)
    if den == 0:
        p, q = 1, 0
    else:
        pt = num / den
        p, q = pt.numerator, pt.denominator
    col = 0 if cusp == "inf" else 1
    M0 = _column_completion(p, q, col)
    step = pmat(1, 1, 0, 1) if cusp == "inf" else pmat(1, 0, 1, 1)
    h = M0
    for _ in range(H.n):
        if H.contains(h):
            yh = ProjMat.of(y * h)
            if cusp == "inf":
                assert yh.c == 0
                return ParabolicData(cusp, to_rational(yh.a), to_rational(yh.b), h, HB.rewrite(h))
            assert yh.b == 0
            return ParabolicData(cusp, to_rational(yh.a), to_rational(yh.c), h, HB.rewrite(h))
        h = h * step
    raise NoStabilizingElement(f"no element of H carries the cusp {cusp} as required")


def parabolic_scaling(r: Fraction, t: Fraction, M: Fraction) -> ProjMat:
    """Conjugate [[1, M], [0, 1]] by [[r, t], [0, 1/r]]."""
    P = pmat(r, t, 0, 1 / Fraction(r))
    return pmat(1, M, 0, 1).conj(P)


def conjugate_in_gamma_k(HB: SchreierBasis, c: SqrtQDecomp, k: int) -> bool:
    """Every c^-1 h c (h a basis generator) is integral and ≡ ±I mod k."""
    for h in HB.gen_mats:
        m = c.conj(h)
        if not m.is_integral() or not _congruent_pm_identity(m, k):
            return False
    return True


# ---------------------------------------------------------------------------
# verdicts


class Status(Enum):
    PASS_INTEGRAL = "PassIntegral"
    REJECT = "Reject"
    INCONCLUSIVE = "Inconclusive"

    @property
    def exit_code(self) -> int:
        return {"PassIntegral": 0, "Reject": 1, "Inconclusive": 2}[self.value]


@dataclass
class Verdict:
    status: Status
    reason: str
    stage: int
    attachments: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return self.status.exit_code

    def to_dict(self) -> dict:
        return {"status": self.status.value, "reason": self.reason, "stage": self.stage,
                "attachments": self.attachments}


def _words(w: Word) -> list[int]:
    return list(w.letters)


def _matrix_pair_irrational(g2: Mat2) -> Optional[tuple[int, int]]:
    ents = g2.entries()
    for i in range(4):
        for j in range(i, 4):
            if not is_rational(ents[i] * ents[j]):
                return (i, j)
    return None


def _pseudo_chain(H: CosetTable, HB: SchreierBasis, c: SqrtQDecomp, w: ProjMat,
                  spec: SeriesSpec, cfg: PipelineConfig) -> list[dict]:
    """Chain from w in (H^c)' \\ H' down to the requested series term.

    B-side words are over H's basis; A-side words represent c * (.) * c^-1
    over the same basis.  Each level must read NotIn / In respectively.
    """
    wB = HB.rewrite(w)
    wA = HB.rewrite(c.conj_inverse(w))
    delta = HB.class_of(w)
    entries = [(2, wB, wA)]
    powers = []
    for i, x in enumerate(HB.gen_mats):
        P, cx, M = c.conj_inverse(x), c.conj_inverse(x), 1
        while not in_table(H, P):
            P, M = ProjMat.of(P * cx), M + 1
            if M > H.n ** 2:
                break
        else:
            powers.append((i, M))
    kind, n = spec.kind, spec.index
    if kind is SeriesKind.LOWER_CENTRAL:
        if n > cfg.cmax:
            raise DepthBeyondDecidable(f"gamma_{n} needs Magnus degree {n - 1} > {cfg.cmax}")
        pick = None
        for i, M in powers:
            cls = tuple(M * int(j == i) for j in range(HB.rank))
            if not _proportional(cls, delta):
                pick = (i, M)
                break
        if pick is None and n > 2:
            raise SearchExhausted("no element of H ∩ H^c with an independent class")
        if n > 2:
            i, M = pick
            xB = Word((i + 1,) * M, HB.basis_id)
            xA = HB.rewrite(c.conj_inverse(_mpow(HB.gen_mats[i], M)))
            yB, yA = wB, wA
            for level in range(3, n + 1):
                yB, yA = commutator(yB, xB), commutator(yA, xA)
                entries.append((level, yB, yA))
    else:
        if n >= 4:
            raise DepthBeyondDecidable("derived terms beyond D_3 are not decidable here")
        if n == 3:
            if len(powers) < 2:
                raise SearchExhausted("fewer than two generators have powers in H ∩ H^c")
            (i, Mi), (j, Mj) = powers[0], powers[1]
            uB, vB = Word((i + 1,) * Mi, HB.basis_id), Word((j + 1,) * Mj, HB.basis_id)
            uA = HB.rewrite(c.conj_inverse(_mpow(HB.gen_mats[i], Mi)))
            vA = HB.rewrite(c.conj_inverse(_mpow(HB.gen_mats[j], Mj)))
            xB, xA = commutator(uB, vB), commutator(uA, vA)
            for N in range(1, cfg.derived_power_bound + 1):
                yB, yA = commutator(wB ** N, xB), commutator(wA ** N, xA)
                if in_series(yB, spec, HB.rank) is Membership.NOT_IN:
                    entries.append((3, yB, yA))
                    break
            else:
                raise SearchExhausted("no power of w leaves D_3(H)")
    out = []
    series = "gamma" if kind is SeriesKind.LOWER_CENTRAL else "D"
    for level, yB, yA in entries:
        term = SeriesSpec(kind, level)
        out.append({
            "series": series,
            "level": level,
            "B": _words(yB),
            "A": _words(yA),
            "B_verdict": in_series(yB, term, HB.rank, cfg.cmax).value,
            "A_verdict": in_series(yA, term, HB.rank, cfg.cmax).value,
            "B_powers": [in_series(yB ** m, term, HB.rank, cfg.cmax).value
                         for m in range(1, POWER_CHECKS + 1)],
        })
    return out


def _chain_holds(chain: list[dict]) -> bool:
    return all(e["B_verdict"] == "NotIn" and e["A_verdict"] == "In"
               and all(p == "NotIn" for p in e["B_powers"]) for e in chain)


def _pseudo_witness(H, HB, c, y, x, N, label, spec, cfg) -> dict:
    w = ProjMat.of(_conj_in(y, _mpow(x, N)) * _mpow(x, -N))
    return {
        "y": y.to_dict(),
        "x": x.to_dict(),
        "x_label": label,
        "N": N,
        "w": w.to_dict(),
        "delta": list(HB.class_of(w)),
        "chain": _pseudo_chain(H, HB, c, w, spec, cfg),
    }


def conjugate_witness(H: CosetTable, HB: SchreierBasis, c: SqrtQDecomp, k: int,
                      spec: SeriesSpec, cfg: PipelineConfig = PipelineConfig()) -> tuple[WitnessCert, tuple]:
    """Witness that Phi(H^c) and Phi(H) are not commensurable, inside F = Gamma(k).

    Requires H^c <= Gamma(k) and H^c != H; H is normal in Gamma(k).
    """
    Hc = table_from_oracle(lambda m: in_table(H, c.conj_inverse(pmat(*m))), max_index=H.n)
    F = schreier_basis(principal_congruence(k))
    K1, K2 = restrict_to_free(Hc, F), restrict_to_free(H, F)
    cert = gaschutz_witness(K1, K2, cfg.witness_multiple_bound)
    if spec.kind is SeriesKind.LOWER_CENTRAL:
        chain = filtration_chain(cert, spec.index, cmax=cfg.cmax)
    elif spec.index == 2:
        chain = derived_chain(cert, cfg.derived_power_bound)[:1]
    elif spec.index == 3:
        chain = derived_chain(cert, cfg.derived_power_bound)
    else:
        raise DepthBeyondDecidable("derived terms beyond D_3 are not decidable here")
    return cert, chain


def _decomp_dict(c: SqrtQDecomp, which: str) -> dict:
    return {"of": which, **c.to_dict()}


def main_pipeline(H: CosetTable, k: int, spec: SeriesSpec, g: Mat2,
                  HB: Optional[SchreierBasis] = None,
                  config: Optional[PipelineConfig] = None) -> Verdict:
    cfg = config or PipelineConfig()
    HB = HB or schreier_basis(H)
    if not is_normal(H):
        raise NotNormal("H must be normal in PSL2(Z)")
    if not contained_in_gamma_k(HB, k):
        raise ValueError(f"H is not contained in Gamma({k})")
    g = ProjMat.of(g)
    g2 = ProjMat.of(g * g)

    # stage 1
    c = sqrtq_membership(g)
    which = "g"
    if c is None:
        which = "g2"
        c = sqrtq_membership(g2)
    if c is None:
        att: dict = {"pair": list(_matrix_pair_irrational(g2))}
        try:
            skolem_noether_decompose(g, quaternion_span(HB, cfg.span_length))
            att["skolem_noether"] = "unexpected success"
        except (NoSolution, NonRationalTSquare, SpanSearchExhausted) as exc:
            att["skolem_noether"] = type(exc).__name__
        return Verdict(Status.REJECT, "NotInSqrtQ", 1, att)
    base = {"c": _decomp_dict(c, which)}

    # stage 2
    try:
        n_max = cfg.n_max or n_bound(H, c, k)
    except Exception as exc:  # enumeration bound exceeded
        return Verdict(Status.INCONCLUSIVE, "NBoundExceeded", 2, {**base, "detail": str(exc)})
    ys = [c.conj(h) for h in HB.gen_mats]
    undefined = False
    for j, y in enumerate(ys):
        try:
            res = pseudo_action(H, HB, c, y, n_max)
        except NBoundExceeded:
            undefined = True
            continue
        undefined |= not all(res.defined_mask)
        for i, d in enumerate(res.deltas):
            if d is not None and any(d):
                try:
                    wit = _pseudo_witness(H, HB, c, y, HB.gen_mats[i], res.N_used,
                                          f"basis {i + 1}", spec, cfg)
                except (DepthBeyondDecidable, SearchExhausted) as exc:
                    return Verdict(Status.INCONCLUSIVE, type(exc).__name__, 2, base)
                if not _chain_holds(wit["chain"]):
                    return Verdict(Status.INCONCLUSIVE, "ChainFailed", 2, base)
                return Verdict(Status.REJECT, "PseudoActionNontrivial", 2,
                               {**base, "y_index": j, "pseudo": wit})
    if undefined:
        return Verdict(Status.INCONCLUSIVE, "NBoundExceeded", 2, base)

    # stage 3
    width = cusp_width_at_infinity(H)
    parabolics = {"inf": pmat(1, width, 0, 1), "0": pmat(1, 0, width, 1)}
    para_data = []
    for j, y in enumerate(ys):
        for cusp, gamma in parabolics.items():
            try:
                pd = parabolic_normalize(H, HB, y, cusp)
            except NoStabilizingElement:
                return Verdict(Status.INCONCLUSIVE, "NoStabilizingElement", 3, base)
            para_data.append(pd)
            if pd.r != 1:
                N = _admissible_power(H, c, y, gamma, n_max)
                if N is None or not any(_delta(HB, y, gamma, N)):
                    return Verdict(Status.INCONCLUSIVE, "ParabolicScaleUnwitnessed", 3, base)
                try:
                    wit = _pseudo_witness(H, HB, c, y, gamma, N, f"cusp {cusp}", spec, cfg)
                except (DepthBeyondDecidable, SearchExhausted) as exc:
                    return Verdict(Status.INCONCLUSIVE, type(exc).__name__, 3, base)
                return Verdict(Status.REJECT, "ParabolicScale", 3,
                               {**base, "y_index": j, "parabolic": pd.to_dict(), "pseudo": wit})
    base["parabolic"] = [pd.to_dict() for pd in para_data]

    # stage 4
    if not conjugate_in_gamma_k(HB, c, k):
        return Verdict(Status.INCONCLUSIVE, "ConjugateNotInGammaK", 4, base)
    forward = all(in_table(H, c.conj(h)) for h in HB.gen_mats)
    backward = all(in_table(H, c.conj_inverse(h)) for h in HB.gen_mats)
    if forward and backward:
        if g2.is_integral():
            return Verdict(Status.PASS_INTEGRAL, "Integral", 4, base)
        return Verdict(Status.INCONCLUSIVE, "NormalizesButNotIntegral", 4, base)
    try:
        cert, chain = conjugate_witness(H, HB, c, k, spec, cfg)
    except (DepthBeyondDecidable, SearchExhausted) as exc:
        return Verdict(Status.INCONCLUSIVE, type(exc).__name__, 4, base)
    if not chain_ok(chain):
        return Verdict(Status.INCONCLUSIVE, "ChainFailed", 4, base)
    cert = cert.with_chain(chain)
    return Verdict(Status.REJECT, "ConjugateDiffers", 4, {**base, "witness": cert.to_dict()})
