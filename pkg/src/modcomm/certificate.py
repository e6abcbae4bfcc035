"""Certificate files and their independent verifier.

Layout::

    MODCOMM-CERT 1
    <canonical JSON, sorted keys>
    sha256 <hex digest of every byte above this line>
    created <timestamp>            (optional, not covered by the hash)

A payload has five keys: ``version``, ``command`` (the subcommand name),
``inputs`` (the serialized arguments), ``verdict`` and ``replay``.  The
verifier re-derives every claim of ``replay`` and cross-checks ``inputs`` and
``verdict`` against it, so that no stored number is taken on trust.  It uses
exact arithmetic, free-group words, series membership and coset-table
primitives only; the searches that produced a certificate are never called.
"""

from __future__ import annotations

import hashlib
import json
from collections import deque
from datetime import datetime, timezone
from fractions import Fraction
from typing import Callable, Optional

from .errors import HashMismatch, ModcommError, ReplayFailure
from .exact import Mat2, ProjMat, is_rational, matrix_from_dict, parse_matrix, pmat, sqrtq_membership
from .freegrp import DEFAULT_CMAX, Membership, SeriesKind, SeriesSpec, Word, abelianize, commutator, in_series, parse_word
from .linalg import matmul, nullspace, trace
from .modgroup import (
    CosetTable,
    FreeCosetTable,
    from_permutations,
    free_schreier_basis,
    is_normal,
    normal_kernel,
    principal_congruence,
    restrict_to_free,
    schreier_basis,
    table_from_text,
)

MAGIC = "MODCOMM-CERT 1"
VERSION = 1
POWER_CHECKS = 5

STAGE_OF_REASON = {
    "NotInSqrtQ": 1,
    "PseudoActionNontrivial": 2,
    "ParabolicScale": 3,
    "ConjugateDiffers": 4,
    "Integral": 4,
}
EXIT_CODE = {"PassIntegral": 0, "Reject": 1, "Inconclusive": 2}


# ---------------------------------------------------------------------------
# file format


def render(payload: dict, created: Optional[str] = None) -> str:
    body = MAGIC + "\n" + json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"
    text = body + f"sha256 {hashlib.sha256(body.encode()).hexdigest()}\n"
    if created:
        text += f"created {created}\n"
    return text


def now_stamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse(text: str) -> dict:
    """Check the header and the hash; return the JSON payload."""
    lines = text.split("\n")
    if lines[0] != MAGIC:
        raise HashMismatch("missing certificate header")
    idx = next((i for i, l in enumerate(lines) if l.startswith("sha256 ")), None)
    if idx is None:
        raise HashMismatch("missing sha256 line (truncated file?)")
    body = "\n".join(lines[:idx]) + "\n"
    if hashlib.sha256(body.encode()).hexdigest() != lines[idx][len("sha256 "):].strip():
        raise HashMismatch("content hash does not match")
    rest = [l for l in lines[idx + 1:] if l]
    if len(rest) > 1 or any(not l.startswith("created ") for l in rest):
        raise HashMismatch("unexpected content after the hash line")
    try:
        return json.loads("\n".join(lines[1:idx]))
    except json.JSONDecodeError as exc:
        raise HashMismatch(f"payload is not valid JSON: {exc}") from exc


def make_payload(command: str, inputs: dict, verdict: dict, replay: dict) -> dict:
    return {"version": VERSION, "command": command, "inputs": inputs,
            "verdict": verdict, "replay": replay}


# ---------------------------------------------------------------------------
# payload builders (used by the CLI)


def witness_payload(inputs: dict, cert_dict: dict) -> dict:
    return make_payload("witness", inputs, {"replays": True}, cert_dict)


def pipeline_payload(inputs: dict, H: CosetTable, k: int, spec: SeriesSpec, g: Mat2,
                     verdict: dict) -> dict:
    replay = {"H": H.to_text(), "k": k, "spec": str(spec), "g": ProjMat.of(g).to_dict(),
              "verdict": verdict}
    summary = {"status": verdict["status"], "reason": verdict["reason"],
               "stage": verdict["stage"], "exit_code": EXIT_CODE[verdict["status"]]}
    return make_payload("commensurate", inputs, summary, replay)


def chevweil_payload(inputs: dict, N: FreeCosetTable, action: dict, report: dict) -> dict:
    return make_payload("chevweil", inputs, report, {"table": N.to_text(), **action})


def conjugator_payload(A: Mat2, B: Mat2, x: ProjMat, inputs: dict) -> dict:
    replay = {"A": ProjMat.of(A).to_dict(), "B": ProjMat.of(B).to_dict(), "x": x.to_dict()}
    return make_payload("conjugator", inputs, {"found": True}, replay)


def series_payload(inputs: dict, word: Word, spec: SeriesSpec, rank: int, cmax: int,
                   result: Membership) -> dict:
    replay = {"word": list(word.letters), "spec": str(spec), "rank": rank, "cmax": cmax}
    return make_payload("series", inputs, {"result": result.value}, replay)


# ---------------------------------------------------------------------------
# replay helpers


class _Checker:
    def __init__(self):
        self.failures: list[str] = []

    def check(self, cond: bool, what: str) -> bool:
        if not cond:
            self.failures.append(what)
        return bool(cond)

    def require(self, cond: bool, what: str) -> None:
        """A check whose failure makes the remaining checks meaningless."""
        if not cond:
            raise ReplayFailure(what)


def _in(tbl: CosetTable, M: Mat2) -> bool:
    return M.is_integral() and tbl.contains(ProjMat.of(M))


def _word(letters, basis_id=None) -> Word:
    if not isinstance(letters, list) or not all(isinstance(x, int) and x for x in letters):
        raise ReplayFailure("words must be arrays of nonzero integers")
    w = Word(tuple(letters), basis_id)
    if list(w.letters) != letters:
        raise ReplayFailure("stored word is not freely reduced")
    return w


def _mpow(M: ProjMat, n: int) -> ProjMat:
    out, base = pmat(1, 0, 0, 1), M if n >= 0 else M.inverse()
    for _ in range(abs(n)):
        out = out * base
    return out


def _perm_group_order(perms: list[tuple[int, ...]]) -> int:
    m = len(perms[0])
    start = tuple(range(m))
    seen, queue = {start}, deque([start])
    while queue:
        p = queue.popleft()
        for g in perms:
            q = tuple(g[i] for i in p)
            if q not in seen:
                seen.add(q)
                queue.append(q)
    return len(seen)


def _kernel_text(rank: int, images) -> str:
    if not isinstance(images, list) or len(images) != rank:
        raise ReplayFailure("one permutation per generator expected")
    return normal_kernel(rank, [tuple(p) for p in images]).to_text()


def _psl_table(spec: dict) -> CosetTable:
    if set(spec) == {"gamma"}:
        return principal_congruence(int(spec["gamma"]))
    if set(spec) == {"S", "U"}:
        return from_permutations(spec["S"], spec["U"])
    raise ReplayFailure("H must be given by 'gamma' or by 'S' and 'U' permutations")


def _series_name(spec: SeriesSpec) -> str:
    return "gamma" if spec.kind is SeriesKind.LOWER_CENTRAL else "D"


def _check_levels(ck: _Checker, chain: list, series: str, depth: int) -> None:
    ck.require(isinstance(chain, list) and len(chain) == depth - 1, "chain has the wrong length")
    for i, e in enumerate(chain):
        ck.require(e["level"] == i + 2 and e["series"] == series,
                   "chain levels must run 2, 3, ... in the requested series")


# ---------------------------------------------------------------------------
# witnesses over a free group


def _check_witness(ck: _Checker, r: dict, ambient: str, series: str, depth: int) -> tuple:
    ck.require(r["ambient"] == ambient, "ambient group id mismatch")
    K1 = table_from_text(r["K1"], ambient)
    K2 = table_from_text(r["K2"], ambient)
    ck.require(isinstance(K1, FreeCosetTable) and isinstance(K2, FreeCosetTable), "tables must be free")
    ck.require(K1.rank == K2.rank == r["rank"], "rank mismatch")
    ck.require(is_normal(K2), "K2 is not normal")
    a, b, x_b = _word(r["a"]), _word(r["b"]), _word(r["x_b"])
    ck.check(K1.contains(a) and not K2.contains(a), "a is not in K1 \\ K2")
    ck.require(K1.contains(b) and K2.contains(b), "b is not in K1 ∩ K2")
    ck.check(commutator(a, b) == x_b, "x_b != [a, b]")
    B1, B2 = free_schreier_basis(K1), free_schreier_basis(K2)
    ck.require(K1.contains(x_b), "x_b is not in K1")
    ck.check(not any(abelianize(B1.rewrite(x_b), B1.rank)), "x_b is not in K1'")

    # z is a basis class moved by the coset of a, and [b] = n z
    z, n = r["z"], r["n"]
    ck.require(isinstance(n, int) and n >= 1, "n must be a positive integer")
    ck.require(len(z) == B2.rank and sorted(z) == [0] * (B2.rank - 1) + [1], "z must be a basis vector")
    j = z.index(1)
    t = K2.transversal[K2.act(0, a)]
    ck.check(list(B2.class_of(t * B2.gens[j] * t.inverse())) != z, "a does not move z")
    ck.check(list(B2.class_of(b)) == [n * v for v in z], "[b] != n z")

    hom = B2.class_of(x_b)
    ck.check(list(hom) == r["hom_class"] and any(hom), "[x_b] in H_1(K2) is wrong or zero")
    ck.require(len(r["power_classes"]) == POWER_CHECKS, f"{POWER_CHECKS} power classes expected")
    for N, v in enumerate(r["power_classes"], start=1):
        c = B2.class_of(x_b ** N)
        ck.check(list(c) == v and any(c), f"class of x_b^{N} is wrong or zero")

    chain = r["chain"]
    _check_levels(ck, chain, series, depth)
    for e in chain:
        spec = SeriesSpec.parse(f"{series}{e['level']}")
        y = _word(e["word"])
        if e["level"] == 2:
            ck.check(y == x_b, "first chain element is not x_b")
        ck.check(e["k1"] == "In" and e["k2"] == "NotIn", f"level {e['level']}: stored verdicts")
        ck.check(in_series(B1.rewrite(y), spec, B1.rank) is Membership.IN,
                 f"level {e['level']}: not in the K1 term")
        for m in range(1, POWER_CHECKS + 1):
            ck.check(in_series(B2.rewrite(y ** m), spec, B2.rank) is Membership.NOT_IN,
                     f"level {e['level']}: power {m} lies in the K2 term")
    return K1, K2


def replay_witness(ck: _Checker, p: dict) -> None:
    inp, r = p["inputs"], p["replay"]
    rank = inp["rank"]
    ck.require(p["verdict"] == {"replays": True}, "unexpected verdict")
    ck.require(r["K1"] == _kernel_text(rank, inp["k1"]), "K1 is not the kernel of the stated map")
    ck.require(r["K2"] == _kernel_text(rank, inp["k2"]), "K2 is not the kernel of the stated map")
    ck.require(inp["series"] in ("gamma", "D"), "series must be gamma or D")
    _check_witness(ck, r, "F", inp["series"], inp["depth"])


# ---------------------------------------------------------------------------
# pipeline verdicts


def _check_parabolic(ck: _Checker, H, HB, y: ProjMat, pd: dict, cusp: str) -> Fraction:
    ck.require(pd["cusp"] == cusp, "cusp label mismatch")
    h = matrix_from_dict(pd["h"])
    ck.check(HB.evaluate(_word(pd["h_word"], HB.basis_id)) == h, "h_word does not evaluate to h")
    ck.check(_in(H, h), "h is not in H")
    yh = ProjMat.of(y * h)
    if cusp == "inf":
        ck.require(yh.c == 0, "y h is not upper triangular")
        t = yh.b
    else:
        ck.require(yh.b == 0, "y h is not lower triangular")
        t = yh.c
    ck.check(pd["r"] == str(yh.a) and pd["t"] == str(t), "stored r or t differs")
    return yh.a


def _check_pseudo(ck: _Checker, H, HB, c, att: dict, spec: SeriesSpec, width: int) -> ProjMat:
    p = att["pseudo"]
    j = att["y_index"]
    ck.require(isinstance(j, int) and 0 <= j < HB.rank, "y_index out of range")
    y, x, w = (matrix_from_dict(p[key]) for key in ("y", "x", "w"))
    ck.check(c.conj(HB.gen_mats[j]) == y, "y is not c^-1 h_j c")
    label = p["x_label"]
    if label.startswith("basis "):
        i = int(label.split()[1])
        ck.require(1 <= i <= HB.rank, "x label out of range")
        ck.check(HB.gen_mats[i - 1] == x, "x is not the labelled basis element")
    elif label in ("cusp inf", "cusp 0"):
        expect = pmat(1, width, 0, 1) if label == "cusp inf" else pmat(1, 0, width, 1)
        ck.check(expect == x, "x is not the labelled cusp generator")
    else:
        raise ReplayFailure(f"unknown x label {label!r}")
    N = p["N"]
    ck.require(isinstance(N, int) and N >= 1, "N must be a positive integer")
    ck.check(_in(H, x), "x is not in H")
    ck.check(_in(H, c.conj_inverse(_mpow(x, N))), "x^N is not in H^c")
    ck.check(ProjMat.of(y.inverse() * _mpow(x, N) * y * _mpow(x, -N)) == w, "w != y^-1 x^N y x^-N")
    ck.require(_in(H, w), "w is not in H")
    cls = HB.class_of(w)
    ck.check(list(cls) == p["delta"] and any(cls), "class of w is wrong or zero")
    cw = c.conj_inverse(w)
    ck.check(_in(H, cw) and not any(HB.class_of(cw)), "c w c^-1 is not in H'")

    chain = p["chain"]
    series = _series_name(spec)
    _check_levels(ck, chain, series, spec.index)
    for e in chain:
        term = SeriesSpec.parse(f"{series}{e['level']}")
        yB, yA = _word(e["B"], HB.basis_id), _word(e["A"], HB.basis_id)
        MB, MA = HB.evaluate(yB), HB.evaluate(yA)
        if e["level"] == 2:
            ck.check(MB == w, "first chain element is not w")
        ck.check(c.conj_inverse(MB) == MA, f"level {e['level']}: A-side word is not c y c^-1")
        a_in = in_series(yA, term, HB.rank)
        b_in = in_series(yB, term, HB.rank)
        powers = [in_series(yB ** m, term, HB.rank).value for m in range(1, POWER_CHECKS + 1)]
        ck.check(a_in is Membership.IN and e["A_verdict"] == a_in.value,
                 f"level {e['level']}: c y c^-1 is not in the H term")
        ck.check(b_in is Membership.NOT_IN and e["B_verdict"] == b_in.value,
                 f"level {e['level']}: y lies in the H term")
        ck.check(powers == ["NotIn"] * POWER_CHECKS and e["B_powers"] == powers,
                 f"level {e['level']}: some power of y lies in the H term")
    return y


def _cusp_width(H: CosetTable) -> int:
    w, c = 1, H.act(0, "SU")
    while c != 0:
        c = H.act(c, "SU")
        w += 1
    return w


def _first_irrational_pair(g2: Mat2) -> Optional[list[int]]:
    ents = g2.entries()
    for i in range(4):
        for j in range(i, 4):
            if not is_rational(ents[i] * ents[j]):
                return [i, j]
    return None


def replay_pipeline(ck: _Checker, p: dict) -> None:
    inp, r, summary = p["inputs"], p["replay"], p["verdict"]
    H = _psl_table(inp["H"])
    ck.require(r["H"] == H.to_text(), "H does not match the stated subgroup")
    k = r["k"]
    ck.require(isinstance(k, int) and k >= 1 and inp["k"] == k, "k mismatch")
    spec = SeriesSpec.parse(r["spec"])
    ck.require(str(spec) == r["spec"] and str(SeriesSpec.parse(inp["spec"])) == r["spec"], "series mismatch")
    g = ProjMat.of(parse_matrix(inp["matrix"]))
    ck.require(g.to_dict() == r["g"], "candidate matrix mismatch")

    ck.require(is_normal(H), "H is not normal")
    HB = schreier_basis(H)
    for m in HB.gen_mats:
        a, b, c_, d = m.to_ints()
        ck.require(b % k == 0 and c_ % k == 0 and (a - d) % k == 0 and (a * a - 1) % k == 0,
                   "H is not inside Gamma(k)")

    v = r["verdict"]
    status, reason, att = v["status"], v["reason"], v["attachments"]
    ck.require(summary == {"status": status, "reason": reason, "stage": v["stage"],
                           "exit_code": EXIT_CODE[status]}, "verdict summary mismatch")
    if status == "Inconclusive":
        return
    ck.require(STAGE_OF_REASON.get(reason) == v["stage"], "stage does not match the reason")
    ck.require((status == "PassIntegral") == (reason == "Integral"), "status does not match the reason")
    g2 = ProjMat.of(g * g)

    if reason == "NotInSqrtQ":
        ck.require(set(att) == {"pair", "skolem_noether"}, "unexpected attachments")
        ck.check(sqrtq_membership(g) is None, "g lies in sqrt(Q) GL2(Q)")
        ck.check(att["pair"] == _first_irrational_pair(g2), "stored entry pair is not the first irrational one")
        ck.check(att["skolem_noether"] in ("NoSolution", "NonRationalTSquare", "SpanSearchExhausted"),
                 "unexpected Skolem-Noether outcome")
        return

    cd = att["c"]
    target = g if cd["of"] == "g" else g2
    ck.require(cd["of"] == ("g" if sqrtq_membership(g) is not None else "g2"), "wrong choice of conjugator")
    c = sqrtq_membership(target)
    ck.require(c is not None and c.to_dict() == {"q": cd["q"], "B": cd["B"]},
               "stored sqrt(Q) decomposition does not match the candidate")
    width = _cusp_width(H)
    ys = [c.conj(h) for h in HB.gen_mats]

    if reason in ("PseudoActionNontrivial", "ParabolicScale"):
        extra = {"parabolic"} if reason == "ParabolicScale" else set()
        ck.require(set(att) == {"c", "y_index", "pseudo"} | extra, "unexpected attachments")
        y = _check_pseudo(ck, H, HB, c, att, spec, width)
        if reason == "ParabolicScale":
            cusp = att["pseudo"]["x_label"].split()[1]
            r_val = _check_parabolic(ck, H, HB, y, att["parabolic"], cusp)
            ck.check(r_val != 1, "r = 1: no scaling")
        return

    # stage 4 verdicts carry the parabolic data of every generator at both cusps
    pds = att["parabolic"]
    ck.require(len(pds) == 2 * len(ys), "parabolic data must cover every generator and both cusps")
    for idx, pd in enumerate(pds):
        cusp = "inf" if idx % 2 == 0 else "0"
        ck.check(_check_parabolic(ck, H, HB, ys[idx // 2], pd, cusp) == 1, "nontrivial parabolic scale")
    for h in HB.gen_mats:
        m = c.conj(h)
        ck.check(m.is_integral(), "c^-1 H c is not integral")

    if reason == "Integral":
        ck.require(set(att) == {"c", "parabolic"}, "unexpected attachments")
        ck.check(g2.is_integral(), "g^2 is not integral")
        for h in HB.gen_mats:
            ck.check(_in(H, c.conj(h)) and _in(H, c.conj_inverse(h)), "H^c differs from H")
        return

    ck.require(set(att) == {"c", "parabolic", "witness"}, "unexpected attachments")
    F = schreier_basis(principal_congruence(k))
    wit = att["witness"]
    K1, K2 = _check_witness(ck, wit, F.basis_id, _series_name(spec), spec.index)
    ck.check(wit["K2"] == restrict_to_free(H, F).standardize().to_text(), "K2 is not H inside Gamma(k)")
    ck.check(K1.index * F.table.index == H.index, "K1 does not have the index of H^c in Gamma(k)")
    for gen in free_schreier_basis(K1).gens:
        ck.check(_in(H, c.conj_inverse(F.evaluate(gen))), "a K1 generator is not in H^c")


# ---------------------------------------------------------------------------
# homology actions, conjugators, series membership


def replay_chevweil(ck: _Checker, p: dict) -> None:
    inp, r = p["inputs"], p["replay"]
    k = inp["rank"]
    ck.require(r["rank_F"] == k, "rank mismatch")
    if "images" in inp:
        ck.require(r["table"] == _kernel_text(k, inp["images"]), "table is not the kernel of the stated map")
        n_images = _perm_group_order([tuple(x) for x in inp["images"]])
    else:
        ck.require(hashlib.sha256(r["table"].encode()).hexdigest() == inp["table_sha256"],
                   "table does not match the input file")
        n_images = None
    N = table_from_text(r["table"])
    ck.require(isinstance(N, FreeCosetTable) and N.rank == k, "kernel must be a free table of the right rank")
    if n_images is not None:
        ck.require(n_images == N.index, "index differs from the order of the image group")
    ck.require(is_normal(N), "kernel is not normal")
    NB = free_schreier_basis(N)
    ck.require(r["basis_id"] == NB.basis_id, "basis id mismatch")
    tv = N.transversal
    mats = [[[NB.class_of(tv[q] * g * tv[q].inverse())[i] for g in NB.gens] for i in range(NB.rank)]
            for q in range(N.index)]
    mul = [list(row) for row in N.quotient()]
    ck.require(mats == r["mats"], "action matrices differ")
    ck.require(mul == r["mul"], "multiplication table differs")
    dim = NB.rank
    hom_ok = all(matmul(mats[a], mats[b]) == mats[mul[a][b]]
                 for a in range(N.index) for b in range(N.index))
    dim_ok = dim == k + (k - 1) * (N.index - 1)
    char_ok = all(trace(m) == (dim if q == 0 else 1) for q, m in enumerate(mats))
    rows = [[Fraction(m[i][j] - (i == j)) for j in range(dim)]
            for m in mats[1:] for i in range(dim)]
    fixed_ok = (len(nullspace(rows, dim)) if rows else dim) == k
    expect = {"dim_ok": dim_ok, "char_ok": char_ok, "fixed_dim_ok": fixed_ok,
              "homomorphism_ok": hom_ok, "all_ok": dim_ok and char_ok and fixed_ok and hom_ok}
    ck.check(p["verdict"] == expect, "report flags differ from the recomputed ones")


def replay_conjugator(ck: _Checker, p: dict) -> None:
    inp, r = p["inputs"], p["replay"]
    A, B = ProjMat.of(parse_matrix(inp["A"])), ProjMat.of(parse_matrix(inp["B"]))
    ck.require(A.to_dict() == r["A"] and B.to_dict() == r["B"], "A or B mismatch")
    x = matrix_from_dict(r["x"])
    ck.check(ProjMat.of(x.inverse() * A * x) == B, "x^-1 A x != B")
    ck.check(p["verdict"] == {"found": True}, "unexpected verdict")


def replay_series(ck: _Checker, p: dict) -> None:
    inp, r = p["inputs"], p["replay"]
    w = parse_word(inp["word"])
    ck.require(list(w.letters) == r["word"], "word mismatch")
    spec = SeriesSpec.parse(inp["spec"])
    ck.require(str(spec) == r["spec"], "series mismatch")
    ck.require(inp["rank"] == r["rank"] and inp["cmax"] == r["cmax"], "rank or cmax mismatch")
    result = in_series(w, spec, r["rank"], r["cmax"])
    ck.check(p["verdict"] == {"result": result.value}, "series membership differs")


_REPLAYERS: dict[str, Callable[[_Checker, dict], None]] = {
    "witness": replay_witness,
    "commensurate": replay_pipeline,
    "chevweil": replay_chevweil,
    "conjugator": replay_conjugator,
    "series": replay_series,
}


def verify_payload(payload: dict) -> None:
    """Raise ReplayFailure (naming the first failed identity) unless every claim holds."""
    if not isinstance(payload, dict) or set(payload) != {"version", "command", "inputs", "verdict", "replay"}:
        raise ReplayFailure("payload must have exactly version, command, inputs, verdict, replay")
    if payload["version"] != VERSION:
        raise ReplayFailure(f"unsupported version {payload['version']!r}")
    replayer = _REPLAYERS.get(payload["command"])
    if replayer is None:
        raise ReplayFailure(f"unknown certificate kind {payload['command']!r}")
    ck = _Checker()
    try:
        replayer(ck, payload)
    except ReplayFailure:
        raise
    except (ModcommError, ArithmeticError, KeyError, ValueError, TypeError, IndexError, AttributeError) as exc:
        raise ReplayFailure(f"replay could not run: {type(exc).__name__}: {exc}") from exc
    if ck.failures:
        raise ReplayFailure(ck.failures[0])


def verify_text(text: str) -> dict:
    """Parse, check the hash and replay; returns the payload on success."""
    payload = parse(text)
    verify_payload(payload)
    return payload
