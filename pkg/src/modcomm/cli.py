"""Command-line front end.

Exit codes: ``commensurate`` returns 0 (PassIntegral), 1 (Reject) or
2 (Inconclusive); ``chevweil`` and ``verify`` return 0 on success and 1 on
failure; malformed input of any kind returns 3.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import certificate as certs
from .cache import atomic_write, cached_table
from .chevweil import chevalley_weil_check, homology_action, quotient_battery
from .commens import PipelineConfig, main_pipeline
from .errors import HashMismatch, ModcommError, NoRealScaling, NotConjugate, ParseError, ReplayFailure
from .exact import parse_matrix, to_text
from .freegrp import DEFAULT_CMAX, SeriesSpec, in_series, lcs_depth, parse_word
from .galois import classify_field, conjugator_between, eta_conjugator, eta_roots
from .modgroup import (
    CosetTable,
    FreeCosetTable,
    cusps,
    from_permutations,
    normal_kernel,
    parse_cycles,
    principal_congruence,
    schreier_basis,
    table_from_text,
    torsion_free,
)
from .witness import derived_chain, filtration_chain, gaschutz_witness

EXIT_INPUT = 3


# ---------------------------------------------------------------------------
# argument helpers


def _images(text: str, rank: Optional[int] = None) -> list[list[int]]:
    """Permutations separated by ';', e.g. ``(0 1 2); id``."""
    parts = [p.strip() for p in text.split(";")]
    perms = [parse_cycles(p) for p in parts]
    degree = max(len(p) for p in perms)
    perms = [list(parse_cycles(p, degree)) for p in parts]
    if rank is not None and len(perms) != rank:
        raise ParseError(f"expected {rank} permutations, got {len(perms)}")
    return perms


def _psl_subgroup(args) -> tuple[CosetTable, dict]:
    if args.gamma is not None:
        if args.gamma < 1:
            raise ParseError("--gamma needs a positive level")
        K = args.gamma
        return cached_table(f"gamma {K}", lambda: principal_congruence(K)), {"gamma": K}
    if args.S is None or args.U is None:
        raise ParseError("give --gamma K or both --S and --U")
    S, U = parse_cycles(args.S), parse_cycles(args.U)
    n = max(len(S), len(U))
    S, U = list(parse_cycles(args.S, n)), list(parse_cycles(args.U, n))
    key = f"perm S={S} U={U}"
    return cached_table(key, lambda: from_permutations(S, U)), {"S": S, "U": U}


def _write_cert(path: Optional[str], payload: dict, stamp: bool) -> None:
    if path:
        atomic_write(Path(path), certs.render(payload, certs.now_stamp() if stamp else None))


def _add_subgroup_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gamma", type=int, help="principal congruence subgroup Gamma(K)")
    p.add_argument("--S", help="permutation image of S (cycle notation or image list)")
    p.add_argument("--U", help="permutation image of U = ST")


def _add_cert_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cert", help="write a certificate to this path")
    p.add_argument("--timestamp", action="store_true",
                   help="append a 'created' line (not covered by the hash)")


# ---------------------------------------------------------------------------
# commands


def cmd_subgroup(args) -> int:
    tbl, _ = _psl_subgroup(args)
    cd = cusps(tbl)
    tf = torsion_free(tbl)
    report = {
        "index": tbl.index,
        "torsion_free": tf,
        "rank": schreier_basis(tbl).rank if tf else None,
        "cusps": len(cd),
        "widths": list(cd.widths),
    }
    if args.json:
        print(json.dumps(report, sort_keys=True))
    else:
        print(f"index {report['index']}")
        print(f"torsion-free {'yes' if tf else 'no'}")
        print(f"rank {report['rank'] if tf else 'n/a'}")
        print(f"cusps {report['cusps']}")
        print("widths " + " ".join(map(str, report["widths"])))
    return 0


def cmd_chevweil(args) -> int:
    k = args.rank
    if k < 1:
        raise ParseError("--rank must be positive")
    if args.table:
        text = Path(args.table).read_text()
        N = table_from_text(text)
        if not isinstance(N, FreeCosetTable) or N.rank != k:
            raise ParseError(f"the table file must hold a free table of rank {k}")
        inputs = {"rank": k, "table_sha256": hashlib.sha256(N.to_text().encode()).hexdigest()}
    else:
        if args.quotient:
            battery = quotient_battery(k)
            if args.quotient not in battery:
                raise ParseError(f"unknown quotient {args.quotient!r}; choose from {sorted(battery)}")
            images = [list(p) for p in battery[args.quotient]]
        elif args.images:
            images = _images(args.images, k)
        else:
            images = [[0]] * k  # trivial quotient
        N = normal_kernel(k, images)
        inputs = {"rank": k, "images": images}
    act = homology_action(k, N)
    rep = chevalley_weil_check(act)
    flags = {"dim_ok": rep.dim_ok, "char_ok": rep.char_ok, "fixed_dim_ok": rep.fixed_dim_ok,
             "homomorphism_ok": rep.homomorphism_ok, "all_ok": rep.all_ok}
    print(f"|Q| {act.order}")
    print(f"dim H1(N) {act.dim}")
    for name, val in flags.items():
        print(f"{name} {'yes' if val else 'no'}")
    d = act.to_dict()
    action = {"rank_F": d["rank_F"], "basis_id": d["basis_id"], "mats": d["mats"], "mul": d["mul"]}
    _write_cert(args.cert, certs.chevweil_payload(inputs, N, action, flags), args.timestamp)
    return 0 if rep.all_ok else 1


def cmd_witness(args) -> int:
    k = args.rank
    imgs1, imgs2 = _images(args.k1, k), _images(args.k2, k)
    K1, K2 = normal_kernel(k, imgs1), normal_kernel(k, imgs2)
    cert = gaschutz_witness(K1, K2)
    if args.series == "gamma":
        chain = filtration_chain(cert, args.depth, cmax=args.cmax)
    elif args.depth in (2, 3):
        chain = derived_chain(cert)[: args.depth - 1]
    else:
        raise ParseError("derived chains are available for depth 2 and 3 only")
    cert = cert.with_chain(chain)
    print(f"a {list(cert.a.letters)}")
    print(f"b {list(cert.b.letters)}")
    print(f"x_b {list(cert.x_b.letters)}")
    print(f"n {cert.n}")
    print(f"[x_b] in H1(K2) {list(cert.hom_class)}")
    for e in chain:
        print(f"{e.series}{e.level}: K1 {e.k1_verdict.value}, K2 {e.k2_verdict.value}")
    inputs = {"rank": k, "k1": imgs1, "k2": imgs2, "series": args.series, "depth": args.depth}
    _write_cert(args.cert, certs.witness_payload(inputs, cert.to_dict()), args.timestamp)
    return 0


def _run_candidate(job: tuple) -> tuple[int, str, Optional[str]]:
    """One pipeline run; returns (exit code, summary line, certificate text)."""
    H_text, H_inputs, k, spec_text, matrix_text, cmax, stamp = job
    H = table_from_text(H_text)
    spec = SeriesSpec.parse(spec_text)
    g = parse_matrix(matrix_text)
    verdict = main_pipeline(H, k, spec, g, config=PipelineConfig(cmax=cmax))
    inputs = {"H": H_inputs, "k": k, "spec": spec_text, "matrix": matrix_text}
    payload = certs.pipeline_payload(inputs, H, k, spec, g, verdict.to_dict())
    line = f"{verdict.status.value} {verdict.reason} (stage {verdict.stage})"
    return verdict.exit_code, line, certs.render(payload, certs.now_stamp() if stamp else None)


def _read_matrices(path: str) -> list[str]:
    out = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(line)
    if not out:
        raise ParseError(f"{path} holds no matrices")
    return out


def cmd_commensurate(args) -> int:
    H, H_inputs = _psl_subgroup(args)
    k = args.k if args.k is not None else H_inputs.get("gamma")
    if k is None:
        raise ParseError("--k is required when H is given by permutations")
    spec = SeriesSpec.parse(args.series)
    if args.matrix is not None:
        matrices = [args.matrix]
    elif args.matrix_file:
        matrices = _read_matrices(args.matrix_file)
    else:
        raise ParseError("give --matrix or --matrix-file")
    for m in matrices:
        parse_matrix(m)  # fail fast on malformed input
    if not torsion_free(H):
        raise ParseError("H must be torsion-free")
    jobs = [(H.to_text(), H_inputs, k, str(spec), m, args.cmax, args.timestamp) for m in matrices]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_candidate, jobs))
    else:
        results = [_run_candidate(j) for j in jobs]

    batch = len(matrices) > 1
    for i, (m, (code, line, text)) in enumerate(zip(matrices, results), start=1):
        print(f"[{m}] {line}" if batch else line)
        if batch and args.cert_dir:
            atomic_write(Path(args.cert_dir) / f"candidate-{i:03d}.cert", text)
        elif not batch and args.cert:
            atomic_write(Path(args.cert), text)
    return max(code for code, _, _ in results)


def cmd_conjugator(args) -> int:
    A, B = parse_matrix(args.A), parse_matrix(args.B)
    if not (A.is_rational() and B.is_rational()):
        raise ParseError("A and B must be rational matrices")
    try:
        x = conjugator_between(A, B)
    except (NotConjugate, NoRealScaling) as exc:
        print(f"no conjugator: {type(exc).__name__}: {exc}")
        return 1
    print(f"x {x.to_text()}")
    print(f"field {classify_field(x)}")
    if args.eta:
        roots = eta_roots(A, B)
        for eta in roots:
            X = eta_conjugator(A, B, eta)
            shown = X.to_text() if X is not None else "none"
            print(f"eta {to_text(eta)} -> {shown}")
    inputs = {"A": args.A, "B": args.B}
    _write_cert(args.cert, certs.conjugator_payload(A, B, x, inputs), args.timestamp)
    return 0


def cmd_series(args) -> int:
    w = parse_word(args.word)
    spec = SeriesSpec.parse(args.spec)
    rank = args.rank if args.rank is not None else max((abs(l) for l in w.letters), default=1)
    result = in_series(w, spec, rank, args.cmax)
    print(f"{spec}: {result.value}")
    if w.letters:
        print(f"lcs depth {lcs_depth(w, args.cmax)}")
    inputs = {"word": args.word, "spec": args.spec, "rank": rank, "cmax": args.cmax}
    _write_cert(args.cert, certs.series_payload(inputs, w, spec, rank, args.cmax, result), args.timestamp)
    return 0


def cmd_verify(args) -> int:
    try:
        text = Path(args.file).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {args.file}: {exc}") from exc
    try:
        payload = certs.verify_text(text)
    except (HashMismatch, ReplayFailure) as exc:
        print(f"FAIL {type(exc).__name__}: {exc}")
        return 1
    print(f"OK {payload['command']} certificate replays")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modcomm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("subgroup", help="index, rank and cusps of a finite-index subgroup")
    _add_subgroup_args(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_subgroup)

    p = sub.add_parser("chevweil", help="check the homology action of a finite quotient")
    p.add_argument("--rank", type=int, required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--images", help="generator images, e.g. '(0 1 2); id'")
    src.add_argument("--quotient", help="one of Z2, Z3, Z4, Z2xZ2, S3, Z6")
    src.add_argument("--table", help="file holding the kernel's coset table")
    _add_cert_args(p)
    p.set_defaults(func=cmd_chevweil)

    p = sub.add_parser("witness", help="non-commensurability witness for K1', K2'")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--k1", required=True, help="images defining K1 as a kernel")
    p.add_argument("--k2", required=True, help="images defining the normal subgroup K2")
    p.add_argument("--series", choices=("gamma", "D"), default="gamma")
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--cmax", type=int, default=DEFAULT_CMAX)
    _add_cert_args(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("commensurate", help="run the commensurator pipeline on candidates")
    _add_subgroup_args(p)
    p.add_argument("--k", type=int, help="level k with H inside Gamma(k) (default: the --gamma level)")
    p.add_argument("--series", default="D2", help="series term such as D2 or gamma3")
    p.add_argument("--matrix", help="candidate matrix 'a, b; c, d'")
    p.add_argument("--matrix-file", help="file with one candidate per line")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for batch files")
    p.add_argument("--cert-dir", help="directory for batch certificates")
    p.add_argument("--cmax", type=int, default=DEFAULT_CMAX)
    _add_cert_args(p)
    p.set_defaults(func=cmd_commensurate)

    p = sub.add_parser("conjugator", help="real conjugator between rational matrices")
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)
    p.add_argument("--eta", action="store_true", help="also print the eta roots and their conjugators")
    _add_cert_args(p)
    p.set_defaults(func=cmd_conjugator)

    p = sub.add_parser("series", help="membership of a free-group word in a series term")
    p.add_argument("--word", required=True, help="e.g. 'x y X Y' or '1 2 -1 -2'")
    p.add_argument("--spec", required=True, help="e.g. gamma3 or D2")
    p.add_argument("--rank", type=int)
    p.add_argument("--cmax", type=int, default=DEFAULT_CMAX)
    _add_cert_args(p)
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("verify", help="check a certificate's hash and replay its claims")
    p.add_argument("file")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    try:
        return args.func(args)
    except (ModcommError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
