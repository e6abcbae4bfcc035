"""Certificate format, replay and tamper detection."""

import json
import re

import pytest
import sympy

from modcomm import certificate as certs
from modcomm.cli import main
from modcomm.commens import conjugate_witness
from modcomm.errors import HashMismatch, ReplayFailure
from modcomm.exact import parse_matrix, sqrtq_membership
from modcomm.freegrp import SeriesSpec
from modcomm.modgroup import principal_congruence, schreier_basis

DIGITS = re.compile(r"\d+")


def make_certs(tmp_path):
    """One certificate of each kind, produced through the command line."""
    runs = {
        "witness3": ["witness", "--rank", "2", "--k1", "(0 1 2); (0 2 1)", "--k2", "(0 1 2); (0 1 2)",
                     "--depth", "4"],
        "witnessD": ["witness", "--rank", "2", "--k1", "(0 1); id", "--k2", "id; (0 1)",
                     "--series", "D", "--depth", "3"],
        "reject": ["commensurate", "--gamma", "2", "--matrix", "sqrt(2), 0; 0, 1/sqrt(2)"],
        "pass": ["commensurate", "--gamma", "2", "--matrix", "1, 1; 0, 1"],
        "chevweil": ["chevweil", "--rank", "2", "--quotient", "S3"],
        "conjugator": ["conjugator", "--A", "1, 1; 0, 1", "--B", "1, 2; 0, 1"],
        "series": ["series", "--word", "x y X Y", "--spec", "D2"],
    }
    out = {}
    for name, argv in runs.items():
        path = tmp_path / f"{name}.cert"
        assert main(argv + ["--cert", str(path)]) in (0, 1)
        out[name] = path.read_text()
    return out


@pytest.fixture(scope="module")
def cert_texts(tmp_path_factory):
    return make_certs(tmp_path_factory.mktemp("certs"))


def mutations(body: str):
    """Every digit run in ``body`` moved by +1 and by -1."""
    for m in DIGITS.finditer(body):
        v = int(m.group())
        for nv in (v + 1, v - 1):
            yield body[: m.start()] + str(nv) + body[m.end():]


def rehash(body: str) -> str:
    return certs.render(json.loads(body))


def test_all_kinds_verify(cert_texts):
    for name, text in cert_texts.items():
        payload = certs.verify_text(text)
        assert set(payload) == {"version", "command", "inputs", "verdict", "replay"}, name


def test_layout(cert_texts):
    lines = cert_texts["pass"].splitlines()
    assert lines[0] == certs.MAGIC
    assert lines[2].startswith("sha256 ") and len(lines) == 3
    assert json.loads(lines[1])["command"] == "commensurate"


def test_deterministic(tmp_path):
    a, b = make_certs(tmp_path / "a"), make_certs(tmp_path / "b")
    assert a == b


def test_timestamp_is_outside_hash(tmp_path):
    p = tmp_path / "t.cert"
    assert main(["series", "--word", "x y", "--spec", "gamma2", "--cert", str(p), "--timestamp"]) == 0
    text = p.read_text()
    assert text.splitlines()[-1].startswith("created ")
    certs.verify_text(text)
    certs.verify_text(text.replace(text.splitlines()[-1], "created 1999-01-01T00:00:00Z"))


@pytest.mark.parametrize("bad", ["", "MODCOMM-CERT 1\n", "garbage\n"])
def test_malformed_headers(bad):
    with pytest.raises(HashMismatch):
        certs.parse(bad)


def test_truncated_file_fails(cert_texts):
    text = cert_texts["witness3"]
    for cut in (len(text) // 2, text.index("sha256") + 20):
        with pytest.raises(HashMismatch):
            certs.verify_text(text[:cut])


def test_trailing_garbage_fails(cert_texts):
    with pytest.raises(HashMismatch):
        certs.parse(cert_texts["series"] + "extra line\n")


@pytest.mark.parametrize("name", ["witness3", "witnessD", "reject", "pass"])
def test_every_integer_mutation_detected(cert_texts, name):
    text = cert_texts[name]
    header, body, hashline = text.splitlines()[:3]
    n = 0
    for mutated in mutations(body):
        n += 1
        with pytest.raises(HashMismatch):
            certs.verify_text(f"{header}\n{mutated}\n{hashline}\n")
        try:
            resealed = rehash(mutated)
        except json.JSONDecodeError:
            continue
        with pytest.raises((ReplayFailure, HashMismatch)):
            certs.verify_text(resealed)
    assert n > 100


@pytest.mark.parametrize("name", ["chevweil", "series"])
def test_rehashed_value_edits_detected(cert_texts, name):
    body = cert_texts[name].splitlines()[1]
    detected = total = 0
    for mutated in mutations(body):
        try:
            resealed = rehash(mutated)
        except json.JSONDecodeError:
            continue
        total += 1
        try:
            certs.verify_text(resealed)
        except (ReplayFailure, HashMismatch):
            detected += 1
    assert total and detected == total


def test_payload_shape_enforced(cert_texts):
    p = certs.parse(cert_texts["series"])
    for broken in ({**p, "extra": 1}, {**p, "version": 2}, {**p, "command": "nope"}):
        with pytest.raises(ReplayFailure):
            certs.verify_payload(broken)


def test_verdict_cannot_be_flipped(cert_texts):
    p = certs.parse(cert_texts["reject"])
    p["verdict"]["status"] = "PassIntegral"
    p["replay"]["verdict"]["status"] = "PassIntegral"
    with pytest.raises(ReplayFailure):
        certs.verify_text(certs.render(p))


def test_conjugate_witness_checks_directly():
    # Not reachable end to end for a normal H, so exercised here on its own.
    H, F = principal_congruence(4), schreier_basis(principal_congruence(2))
    c = sqrtq_membership(parse_matrix("sqrt(2), 0; 0, 1/sqrt(2)"))
    for spec in ("D2", "gamma3"):
        s = SeriesSpec.parse(spec)
        cert, chain = conjugate_witness(H, schreier_basis(H), c, 2, s)
        r = cert.with_chain(chain).to_dict()
        ck = certs._Checker()
        certs._check_witness(ck, r, F.basis_id, certs._series_name(s), s.index)
        assert not ck.failures
        r["n"] += 1
        ck = certs._Checker()
        certs._check_witness(ck, r, F.basis_id, certs._series_name(s), s.index)
        assert ck.failures


def test_conjugator_edits_detected_or_still_true(cert_texts):
    # The conjugator is unique only up to the centralizer of A, so an edit
    # may yield another valid conjugator; sympy decides which case holds.
    body = cert_texts["conjugator"].splitlines()[1]
    A, B = sympy.Matrix([[1, 1], [0, 1]]), sympy.Matrix([[1, 2], [0, 1]])
    accepted = 0
    for mutated in mutations(body):
        try:
            certs.verify_text(rehash(mutated))
        except (ReplayFailure, HashMismatch):
            continue
        accepted += 1
        X = sympy.Matrix(2, 2, [sympy.sympify(e) for e in json.loads(mutated)["replay"]["x"]["entries"]])
        assert sympy.simplify(X.det() - 1) == 0
        assert sympy.simplify(X.inv() * A * X - B) == sympy.zeros(2, 2)
    assert accepted < len(list(mutations(body)))
