"""Command-line behaviour: outputs, exit codes, batch runs, verification."""

import json

import pytest

from modcomm.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("K, expected", [
    (2, {"index": 6, "rank": 2, "cusps": 3, "torsion_free": True}),
    (3, {"index": 12, "rank": 3, "cusps": 4, "torsion_free": True}),
    (5, {"index": 60, "rank": 11, "cusps": 12, "torsion_free": True}),
    (1, {"index": 1, "rank": None, "cusps": 1, "torsion_free": False}),
])
def test_subgroup_json(capsys, K, expected):
    code, out, _ = run(capsys, "subgroup", "--gamma", str(K), "--json")
    assert code == 0
    report = json.loads(out)
    assert {k: report[k] for k in expected} == expected
    assert sum(report["widths"]) == report["index"]


def test_subgroup_text_and_permutations(capsys):
    code, out, _ = run(capsys, "subgroup", "--gamma", "2")
    assert code == 0 and "index 6" in out and "widths 2 2 2" in out
    # Gamma(2) given by its permutation action on cosets
    code, out, _ = run(capsys, "subgroup", "--S", "(0 1)(2 3)(4 5)", "--U", "(0 2 4)(1 5 3)", "--json")
    assert code == 0
    assert json.loads(out)["index"] == 6


@pytest.mark.parametrize("argv", [
    ["subgroup"],
    ["subgroup", "--gamma", "0"],
    ["subgroup", "--S", "(0 1)", "--U", "0, 0"],
    ["chevweil", "--rank", "2", "--quotient", "Z7"],
    ["chevweil", "--rank", "2", "--images", "(0 1)"],
    ["commensurate", "--gamma", "2", "--matrix", "2, 0; 0, 1"],
    ["commensurate", "--gamma", "2", "--matrix", "1, x; 0, 1"],
    ["commensurate", "--gamma", "1", "--matrix", "1, 1; 0, 1"],
    ["series", "--word", "x a", "--spec", "D2"],
    ["series", "--word", "x", "--spec", "E2"],
    ["nonsense"],
    ["verify", "/nonexistent/file.cert"],
])
def test_bad_input_exits_3(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 3


@pytest.mark.parametrize("q", ["Z2", "Z3", "S3", "Z2xZ2"])
def test_chevweil_battery(capsys, q):
    code, out, _ = run(capsys, "chevweil", "--rank", "2", "--quotient", q)
    assert code == 0 and "all_ok yes" in out


def test_chevweil_images_and_trivial(capsys):
    assert run(capsys, "chevweil", "--rank", "2", "--images", "(0 1 2); id")[0] == 0
    code, out, _ = run(capsys, "chevweil", "--rank", "3")
    assert code == 0 and "|Q| 1" in out and "dim H1(N) 3" in out


def test_chevweil_table_file(tmp_path, capsys):
    from modcomm.modgroup import normal_kernel

    path = tmp_path / "n.table"
    path.write_text(normal_kernel(2, [[1, 2, 0], [0, 1, 2]]).to_text())
    assert run(capsys, "chevweil", "--rank", "2", "--table", str(path))[0] == 0
    path.write_text("MODCOMM-TABLE 1\nthis is not a table\n")
    assert run(capsys, "chevweil", "--rank", "2", "--table", str(path))[0] == 3
    assert run(capsys, "chevweil", "--rank", "3", "--table", str(tmp_path / "missing"))[0] == 3


def test_witness_outputs(capsys, tmp_path):
    cert = tmp_path / "w.cert"
    code, out, _ = run(capsys, "witness", "--rank", "2", "--k1", "(0 1); id", "--k2", "id; (0 1)",
                       "--depth", "3", "--cert", str(cert))
    assert code == 0
    assert "gamma2: K1 In, K2 NotIn" in out and "gamma3: K1 In, K2 NotIn" in out
    assert run(capsys, "verify", str(cert))[0] == 0


def test_witness_derived_depth_limit(capsys):
    code, _, _ = run(capsys, "witness", "--rank", "2", "--k1", "(0 1); id", "--k2", "id; (0 1)",
                     "--series", "D", "--depth", "4")
    assert code == 3


@pytest.mark.parametrize("matrix, code, status", [
    ("1, 1; 0, 1", 0, "PassIntegral"),
    ("sqrt(2), 0; 0, 1/sqrt(2)", 1, "Reject"),
    ("1, 1/2; 0, 1", 1, "Reject"),
])
def test_commensurate_verdicts(capsys, tmp_path, matrix, code, status):
    cert = tmp_path / "c.cert"
    got, out, _ = run(capsys, "commensurate", "--gamma", "2", "--matrix", matrix, "--cert", str(cert))
    assert got == code and out.startswith(status)
    vcode, vout, _ = run(capsys, "verify", str(cert))
    assert vcode == 0 and vout.startswith("OK commensurate")


def test_commensurate_gamma3_series(capsys):
    code, out, _ = run(capsys, "commensurate", "--gamma", "3", "--series", "gamma3",
                       "--matrix", "1, 1/3; 0, 1")
    assert code == 1 and out.startswith("Reject")


@pytest.mark.parametrize("jobs", ["1", "2"])
def test_commensurate_batch(capsys, tmp_path, jobs):
    mf = tmp_path / "cands.txt"
    mf.write_text("# candidates\n1, 1; 0, 1\nsqrt(2), 0; 0, 1/sqrt(2)\n\n1, 1/2; 0, 1  # parabolic\n")
    cdir = tmp_path / "certs"
    code, out, _ = run(capsys, "commensurate", "--gamma", "2", "--matrix-file", str(mf),
                       "--jobs", jobs, "--cert-dir", str(cdir))
    assert code == 1  # worst verdict wins
    lines = out.splitlines()
    assert len(lines) == 3 and "PassIntegral" in lines[0] and "Reject" in lines[1]
    files = sorted(cdir.iterdir())
    assert [f.name for f in files] == ["candidate-001.cert", "candidate-002.cert", "candidate-003.cert"]
    for f in files:
        assert run(capsys, "verify", str(f))[0] == 0


def test_batch_certificates_match_across_job_counts(tmp_path, capsys):
    mf = tmp_path / "cands.txt"
    mf.write_text("1, 1; 0, 1\n1, 1/2; 0, 1\n")
    for jobs in ("1", "2"):
        run(capsys, "commensurate", "--gamma", "2", "--matrix-file", str(mf), "--jobs", jobs,
            "--cert-dir", str(tmp_path / jobs))
    for name in ("candidate-001.cert", "candidate-002.cert"):
        assert (tmp_path / "1" / name).read_text() == (tmp_path / "2" / name).read_text()


def test_verify_rejects_tampering(capsys, tmp_path):
    cert = tmp_path / "c.cert"
    run(capsys, "commensurate", "--gamma", "2", "--matrix", "1, 1/2; 0, 1", "--cert", str(cert))
    text = cert.read_text()
    bad = tmp_path / "bad.cert"
    bad.write_text(text.replace('"k":2', '"k":3', 1))
    code, out, _ = run(capsys, "verify", str(bad))
    assert code == 1 and out.startswith("FAIL HashMismatch")
    bad.write_text(text[: len(text) // 3])
    code, out, _ = run(capsys, "verify", str(bad))
    assert code == 1 and "HashMismatch" in out


def test_conjugator(capsys, tmp_path):
    cert = tmp_path / "x.cert"
    code, out, _ = run(capsys, "conjugator", "--A", "1, 1; 0, 1", "--B", "1, 2; 0, 1", "--eta",
                       "--cert", str(cert))
    assert code == 0 and "field SqrtQ" in out
    assert run(capsys, "verify", str(cert))[0] == 0
    # different traces: not conjugate
    code, out, _ = run(capsys, "conjugator", "--A", "1, 1; 0, 1", "--B", "2, 1; 1, 1")
    assert code == 1 and "NotConjugate" in out
    assert run(capsys, "conjugator", "--A", "sqrt(2), 0; 0, 1/sqrt(2)", "--B", "1, 0; 0, 1")[0] == 3


@pytest.mark.parametrize("word, spec, result", [
    ("x y X Y", "D2", "In"),
    ("x y X Y", "D3", "NotIn"),
    ("x y X Y", "gamma2", "In"),
    ("x y X Y", "gamma3", "NotIn"),
    ("x", "gamma2", "NotIn"),
])
def test_series(capsys, word, spec, result):
    code, out, _ = run(capsys, "series", "--word", word, "--spec", spec)
    assert code == 0 and out.splitlines()[0].endswith(result)
