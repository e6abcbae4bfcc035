import re
from collections import defaultdict

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+?)(?:\[|$)")
_results: dict = defaultdict(lambda: {"passed": 0, "failed": 0, "seconds": 0.0, "title": ""})


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("MODCOMM_CACHE", str(tmp_path / "cache"))


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m or (report.when != "call" and not report.failed):
        return
    r = _results[int(m.group(1))]
    r["title"] = m.group(2).replace("_", " ")
    r["seconds"] += report.duration
    r["failed" if report.failed else "passed"] += report.when == "call" or report.failed


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        r = _results[n]
        verdict = "FAIL" if r["failed"] else "PASS"
        cases = r["passed"] + r["failed"]
        terminalreporter.write_line(
            f"{verdict} criterion {n:2d}: {r['title']} ({cases} case{'s' * (cases != 1)}, {r['seconds']:.2f} s)")
