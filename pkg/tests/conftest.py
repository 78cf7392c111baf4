import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria: dict[int, dict] = {}
_RANK = {"PASS": 0, "SKIP": 1, "FAIL": 2}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    entry = _criteria.setdefault(n, {"title": title, "status": "PASS", "notes": []})
    status = "FAIL" if report.failed else "SKIP" if report.skipped else "PASS"
    if _RANK[status] > _RANK[entry["status"]]:
        entry["status"] = status
    if report.when == "call":
        entry["notes"] += [f"{k}={v}" for k, v in item.user_properties]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        e = _criteria[n]
        notes = f" ({', '.join(e['notes'])})" if e["notes"] else ""
        terminalreporter.write_line(f"criterion {n:>2}: {e['status']}  {e['title']}{notes}")
