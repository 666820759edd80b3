import pytest

from emgcombo.dataset import split_session
from emgcombo.simgen import SimulatorConfig, generate_session


@pytest.fixture(scope="session")
def session():
    return generate_session(SimulatorConfig(seed=7), "S07")


@pytest.fixture(scope="session")
def split(session):
    return split_session(session)


# ---------------------------------------------------------------- acceptance summary

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n = mark.args[0]
    entry = _CRITERIA.setdefault(n, {"ok": True, "ran": False, "notes": []})
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        entry["ran"] = True
        if not rep.passed:
            entry["ok"] = False
        for key, value in item.user_properties:
            if key == "detail":
                entry["notes"].append(value)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        status = "PASS" if e["ok"] and e["ran"] else ("FAIL" if e["ran"] else "NOT RUN")
        detail = "; ".join(e["notes"])
        tr.write_line(f"criterion {n}: {status}" + (f"  ({detail})" if detail else ""))
