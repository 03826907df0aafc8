import os

import pytest

_acceptance: dict[int, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    num = getattr(item.function, "criterion", None)
    if num is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        prev = _acceptance.get(num, "PASS")
        _acceptance[num] = "PASS" if rep.passed and prev == "PASS" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_acceptance):
        terminalreporter.write_line(f"criterion {num:2d}: {_acceptance[num]}")


@pytest.fixture
def tmp_cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture(autouse=True)
def _no_budget_override(monkeypatch):
    monkeypatch.delenv("SVSIM_MEMORY_BUDGET", raising=False)
    yield


NUMBA_OFF_ENV = {**os.environ, "SVSIM_DISABLE_NUMBA": "1"}
