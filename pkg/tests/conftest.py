import numpy as np
import pytest

from anlsim.ssfm import FiberSpec
from anlsim.txgen import TxConfig


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_tx():
    # 3 channels, 256 symbols (B(4,4)), 8 samples/symbol
    return TxConfig(n_channels=3, oversampling=8, n_symbols=256)


@pytest.fixture
def short_fiber():
    return FiberSpec(length=10e3)


# -- acceptance summary ------------------------------------------------------------

_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        number, title = mark.args
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
        if rep.outcome == "skipped" and isinstance(rep.longrepr, tuple):
            detail = rep.longrepr[2].removeprefix("Skipped: ")
        _ACCEPTANCE[number] = (title, status, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}" + (f" | {detail}" if detail else ""))
