from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from qbpgd.codes import hypergraph_product, parse_code_file

FIXTURES = Path(__file__).parent / "fixtures"

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def steane():
    return parse_code_file(FIXTURES / "steane.css")


@pytest.fixture(scope="session")
def hgp5():
    return parse_code_file(FIXTURES / "hgp5.css")


@pytest.fixture(scope="session")
def rep_hgp():
    """HGP of two length-4 repetition codes: [[25, 1]], highly degenerate."""
    H = np.array([[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1]], dtype=np.uint8)
    return hypergraph_product(H, H, name="hgp-rep4")


@pytest.fixture
def acceptance(request):
    """Record a detail string for the acceptance summary line."""
    def note(detail: str) -> None:
        request.node.acceptance_detail = detail
    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    label = str(marker.args[0])
    detail = getattr(item, "acceptance_detail", "")
    if rep.skipped:
        reason = rep.longrepr[2] if isinstance(rep.longrepr, tuple) else str(rep.longrepr)
        _ACCEPTANCE[label] = ("SKIP", reason.removeprefix("Skipped: "))
    elif rep.when == "call":
        status = "PASS" if rep.passed else "FAIL"
        _ACCEPTANCE[label] = (status, detail or (str(rep.longrepr).splitlines()[-1] if rep.failed else ""))
    elif rep.failed:
        _ACCEPTANCE[label] = ("FAIL", f"{rep.when} error")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id): acceptance criterion this test checks")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=lambda s: (len(s), s)):
        status, detail = _ACCEPTANCE[label]
        terminalreporter.write_line(f"criterion {label}: {status}  {detail}".rstrip())
