import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
sys.path.insert(0, str(TESTS_DIR))

from verikg.kg import SignalIndex  # noqa: E402
from verikg.rtl.elaborate import elaborate  # noqa: E402
from verikg.rtl.parser import parse_rtl  # noqa: E402

FIXTURES = TESTS_DIR / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def fifo_source() -> str:
    return (FIXTURES / "fifo.v").read_text()


@pytest.fixture()
def fifo_model(fifo_source):
    model = parse_rtl(fifo_source)
    assert hasattr(model, "modules"), getattr(model, "render", lambda: model)()
    return model


@pytest.fixture()
def fifo_net(fifo_model):
    net = elaborate(fifo_model, "fifo")
    assert hasattr(net, "state_bits"), net.render()
    return net


@pytest.fixture()
def fifo_index(fifo_net) -> SignalIndex:
    idx = SignalIndex()
    for name, width in fifo_net.widths.items():
        idx.add(name, width)
    return idx


# ---------------------------------------------------------------------------
# Acceptance summary: one pass/fail line per criterion
# ---------------------------------------------------------------------------

_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE_RESULTS[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(_ACCEPTANCE_RESULTS):
        outcome = _ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"{outcome}  {name}")
