import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tetrolet_iqa import _kernels  # noqa: E402

BACKENDS = ["numpy"] + (["numba"] if _kernels.numba_available() else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    monkeypatch.setenv("TETROLET_IQA_DISABLE_NUMBA", "1" if request.param == "numpy" else "0")
    return request.param


ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_runtest_makereport(item, call):
    crit = item.get_closest_marker("acceptance")
    if crit is None or call.when not in ("setup", "call"):
        return
    label = crit.args[0]
    if call.excinfo is not None:
        status = "SKIP" if call.excinfo.errisinstance(pytest.skip.Exception) else "FAIL"
        detail = str(call.excinfo.value).splitlines()[0] if call.excinfo.value.args else ""
        ACCEPTANCE_LINES[label] = f"{status}  {detail}"
    elif call.when == "call":
        ACCEPTANCE_LINES[label] = "PASS  " + getattr(item, "acceptance_note", "")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0])):
        terminalreporter.write_line(f"criterion {label}: {ACCEPTANCE_LINES[label]}")
