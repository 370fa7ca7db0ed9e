import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from myohand import kernels  # noqa: E402

KERNEL_NAMES = ("fft_batch", "power_spectrum_batch", "window_stats_batch", "td_features_batch")


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    mod = kernels.get_backend(request.param)
    for name in KERNEL_NAMES:
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return mod


ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: call ``criterion(ok, detail)`` before asserting."""
    name = request.node.name

    def record(ok: bool, detail: str = "") -> bool:
        ACCEPTANCE_RESULTS.append((name, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
