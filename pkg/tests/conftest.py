"""Shared fixtures and the acceptance summary printed after the run."""
import pytest
from hypothesis import settings

from qgreduce import CouplingSpec, Potential, catalog

# fixed example order so that repeated runs see the same inputs
settings.register_profile("repeatable", derandomize=True, deadline=None)
settings.load_profile("repeatable")

_ACCEPTANCE = {}


@pytest.fixture
def record():
    """``record(n, ok, detail)`` stores one acceptance line; later calls for ``n`` are combined."""
    def _record(n, ok, detail=""):
        prev = _ACCEPTANCE.get(n)
        if prev is not None:
            ok = ok and prev[0]
            detail = f"{prev[1]}; {detail}" if detail else prev[1]
        _ACCEPTANCE[n] = (bool(ok), detail)
        print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def triangle():
    return catalog.triangle()


@pytest.fixture
def cos_potential():
    return Potential.fourier(cos=(0.0, 1.0))


@pytest.fixture
def kirchhoff():
    return CouplingSpec.kirchhoff()
