import numpy as np
import pytest

from ersim import rng
from ersim.spectral import Grid

_ACCEPTANCE: list[tuple[str, str, bool, str]] = []


class AcceptanceLog:
    """Collects one pass/fail line per acceptance criterion."""

    def record(self, cid: str, title: str, passed: bool, detail: str = "") -> bool:
        _ACCEPTANCE.append((cid, title, bool(passed), detail))
        print(f"[{'PASS' if passed else 'FAIL'}] criterion {cid}: {title} :: {detail}")
        return bool(passed)


@pytest.fixture
def acceptance():
    return AcceptanceLog()


@pytest.fixture
def grid2():
    return Grid(2, 32)


@pytest.fixture
def grid3():
    return Grid(3, 16)


@pytest.fixture
def gen():
    return rng.stream(20241016, 99)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, title, ok, detail in sorted(_ACCEPTANCE, key=lambda r: (int(r[0].split(".")[0]), r[0])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {cid:>5}  {title}  ({detail})")


def random_divfree(grid, gen, kmax=4, scale=1.0):
    """Band-limited random divergence-free field."""
    from ersim.spectral import fft_forward, fft_inverse, leray_project
    u = gen.standard_normal((grid.n,) + grid.shape)
    u_hat = fft_forward(u, grid)
    keep = np.all(np.abs(grid.wavenumbers) <= kmax, axis=0)
    return scale * leray_project(fft_inverse(u_hat * keep, grid), grid)
