import sys

import numpy as np
import pytest
from hypothesis import settings

from zklab import Field2, Grid2

settings.register_profile("zklab", deadline=None, max_examples=40)
settings.load_profile("zklab")


@pytest.fixture
def grid32():
    return Grid2(32, 32)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_field(grid, rng, band=None):
    """Real field; band-limited to ``|k|, |m| <= band`` when given."""
    f = Field2(grid, rng.normal(size=grid.shape))
    if band is None:
        return f
    from zklab import fft_forward, fft_inverse, SpecField2

    F = fft_forward(f)
    keep = (np.abs(grid.kx)[:, None] <= band) & (np.abs(grid.ky)[None, :] <= band)
    return fft_inverse(SpecField2(grid, np.where(keep, F.coeffs, 0)))


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance lines, which pytest captures during the run."""
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, (_, line) in sorted(mod.RESULTS.items()):
        terminalreporter.write_line(line)
