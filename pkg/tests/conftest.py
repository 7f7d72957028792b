import numpy as np
import pytest
from hypothesis import strategies as st

from pointer_decoherence import SelectionState, SpectralObservable


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, dim):
    return SelectionState(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_problem(rng, dim):
    obs = SpectralObservable(rng.uniform(-1.5, 1.5, dim))
    return obs, random_state(rng, dim), random_state(rng, dim)


def explicit_branch(x, g, a, t, m, sigma):
    """Pointer branch written out independently of the package."""
    s2 = sigma**2 + 1j * t / (2 * m)
    c = g * a
    pref = (sigma**2 / (2 * np.pi)) ** 0.25 / np.sqrt(s2)
    return (
        pref
        * np.exp(-1j * c**2 * t**3 / (6 * m))
        * np.exp(1j * c * t * x)
        * np.exp(-((x - c * t**2 / (2 * m)) ** 2) / (4 * s2))
    )


positive = st.floats(min_value=0.2, max_value=3.0, allow_nan=False)
couplings = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
eigen = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
