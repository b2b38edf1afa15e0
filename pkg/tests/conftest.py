import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nslearn.core import Orientation, Panel

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


@st.composite
def nondegenerate_vectors(draw, min_size=2, max_size=20):
    d = draw(st.integers(min_size, max_size))
    y = draw(arrays(np.float64, d, elements=finite))
    # keep the centered sum of squares well away from zero
    if np.sum((y - y.mean()) ** 2) < 1e-6:
        y = y + np.arange(d)
    return y


@st.composite
def panels(draw, max_d=10, max_n=50, orientation=None):
    d = draw(st.integers(2, max_d))
    n = draw(st.integers(1, max_n))
    S = draw(arrays(np.float64, (n, d), elements=finite))
    spread = np.sum((S - S.mean(axis=1, keepdims=True)) ** 2, axis=1)
    S[spread < 1e-6] += np.arange(d)
    if orientation is None:
        orientation = draw(st.sampled_from(list(Orientation)))
    return Panel.from_series(S, orientation)


def random_panel(rng, d, n, orientation=Orientation.COLUMNS, scale=1.0):
    return Panel.from_series(scale * rng.normal(size=(n, d)) + rng.normal(size=(n, 1)), orientation)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def toy():
    """Two series (1, 3) and (0, 4) stored as columns."""
    return Panel(np.array([[1.0, 0.0], [3.0, 4.0]]), Orientation.COLUMNS)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
