import numpy as np
import pytest


def sine_field(m, coeffs):
    """Grid values of sum_k c_k sqrt(2) sin(k pi x), built directly from sin."""
    x = np.arange(1, m + 1) / (m + 1)
    k = np.arange(1, len(coeffs) + 1)
    return np.sqrt(2.0) * np.sin(np.pi * np.outer(k, x)).T @ np.asarray(coeffs, dtype=float)


def band_limited(rng, m, n_modes=12, decay=1.5, scale=1.0, size=None):
    """Random band-limited fields with algebraically decaying coefficients."""
    shape = (n_modes,) if size is None else (size, n_modes)
    c = rng.standard_normal(shape) * np.arange(1, n_modes + 1) ** -decay * scale
    if size is None:
        return sine_field(m, c)
    return np.stack([sine_field(m, ci) for ci in c])


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


# One line per acceptance criterion, echoed in the terminal summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
