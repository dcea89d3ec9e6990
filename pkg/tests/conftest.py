import numpy as np
import pytest

from frachelm.verification import dense_fem

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def dense_fem_11():
    return dense_fem(11)


def smooth_zero_bc_forcing(rng, n_nodes, modes=8):
    """Random sine series: zero at both ends, no mesh-scale content."""
    x = np.linspace(0.0, 1.0, n_nodes)
    coef = rng.standard_normal(modes) + 1j * rng.standard_normal(modes)
    f = sum(c * np.sin((j + 1) * np.pi * x) for j, c in enumerate(coef))
    f[0] = f[-1] = 0.0
    return f
