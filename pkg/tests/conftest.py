import numpy as np
import pytest

from polarkit.channels import DmcTable

# criterion number -> (passed, detail), filled in by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def random_bec_like(rng: np.random.Generator, y_count: int) -> DmcTable:
    """Erasure channel with the erasure mass spread over the middle symbols."""
    eps = rng.random()
    split = rng.dirichlet(np.ones(y_count - 2)) if y_count > 2 else np.ones(0)
    p0 = np.concatenate([[1 - eps], eps * split, [0.0]])
    p1 = np.concatenate([[0.0], eps * split, [1 - eps]])
    if y_count == 2:
        p0, p1 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    return DmcTable(p0, p1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
