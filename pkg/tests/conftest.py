import numpy as np
import pytest

from ccgraph import determinant as det
from ccgraph.operators import apply_deexcitation


def ref_of(N):
    return det.from_indices(range(1, N + 1))


def deexcitation_matrix(alpha, G, m=0):
    """Dense matrix of X_alpha^dagger built column by column from its action."""
    n = G.basis.dim
    cols = [apply_deexcitation(alpha, np.eye(n)[:, j], G, m) for j in range(n)]
    return np.column_stack(cols)


def small_systems(max_k=5, max_n=2):
    return [(K, N) for K in range(2, max_k + 1) for N in range(1, max_n + 1) if N < K]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
