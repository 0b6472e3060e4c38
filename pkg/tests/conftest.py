import math

import numpy as np
import pytest

from colearn.domains import DomainConfig, Instance

# unit square corners in cyclic order
A, B, C, D = 0, 1, 2, 3
SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
PERIMETER = (A, B, C, D)
CROSSING = (A, C, B, D)


def euclidean_tsp(points) -> Instance:
    """TSP instance whose single edge feature is the Euclidean length."""
    points = np.asarray(points, dtype=float)
    n = len(points)
    iu, ju = np.triu_indices(n, k=1)
    lengths = np.linalg.norm(points[iu] - points[ju], axis=1)
    cfg = DomainConfig("tsp", points=n, visible_dim=1)
    return Instance(cfg, lengths[:, None], {"points": points})


def tour_length(points, tour) -> float:
    return sum(
        math.dist(points[tour[k]], points[tour[(k + 1) % len(tour)]]) for k in range(len(tour))
    )


@pytest.fixture
def square():
    return euclidean_tsp(SQUARE)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record a ``PASS``/``FAIL`` line for an acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
        print(line)
        lines.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
