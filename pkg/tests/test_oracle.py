import itertools
import math

import numpy as np
import pytest

from colearn import oracle
from colearn.domains import DomainConfig, Instance, draw_true_weights, generate_instance, local_search, solve
from colearn.errors import EnumerationLimitError
from colearn.expert import ImprovementTrace, expert_improve
from conftest import CROSSING, PERIMETER


@pytest.mark.parametrize(
    "cfg, count",
    [
        (DomainConfig("path_planning", cube_dim=4), 24),
        (DomainConfig("tsp", points=4, visible_dim=1), 3),
        (DomainConfig("ranking", list_length=3), 6),
        (DomainConfig("tsp", points=6), 60),
        (DomainConfig("multi_tsp", points=6, salespersons=2), 6),
    ],
    ids=lambda x: getattr(x, "kind", x),
)
def test_enumeration_counts(cfg, count):
    inst = generate_instance(cfg, 0)
    sols = oracle.enumerate_solutions(inst)
    assert oracle.solution_count(inst) == count == len(sols)
    assert len({oracle.canonical(inst, s) for s in sols}) == count


def test_enumeration_limit():
    inst = generate_instance(DomainConfig("tsp", points=12), 0)
    with pytest.raises(EnumerationLimitError):
        oracle.enumerate_solutions(inst)
    with pytest.raises(EnumerationLimitError):
        oracle.enumerate_solutions(generate_instance(DomainConfig("ranking", list_length=4), 0), oracle.EnumerationLimit(5))


def test_square_optimum(square):
    w = np.array([-1.0])
    best = oracle.global_optimum(square, w)
    assert oracle.canonical(square, best) == oracle.canonical(square, PERIMETER)
    assert oracle.utility(square, best, w) == pytest.approx(-4.0)
    assert oracle.certify_local_optimum(square, best, w, 0.0)
    assert oracle.certify_local_optimum(square, best, w, 10.0)
    assert not oracle.certify_local_optimum(square, CROSSING, w, 0.0)


def test_single_solution_space():
    # every point is a start or an end, so each salesperson's path is fixed
    inst = generate_instance(DomainConfig("multi_tsp", points=4, salespersons=2, visible_dim=2), 0)
    st = inst.structure
    only = tuple((a, b) for a, b in zip(st["starts"], st["ends"]))
    assert oracle.solution_count(inst) == 1
    assert oracle.global_optimum(inst, np.ones(2)) == only


def test_path_planning_optimum_by_independent_scoring():
    cfg = DomainConfig("path_planning", cube_dim=4, visible_dim=3)
    inst = generate_instance(cfg, 2)
    w = np.array([0.3, -1.0, 0.5])

    # score each path by walking vertices and looking rows up by (vertex, axis) position
    rows = {}
    r = 0
    for v in range(16):
        for a in range(4):
            if not v >> a & 1:
                rows[v, a] = r
                r += 1

    def score(path):
        v, total = 0, 0.0
        for a in path:
            total += float(inst.features[rows[v, a]] @ w)
            v |= 1 << a
        return total

    paths = list(itertools.permutations(range(4)))
    best = max(paths, key=score)
    assert oracle.global_optimum(inst, w) == best
    assert oracle.utility(inst, best, w) == pytest.approx(score(best), abs=1e-12)


@pytest.mark.parametrize(
    "cfg",
    [DomainConfig("tsp", points=7, visible_dim=3), DomainConfig("multi_tsp", points=8, salespersons=2, visible_dim=3)],
    ids=lambda c: c.kind,
)
def test_local_search_output_certified(cfg):
    rng = np.random.default_rng(0)
    for _ in range(10):
        inst = generate_instance(cfg, rng)
        w = rng.normal(size=3)
        y = local_search(inst, solve(inst, w), w, 0.0)
        assert oracle.certify_local_optimum(inst, y, w, 0.0)
        best = oracle.global_optimum(inst, w)
        assert oracle.certify_local_optimum(inst, best, w, 0.0)
        assert oracle.utility(inst, best, w) >= oracle.utility(inst, y, w) - 1e-12


def test_validate_trace_rejects_teleport_and_small_gain():
    cfg = DomainConfig("path_planning", cube_dim=5, visible_dim=2)
    inst = generate_instance(cfg, 5)
    w_star = draw_true_weights(cfg, 5)
    start = (0, 1, 2, 3, 4)
    trace = expert_improve(inst, start, w_star, cfg.kappa)
    assert trace.reported_cost > 0 and oracle.validate_trace(trace, inst, w_star, cfg.kappa)

    far = (4, 3, 2, 1, 0)
    assert not oracle.is_neighbor(inst, start, far)
    assert not oracle.validate_trace(ImprovementTrace([start, far], [0, 0]), inst, w_star, cfg.kappa)

    # a genuine neighbor whose true gain is only kappa / 2
    z = trace.steps[1]
    gain = oracle.utility(inst, z, w_star) - oracle.utility(inst, start, w_star)
    half = ImprovementTrace([start, z], [0, 0])
    assert oracle.validate_trace(half, inst, w_star, gain)
    assert not oracle.validate_trace(half, inst, w_star, 2 * gain)


def test_validate_trace_ranking_uses_labels():
    cfg = DomainConfig("ranking", list_length=5, visible_dim=1)
    inst = Instance(cfg, np.array([[0.1], [0.2], [0.3], [0.4], [0.5]]))
    w_star = np.array([1.0])  # labels are 0..4 in document order
    ok = ImprovementTrace([(0, 2, 1, 3, 4), (2, 0, 1, 3, 4)], [0, 0])
    bad = ImprovementTrace([(0, 1, 2, 3, 4), (1, 0, 2, 3, 4)], [0, 0])
    assert oracle.validate_trace(ok, inst, w_star, cfg.kappa)
    assert not oracle.validate_trace(bad, inst, w_star, cfg.kappa)


def test_square_neighbors_by_hand(square):
    # the 4-tour has two pairs of non-adjacent edges, giving two 2-opt neighbors
    nbrs = {oracle.canonical(square, z) for z in oracle.neighbors(square, CROSSING)}
    assert len(nbrs) == 2 and oracle.canonical(square, PERIMETER) in nbrs


def test_verification_suite():
    report = oracle.run_verification(n_weights=5, seed=1)
    assert report["passed"]
    for d in report["domains"]:
        assert d["certified"] == d["valid_traces"] == 5
        assert d["max_global_gap"] >= 0 and math.isfinite(d["mean_global_gap"])
