"""Brute-force checks for small instances.

Nothing here calls the domain search code: neighbors are rebuilt from edge
sets, feature rows are located by closed-form index arithmetic, and
utilities are summed edge by edge.  Agreement with ``colearn.domains`` is
therefore evidence, not tautology.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from colearn.domains.base import MULTI_TSP, PATH_PLANNING, RANKING, TSP, Instance
from colearn.errors import EnumerationLimitError


@dataclass(frozen=True)
class EnumerationLimit:
    max_solutions: int = 50_000

    def __post_init__(self):
        if self.max_solutions < 1:
            raise ValueError("max_solutions must be positive")


# -- feature rows ---------------------------------------------------------------


def _cube_row(n: int, v: int, a: int) -> int:
    # rows are ordered by source vertex, then axis; vertex u owns n - popcount(u) rows
    before = sum(n - bin(u).count("1") for u in range(v))
    return before + sum(1 for b in range(a) if not v >> b & 1)


def _pair_row(n: int, p: int, q: int) -> int:
    p, q = min(p, q), max(p, q)
    return p * n - p * (p + 1) // 2 + (q - p - 1)


def _cube_edges(n: int, moves) -> list[int]:
    v, rows = 0, []
    for a in moves:
        rows.append(_cube_row(n, v, a))
        v |= 1 << a
    return rows


def _cycle_edges(tour) -> set[frozenset]:
    return {frozenset((tour[k], tour[(k + 1) % len(tour)])) for k in range(len(tour))}


def _path_edges(path) -> set[frozenset]:
    return {frozenset((path[k], path[k + 1])) for k in range(len(path) - 1)}


def utility(instance: Instance, solution, w) -> float:
    """Edge-by-edge (or document-by-document) utility; ``w`` visible or full length."""
    w = np.asarray(w, dtype=np.float64)
    F = instance.features[:, : w.shape[0]]
    kind = instance.kind
    if kind == PATH_PLANNING:
        rows = _cube_edges(instance.config.cube_dim, solution)
        return math.fsum(float(F[r] @ w) for r in rows)
    if kind == TSP:
        n = instance.config.points
        return math.fsum(float(F[_pair_row(n, *sorted(e))] @ w) for e in _cycle_edges(solution))
    if kind == MULTI_TSP:
        n = instance.config.points
        return math.fsum(
            float(F[_pair_row(n, *sorted(e))] @ w) for path in solution for e in _path_edges(path)
        )
    if kind == RANKING:
        return math.fsum(float(F[d] @ w) / math.log2(i + 2) for i, d in enumerate(solution))
    raise ValueError(kind)


def canonical(instance: Instance, solution):
    """Hashable identity of a solution (tours compare as undirected cycles)."""
    if instance.kind == TSP:
        return frozenset(_cycle_edges(solution))
    if instance.kind == MULTI_TSP:
        return tuple(tuple(p) for p in solution)
    return tuple(solution)


# -- enumeration ----------------------------------------------------------------


def solution_count(instance: Instance) -> int:
    c = instance.config
    if instance.kind == PATH_PLANNING:
        return math.factorial(c.cube_dim)
    if instance.kind == TSP:
        return max(math.factorial(c.points - 1) // 2, 1)
    if instance.kind == MULTI_TSP:
        m, s = c.points - 2 * c.salespersons, c.salespersons
        return math.factorial(m) * math.comb(m + s - 1, s - 1)
    return math.factorial(c.list_length)


def enumerate_solutions(instance: Instance, limit: EnumerationLimit = EnumerationLimit()) -> list:
    count = solution_count(instance)
    if count > limit.max_solutions:
        raise EnumerationLimitError(
            f"{instance.kind} instance has {count} solutions, above the limit of {limit.max_solutions}"
        )
    c = instance.config
    if instance.kind == PATH_PLANNING:
        return list(itertools.permutations(range(c.cube_dim)))
    if instance.kind == RANKING:
        return list(itertools.permutations(range(c.list_length)))
    if instance.kind == TSP:
        out = []
        for rest in itertools.permutations(range(1, c.points)):
            if len(rest) < 2 or rest[0] < rest[-1]:
                out.append((0,) + rest)
        return out
    starts, ends = instance.structure["starts"], instance.structure["ends"]
    free = [p for p in range(c.points) if p not in set(starts) | set(ends)]
    s = c.salespersons
    out = []
    for order in itertools.permutations(free):
        # stars and bars: cut the ordered free points into s consecutive groups
        for cuts in itertools.combinations_with_replacement(range(len(free) + 1), s - 1):
            bounds = (0,) + cuts + (len(free),)
            out.append(
                tuple(
                    (starts[k],) + order[bounds[k] : bounds[k + 1]] + (ends[k],) for k in range(s)
                )
            )
    return out


def global_optimum(instance: Instance, w, limit: EnumerationLimit = EnumerationLimit()):
    best, best_u = None, -math.inf
    for y in enumerate_solutions(instance, limit):
        u = utility(instance, y, w)
        if u > best_u:
            best, best_u = y, u
    return best


# -- neighborhoods --------------------------------------------------------------


def _rebuild_cycle(edges: set[frozenset], start: int) -> tuple:
    adj: dict[int, list[int]] = {}
    for e in edges:
        a, b = tuple(e)
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    tour, prev, cur = [start], None, start
    while True:
        nxt = [x for x in adj[cur] if x != prev]
        nxt = nxt[0] if prev is not None else min(adj[cur])
        if nxt == start:
            break
        tour.append(nxt)
        prev, cur = cur, nxt
    return tuple(tour)


def _rebuild_path(edges: set[frozenset], start: int, end: int) -> tuple:
    adj: dict[int, list[int]] = {}
    for e in edges:
        a, b = tuple(e)
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    path, prev, cur = [start], None, start
    while cur != end:
        nxt = [x for x in adj[cur] if x != prev][0]
        path.append(nxt)
        prev, cur = cur, nxt
    return tuple(path)


def _two_exchanges(ordered_edges: list[tuple]) -> list[set[frozenset]]:
    """Edge sets reachable by dropping two non-adjacent edges and reconnecting."""
    base = {frozenset(e) for e in ordered_edges}
    out = []
    for (i, (a, b)), (j, (c, d)) in itertools.combinations(enumerate(ordered_edges), 2):
        if {a, b} & {c, d}:
            continue
        new = (base - {frozenset((a, b)), frozenset((c, d))}) | {frozenset((a, c)), frozenset((b, d))}
        out.append(new)
    return out


def neighbors(instance: Instance, solution) -> list:
    kind = instance.kind
    if kind == PATH_PLANNING:
        out = []
        for p in range(len(solution) - 2):
            window = tuple(solution[p : p + 3])
            for perm in itertools.permutations(window):
                if perm != window:
                    out.append(tuple(solution[:p]) + perm + tuple(solution[p + 3 :]))
        return out
    if kind == RANKING:
        out = []
        for i in range(len(solution) - 1):
            s = list(solution)
            s[i], s[i + 1] = s[i + 1], s[i]
            out.append(tuple(s))
        return out
    if kind == TSP:
        n = len(solution)
        ordered = [(solution[k], solution[(k + 1) % n]) for k in range(n)]
        return [_rebuild_cycle(E, solution[0]) for E in _two_exchanges(ordered)]
    if kind == MULTI_TSP:
        out = []
        for k, path in enumerate(solution):
            ordered = [(path[q], path[q + 1]) for q in range(len(path) - 1)]
            for E in _two_exchanges(ordered):
                tours = list(solution)
                tours[k] = _rebuild_path(E, path[0], path[-1])
                out.append(tuple(tours))
        return out
    raise ValueError(kind)


def is_neighbor(instance: Instance, a, b) -> bool:
    key = canonical(instance, b)
    return any(canonical(instance, y) == key for y in neighbors(instance, a))


def certify_local_optimum(instance: Instance, solution, w, threshold: float = 0.0) -> bool:
    u0 = utility(instance, solution, w)
    return all(utility(instance, y, w) - u0 <= threshold for y in neighbors(instance, solution))


def _rank_labels(instance: Instance, w_star_full) -> dict[int, int]:
    scores = instance.features @ np.asarray(w_star_full, dtype=np.float64)
    n = len(scores)
    labels = {}
    for d in range(n):
        below = sum(1 for e in range(n) if scores[e] < scores[d] or (scores[e] == scores[d] and e < d))
        labels[d] = 5 * below // n
    return labels


def validate_trace(trace, instance: Instance, w_star_full, kappa: float) -> bool:
    """Every step is a single operator application with true gain >= kappa.

    For ranking lists the expert acts on relevance labels, so a step is valid
    when it swaps an adjacent pair whose later document is labelled at least
    two above the earlier one.
    """
    steps = list(trace.steps)
    labels = _rank_labels(instance, w_star_full) if instance.kind == RANKING else None
    for a, b in zip(steps, steps[1:]):
        if not is_neighbor(instance, a, b):
            return False
        if labels is not None:
            i = next(k for k in range(len(a)) if a[k] != b[k])
            if labels[a[i + 1]] < labels[a[i]] + 2:
                return False
        elif utility(instance, b, w_star_full) - utility(instance, a, w_star_full) < kappa:
            return False
    return True


# -- certification suite ----------------------------------------------------------

VERIFY_CONFIGS = (
    {"kind": PATH_PLANNING, "cube_dim": 4, "visible_dim": 10},
    {"kind": TSP, "points": 6, "visible_dim": 10},
)


def run_verification(n_weights: int = 50, seed: int = 0, configs=VERIFY_CONFIGS) -> dict:
    """Certify solver output and expert traces on small instances.

    Each configuration is tried with ``n_weights`` random learner weight
    vectors.  The locally optimized solver output is certified at threshold 0
    and the expert's trace from it is validated.  The report also records the
    gap to the global optimum under the learner's weights.
    """
    from colearn.domains import DomainConfig, draw_true_weights, get_domain
    from colearn.expert import expert_improve

    rng = np.random.default_rng(seed)
    report = {"seed": seed, "n_weights": n_weights, "domains": []}
    for raw in configs:
        cfg = DomainConfig(**raw)
        dom = get_domain(cfg)
        certified = traces_ok = 0
        gaps = []
        for _ in range(n_weights):
            inst = dom.generate_instance(rng)
            w = rng.uniform(-1.0, 1.0, cfg.visible_dim)
            w_star = draw_true_weights(cfg, rng)
            y = dom.local_search(inst, dom.solve(inst, w), w, 0.0)
            certified += certify_local_optimum(inst, y, w, 0.0)
            trace = expert_improve(inst, y, w_star, cfg.kappa)
            traces_ok += validate_trace(trace, inst, w_star, cfg.kappa)
            best = global_optimum(inst, w)
            gaps.append(utility(inst, best, w) - utility(inst, y, w))
        report["domains"].append(
            {
                "config": cfg.to_dict(),
                "certified": certified,
                "valid_traces": traces_ok,
                "cases": n_weights,
                "max_global_gap": float(max(gaps)),
                "mean_global_gap": float(np.mean(gaps)),
                "passed": certified == n_weights and traces_ok == n_weights,
            }
        )
    report["passed"] = all(d["passed"] for d in report["domains"])
    return report
