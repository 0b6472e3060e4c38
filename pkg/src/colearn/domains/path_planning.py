"""Monotone corner-to-corner paths on a hypercube.

A solution is the order in which the ``n`` axes are traversed, so there are
``n!`` paths.  Every directed edge ``v -> v | (1 << a)`` with bit ``a`` of
``v`` clear carries its own feature row, giving ``n * 2**(n-1)`` rows.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from colearn.domains.base import PATH_PLANNING, Domain, Instance, sum_rows
from colearn.errors import InvalidSolutionError

# nontrivial reorderings of a 3-move window, itertools order
WINDOW_PERMS = tuple(p for p in itertools.permutations(range(3)) if p != (0, 1, 2))


@lru_cache(maxsize=None)
def edge_table(n: int) -> np.ndarray:
    """``table[v, a]`` is the feature row of the edge leaving ``v`` along ``a``, or -1."""
    table = np.full((1 << n, n), -1, dtype=np.int64)
    row = 0
    for v in range(1 << n):
        for a in range(n):
            if not v >> a & 1:
                table[v, a] = row
                row += 1
    table.setflags(write=False)
    return table


def num_edges(n: int) -> int:
    return n * (1 << (n - 1))


class PathPlanning(Domain):
    kind = PATH_PLANNING

    @property
    def n(self) -> int:
        return self.config.cube_dim

    def generate_instance(self, rng: np.random.Generator) -> Instance:
        features = rng.random((num_edges(self.n), self.config.full_dim))
        return Instance(self.config, features, {})

    def rows(self, solution) -> list[int]:
        table = edge_table(self.n)
        v, out = 0, []
        for a in solution:
            out.append(int(table[v, a]))
            v |= 1 << a
        return out

    def feature_map(self, instance, solution, include_hidden=False):
        self.validate(instance, solution)
        return self._project(sum_rows(instance.features, self.rows(solution)), include_hidden)

    def feature_bound(self) -> float:
        return self.n * math.sqrt(self.config.visible_dim)

    def validate(self, instance, solution) -> None:
        if sorted(int(a) for a in solution) != list(range(self.n)):
            raise InvalidSolutionError(f"not a permutation of the {self.n} axes: {solution!r}")

    def num_neighbors(self, instance, solution) -> int:
        return max(self.n - 2, 0) * len(WINDOW_PERMS)

    def neighbor(self, instance, solution, k):
        p, q = divmod(k, len(WINDOW_PERMS))
        window = solution[p : p + 3]
        perm = WINDOW_PERMS[q]
        return tuple(solution[:p]) + tuple(window[i] for i in perm) + tuple(solution[p + 3 :])

    def neighbor_gains(self, instance, solution, scores):
        table = edge_table(self.n)
        gains = np.empty(self.num_neighbors(instance, solution))
        v = 0
        k = 0
        for p in range(self.n - 2):
            window = solution[p : p + 3]
            old = _window_score(table, scores, v, window)
            for perm in WINDOW_PERMS:
                new = _window_score(table, scores, v, [window[i] for i in perm])
                gains[k] = new - old
                k += 1
            v |= 1 << solution[p]
        return gains

    def solve(self, instance, w):
        """Greedy construction with a two-move lookahead; ties go to the lower axis."""
        scores = self.scores(instance, w)
        table = edge_table(self.n)
        remaining = list(range(self.n))
        v, path = 0, []
        while remaining:
            best_a, best_val = None, -math.inf
            for a in remaining:
                val = scores[table[v, a]]
                u = v | 1 << a
                rest = [scores[table[u, b]] for b in remaining if b != a]
                if rest:
                    val = val + max(rest)
                if val > best_val:
                    best_a, best_val = a, val
            path.append(best_a)
            remaining.remove(best_a)
            v |= 1 << best_a
        return tuple(path)


def _window_score(table, scores, v, moves) -> float:
    total = 0.0
    for a in moves:
        total += scores[table[v, a]]
        v |= 1 << a
    return total
