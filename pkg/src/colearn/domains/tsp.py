"""Closed-tour TSP with feature-valued edges, and its multi-salesperson variant."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from colearn.domains.base import MULTI_TSP, TSP, Domain, Instance, edge_score_matrix, pair_index, sum_rows
from colearn.errors import InvalidSolutionError


@lru_cache(maxsize=None)
def _pairs(n: int) -> np.ndarray:
    idx = pair_index(n)
    idx.setflags(write=False)
    return idx


@lru_cache(maxsize=None)
def tour_moves(n: int) -> tuple[np.ndarray, np.ndarray]:
    """2-opt moves ``(i, j)`` for an ``n``-tour in lexicographic order.

    Move ``(i, j)`` drops edges ``(t[i], t[i+1])`` and ``(t[j], t[j+1])`` and
    reverses ``t[i+1..j]``.  Pairs of adjacent edges are excluded, so every
    move yields a different cycle and ``t[0]`` never moves.
    """
    moves = [(i, j) for i in range(n) for j in range(i + 2, n) if not (i == 0 and j == n - 1)]
    I = np.array([m[0] for m in moves], dtype=np.int64)
    J = np.array([m[1] for m in moves], dtype=np.int64)
    I.setflags(write=False)
    J.setflags(write=False)
    return I, J


@lru_cache(maxsize=None)
def path_moves(length: int) -> tuple[np.ndarray, np.ndarray]:
    """2-opt moves for an open path whose two endpoints stay fixed."""
    moves = [(i, j) for i in range(length - 1) for j in range(i + 2, length - 1)]
    I = np.array([m[0] for m in moves], dtype=np.int64)
    J = np.array([m[1] for m in moves], dtype=np.int64)
    return I, J


def reverse_segment(seq: tuple, i: int, j: int) -> tuple:
    return seq[: i + 1] + seq[i + 1 : j + 1][::-1] + seq[j + 1 :]


class TravelingSalesperson(Domain):
    """Single closed tour over all points; insertion construction from point 0."""

    kind = TSP

    @property
    def n(self) -> int:
        return self.config.points

    def generate_instance(self, rng: np.random.Generator) -> Instance:
        n = self.n
        # coordinates are descriptive only; utilities come from the edge features
        points = rng.random((n, 2))
        features = rng.random((n * (n - 1) // 2, self.config.full_dim))
        return Instance(self.config, features, {"points": points})

    def rows(self, solution) -> list[int]:
        idx = _pairs(self.n)
        n = len(solution)
        return [int(idx[solution[k], solution[(k + 1) % n]]) for k in range(n)]

    def feature_map(self, instance, solution, include_hidden=False):
        self.validate(instance, solution)
        return self._project(sum_rows(instance.features, self.rows(solution)), include_hidden)

    def feature_bound(self) -> float:
        return self.n * math.sqrt(self.config.visible_dim)

    def validate(self, instance, solution) -> None:
        if sorted(int(p) for p in solution) != list(range(self.n)):
            raise InvalidSolutionError(f"tour must visit each of {self.n} points once: {solution!r}")

    def num_neighbors(self, instance, solution) -> int:
        return tour_moves(self.n)[0].size

    def neighbor(self, instance, solution, k):
        I, J = tour_moves(self.n)
        return reverse_segment(tuple(solution), int(I[k]), int(J[k]))

    def neighbor_gains(self, instance, solution, scores):
        S = edge_score_matrix(self.n, scores)
        t = np.asarray(solution, dtype=np.int64)
        I, J = tour_moves(self.n)
        a, b, c, d = t[I], t[I + 1], t[J], t[(J + 1) % self.n]
        return (S[a, c] + S[b, d]) - (S[a, b] + S[c, d])

    def solve(self, instance, w):
        scores = self.scores(instance, w)
        tour = cheapest_insertion(edge_score_matrix(self.n, scores))
        return self._climb(instance, tour, scores, 0.0)


def cheapest_insertion(S: np.ndarray) -> tuple:
    """Grow a cycle from point 0, each time inserting the point and slot with the
    largest utility change.  Ties go to the lower point, then the earlier slot."""
    n = S.shape[0]
    tour = [0]
    unvisited = np.arange(1, n)
    while unvisited.size:
        m = len(tour)
        t = np.asarray(tour)
        if m == 1:
            gains = S[t[0], unvisited][:, None]
        else:
            a, b = t, np.roll(t, -1)
            gains = S[np.ix_(unvisited, a)] + S[np.ix_(unvisited, b)]
            if m > 2:
                gains = gains - S[a, b][None, :]
        flat = int(np.argmax(gains))
        pi, slot = divmod(flat, gains.shape[1])
        tour.insert(slot + 1, int(unvisited[pi]))
        unvisited = np.delete(unvisited, pi)
    return tuple(tour)


class MultiTSP(Domain):
    """Several salespersons, each on an open path from its own start to its own end.

    Solutions are tuples of per-salesperson point sequences.  Only intra-path
    2-opt moves are considered, so the point-to-salesperson assignment made by
    the construction never changes afterwards.
    """

    kind = MULTI_TSP

    @property
    def n(self) -> int:
        return self.config.points

    def generate_instance(self, rng: np.random.Generator) -> Instance:
        n, s = self.n, self.config.salespersons
        points = rng.random((n, 2))
        features = rng.random((n * (n - 1) // 2, self.config.full_dim))
        ends = rng.choice(n, size=2 * s, replace=False)
        return Instance(
            self.config,
            features,
            {"points": points, "starts": [int(x) for x in ends[:s]], "ends": [int(x) for x in ends[s:]]},
        )

    def solution_from_json(self, obj):
        return tuple(tuple(int(x) for x in tour) for tour in obj)

    def solution_to_json(self, solution):
        return [[int(x) for x in tour] for tour in solution]

    def rows(self, solution) -> list[int]:
        idx = _pairs(self.n)
        return [int(idx[tour[k], tour[k + 1]]) for tour in solution for k in range(len(tour) - 1)]

    def feature_map(self, instance, solution, include_hidden=False):
        self.validate(instance, solution)
        return self._project(sum_rows(instance.features, self.rows(solution)), include_hidden)

    def feature_bound(self) -> float:
        return (self.n + self.config.salespersons) * math.sqrt(self.config.visible_dim)

    def validate(self, instance, solution) -> None:
        starts, ends = instance.structure["starts"], instance.structure["ends"]
        if len(solution) != len(starts):
            raise InvalidSolutionError(f"expected {len(starts)} tours, got {len(solution)}")
        for k, tour in enumerate(solution):
            if len(tour) < 2 or tour[0] != starts[k] or tour[-1] != ends[k]:
                raise InvalidSolutionError(f"tour {k} must run from {starts[k]} to {ends[k]}: {tour!r}")
        visited = sorted(int(p) for tour in solution for p in tour)
        if visited != list(range(self.n)):
            raise InvalidSolutionError("every point must be visited exactly once")

    def _moves(self, solution):
        lengths = tuple(len(t) for t in solution)
        return _multi_moves(lengths)

    def num_neighbors(self, instance, solution) -> int:
        return self._moves(solution)[0].size

    def neighbor(self, instance, solution, k):
        K, I, J, _ = self._moves(solution)
        tk = int(K[k])
        tours = list(solution)
        tours[tk] = reverse_segment(tuple(tours[tk]), int(I[k]), int(J[k]))
        return tuple(tours)

    def neighbor_gains(self, instance, solution, scores):
        S = edge_score_matrix(self.n, scores)
        K, I, J, offsets = self._moves(solution)
        flat = np.fromiter((p for tour in solution for p in tour), dtype=np.int64)
        I, J = I + offsets[K], J + offsets[K]
        a, b, c, d = flat[I], flat[I + 1], flat[J], flat[J + 1]
        return (S[a, c] + S[b, d]) - (S[a, b] + S[c, d])

    def solve(self, instance, w):
        scores = self.scores(instance, w)
        S = edge_score_matrix(self.n, scores)
        tours = multi_insertion(S, instance.structure["starts"], instance.structure["ends"])
        return self._climb(instance, tours, scores, 0.0)


@lru_cache(maxsize=4096)
def _multi_moves(lengths: tuple[int, ...]):
    Ks, Is, Js = [], [], []
    for k, L in enumerate(lengths):
        I, J = path_moves(L)
        Ks.append(np.full(I.size, k, dtype=np.int64))
        Is.append(I)
        Js.append(J)
    offsets = np.concatenate([[0], np.cumsum(lengths)[:-1]]).astype(np.int64)
    return np.concatenate(Ks), np.concatenate(Is), np.concatenate(Js), offsets


def multi_insertion(S: np.ndarray, starts, ends) -> tuple:
    """Insert points one at a time into the open paths ``start -> end``.

    Each step picks the (point, path, slot) with the largest utility change;
    ties resolve to the lower point, then path, then slot.
    """
    n = S.shape[0]
    tours = [[int(s), int(e)] for s, e in zip(starts, ends)]
    fixed = set(tours[k][i] for k in range(len(tours)) for i in (0, 1))
    unplaced = np.array([p for p in range(n) if p not in fixed], dtype=np.int64)
    while unplaced.size:
        slots = [(k, q) for k, tour in enumerate(tours) for q in range(len(tour) - 1)]
        a = np.array([tours[k][q] for k, q in slots])
        b = np.array([tours[k][q + 1] for k, q in slots])
        gains = S[np.ix_(unplaced, a)] + S[np.ix_(unplaced, b)] - S[a, b][None, :]
        flat = int(np.argmax(gains))
        pi, si = divmod(flat, gains.shape[1])
        k, q = slots[si]
        tours[k].insert(q + 1, int(unplaced[pi]))
        unplaced = np.delete(unplaced, pi)
    return tuple(tuple(t) for t in tours)
