"""Synthetic learning-to-rank lists.

The joint feature of an ordering discounts each document by its position,
``sum_i phi(d_i) / log2(i + 2)``, so moving a document up changes the
feature vector.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from colearn.domains.base import RANKING, Domain, Instance
from colearn.errors import InvalidSolutionError

NUM_LABELS = 5


@lru_cache(maxsize=None)
def position_weights(n: int) -> np.ndarray:
    g = 1.0 / np.log2(np.arange(n) + 2.0)
    g.setflags(write=False)
    return g


def relevance_labels(true_scores: np.ndarray) -> np.ndarray:
    """Quintile rank (0-4) of each document's true score within its list."""
    n = true_scores.shape[0]
    order = np.argsort(true_scores, kind="stable")
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    return (NUM_LABELS * rank) // n


class Ranking(Domain):
    kind = RANKING

    @property
    def n(self) -> int:
        return self.config.list_length

    def generate_instance(self, rng: np.random.Generator) -> Instance:
        return Instance(self.config, rng.random((self.n, self.config.full_dim)), {})

    def feature_map(self, instance, solution, include_hidden=False):
        self.validate(instance, solution)
        g = position_weights(self.n)
        docs = np.asarray(solution, dtype=np.int64)
        phi = g @ instance.features[docs]
        return self._project(phi, include_hidden)

    def feature_bound(self) -> float:
        return float(position_weights(self.n).sum()) * math.sqrt(self.config.visible_dim)

    def validate(self, instance, solution) -> None:
        if sorted(int(d) for d in solution) != list(range(self.n)):
            raise InvalidSolutionError(f"ranking must be a permutation of {self.n} documents")

    def num_neighbors(self, instance, solution) -> int:
        return self.n - 1

    def neighbor(self, instance, solution, k):
        s = list(solution)
        s[k], s[k + 1] = s[k + 1], s[k]
        return tuple(s)

    def neighbor_gains(self, instance, solution, scores):
        g = position_weights(self.n)
        s = scores[np.asarray(solution, dtype=np.int64)]
        return (g[:-1] - g[1:]) * (s[1:] - s[:-1])

    def solve(self, instance, w):
        scores = self.scores(instance, w)
        return tuple(int(d) for d in np.argsort(-scores, kind="stable"))
