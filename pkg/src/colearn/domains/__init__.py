"""Problem domains and the function-style API over them."""
from __future__ import annotations

import numpy as np

from colearn.domains.base import (
    KINDS,
    MULTI_TSP,
    PATH_PLANNING,
    RANKING,
    TSP,
    Domain,
    DomainConfig,
    Instance,
    normalize_kind,
)
from colearn.domains.path_planning import PathPlanning
from colearn.domains.ranking import Ranking, position_weights, relevance_labels
from colearn.domains.tsp import MultiTSP, TravelingSalesperson

_CLASSES = {
    PATH_PLANNING: PathPlanning,
    TSP: TravelingSalesperson,
    MULTI_TSP: MultiTSP,
    RANKING: Ranking,
}

# sign of the expert's weights: routing domains minimise weighted edge length
UTILITY_SIGN = {PATH_PLANNING: -1.0, TSP: -1.0, MULTI_TSP: -1.0, RANKING: 1.0}


def get_domain(obj: "DomainConfig | Instance") -> Domain:
    config = obj.config if isinstance(obj, Instance) else obj
    return _CLASSES[config.kind](config)


def _rng(rng_state) -> np.random.Generator:
    if isinstance(rng_state, np.random.Generator):
        return rng_state
    return np.random.default_rng(rng_state)


def generate_instance(config: DomainConfig, rng_state) -> Instance:
    """Draw a fresh instance; ``rng_state`` is a seed or a ``Generator``."""
    return get_domain(config).generate_instance(_rng(rng_state))


def feature_map(instance: Instance, solution, include_hidden: bool = False) -> np.ndarray:
    return get_domain(instance).feature_map(instance, solution, include_hidden)


def compute_feature_bound(config: DomainConfig) -> float:
    return get_domain(config).feature_bound()


def neighborhood(instance: Instance, solution) -> list:
    return get_domain(instance).neighborhood(instance, solution)


def solve(instance: Instance, w, config: DomainConfig | None = None):
    return get_domain(config or instance.config).solve(instance, w)


def local_search(instance: Instance, start, w, threshold: float = 0.0):
    return get_domain(instance).local_search(instance, start, w, threshold)


def draw_true_weights(config: DomainConfig, rng_state) -> np.ndarray:
    """Expert weights over visible + hidden features, magnitudes i.i.d. U[0,1]."""
    u = _rng(rng_state).random(config.full_dim)
    return UTILITY_SIGN[config.kind] * u


__all__ = [
    "KINDS",
    "MULTI_TSP",
    "PATH_PLANNING",
    "RANKING",
    "TSP",
    "Domain",
    "DomainConfig",
    "Instance",
    "MultiTSP",
    "PathPlanning",
    "Ranking",
    "TravelingSalesperson",
    "UTILITY_SIGN",
    "compute_feature_bound",
    "draw_true_weights",
    "feature_map",
    "generate_instance",
    "get_domain",
    "local_search",
    "neighborhood",
    "normalize_kind",
    "position_weights",
    "relevance_labels",
    "solve",
]
