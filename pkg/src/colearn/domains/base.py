from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Sequence

import numpy as np

from colearn.errors import ConfigError, DimensionError

PATH_PLANNING = "path_planning"
TSP = "tsp"
MULTI_TSP = "multi_tsp"
RANKING = "ranking"

KINDS = (PATH_PLANNING, TSP, MULTI_TSP, RANKING)

_ALIASES = {
    "path": PATH_PLANNING,
    "pathplanning": PATH_PLANNING,
    "hypercube": PATH_PLANNING,
    "cube": PATH_PLANNING,
    "multitsp": MULTI_TSP,
    "mtsp": MULTI_TSP,
    "ltr": RANKING,
    "rank": RANKING,
}


def normalize_kind(kind: str) -> str:
    k = str(kind).lower().replace("-", "_")
    k = _ALIASES.get(k.replace("_", ""), _ALIASES.get(k, k))
    if k not in KINDS:
        raise ConfigError(f"unknown domain kind {kind!r}; expected one of {', '.join(KINDS)}")
    return k


@dataclass(frozen=True)
class DomainConfig:
    """Shape of a problem domain.

    Only the size field matching ``kind`` is used: ``cube_dim`` for path
    planning, ``points`` for TSP, ``points`` and ``salespersons`` for
    multi-TSP, ``list_length`` for ranking.
    """

    kind: str
    visible_dim: int = 10
    hidden_dim: int = 0
    kappa: float = 0.1
    cube_dim: int = 7
    points: int = 20
    salespersons: int = 4
    list_length: int = 20

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        if self.visible_dim < 1:
            raise ConfigError(f"visible_dim must be positive, got {self.visible_dim}")
        if self.hidden_dim < 0:
            raise ConfigError(f"hidden_dim must be nonnegative, got {self.hidden_dim}")
        if not self.kappa > 0:
            raise ConfigError(f"kappa must be positive, got {self.kappa}")
        if self.kind == PATH_PLANNING and self.cube_dim < 1:
            raise ConfigError("cube_dim must be at least 1")
        if self.kind == TSP and self.points < 3:
            raise ConfigError("a tour needs at least 3 points")
        if self.kind == MULTI_TSP:
            if self.salespersons < 1:
                raise ConfigError("need at least one salesperson")
            if self.points < 2 * self.salespersons:
                raise ConfigError(
                    f"{self.points} points cannot host distinct start/end points "
                    f"for {self.salespersons} salespersons"
                )
        if self.kind == RANKING and self.list_length < 2:
            raise ConfigError("ranking lists need at least 2 documents")

    @property
    def full_dim(self) -> int:
        return self.visible_dim + self.hidden_dim

    @property
    def noisy(self) -> bool:
        return self.hidden_dim > 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DomainConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown domain config keys: {sorted(extra)}")
        return cls(**d)


@dataclass
class Instance:
    """One problem: raw per-entity features plus structural data.

    ``features`` has one row per edge (routing domains) or per document
    (ranking), with ``visible_dim + hidden_dim`` columns; hidden columns come
    last.
    """

    config: DomainConfig
    features: np.ndarray
    structure: dict = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return self.config.kind

    def to_json(self) -> dict:
        return {
            "domain_kind": self.kind,
            "config": self.config.to_dict(),
            "features": self.features.tolist(),
            "structure": {k: _jsonable(v) for k, v in self.structure.items()},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Instance":
        config = DomainConfig.from_dict(doc["config"])
        if normalize_kind(doc["domain_kind"]) != config.kind:
            raise ConfigError("domain_kind does not match config")
        features = np.asarray(doc["features"], dtype=np.float64)
        structure = {k: _unjson(v) for k, v in doc.get("structure", {}).items()}
        return cls(config, features, structure)

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def loads(cls, text: str) -> "Instance":
        return cls.from_json(json.loads(text))


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return {"__array__": v.tolist(), "dtype": str(v.dtype)}
    return v


def _unjson(v):
    if isinstance(v, dict) and "__array__" in v:
        return np.asarray(v["__array__"], dtype=v["dtype"])
    return v


class Domain:
    """Common machinery for a domain: entity scores and first-improvement search.

    Subclasses define the solution space through ``neighbor_gains`` and
    ``neighbor`` which must enumerate neighbors in the same canonical order.
    """

    kind: str = ""

    def __init__(self, config: DomainConfig):
        self.config = config

    # -- per-domain surface -------------------------------------------------
    def generate_instance(self, rng: np.random.Generator) -> Instance:
        raise NotImplementedError

    def feature_map(self, instance: Instance, solution, include_hidden: bool = False) -> np.ndarray:
        raise NotImplementedError

    def feature_bound(self) -> float:
        raise NotImplementedError

    def validate(self, instance: Instance, solution) -> None:
        raise NotImplementedError

    def neighbor_gains(self, instance: Instance, solution, scores: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def neighbor(self, instance: Instance, solution, k: int):
        raise NotImplementedError

    def num_neighbors(self, instance: Instance, solution) -> int:
        raise NotImplementedError

    def solve(self, instance: Instance, w) -> Any:
        raise NotImplementedError

    def solution_from_json(self, obj):
        return tuple(int(x) for x in obj)

    def solution_to_json(self, solution):
        return [int(x) for x in solution]

    # -- shared -------------------------------------------------------------
    def neighborhood(self, instance: Instance, solution) -> list:
        return [self.neighbor(instance, solution, k) for k in range(self.num_neighbors(instance, solution))]

    def scores(self, instance: Instance, w) -> np.ndarray:
        """Per-entity utility ``features . w``; ``w`` may be visible-only or full."""
        w = np.asarray(w, dtype=np.float64)
        d = w.shape[0]
        if d == self.config.visible_dim:
            return instance.features[:, :d] @ w
        if d == self.config.full_dim:
            return instance.features @ w
        raise DimensionError(
            f"weight dimension {d} matches neither visible ({self.config.visible_dim}) "
            f"nor full ({self.config.full_dim}) feature dimension"
        )

    def utility(self, instance: Instance, solution, w) -> float:
        w = np.asarray(w, dtype=np.float64)
        include_hidden = w.shape[0] != self.config.visible_dim
        phi = self.feature_map(instance, solution, include_hidden=include_hidden)
        if phi.shape != w.shape:
            raise DimensionError(f"weight dimension {w.shape[0]} vs feature dimension {phi.shape[0]}")
        return float(w @ phi)

    def local_search(self, instance: Instance, start, w, threshold: float = 0.0):
        scores = self.scores(instance, w)
        return self._climb(instance, start, scores, threshold)

    def _climb(self, instance: Instance, start, scores: np.ndarray, threshold: float):
        current = start
        while True:
            gains = self.neighbor_gains(instance, current, scores)
            hits = np.flatnonzero(gains > threshold)
            if hits.size == 0:
                return current
            current = self.neighbor(instance, current, int(hits[0]))

    def _project(self, phi_full: np.ndarray, include_hidden: bool) -> np.ndarray:
        if include_hidden:
            return phi_full
        return phi_full[: self.config.visible_dim].copy()


def pair_index(n: int) -> np.ndarray:
    """``idx[p, q]`` = row of the undirected edge {p, q} in ``triu_indices`` order."""
    iu, ju = np.triu_indices(n, k=1)
    idx = np.full((n, n), -1, dtype=np.int64)
    idx[iu, ju] = np.arange(iu.size)
    idx[ju, iu] = np.arange(iu.size)
    return idx


def edge_score_matrix(n: int, scores: np.ndarray) -> np.ndarray:
    iu, ju = np.triu_indices(n, k=1)
    S = np.zeros((n, n))
    S[iu, ju] = scores
    S[ju, iu] = scores
    return S


def sum_rows(features: np.ndarray, rows: Sequence[int]) -> np.ndarray:
    # sorted so that equal edge multisets give bitwise-equal sums
    rows = np.sort(np.asarray(rows, dtype=np.int64))
    return features[rows].sum(axis=0)
