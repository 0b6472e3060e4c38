"""Linear utility model and the coactive weight-update rules.

All functions are pure: they take arrays and return fresh arrays.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from colearn.errors import DegenerateDeltaError, DimensionError


class Variant(str, enum.Enum):
    PER = "per"
    CSPER = "csper"
    PA = "pa"
    CSPA = "cspa"

    @classmethod
    def parse(cls, name: "str | Variant") -> "Variant":
        if isinstance(name, Variant):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValueError(
                f"unknown update rule {name!r}; expected one of "
                + ", ".join(v.value for v in cls)
            ) from None

    @property
    def cost_sensitive(self) -> bool:
        return self in (Variant.CSPER, Variant.CSPA)


ALL_VARIANTS = (Variant.PER, Variant.CSPER, Variant.PA, Variant.CSPA)


@dataclass(frozen=True)
class UpdateRule:
    """An update rule variant plus the PA target margin (ignored by the others)."""

    variant: Variant
    margin: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if self.variant is Variant.PA and not self.margin > 0:
            raise ValueError(f"PA margin must be positive, got {self.margin}")

    @classmethod
    def parse(cls, name: str, margin: float = 1.0) -> "UpdateRule":
        return cls(Variant.parse(name), margin)

    @property
    def name(self) -> str:
        return self.variant.value


def _as_vec(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


def _check_dims(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{what}: dimension mismatch {a.shape} vs {b.shape}")


def predict_utility(w, phi) -> float:
    """Estimated utility ``w . phi``."""
    w, phi = _as_vec(w), _as_vec(phi)
    _check_dims(w, phi, "predict_utility")
    return float(w @ phi)


def compute_delta(phi_improved, phi_candidate) -> np.ndarray:
    a, b = _as_vec(phi_improved), _as_vec(phi_candidate)
    _check_dims(a, b, "compute_delta")
    return a - b


def learning_rate(rule: UpdateRule, w, delta, cost: int) -> float:
    """Step size for one coactive update.

    PER uses 1, CSPER the cost, PA ``(M - w.d)/|d|^2`` and CSPA
    ``(cost - w.d)/|d|^2``.

    Raises
    ------
    ValueError
        If ``cost`` is not positive; passive rounds never reach this function.
    DegenerateDeltaError
        For the PA variants when ``delta`` is the zero vector.
    """
    if cost <= 0:
        raise ValueError(f"learning_rate requires cost > 0, got {cost}")
    variant = rule.variant
    if variant is Variant.PER:
        return 1.0
    if variant is Variant.CSPER:
        return float(cost)
    w, delta = _as_vec(w), _as_vec(delta)
    _check_dims(w, delta, "learning_rate")
    sq = float(delta @ delta)
    if sq == 0.0:
        raise DegenerateDeltaError("zero feature difference with positive cost")
    target = rule.margin if variant is Variant.PA else float(cost)
    return (target - float(w @ delta)) / sq


def coactive_update(w, delta, cost: int, rule: UpdateRule) -> np.ndarray:
    """Return ``w + lambda * delta``, or ``w`` unchanged when ``cost == 0``."""
    w = _as_vec(w)
    if cost == 0:
        return w.copy()
    delta = _as_vec(delta)
    _check_dims(w, delta, "coactive_update")
    lam = learning_rate(rule, w, delta, cost)
    return w + lam * delta
