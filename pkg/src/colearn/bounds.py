"""Average-cost bounds for the four update rules and run-log checking.

Noise-free bounds (all with ``B = R * |w*|``):

    PER    mean C        <= 2 B / (kappa sqrt(T))
    CSPER  mean C^2      <= 4 B^2 / (kappa^2 T)
    PA     mean C        <= 4 B^2 / (kappa^2 sqrt(T))
    CSPA   mean C^2      <= 4 B^2 / (kappa^2 sqrt(T))

With per-round slack ``xi`` the perceptron bounds pick up additive terms in
``sum(xi)`` (PER) and ``sum(xi * C)`` (CSPER).  No slack version exists for
the PA rules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from colearn.core import UpdateRule, Variant
from colearn.errors import UnsupportedRuleError

TOLERANCE = 1e-9


@dataclass(frozen=True)
class BoundInputs:
    R: float
    w_star_norm: float
    kappa: float
    T: int = 1
    xi_sum: float = 0.0
    xi_cost_sum: float = 0.0

    def __post_init__(self):
        if min(self.R, self.w_star_norm, self.xi_sum, self.xi_cost_sum) < 0:
            raise ValueError("bound inputs must be nonnegative")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if self.T < 1:
            raise ValueError("T must be at least 1")


def _variant(rule) -> Variant:
    return rule.variant if isinstance(rule, UpdateRule) else Variant.parse(rule)


def squared_cost_bound(variant) -> bool:
    """Whether the rule's bound controls mean squared cost rather than mean cost."""
    return _variant(variant).cost_sensitive


def theorem1_bound(rule, inputs: BoundInputs) -> float:
    v = _variant(rule)
    B = inputs.R * inputs.w_star_norm
    k, T = inputs.kappa, inputs.T
    if v is Variant.PER:
        return 2.0 * B / (k * math.sqrt(T))
    if v is Variant.CSPER:
        return 4.0 * B * B / (k * k * T)
    return 4.0 * B * B / (k * k * math.sqrt(T))


def theorem2_bound(rule, inputs: BoundInputs) -> float:
    """Slack-aware bound; only defined for the perceptron rules."""
    v = _variant(rule)
    B = inputs.R * inputs.w_star_norm
    k, T = inputs.kappa, inputs.T
    if v is Variant.PER:
        return theorem1_bound(v, inputs) + inputs.xi_sum / (k * T)
    if v is Variant.CSPER:
        s = inputs.xi_cost_sum
        return theorem1_bound(v, inputs) + 4.0 * B / (k * k * T) * math.sqrt(s) + s / (k * k * T)
    raise UnsupportedRuleError(f"no noisy-setting bound for {v.value.upper()}")


def csper_sum_bound(R: float, w_star_norm: float, kappa: float) -> float:
    """Horizon-free cap on the running sum of squared costs under CSPER."""
    return 4.0 * (R * w_star_norm) ** 2 / kappa**2


def compute_xi(delta, update_cost: int, w_star_visible, kappa: float) -> float:
    """Smallest slack ``xi`` with ``w*_vis . delta >= kappa * update_cost - xi``.

    ``delta`` is the learner-side feature difference of the feedback, so the
    dot product is the utility gap seen through the visible features only.
    Passive rounds carry no slack.
    """
    if update_cost == 0:
        return 0.0
    gap = float(np.asarray(w_star_visible, dtype=np.float64) @ np.asarray(delta, dtype=np.float64))
    return max(0.0, kappa * update_cost - gap)


@dataclass
class BoundReport:
    rule: str
    noisy: bool
    t: np.ndarray
    bound_value: np.ndarray
    avg_cost: np.ndarray
    avg_sq_cost: np.ndarray
    satisfied: np.ndarray
    avg_reported_cost: np.ndarray = field(default_factory=lambda: np.zeros(0))
    reported_satisfied: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def all_satisfied(self) -> bool:
        return bool(np.all(self.satisfied))

    def first_violation(self) -> int | None:
        bad = np.flatnonzero(~self.satisfied)
        return int(self.t[bad[0]]) if bad.size else None


def check_run(run_log, inputs: BoundInputs, noisy: bool = False) -> BoundReport:
    """Evaluate the applicable bound after every round of ``run_log``.

    Uses the update cost (the feedback prefix length) for the check; the
    reported cost is compared against the same bound as an informational
    column.  ``inputs.T`` and the slack sums are ignored: both are taken
    cumulatively from the log.
    """
    v = Variant.parse(run_log.rule)
    if noisy and v not in (Variant.PER, Variant.CSPER):
        raise UnsupportedRuleError(f"no noisy-setting bound for {v.value.upper()}")
    cost = np.asarray(run_log.cost_update, dtype=np.float64)
    reported = np.asarray(run_log.cost_reported, dtype=np.float64)
    n = cost.size
    T = np.arange(1, n + 1)
    avg = np.cumsum(cost) / T if n else np.zeros(0)
    avg_sq = np.cumsum(cost**2) / T if n else np.zeros(0)
    avg_rep = np.cumsum(reported) / T if n else np.zeros(0)
    avg_rep_sq = np.cumsum(reported**2) / T if n else np.zeros(0)
    xi = np.asarray(run_log.xi, dtype=np.float64) if noisy else np.zeros(n)
    xi_sum = np.cumsum(xi)
    xi_cost_sum = np.cumsum(xi * cost)

    bound = np.empty(n)
    for k in range(n):
        step = BoundInputs(
            inputs.R,
            inputs.w_star_norm,
            inputs.kappa,
            int(T[k]),
            float(xi_sum[k]),
            float(xi_cost_sum[k]),
        )
        bound[k] = theorem2_bound(v, step) if noisy else theorem1_bound(v, step)

    empirical = avg_sq if v.cost_sensitive else avg
    empirical_rep = avg_rep_sq if v.cost_sensitive else avg_rep
    return BoundReport(
        rule=v.value,
        noisy=noisy,
        t=np.arange(n),
        bound_value=bound,
        avg_cost=avg,
        avg_sq_cost=avg_sq,
        satisfied=empirical <= bound + TOLERANCE,
        avg_reported_cost=avg_rep,
        reported_satisfied=empirical_rep <= bound + TOLERANCE,
    )
