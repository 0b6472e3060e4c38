"""Simulated expert: kappa-thresholded local improvement and feedback selection."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from colearn.domains import RANKING, Instance, get_domain, relevance_labels
from colearn.errors import DimensionError

# adjacent documents are swapped when the lower one is labelled this much higher
RANK_SWAP_GAP = 2


@dataclass
class ImprovementTrace:
    """Solutions visited by the expert, starting with the presented one."""

    steps: list
    true_utilities: list[float]

    @property
    def reported_cost(self) -> int:
        return len(self.steps) - 1

    def to_json(self, instance: Instance) -> dict:
        dom = get_domain(instance)
        return {
            "steps": [dom.solution_to_json(s) for s in self.steps],
            "true_utilities": [float(u) for u in self.true_utilities],
            "reported_cost": self.reported_cost,
        }

    @classmethod
    def from_json(cls, doc: dict, instance: Instance) -> "ImprovementTrace":
        dom = get_domain(instance)
        return cls([dom.solution_from_json(s) for s in doc["steps"]], [float(u) for u in doc["true_utilities"]])


@dataclass
class Feedback:
    improved_solution: Any
    update_cost: int
    reported_cost: int
    # no step of the trace was dispreferred by the learner (solver not locally optimal)
    assumption_violated: bool = False
    learner_utilities: list[float] = field(default_factory=list)


def expert_improve(
    instance: Instance,
    start,
    w_star_full,
    kappa: float,
    budget: Optional[int] = None,
) -> ImprovementTrace:
    """Improve ``start`` one operator at a time under the true utility.

    Routing domains take the first neighbor (canonical order) whose true
    utility gain is at least ``kappa``.  Ranking makes left-to-right passes,
    swapping adjacent documents whenever the later one's relevance label is at
    least two above the earlier one's, until a pass makes no swap.  Either way
    the expert stops after ``budget`` operator applications if a budget is set.
    """
    dom = get_domain(instance)
    w_star_full = np.asarray(w_star_full, dtype=np.float64)
    if w_star_full.shape[0] != dom.config.full_dim:
        raise DimensionError("expert weights must cover visible and hidden features")
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    scores = dom.scores(instance, w_star_full)
    steps = [tuple(start)]

    def exhausted() -> bool:
        return budget is not None and len(steps) - 1 >= budget

    if instance.kind == RANKING:
        labels = relevance_labels(scores)
        current = list(start)
        swapped = True
        while swapped and not exhausted():
            swapped = False
            for i in range(len(current) - 1):
                if exhausted():
                    break
                if labels[current[i + 1]] >= labels[current[i]] + RANK_SWAP_GAP:
                    current[i], current[i + 1] = current[i + 1], current[i]
                    steps.append(tuple(current))
                    swapped = True
    else:
        current = steps[0]
        while not exhausted():
            gains = dom.neighbor_gains(instance, current, scores)
            hits = np.flatnonzero(gains >= kappa)
            if hits.size == 0:
                break
            current = dom.neighbor(instance, current, int(hits[0]))
            steps.append(current)

    utilities = [dom.utility(instance, z, w_star_full) for z in steps]
    return ImprovementTrace(steps, utilities)


def select_feedback(trace: ImprovementTrace, w_learner, instance: Instance) -> Feedback:
    """Pick the last trace step the learner does not already prefer to the start.

    Returns the step ``z[i]`` with the largest ``i >= 1`` such that
    ``U_hat(z[i]) <= U_hat(z[0])``.  When no such step exists the final step is
    used and the feedback is marked as violating local optimality.
    """
    cost = trace.reported_cost
    if cost == 0:
        return Feedback(trace.steps[0], 0, 0)
    dom = get_domain(instance)
    est = [dom.utility(instance, z, w_learner) for z in trace.steps]
    for i in range(cost, 0, -1):
        if est[i] <= est[0]:
            return Feedback(trace.steps[i], i, cost, False, est)
    return Feedback(trace.steps[cost], cost, cost, True, est)


def visible_projection(phi_full, visible_dim: int) -> np.ndarray:
    phi_full = np.asarray(phi_full, dtype=np.float64)
    if visible_dim > phi_full.shape[0]:
        raise DimensionError(f"visible_dim {visible_dim} exceeds feature dimension {phi_full.shape[0]}")
    return phi_full[:visible_dim].copy()
