"""Class selection under the budget: exact 0-1 knapsack and an FPTAS.

Items are ergodic classes, valued by member count and weighed by the class
price tag in dollars.  The exact solver runs dynamic programming over the
total value (values are small integers, weights are real dollars); the
FPTAS rescales values first and inherits the same DP.
"""

from dataclasses import dataclass
from math import floor

import numpy as np

from .chain_analysis import ChainAnalysis, evaluate_plan
from .class_budget import min_budget_for_class
from .model import Instance, PaymentPlan


class TransientsPresent(ValueError):
    """Class selection alone is exact only when no transient states exist."""


@dataclass(frozen=True)
class KnapsackItem:
    """One selectable ergodic class: ``value`` agents for ``weight`` dollars."""

    class_index: int
    value: int
    weight: float

    def __post_init__(self):
        if self.value < 1:
            raise ValueError("item value must be a positive integer")
        if self.weight < 0:
            raise ValueError("item weight must be nonnegative")


@dataclass(frozen=True)
class KnapsackSolution:
    selected: tuple[int, ...]
    total_value: int
    total_weight: float


#: Slack when comparing a selection's weight against the budget.
WEIGHT_TOL = 1e-9


def _min_weight_dp(values: list[int], weights: list[float]) -> tuple[list[float], list[tuple[int, ...]]]:
    """Minimal weight and lexicographically-smallest item set per total value.

    Ties on weight resolve toward the lexicographically smallest selection
    (items identified by input position), making results deterministic.
    """
    total = sum(values)
    best_w = [np.inf] * (total + 1)
    best_sel: list[tuple[int, ...]] = [()] * (total + 1)
    best_w[0] = 0.0
    for idx, (v, w) in enumerate(zip(values, weights)):
        for val in range(total, v - 1, -1):
            prev = best_w[val - v]
            if prev == np.inf:
                continue
            cand_w = prev + w
            cand_sel = best_sel[val - v] + (idx,)
            if cand_w < best_w[val] or (cand_w == best_w[val] and cand_sel < best_sel[val]):
                best_w[val] = cand_w
                best_sel[val] = cand_sel
    return best_w, best_sel


def knapsack_exact(items: list[KnapsackItem], budget: float) -> KnapsackSolution:
    """Optimal class selection by value-indexed dynamic programming.

    Among selections of equal value, the lightest wins, then the
    lexicographically smallest.
    """
    values = [it.value for it in items]
    weights = [it.weight for it in items]
    best_w, best_sel = _min_weight_dp(values, weights)
    pick = 0
    for val in range(len(best_w) - 1, -1, -1):
        if best_w[val] <= budget + WEIGHT_TOL:
            pick = val
            break
    sel = best_sel[pick]
    return KnapsackSolution(
        tuple(items[i].class_index for i in sel),
        pick,
        float(sum(weights[i] for i in sel)),
    )


def knapsack_fptas(items: list[KnapsackItem], budget: float, epsilon: float) -> KnapsackSolution:
    """(1 - epsilon)-approximate selection via the classic value-scaling DP.

    Runtime is polynomial in ``len(items) / epsilon``.  When the scale
    factor is at most 1 the instance is already small and the exact DP is
    used directly.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    fit = [it for it in items if it.weight <= budget + WEIGHT_TOL]
    if not fit:
        return KnapsackSolution((), 0, 0.0)
    vmax = max(it.value for it in fit)
    scale = epsilon * vmax / len(fit)
    if scale <= 1.0:
        return knapsack_exact(fit, budget)

    scaled = [floor(it.value / scale) for it in fit]
    weights = [it.weight for it in fit]
    best_w, best_sel = _min_weight_dp([max(v, 0) for v in scaled], weights)
    # scaled value 0 items are free to add only if they carry no weight;
    # the DP already treats them correctly since their value contributes 0.
    pick = 0
    for val in range(len(best_w) - 1, -1, -1):
        if best_w[val] <= budget + WEIGHT_TOL:
            pick = val
            break
    sel = best_sel[pick]
    return KnapsackSolution(
        tuple(fit[i].class_index for i in sel),
        int(sum(fit[i].value for i in sel)),
        float(sum(weights[i] for i in sel)),
    )


def class_items(instance: Instance, analysis: ChainAnalysis) -> list[KnapsackItem]:
    """Price every ergodic class at its minimum threshold-reaching budget."""
    items = []
    for k, members in enumerate(analysis.decomposition.classes):
        idx = np.asarray(members)
        result = min_budget_for_class(
            analysis.pi[k],
            instance.true_opinions[idx],
            instance.costs[idx],
            instance.threshold,
        )
        items.append(KnapsackItem(k, len(members), result.total))
    return items


def solve_by_classes(
    instance: Instance,
    analysis: ChainAnalysis,
    budget: float | None = None,
    epsilon: float | None = None,
) -> tuple[PaymentPlan, KnapsackSolution]:
    """Full no-transient pipeline: price classes, select, and pay.

    Exact DP by default; pass ``epsilon`` for the FPTAS.  Raises
    :class:`TransientsPresent` when the decomposition has transient
    states, where class selection alone is not exact.
    """
    if analysis.decomposition.transient:
        raise TransientsPresent(
            "instance has transient states; class selection is not exact, use the MILP solver"
        )
    b = instance.budget if budget is None else float(budget)
    items = class_items(instance, analysis)
    if epsilon is None:
        solution = knapsack_exact(items, b)
    else:
        solution = knapsack_fptas(items, b, epsilon)

    payments = np.zeros(instance.n)
    for k in solution.selected:
        members = np.asarray(analysis.decomposition.classes[k])
        result = min_budget_for_class(
            analysis.pi[k],
            instance.true_opinions[members],
            instance.costs[members],
            instance.threshold,
        )
        payments[members] = result.payments
    plan = evaluate_plan(instance, analysis, payments, budget=b)
    return plan, solution
