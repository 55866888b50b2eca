"""Minimum payments to lift one ergodic class's consensus to a target.

The greedy order pays agents by descending influence-per-dollar ``pi_j/c_j``:
everyone ahead of the critical item is pushed to opinion 1, the critical
item receives the fractional top-up that lands the consensus exactly on
the target, and everyone after it receives nothing.  The result is both
optimal and maximal (the constraint binds whenever anything is paid).
"""

from dataclasses import dataclass
from functools import cmp_to_key

import numpy as np

from .model import OPINION_TOL


class InfeasibleThreshold(ValueError):
    """Target consensus above 1 can never be reached."""


class TargetOutOfRange(ValueError):
    """Cost-curve target below the unpaid consensus or above 1."""


@dataclass(frozen=True)
class ClassBudgetResult:
    """Optimal payments for one class, in the class's own member order.

    ``critical_item`` is the position (within the class vectors) of the
    partially paid agent, or ``None`` when no payment is needed.
    """

    payments: np.ndarray
    critical_item: int | None
    total: float
    feasible: bool


def _influence_order(pi: np.ndarray, costs: np.ndarray) -> list[int]:
    """Indices sorted by pi/c descending, ties by original index ascending.

    Compared via cross-products (``pi_a * c_b`` vs ``pi_b * c_a``) so the
    ordering never depends on division rounding.
    """

    def cmp(a: int, b: int) -> int:
        left = pi[a] * costs[b]
        right = pi[b] * costs[a]
        if left > right:
            return -1
        if left < right:
            return 1
        return a - b

    return sorted(range(len(pi)), key=cmp_to_key(cmp))


def min_budget_for_class(
    pi: np.ndarray,
    opinions: np.ndarray,
    costs: np.ndarray,
    threshold: float,
) -> ClassBudgetResult:
    """Cheapest payments making the class consensus reach ``threshold``.

    Parameters are restricted to one ergodic class: its stationary vector,
    the members' true opinions, and their per-unit costs.  Always feasible
    for thresholds up to 1 because the fully paid consensus is 1.
    """
    pi = np.asarray(pi, dtype=float)
    opinions = np.asarray(opinions, dtype=float)
    costs = np.asarray(costs, dtype=float)
    nk = len(pi)
    if threshold > 1.0 + OPINION_TOL:
        raise InfeasibleThreshold(f"target consensus {threshold} exceeds 1")

    payments = np.zeros(nk)
    if np.dot(pi, opinions) >= threshold:
        return ClassBudgetResult(payments, None, 0.0, True)

    order = _influence_order(pi, costs)
    # value(t) = consensus after paying the first t agents in greedy order
    # to opinion 1; the critical item is the first t where it crosses.
    paid_mass = 0.0
    rest = float(np.dot(pi[order], opinions[order]))
    critical_pos = nk - 1
    for pos, j in enumerate(order):
        before_paid = paid_mass
        before_rest = rest
        paid_mass += pi[j]
        rest -= pi[j] * opinions[j]
        if paid_mass + rest >= threshold:
            critical_pos = pos
            paid_mass = before_paid
            rest = before_rest
            break
    else:
        # float undershoot with threshold == 1: treat the last as critical
        paid_mass -= pi[order[-1]]
        rest += pi[order[-1]] * opinions[order[-1]]

    for pos in range(critical_pos):
        j = order[pos]
        payments[j] = costs[j] * (1.0 - opinions[j])
    s = order[critical_pos]
    cap = costs[s] * (1.0 - opinions[s])
    top_up = (costs[s] / pi[s]) * (threshold - paid_mass - rest)
    payments[s] = min(max(top_up, 0.0), cap)

    return ClassBudgetResult(payments, s, float(payments.sum()), True)


def class_cost_curve(
    pi: np.ndarray,
    opinions: np.ndarray,
    costs: np.ndarray,
    targets,
) -> np.ndarray:
    """Minimum dollars to move the class consensus to each target.

    Valid targets run from the unpaid consensus up to 1; the curve is
    convex and nondecreasing.
    """
    base = float(np.dot(pi, opinions))
    out = np.zeros(len(targets))
    for idx, target in enumerate(targets):
        t = float(target)
        if t < base - OPINION_TOL or t > 1.0 + OPINION_TOL:
            raise TargetOutOfRange(
                f"target {t} outside [{base:.12g}, 1] reachable by payments"
            )
        out[idx] = min_budget_for_class(pi, opinions, costs, min(t, 1.0)).total
    return out
