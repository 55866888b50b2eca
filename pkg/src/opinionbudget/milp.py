"""Supporter maximization in the presence of transient states.

Branch and bound on the binary supporter indicators with LP-relaxation
bounds from the bounded-variable simplex, a supporter-set enumeration
oracle for small instances, and budget sweeps.  The supporter count is
optimized first; among maximum-count plans the cheapest payment
certificate wins, ties resolved toward the lexicographically smallest
payment vector.  Reported payments are rounded up to whole dollars when
caps and budget allow, matching the dollar granularity of the cost data;
pass ``round_dollars=False`` for the raw certificate.
"""

import math
import os
from dataclasses import dataclass

import numpy as np

from .chain_analysis import ChainAnalysis, analyze, evaluate_plan
from .decompose import decompose
from .lp import LinearProgram, LpResult, solve_lp
from .model import BUDGET_TOL, OPINION_TOL, Instance, PaymentPlan, confidence_matrix

#: Default branch-and-bound node budget; the OBO_NODE_LIMIT env var overrides.
DEFAULT_NODE_LIMIT = 200_000
#: Strict-improvement margin for spend comparisons between incumbents.
SPEND_TOL = 1e-9
#: Integrality tolerance on relaxed binary variables.
INT_TOL = 1e-6


class TooLarge(ValueError):
    """The enumeration oracle only handles instances with at most 15 agents."""


@dataclass(frozen=True)
class MilpInstance:
    """Data of the linearized supporter problem for one budget.

    ``hitting_matrix`` is n x m (absorption probabilities per class),
    ``baseline`` the zero-payment asymptotic opinions, and ``lower_bound``
    their minimum: the constant that makes the indicator linearization
    valid.  ``pay_agents`` are the recurrent agents (the only ones whose
    payments matter), ``caps`` their maximum useful payments, and
    ``rates[i, a]`` the increase of agent ``i``'s limit opinion per dollar
    paid to ``pay_agents[a]``.  ``degenerate`` marks the trivial case
    where the zero-payment minimum already clears the threshold.
    """

    instance: Instance
    analysis: ChainAnalysis
    hitting_matrix: np.ndarray
    pi: tuple[np.ndarray, ...]
    threshold: float
    budget: float
    lower_bound: float
    baseline: np.ndarray
    pay_agents: tuple[int, ...]
    caps: np.ndarray
    rates: np.ndarray
    degenerate: bool


@dataclass(frozen=True)
class MilpSolution:
    plan: PaymentPlan
    supporter_count: int
    optimality: str  # "proven" | "heuristic"
    node_count: int


@dataclass(frozen=True)
class SweepCurve:
    """Supporter counts along a budget grid."""

    budgets: tuple[float, ...]
    solutions: tuple[MilpSolution, ...]

    def rows(self) -> list[tuple[float, int, float]]:
        return [
            (b, sol.supporter_count, sol.plan.total_spend)
            for b, sol in zip(self.budgets, self.solutions)
        ]


def build_milp(instance: Instance, analysis: ChainAnalysis, budget: float | None = None) -> MilpInstance:
    """Assemble the linearized problem data from a completed chain analysis."""
    d = analysis.decomposition
    n = instance.n
    m = len(d.classes)
    hitting = np.column_stack(analysis.hitting) if m else np.zeros((n, 0))
    baseline = analysis.asymptotic
    lower_bound = float(baseline.min())
    threshold = instance.threshold
    b = instance.budget if budget is None else float(budget)

    pay_agents = tuple(sorted(i for members in d.classes for i in members))
    caps = np.array([
        instance.costs[a] * (1.0 - instance.true_opinions[a]) for a in pay_agents
    ])
    rates = np.zeros((n, len(pay_agents)))
    for col, a in enumerate(pay_agents):
        k = d.class_of[a]
        pos = d.classes[k].index(a)
        rates[:, col] = hitting[:, k] * analysis.pi[k][pos] / instance.costs[a]

    hitting.flags.writeable = False
    caps.flags.writeable = False
    rates.flags.writeable = False
    return MilpInstance(
        instance=instance,
        analysis=analysis,
        hitting_matrix=hitting,
        pi=analysis.pi,
        threshold=threshold,
        budget=b,
        lower_bound=lower_bound,
        baseline=baseline,
        pay_agents=pay_agents,
        caps=caps,
        rates=rates,
        degenerate=lower_bound >= threshold,
    )


def _node_program(mi: MilpInstance, zlo, zup, objective, min_count=None) -> LinearProgram:
    """LP over [payments | indicators] with the node's indicator bounds.

    Rows: the budget, one linking row per agent
    ``(x* - L) z_i - sum_a rates[i, a] p_a <= baseline_i - L``,
    and optionally a minimum total-indicator row.
    """
    n = mi.instance.n
    q = len(mi.pay_agents)
    span = mi.threshold - mi.lower_bound
    rows = np.zeros((1 + n + (min_count is not None), q + n))
    senses: list[str] = []
    rhs = np.zeros(rows.shape[0])
    rows[0, :q] = 1.0
    senses.append("<=")
    rhs[0] = mi.budget
    for i in range(n):
        rows[1 + i, :q] = -mi.rates[i]
        rows[1 + i, q + i] = span
        senses.append("<=")
        rhs[1 + i] = mi.baseline[i] - mi.lower_bound
    if min_count is not None:
        rows[-1, q:] = 1.0
        senses.append(">=")
        rhs[-1] = float(min_count)
    lower = np.concatenate([np.zeros(q), zlo])
    upper = np.concatenate([mi.caps, zup])
    return LinearProgram(objective, rows, tuple(senses), rhs, lower, upper)


def _branch_var(z: np.ndarray, zlo, zup) -> int | None:
    """Most fractional free indicator; ties go to the smallest index."""
    best, best_frac = None, INT_TOL
    for i in range(len(z)):
        if zlo[i] == zup[i]:
            continue
        frac = abs(z[i] - round(z[i]))
        if frac > best_frac:
            best, best_frac = i, frac
    return best


def _lex_smaller(a: np.ndarray, b: np.ndarray) -> bool:
    for x, y in zip(a, b):
        if x < y - SPEND_TOL:
            return True
        if x > y + SPEND_TOL:
            return False
    return False


def _min_spend_for_set(mi: MilpInstance, chosen: frozenset[int]) -> LpResult:
    """Cheapest payments making every agent in ``chosen`` a supporter."""
    n = mi.instance.n
    q = len(mi.pay_agents)
    zlo = np.array([1.0 if i in chosen else 0.0 for i in range(n)])
    objective = np.concatenate([-np.ones(q), np.zeros(n)])
    return solve_lp(_node_program(mi, zlo, zlo, objective))


def _round_payments_up(pay: np.ndarray, caps: np.ndarray, budget: float) -> np.ndarray:
    """Whole-dollar payments when caps and budget permit, never decreasing."""
    rounded = np.maximum(pay, np.minimum(caps, np.ceil(pay - 1e-6))) + 0.0  # kill -0.0
    if rounded.sum() <= budget + 1e-9:
        return rounded
    return pay.copy()


def _finish(mi: MilpInstance, pay_q: np.ndarray, nodes: int, proven: bool,
            round_dollars: bool) -> MilpSolution:
    payments = np.zeros(mi.instance.n)
    payments[list(mi.pay_agents)] = np.maximum(pay_q, 0.0)
    caps_full = np.zeros(mi.instance.n)
    caps_full[list(mi.pay_agents)] = mi.caps
    if round_dollars:
        payments = _round_payments_up(payments, caps_full, mi.budget)
    plan = evaluate_plan(mi.instance, mi.analysis, payments, budget=mi.budget)
    return MilpSolution(plan, len(plan.supporters), "proven" if proven else "heuristic", nodes)


def solve_milp(mi: MilpInstance, node_limit: int | None = None,
               round_dollars: bool = True) -> MilpSolution:
    """Provably optimal supporter plan by two branch-and-bound passes.

    The first pass maximizes the supporter count; the second minimizes
    total spend among plans achieving that count.  Exploration order never
    affects the result: incumbents are compared by count, then spend, then
    lexicographic payments.  If the node limit is exhausted the best
    incumbent is returned marked "heuristic".
    """
    if node_limit is None:
        node_limit = int(os.environ.get("OBO_NODE_LIMIT", DEFAULT_NODE_LIMIT))
    n = mi.instance.n
    q = len(mi.pay_agents)
    if mi.degenerate:
        return _finish(mi, np.zeros(q), 0, True, round_dollars)

    proven = True
    nodes = 0
    stage1_obj = np.concatenate([np.zeros(q), np.ones(n)])

    # Pass 1: maximize the number of indicators that can be switched on.
    best_count = int(np.sum(mi.baseline >= mi.threshold - OPINION_TOL))
    best_set = frozenset(
        i for i in range(n) if mi.baseline[i] >= mi.threshold - OPINION_TOL
    )
    stack = [(np.zeros(n), np.ones(n))]
    while stack:
        if nodes >= node_limit:
            proven = False
            break
        zlo, zup = stack.pop()
        nodes += 1
        res = solve_lp(_node_program(mi, zlo, zup, stage1_obj))
        if res.status != "optimal":
            continue
        if math.floor(res.objective + INT_TOL) <= best_count:
            continue
        z = res.x[q:]
        var = _branch_var(z, zlo, zup)
        if var is None:
            count = int(round(float(z.sum())))
            if count > best_count:
                best_count = count
                best_set = frozenset(i for i in range(n) if z[i] >= 0.5)
            continue
        lo0, up0 = zlo.copy(), zup.copy()
        up0[var] = 0.0
        lo1, up1 = zlo.copy(), zup.copy()
        lo1[var] = 1.0
        stack.append((lo0, up0))
        stack.append((lo1, up1))  # popped first: try making the agent a supporter

    # Pass 2: cheapest certificate for the optimal count.
    seed = _min_spend_for_set(mi, best_set)
    if seed.status != "optimal":
        raise RuntimeError("incumbent supporter set lost feasibility")  # pragma: no cover
    best_spend = -seed.objective
    best_pay = seed.x[:q]
    stage2_obj = np.concatenate([-np.ones(q), np.zeros(n)])
    stack = [(np.zeros(n), np.ones(n))]
    while stack:
        if nodes >= node_limit:
            proven = False
            break
        zlo, zup = stack.pop()
        nodes += 1
        res = solve_lp(_node_program(mi, zlo, zup, stage2_obj, min_count=best_count))
        if res.status != "optimal":
            continue
        spend_bound = -res.objective
        if spend_bound > best_spend + SPEND_TOL:
            continue
        z = res.x[q:]
        var = _branch_var(z, zlo, zup)
        if var is None:
            pay = res.x[:q]
            if spend_bound < best_spend - SPEND_TOL or _lex_smaller(pay, best_pay):
                best_spend = spend_bound
                best_pay = pay
            continue
        lo0, up0 = zlo.copy(), zup.copy()
        up0[var] = 0.0
        lo1, up1 = zlo.copy(), zup.copy()
        lo1[var] = 1.0
        stack.append((lo0, up0))
        stack.append((lo1, up1))

    return _finish(mi, best_pay, nodes, proven, round_dollars)


def brute_force_oracle(instance: Instance, analysis: ChainAnalysis,
                       budget: float | None = None,
                       round_dollars: bool = True) -> MilpSolution:
    """Independent optimum by supporter-set enumeration plus one LP per set.

    Candidate sets are tried in decreasing size (within a size,
    lexicographic agent order); the first whose cheapest certificate fits
    the budget wins.  Agents of one ergodic class share their asymptotic
    opinion, so sets never split a class.  Limited to n <= 15.
    """
    if instance.n > 15:
        raise TooLarge(f"enumeration oracle supports at most 15 agents, got {instance.n}")
    mi = build_milp(instance, analysis, budget)
    q = len(mi.pay_agents)
    if mi.degenerate:
        return _finish(mi, np.zeros(q), 0, True, round_dollars)

    units = [tuple(members) for members in mi.analysis.decomposition.classes]
    units += [(t,) for t in mi.analysis.decomposition.transient]
    candidates = []
    for mask in range(1, 1 << len(units)):
        agents = tuple(sorted(a for u in range(len(units)) if mask >> u & 1
                              for a in units[u]))
        candidates.append(agents)
    candidates.sort(key=lambda agents: (-len(agents), agents))

    max_val = mi.baseline + mi.rates @ mi.caps
    tried = 0
    for agents in candidates:
        if any(max_val[i] < mi.threshold - OPINION_TOL for i in agents):
            continue
        tried += 1
        res = _min_spend_for_set(mi, frozenset(agents))
        if res.status == "optimal":
            return _finish(mi, res.x[:q], tried, True, round_dollars)
    return _finish(mi, np.zeros(q), tried, True, round_dollars)


def budget_sweep(instance: Instance, budgets, node_limit: int | None = None,
                 round_dollars: bool = True) -> SweepCurve:
    """Solve the supporter problem along an ascending budget grid."""
    values = [float(b) for b in budgets]
    if any(b < 0 for b in values):
        raise ValueError("budgets must be nonnegative")
    if any(b2 < b1 for b1, b2 in zip(values, values[1:])):
        raise ValueError("budgets must be sorted ascending")
    cm = confidence_matrix(instance)
    analysis = analyze(cm, decompose(cm), instance.true_opinions)
    solutions = []
    for b in values:
        mi = build_milp(instance, analysis, budget=b)
        solutions.append(solve_milp(mi, node_limit=node_limit, round_dollars=round_dollars))
    return SweepCurve(tuple(values), tuple(solutions))
