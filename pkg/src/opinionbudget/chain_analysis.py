"""Stationary distributions, hitting probabilities, and asymptotic opinions.

The closed forms are all small dense linear systems: each ergodic class
converges to the consensus ``pi . x(0)`` over its members, and a transient
agent lands on the hitting-probability mixture of the class consensi.  A
plain power iteration of ``x <- A x`` serves as the independent oracle for
every closed-form quantity here.
"""

from dataclasses import dataclass

import numpy as np

from .decompose import Decomposition, submatrix
from .model import ConfidenceMatrix, Instance, OPINION_TOL, BUDGET_TOL, PaymentPlan

#: Residual bound for the stationary and hitting linear solves.
SOLVE_TOL = 1e-10


class SingularSystem(RuntimeError):
    """A chain linear system could not be solved to tolerance.

    Signals a decomposition bug or an invalid input matrix rather than a
    user error.
    """


class NonConvergence(RuntimeError):
    """Power iteration hit the step limit before the change dropped below tol."""

    def __init__(self, steps: int, change: float):
        super().__init__(f"no convergence after {steps} steps (last change {change:.3e})")
        self.steps = steps
        self.change = change


def stationary_distribution(class_matrix: np.ndarray) -> np.ndarray:
    """Normalized left eigenvector of a class submatrix at eigenvalue 1.

    Solves ``pi' E = pi'`` with one balance equation replaced by the
    normalization ``sum(pi) = 1``; raises :class:`SingularSystem` when the
    matrix is not irreducible (multiple eigenvectors at 1).
    """
    m = class_matrix.shape[0]
    system = class_matrix.T - np.eye(m)
    system[-1, :] = 1.0  # replace last balance equation with normalization
    rhs = np.zeros(m)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as e:
        raise SingularSystem(f"stationary system is singular: {e}") from e
    residual = np.max(np.abs(pi @ class_matrix - pi))
    if not np.isfinite(pi).all() or residual > SOLVE_TOL or pi.min() < -1e-12:
        raise SingularSystem(f"stationary solve failed (residual {residual:.3e})")
    return pi


def hitting_probabilities(cm: ConfidenceMatrix, decomposition: Decomposition, k: int) -> np.ndarray:
    """Probability, per start state, of absorption into ergodic class ``k``.

    Members of class ``k`` get 1, members of other classes 0, and the
    transient entries solve ``h_i = sum_j A[i, j] h_j`` restricted to the
    transient rows.
    """
    a = cm.matrix
    n = cm.n
    h = np.zeros(n)
    members = np.asarray(decomposition.classes[k])
    h[members] = 1.0
    if decomposition.transient:
        t = np.asarray(decomposition.transient)
        system = np.eye(len(t)) - a[np.ix_(t, t)]
        rhs = a[np.ix_(t, members)].sum(axis=1)
        try:
            ht = np.linalg.solve(system, rhs)
        except np.linalg.LinAlgError as e:
            raise SingularSystem(f"hitting system is singular: {e}") from e
        residual = np.max(np.abs(system @ ht - rhs))
        if not np.isfinite(ht).all() or residual > SOLVE_TOL:
            raise SingularSystem(f"hitting solve failed (residual {residual:.3e})")
        h[t] = ht
    return h


def consensus_opinion(pi: np.ndarray, opinions: np.ndarray) -> float:
    """Consensus an ergodic class settles on: influence-weighted opinions."""
    return float(np.dot(pi, opinions))


@dataclass(frozen=True)
class ChainAnalysis:
    """Full chain analysis at a fixed vector of expressed opinions.

    ``pi`` and ``hitting`` depend only on the matrix; ``consensus`` and
    ``asymptotic`` refer to the opinions the analysis was built with.
    """

    decomposition: Decomposition
    pi: tuple[np.ndarray, ...]
    hitting: tuple[np.ndarray, ...]
    consensus: tuple[float, ...]
    asymptotic: np.ndarray


def _limits(decomposition: Decomposition, pi, hitting, opinions) -> tuple[tuple[float, ...], np.ndarray]:
    """Class consensi and per-agent limit opinions for one opinion vector."""
    cons = tuple(
        consensus_opinion(pi[k], opinions[np.asarray(members)])
        for k, members in enumerate(decomposition.classes)
    )
    x = np.zeros(decomposition.n)
    for k, members in enumerate(decomposition.classes):
        x[np.asarray(members)] = cons[k]
    for i in decomposition.transient:
        x[i] = sum(hitting[k][i] * cons[k] for k in range(len(decomposition.classes)))
    return cons, x


def asymptotic_opinions(analysis: ChainAnalysis, opinions: np.ndarray) -> np.ndarray:
    """Limit opinions for a new expressed-opinion vector.

    Reuses the analysis' stationary and hitting vectors; only the class
    consensi are recomputed.  Each recurrent agent gets its class
    consensus, each transient agent the hitting-weighted mixture.
    """
    d = analysis.decomposition
    _, x = _limits(d, analysis.pi, analysis.hitting, opinions)
    return x


def analyze(cm: ConfidenceMatrix, decomposition: Decomposition, opinions: np.ndarray) -> ChainAnalysis:
    """Compute stationary vectors, hitting vectors, consensi, and limits."""
    m = len(decomposition.classes)
    pi = tuple(stationary_distribution(submatrix(cm, decomposition, k)) for k in range(m))
    hitting = tuple(hitting_probabilities(cm, decomposition, k) for k in range(m))
    if m:
        total = np.sum(hitting, axis=0)
        worst = np.max(np.abs(total - 1.0))
        if worst > OPINION_TOL:
            raise SingularSystem(f"hitting probabilities do not sum to 1 (off by {worst:.3e})")
    cons, x = _limits(decomposition, pi, hitting, opinions)
    x.flags.writeable = False
    return ChainAnalysis(decomposition, pi, hitting, cons, x)


def iterate_dynamics(
    cm: ConfidenceMatrix,
    opinions: np.ndarray,
    max_steps: int = 100_000,
    tol: float = 1e-12,
) -> tuple[np.ndarray, int]:
    """Run the update ``x <- A x`` until the max-norm change drops below tol.

    This is the independent oracle for :func:`asymptotic_opinions`.
    Returns the final vector and the number of steps taken; raises
    :class:`NonConvergence` when the step limit is reached first.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = cm.matrix
    x = np.asarray(opinions, dtype=float).copy()
    change = np.inf
    for step in range(1, max_steps + 1):
        nxt = a @ x
        change = float(np.max(np.abs(nxt - x)))
        x = nxt
        if change < tol:
            return x, step
    raise NonConvergence(max_steps, change)


def evaluate_plan(
    instance: Instance,
    analysis: ChainAnalysis,
    payments: np.ndarray,
    budget: float | None = None,
) -> PaymentPlan:
    """Apply a payment vector and report the resulting supporter set.

    Expressed opinions follow the linear price: ``x_i(0) = xhat_i + p_i / c_i``.
    Supporters are agents whose asymptotic opinion reaches the threshold
    (within tolerance).  ``budget`` defaults to the instance's own.
    """
    b = instance.budget if budget is None else float(budget)
    p = np.asarray(payments, dtype=float)
    if p.shape != (instance.n,):
        raise ValueError("payments must give one value per agent")
    if (p < -OPINION_TOL).any():
        raise ValueError("payments must be nonnegative")
    expressed = instance.true_opinions + p / instance.costs
    if (expressed > 1.0 + OPINION_TOL).any():
        worst = int(np.argmax(expressed))
        raise ValueError(
            f"payment pushes opinion of {instance.agents[worst]!r} above 1 "
            f"({expressed[worst]:.6f})"
        )
    total = float(p.sum())
    if total > b + BUDGET_TOL:
        raise ValueError(f"total spend {total} exceeds budget {b}")
    limits = asymptotic_opinions(analysis, expressed)
    supporters = tuple(
        instance.agents[i] for i in range(instance.n)
        if limits[i] >= instance.threshold - OPINION_TOL
    )
    expressed.flags.writeable = False
    p = p.copy()
    p.flags.writeable = False
    return PaymentPlan(instance.agents, p, expressed, supporters, total)
