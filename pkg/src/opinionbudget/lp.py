"""Dense bounded-variable primal simplex.

Maximizes ``c . x`` subject to general-sense rows and per-variable bounds
(infinities allowed).  Two phases with artificials only where the slack
cannot absorb the initial residual; Dantzig pricing switches to Bland's
rule after a fixed pivot count so degenerate problems cannot cycle.  All
choices are deterministic: the same program produces the same pivots and
the same result on every run.
"""

from dataclasses import dataclass

import numpy as np

#: Constraint satisfaction required of reported optima.
FEAS_TOL = 1e-7
#: Reduced-cost optimality threshold.
COST_TOL = 1e-9
#: Pivots before switching from Dantzig to Bland pricing.
BLAND_AFTER = 500
#: Hard pivot limit; beyond it the solve is abandoned.
PIVOT_LIMIT = 20_000

_SENSES = ("<=", "=", ">=")


class NumericalFailure(RuntimeError):
    """The solve could not be completed reliably (cycling or singular basis).

    Distinct from infeasibility, which is an ordinary result status.
    """


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective . x  s.t.  rows x (sense) rhs,  lower <= x <= upper."""

    objective: np.ndarray
    rows: np.ndarray
    senses: tuple[str, ...]
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        n = len(self.objective)
        m = len(self.senses)
        if self.rows.shape != (m, n):
            raise ValueError(f"rows must be {m}x{n}, got {self.rows.shape}")
        if len(self.rhs) != m:
            raise ValueError("rhs length must match row count")
        if len(self.lower) != n or len(self.upper) != n:
            raise ValueError("bounds must give one pair per variable")
        if any(s not in _SENSES for s in self.senses):
            raise ValueError(f"senses must be one of {_SENSES}")
        if (np.asarray(self.lower) > np.asarray(self.upper)).any():
            raise ValueError("lower bound exceeds upper bound")


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective: float | None


class _Simplex:
    """Working state: extended columns are [structural | slack | artificial]."""

    def __init__(self, lp: LinearProgram):
        self.n = len(lp.objective)
        self.m = len(lp.senses)
        n, m = self.n, self.m

        rows = np.asarray(lp.rows, dtype=float)
        self.b = np.asarray(lp.rhs, dtype=float).copy()
        lower = [float(v) for v in lp.lower]
        upper = [float(v) for v in lp.upper]
        # slack bounds encode the row sense: row . x + s = b
        for s in lp.senses:
            if s == "<=":
                lower.append(0.0)
                upper.append(np.inf)
            elif s == ">=":
                lower.append(-np.inf)
                upper.append(0.0)
            else:
                lower.append(0.0)
                upper.append(0.0)

        self.A = np.hstack([rows, np.eye(m)]) if m else np.zeros((0, n))
        self.lower = np.array(lower)
        self.upper = np.array(upper)

        # start every variable at its nearest finite bound (free vars at 0)
        x = np.where(np.isfinite(self.lower), self.lower,
                     np.where(np.isfinite(self.upper), self.upper, 0.0))
        self.x = x.astype(float)
        self.pivots = 0

    def _install_start_basis(self) -> np.ndarray:
        """Basic slack where it can absorb the residual, artificial otherwise.

        Returns the phase-1 objective over the extended+artificial columns;
        all-zero when no artificials were needed.
        """
        n, m = self.n, self.m
        residual = self.b - self.A @ self.x
        basis = []
        art_cols = []
        art_costs = []
        for r in range(m):
            s = n + r
            res = residual[r]
            if self.lower[s] <= res <= self.upper[s]:
                self.x[s] = res
                basis.append(s)
            else:
                col = np.zeros(m)
                col[r] = 1.0
                art_cols.append(col)
                if res >= 0:
                    art_costs.append(-1.0)
                    lo, hi = 0.0, np.inf
                else:
                    art_costs.append(1.0)
                    lo, hi = -np.inf, 0.0
                basis.append(self.A.shape[1] + len(art_cols) - 1)
                self.lower = np.append(self.lower, lo)
                self.upper = np.append(self.upper, hi)
                self.x = np.append(self.x, res)
        if art_cols:
            self.A = np.hstack([self.A, np.column_stack(art_cols)])
        self.basis = np.asarray(basis, dtype=int)
        self.n_real = n + m  # columns that are not artificial
        phase1 = np.zeros(self.A.shape[1])
        for cost, col in zip(art_costs, range(self.n_real, self.A.shape[1])):
            phase1[col] = cost
        return phase1

    def run(self, c: np.ndarray) -> str:
        """Iterate to optimality for objective ``c`` (maximize)."""
        A, lower, upper = self.A, self.lower, self.upper
        m = self.m
        total_cols = A.shape[1]
        while True:
            if self.pivots >= PIVOT_LIMIT:
                raise NumericalFailure(f"pivot limit {PIVOT_LIMIT} exceeded")
            in_basis = np.zeros(total_cols, dtype=bool)
            in_basis[self.basis] = True
            if m:
                basis_matrix = A[:, self.basis]
                try:
                    y = np.linalg.solve(basis_matrix.T, c[self.basis])
                except np.linalg.LinAlgError as e:
                    raise NumericalFailure(f"singular basis: {e}") from e
                reduced = c - y @ A
            else:
                reduced = c.copy()

            bland = self.pivots >= BLAND_AFTER
            enter = -1
            sigma = 0
            best = COST_TOL
            for j in range(total_cols):
                if in_basis[j] or lower[j] == upper[j]:
                    continue
                d = reduced[j]
                can_up = self.x[j] < upper[j]
                can_down = self.x[j] > lower[j]
                if can_up and d > COST_TOL:
                    score, direction = d, 1
                elif can_down and d < -COST_TOL:
                    score, direction = -d, -1
                else:
                    continue
                if bland:
                    enter, sigma = j, direction
                    break
                if score > best:
                    best, enter, sigma = score, j, direction
            if enter < 0:
                return "optimal"

            if m:
                try:
                    w = np.linalg.solve(A[:, self.basis], A[:, enter])
                except np.linalg.LinAlgError as e:
                    raise NumericalFailure(f"singular basis: {e}") from e
            else:
                w = np.zeros(0)

            # largest step t >= 0 keeping basics and the entering variable in box
            span = upper[enter] - lower[enter]
            t_limit = span if np.isfinite(span) else np.inf
            candidates = []  # (limit, variable index, row)
            for r in range(m):
                coef = sigma * w[r]
                i = self.basis[r]
                if coef > 1e-11:
                    if np.isfinite(lower[i]):
                        candidates.append(((self.x[i] - lower[i]) / coef, i, r))
                elif coef < -1e-11:
                    if np.isfinite(upper[i]):
                        candidates.append(((upper[i] - self.x[i]) / (-coef), i, r))
            t_basic = min((c0 for c0, _, _ in candidates), default=np.inf)
            t = min(t_limit, t_basic)
            if not np.isfinite(t):
                return "unbounded"
            t = max(t, 0.0)

            if m:
                self.x[self.basis] = self.x[self.basis] - sigma * t * w
            if t_basic < t_limit - 1e-12:
                # basis change; ties resolved toward the smallest variable index
                self.x[enter] += sigma * t
                hits = [(i, r) for c0, i, r in candidates if c0 <= t_basic + 1e-12]
                leave_var, leave_row = min(hits)
                coef = sigma * w[leave_row]
                self.x[leave_var] = lower[leave_var] if coef > 0 else upper[leave_var]
                self.basis[leave_row] = enter
            else:
                # bound flip: snap exactly onto the opposite bound
                self.x[enter] = upper[enter] if sigma > 0 else lower[enter]
            self.pivots += 1

    def seal_artificials(self) -> float:
        """Pin artificials to zero after phase 1; returns their residual mass."""
        mass = float(np.sum(np.abs(self.x[self.n_real:])))
        self.lower[self.n_real:] = 0.0
        self.upper[self.n_real:] = 0.0
        return mass


def solve_lp(lp: LinearProgram) -> LpResult:
    """Solve the program; statuses are "optimal", "infeasible", "unbounded".

    Optimal solutions satisfy rows within 1e-7 and bounds within 1e-9;
    anything the solver cannot certify raises :class:`NumericalFailure`.
    """
    state = _Simplex(lp)
    phase1 = state._install_start_basis()
    if phase1.any():
        status = state.run(phase1)
        if status != "optimal":
            raise NumericalFailure(f"phase 1 ended with status {status!r}")
        if state.seal_artificials() > FEAS_TOL:
            return LpResult("infeasible", None, None)
    else:
        state.seal_artificials()

    c = np.zeros(state.A.shape[1])
    c[: state.n] = np.asarray(lp.objective, dtype=float)
    status = state.run(c)
    if status == "unbounded":
        return LpResult("unbounded", None, None)

    x = state.x[: state.n].copy()
    _verify(lp, x)
    return LpResult("optimal", x, float(np.dot(lp.objective, x)))


def _verify(lp: LinearProgram, x: np.ndarray) -> None:
    if ((x < np.asarray(lp.lower) - 1e-9) | (x > np.asarray(lp.upper) + 1e-9)).any():
        raise NumericalFailure("solution violates variable bounds")
    if len(lp.senses):
        lhs = lp.rows @ x
        for r, sense in enumerate(lp.senses):
            err = lhs[r] - lp.rhs[r]
            bad = (sense == "<=" and err > FEAS_TOL) or \
                  (sense == ">=" and err < -FEAS_TOL) or \
                  (sense == "=" and abs(err) > FEAS_TOL)
            if bad:
                raise NumericalFailure(f"row {r} violated by {err:.3e}")
