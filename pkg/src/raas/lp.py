"""Dense two-phase simplex for the small contract-design LPs.

Problems are stated as

    maximize    c @ h
    subject to  A @ h <= b,   lower <= h <= upper

with either bound allowed to be infinite.  Bland's rule fixes the pivot
sequence, so identical inputs always give identical outputs and degenerate
problems terminate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LpSchemaError(ValueError):
    pass


@dataclass(frozen=True)
class LpProblem:
    objective: np.ndarray
    A: np.ndarray
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    row_labels: tuple[str, ...] = ()
    var_labels: tuple[str, ...] = ()

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        n = c.size
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, n)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[1] != n:
            raise LpSchemaError(f"A must be m x {n}, got shape {A.shape}")
        if b.size != A.shape[0]:
            raise LpSchemaError(f"b has {b.size} entries for {A.shape[0]} rows")
        if lower.size != n or upper.size != n:
            raise LpSchemaError("bounds must have one entry per variable")
        for name, arr in (("objective", c), ("A", A), ("b", b)):
            if not np.all(np.isfinite(arr)):
                raise LpSchemaError(f"{name} contains NaN or infinite values")
        if np.isnan(lower).any() or np.isnan(upper).any():
            raise LpSchemaError("bounds contain NaN")
        if np.any(lower == np.inf) or np.any(upper == -np.inf):
            raise LpSchemaError("lower bound +inf or upper bound -inf")
        if self.row_labels and len(self.row_labels) != A.shape[0]:
            raise LpSchemaError("row_labels length mismatch")
        for name, arr in (("objective", c), ("A", A), ("b", b), ("lower", lower), ("upper", upper)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_vars(self) -> int:
        return self.objective.size

    @property
    def n_rows(self) -> int:
        return self.b.size

    @classmethod
    def build(cls, objective, A=None, b=None, lower=None, upper=None, **labels) -> "LpProblem":
        c = np.asarray(objective, dtype=float)
        n = c.size
        A = np.zeros((0, n)) if A is None else np.atleast_2d(np.asarray(A, dtype=float))
        b = np.zeros(0) if b is None else b
        lower = np.full(n, -np.inf) if lower is None else lower
        upper = np.full(n, np.inf) if upper is None else upper
        return cls(c, A, b, lower, upper, **labels)

    def with_objective(self, objective) -> "LpProblem":
        return LpProblem(np.asarray(objective, dtype=float), self.A, self.b, self.lower, self.upper,
                         self.row_labels, self.var_labels)


@dataclass(frozen=True)
class Certificate:
    """Multipliers proving the reported status.

    For ``optimal``: a dual-feasible ``(row, upper, lower)`` triple whose
    ``dual_value`` equals the optimum.  For ``infeasible``: Farkas multipliers
    with ``A.T @ row + upper - lower == 0`` and a negative ``dual_value``.
    For ``unbounded``: an improving feasible direction ``ray``.
    """

    row: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None
    dual_value: Optional[float] = None
    ray: Optional[np.ndarray] = None
    phase1_value: float = 0.0


@dataclass(frozen=True)
class LpSolution:
    status: str
    point: Optional[np.ndarray]
    objective_value: Optional[float]
    certificate: Certificate = field(default_factory=Certificate)
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class _StandardForm:
    # h = offset + M @ z, z >= 0, G @ z <= g
    offset: np.ndarray
    M: np.ndarray
    G: np.ndarray
    g: np.ndarray
    d: np.ndarray
    const: float
    n_rows_A: int
    ub_rows: list[int]


def _standardize(p: LpProblem) -> _StandardForm:
    n = p.n_vars
    offset = np.zeros(n)
    cols: list[np.ndarray] = []
    ub_rows: list[int] = []
    for j in range(n):
        lo, hi = p.lower[j], p.upper[j]
        e = np.zeros(n)
        e[j] = 1.0
        if np.isfinite(lo):
            offset[j] = lo
            cols.append(e)
            if np.isfinite(hi):
                ub_rows.append(j)
        elif np.isfinite(hi):
            offset[j] = hi
            cols.append(-e)
        else:
            cols.append(e)
            cols.append(-e)
    M = np.column_stack(cols) if cols else np.zeros((n, 0))
    G_rows = [p.A @ M]
    g_rows = [p.b - p.A @ offset]
    for j in ub_rows:
        row = np.zeros(M.shape[1])
        # the z-column for a lower-bounded variable has M[j, col] == 1
        row[np.flatnonzero(M[j] == 1.0)[0]] = 1.0
        G_rows.append(row[None, :])
        g_rows.append(np.array([p.upper[j] - p.lower[j]]))
    G = np.vstack(G_rows)
    g = np.concatenate(g_rows)
    d = M.T @ p.objective
    return _StandardForm(offset, M, G, g, d, float(p.objective @ offset), p.n_rows, ub_rows)


class _Tableau:
    """Equality-form tableau ``E @ v = rhs`` kept in canonical form for ``basis``."""

    def __init__(self, E: np.ndarray, rhs: np.ndarray, basis: list[int], pivot_tol: float):
        self.E0 = E.copy()
        self.rhs0 = rhs.copy()
        self.T = E.copy()
        self.r = rhs.copy()
        self.basis = list(basis)
        self.pivot_tol = pivot_tol
        self.iterations = 0

    def pivot(self, row: int, col: int) -> None:
        piv = self.T[row, col]
        self.T[row] /= piv
        self.r[row] /= piv
        for i in range(self.T.shape[0]):
            if i != row and self.T[i, col] != 0.0:
                factor = self.T[i, col]
                self.T[i] -= factor * self.T[row]
                self.r[i] -= factor * self.r[row]
        self.T[row, col] = 1.0
        self.basis[row] = col
        self.iterations += 1

    def reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        return cost - cost[self.basis] @ self.T

    def run(self, cost: np.ndarray, allowed: np.ndarray, opt_tol: float, max_iter: int):
        """Maximise ``cost @ v``.  Returns ``None`` at optimum or the entering column of a ray."""
        scale = 1.0 + np.max(np.abs(cost)) if cost.size else 1.0
        for _ in range(max_iter):
            red = self.reduced_costs(cost)
            candidates = np.flatnonzero(allowed & (red > opt_tol * scale))
            if candidates.size == 0:
                return None
            col = int(candidates[0])  # Bland: lowest index enters
            column = self.T[:, col]
            rows = np.flatnonzero(column > self.pivot_tol)
            if rows.size == 0:
                return col
            ratios = np.maximum(self.r[rows], 0.0) / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
            row = int(min(ties, key=lambda i: self.basis[i]))  # Bland: lowest basic index leaves
            self.pivot(row, col)
        raise RuntimeError(f"simplex did not terminate within {max_iter} iterations")

    def duals(self, cost: np.ndarray) -> np.ndarray:
        B = self.E0[:, self.basis]
        return np.linalg.solve(B.T, cost[self.basis])

    def values(self, n_cols: int) -> np.ndarray:
        v = np.zeros(n_cols)
        v[self.basis] = self.r
        return v


def _split_bound_duals(p: LpProblem, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    upper = np.where(np.isfinite(p.upper), np.maximum(rho, 0.0), 0.0)
    lower = np.where(np.isfinite(p.lower), np.maximum(-rho, 0.0), 0.0)
    return upper, lower


def _bound_value(p: LpProblem, upper: np.ndarray, lower: np.ndarray) -> float:
    u = np.where(upper > 0, p.upper, 0.0)
    lo = np.where(lower > 0, p.lower, 0.0)
    return float(u @ upper - lo @ lower)


def solve_lp(
    problem: LpProblem,
    feas_tol: float = 1e-7,
    opt_tol: float = 1e-7,
    pivot_tol: float = 1e-10,
    max_iter: int = 10_000,
) -> LpSolution:
    """Solve ``problem`` with the two-phase simplex method."""
    sf = _standardize(problem)
    m, nz = sf.G.shape
    flip = sf.g < 0
    sign = np.where(flip, -1.0, 1.0)
    n_art = int(flip.sum())
    art_rows = np.flatnonzero(flip)
    n_cols = nz + m + n_art
    E = np.zeros((m, n_cols))
    E[:, :nz] = sign[:, None] * sf.G
    E[:, nz:nz + m] = np.diag(sign)
    for k, r in enumerate(art_rows):
        E[r, nz + m + k] = 1.0
    rhs = sign * sf.g
    basis = [nz + i for i in range(m)]
    for k, r in enumerate(art_rows):
        basis[r] = nz + m + k
    tab = _Tableau(E, rhs, basis, pivot_tol)
    is_art = np.zeros(n_cols, dtype=bool)
    is_art[nz + m:] = True

    phase1_value = 0.0
    if n_art:
        cost1 = np.where(is_art, -1.0, 0.0)
        tab.run(cost1, np.ones(n_cols, dtype=bool), opt_tol, max_iter)
        phase1_value = float(-(cost1[tab.basis] @ tab.r))
        if phase1_value > feas_tol * (1.0 + np.max(np.abs(sf.g))):
            y_eq = tab.duals(cost1)
            y = sign * y_eq
            row = np.maximum(y[: sf.n_rows_A], 0.0)
            ub_rows = np.zeros(problem.n_vars)
            ub_rows[sf.ub_rows] = np.maximum(y[sf.n_rows_A:], 0.0)
            rho = -(problem.A.T @ row) - ub_rows
            upper, lower = _split_bound_duals(problem, rho)
            upper = upper + ub_rows
            dual_value = float(problem.b @ row) + _bound_value(problem, upper, lower)
            cert = Certificate(row=row, upper=upper, lower=lower, dual_value=dual_value,
                               phase1_value=phase1_value)
            return LpSolution(INFEASIBLE, None, None, cert, tab.iterations)
        # drive zero-level artificials out of the basis where possible
        for i, var in enumerate(list(tab.basis)):
            if is_art[var]:
                nonzero = np.flatnonzero((~is_art) & (np.abs(tab.T[i]) > pivot_tol))
                if nonzero.size:
                    tab.pivot(i, int(nonzero[0]))

    cost2 = np.zeros(n_cols)
    cost2[:nz] = sf.d
    entering = tab.run(cost2, ~is_art, opt_tol, max_iter)
    if entering is not None:
        dv = np.zeros(n_cols)
        dv[entering] = 1.0
        dv[tab.basis] -= tab.T[:, entering]
        ray = sf.M @ dv[:nz]
        cert = Certificate(ray=ray, phase1_value=phase1_value)
        return LpSolution(UNBOUNDED, None, None, cert, tab.iterations)

    v = tab.values(n_cols)
    z = np.maximum(v[:nz], 0.0)
    h = sf.offset + sf.M @ z
    h = np.clip(h, problem.lower, problem.upper)
    value = float(problem.objective @ h)

    y = sign * tab.duals(cost2)
    row = np.maximum(y[: sf.n_rows_A], 0.0)
    rho = problem.objective - problem.A.T @ row
    upper, lower = _split_bound_duals(problem, rho)
    dual_value = float(problem.b @ row) + _bound_value(problem, upper, lower)
    cert = Certificate(row=row, upper=upper, lower=lower, dual_value=dual_value, phase1_value=phase1_value)
    return LpSolution(OPTIMAL, h, value, cert, tab.iterations)


def find_feasible_point(problem: LpProblem, **tols) -> LpSolution:
    """Phase-1 only: any feasible point, or an infeasibility certificate."""
    return solve_lp(problem.with_objective(np.zeros(problem.n_vars)), **tols)


def dual_residual(problem: LpProblem, cert: Certificate, farkas: bool = False) -> float:
    """Largest violation of the dual equality ``A.T y + v - w = c`` (``= 0`` for Farkas)."""
    target = np.zeros(problem.n_vars) if farkas else problem.objective
    resid = problem.A.T @ cert.row + cert.upper - cert.lower - target
    return float(np.max(np.abs(resid))) if resid.size else 0.0


def max_violation(problem: LpProblem, h: Sequence[float]) -> float:
    h = np.asarray(h, dtype=float)
    parts = [np.zeros(1)]
    if problem.n_rows:
        parts.append(problem.A @ h - problem.b)
    parts.append(problem.lower - h)
    parts.append(h - problem.upper)
    return float(np.max(np.concatenate([np.nan_to_num(p, neginf=0.0) for p in parts])))
