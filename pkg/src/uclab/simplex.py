"""Two-phase primal simplex over a dense tableau with variable bounds.

Works directly on array data (rows ``A x {<=,=,>=} b``, box bounds
``lo <= x <= hi``); the problem-level wrapper lives in :mod:`uclab.solver`.

Design notes:
  * nonbasic variables rest at a finite bound; the ratio test allows bound
    flips, so upper bounds never become extra rows,
  * columns fixed by ``lo == hi`` are substituted into the rhs before the
    tableau is built, and singleton rows become bound tightenings (a pure
    standard-form rewrite; crucial for fix-and-solve speed),
  * phase 1 gives every still-infeasible row an artificial column and
    minimizes their sum; slacks absorb rows that start feasible,
  * pricing is Dantzig by default and switches to Bland's least-index rule
    while pivots stay degenerate, which guarantees termination,
  * the final basic solution is refined against the original columns with
    one LU solve and then verified; an unverifiable basis raises
    :class:`SolverFailure` instead of returning a silently wrong answer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg.blas import dger

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

AT_LOWER, AT_UPPER, BASIC = 0, 1, 2

_DEGENERATE_STREAK = 15  # consecutive zero-step pivots before Bland engages


class SolverFailure(RuntimeError):
    """The solve could not be certified numerically."""


@dataclass
class CoreResult:
    status: str
    x: np.ndarray | None
    iterations: int


def solve_core(
    A: np.ndarray,
    senses: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    feas_tol: float = 1e-6,
    max_iter: int | None = None,
) -> CoreResult:
    """Minimize ``c @ x`` subject to rows and bounds; returns full ``x``.

    ``senses`` holds -1, 0, +1 for <=, =, >= rows. Every variable must have
    at least one finite bound.
    """
    A = np.array(A, dtype=float)
    m, n = A.shape
    senses = np.asarray(senses, dtype=np.int8)
    b = np.array(b, dtype=float)
    c = np.asarray(c, dtype=float)
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    if np.any(np.isneginf(lo) & np.isposinf(hi)):
        raise SolverFailure("free variables (no finite bound) are not supported")

    b_scale = max(1.0, float(np.max(np.abs(b))) if m else 1.0)
    row_tol = feas_tol * b_scale

    # ------------------------------------------------------------------
    # Reduction: substitute fixed columns, turn singleton rows into bounds.
    # ------------------------------------------------------------------
    row_active = np.ones(m, dtype=bool)
    col_active = np.ones(n, dtype=bool)
    b_eff = b.copy()
    nonzero = A != 0.0

    changed = True
    while changed:
        changed = False
        crossing = col_active & (lo > hi)
        if np.any(crossing):
            idx = np.flatnonzero(crossing)
            if np.any(lo[idx] - hi[idx] > feas_tol * np.maximum(1.0, np.abs(lo[idx]))):
                return CoreResult(INFEASIBLE, None, 0)
            mid = 0.5 * (lo[idx] + hi[idx])
            lo[idx] = mid
            hi[idx] = mid
        newly_fixed = np.flatnonzero(col_active & (lo == hi))
        if newly_fixed.size:
            b_eff -= A[:, newly_fixed] @ lo[newly_fixed]
            col_active[newly_fixed] = False
            changed = True

        rows_idx = np.flatnonzero(row_active)
        if rows_idx.size == 0:
            break
        counts = nonzero[np.ix_(rows_idx, col_active)].sum(axis=1)

        empty = rows_idx[counts == 0]
        if empty.size:
            r = b_eff[empty]
            s = senses[empty]
            bad = ((s == -1) & (r < -row_tol)) | ((s == 1) & (r > row_tol)) | (
                (s == 0) & (np.abs(r) > row_tol)
            )
            if np.any(bad):
                return CoreResult(INFEASIBLE, None, 0)
            row_active[empty] = False
            changed = True

        for i in rows_idx[counts == 1]:
            (j,) = np.flatnonzero(nonzero[i] & col_active)
            a = A[i, j]
            v = b_eff[i] / a
            sense = senses[i] * (1 if a > 0 else -1)  # effective sense on x_j
            if sense == 0:
                lo[j] = max(lo[j], v)
                hi[j] = min(hi[j], v)
            elif sense == -1:
                hi[j] = min(hi[j], v)
            else:
                lo[j] = max(lo[j], v)
            row_active[i] = False
            changed = True

    rows_idx = np.flatnonzero(row_active)
    cols_idx = np.flatnonzero(col_active)

    # Fully reduced: optimize each remaining variable over its own box.
    if rows_idx.size == 0:
        x = lo.copy()
        for j in cols_idx:
            if c[j] > 0.0:
                if not np.isfinite(lo[j]):
                    return CoreResult(UNBOUNDED, None, 0)
                x[j] = lo[j]
            elif c[j] < 0.0:
                if not np.isfinite(hi[j]):
                    return CoreResult(UNBOUNDED, None, 0)
                x[j] = hi[j]
            else:
                x[j] = lo[j] if np.isfinite(lo[j]) else hi[j]
        x[~col_active] = lo[~col_active]
        return CoreResult(OPTIMAL, x, 0)

    # ------------------------------------------------------------------
    # Standard form: structural | slack | artificial dense column matrix.
    # ------------------------------------------------------------------
    A_w = A[np.ix_(rows_idx, cols_idx)]
    b_w = b_eff[rows_idx]
    sen_w = senses[rows_idx]
    mm = rows_idx.size
    nn = cols_idx.size

    slack_rows = np.flatnonzero(sen_w != 0)
    n_slack = slack_rows.size
    slack_sign = np.where(sen_w[slack_rows] == -1, 1.0, -1.0)

    start = np.where(np.isfinite(lo[cols_idx]), lo[cols_idx], hi[cols_idx])
    resid = b_w - A_w @ start

    art_rows: list[int] = []
    art_sign: list[float] = []
    basis = np.empty(mm, dtype=np.int64)
    basic_from_slack = np.zeros(mm, dtype=bool)
    for k, i in enumerate(slack_rows):
        if slack_sign[k] * resid[i] >= 0.0:
            basis[i] = nn + k
            basic_from_slack[i] = True
    for i in range(mm):
        if not basic_from_slack[i]:
            art_rows.append(i)
            art_sign.append(1.0 if resid[i] >= 0.0 else -1.0)
    n_art = len(art_rows)

    N = nn + n_slack + n_art
    M = np.zeros((mm, N))
    M[:, :nn] = A_w
    M[slack_rows, nn + np.arange(n_slack)] = slack_sign
    for k, (i, s) in enumerate(zip(art_rows, art_sign)):
        M[i, nn + n_slack + k] = s
        basis[i] = nn + n_slack + k

    lo_all = np.concatenate([lo[cols_idx], np.zeros(n_slack + n_art)])
    hi_all = np.concatenate([hi[cols_idx], np.full(n_slack + n_art, np.inf)])
    status = np.where(np.isfinite(lo_all), AT_LOWER, AT_UPPER).astype(np.int8)
    status[basis] = BASIC

    # Initial basis columns are signed unit vectors: B^-1 is their diagonal.
    basis_diag = np.ones(mm)
    basis_diag[slack_rows[basic_from_slack[slack_rows]]] = slack_sign[
        basic_from_slack[slack_rows]
    ]
    for i, s in zip(art_rows, art_sign):
        basis_diag[i] = s
    T = np.asfortranarray(M * basis_diag[:, None])
    xB = basis_diag * resid

    if max_iter is None:
        max_iter = 2000 + 60 * (mm + N)

    state = _SimplexState(T, M, xB, basis, status, lo_all, hi_all, b_w)

    iterations = 0
    if n_art:
        c1 = np.zeros(N)
        c1[nn + n_slack :] = 1.0
        iterations += _iterate(state, c1, max_iter, allow_unbounded=False)
        phase1 = float(c1[state.basis] @ state.xB)
        if phase1 > feas_tol * b_scale:
            return CoreResult(INFEASIBLE, None, iterations)
        # Lock artificials at zero for phase 2.
        state.lo[nn + n_slack :] = 0.0
        state.hi[nn + n_slack :] = 0.0
        art_basic = state.basis >= nn + n_slack
        state.xB[art_basic] = 0.0

    c2 = np.zeros(N)
    c2[:nn] = c[cols_idx]
    try:
        iterations += _iterate(state, c2, max_iter - iterations, allow_unbounded=True)
    except _Unbounded:
        return CoreResult(UNBOUNDED, None, iterations)

    x_all = state.solution()
    _refine(state, x_all)
    residual = np.abs(state.rhs - state.M @ x_all).max() if mm else 0.0
    if residual > 10 * row_tol:
        raise SolverFailure(
            f"basic solution residual {residual:.3e} exceeds tolerance; "
            "numerical breakdown"
        )
    x = lo.copy()
    x[~col_active] = lo[~col_active]
    x[cols_idx] = x_all[:nn]
    return CoreResult(OPTIMAL, x, iterations)


class _Unbounded(Exception):
    pass


class _SimplexState:
    def __init__(self, T, M, xB, basis, status, lo, hi, rhs):
        self.T = T
        self.M = M
        self.xB = xB
        self.basis = basis
        self.status = status
        self.lo = lo
        self.hi = hi
        self.rhs = rhs

    def solution(self) -> np.ndarray:
        # Nonbasic variables rest at a finite bound by construction.
        x = np.where(self.status == AT_UPPER, self.hi, self.lo)
        x[self.basis] = self.xB
        return x


def _reduced_costs(state: _SimplexState, costs: np.ndarray) -> np.ndarray:
    return costs - costs[state.basis] @ state.T


def _iterate(
    state: _SimplexState, costs: np.ndarray, budget: int, allow_unbounded: bool
) -> int:
    """Run pivots until optimal for ``costs``; returns the pivot count."""
    T, lo, hi = state.T, state.lo, state.hi
    if not (T.flags.f_contiguous and T.dtype == np.float64):
        raise SolverFailure("tableau must be Fortran-ordered float64 for in-place BLAS")
    z = _reduced_costs(state, costs)
    dual_tol = 1e-9 * max(1.0, float(np.max(np.abs(costs))) if costs.size else 1.0)
    it = 0
    degen_streak = 0
    bland = False
    recomputes = 0
    fixed = lo >= hi  # never eligible to enter
    lo_b = lo[state.basis].copy()
    hi_b = hi[state.basis].copy()
    sign = np.empty_like(z)
    theta = np.empty(state.xB.shape)
    while True:
        if it > budget:
            raise SolverFailure("pivot limit exceeded (possible cycling)")
        # Pricing: violation is -z at lower bound, +z at upper bound.
        np.copyto(sign, -1.0)
        np.copyto(sign, 1.0, where=state.status == AT_UPPER)
        viol = sign * z
        viol[(state.status == BASIC) | fixed] = -np.inf
        if bland:
            eligible = viol > dual_tol
            q = int(np.argmax(eligible))  # first eligible index
            if not eligible[q]:
                q = -1
        else:
            q = int(np.argmax(viol))
            if viol[q] <= dual_tol:
                q = -1
        if q < 0:
            # Reduced costs drift under rank-one updates; certify before stopping.
            z_exact = _reduced_costs(state, costs)
            if np.max(np.abs(z_exact - z)) <= dual_tol or recomputes >= 5:
                return it
            z = z_exact
            recomputes += 1
            continue

        direction = 1.0 if state.status[q] == AT_LOWER else -1.0
        w = direction * T[:, q]

        np.copyto(theta, np.inf)
        pos = w > 1e-9
        neg = w < -1e-9
        np.divide(state.xB - lo_b, w, out=theta, where=pos)
        np.divide(state.xB - hi_b, w, out=theta, where=neg)
        np.maximum(theta, 0.0, out=theta)
        theta_flip = hi[q] - lo[q]

        r = int(np.argmin(theta))
        theta_min = theta[r]
        if theta_flip <= theta_min:
            if not np.isfinite(theta_flip):
                if allow_unbounded:
                    raise _Unbounded
                raise SolverFailure("phase-1 ratio test found no blocking bound")
            state.xB -= theta_flip * w
            state.status[q] = AT_UPPER if state.status[q] == AT_LOWER else AT_LOWER
            it += 1
            continue
        if not np.isfinite(theta_min):
            if allow_unbounded:
                raise _Unbounded
            raise SolverFailure("phase-1 ratio test found no blocking bound")

        near = theta <= theta_min + 1e-9 * (1.0 + theta_min)
        rows = np.flatnonzero(near)
        if rows.size > 1:
            if bland:
                r = int(rows[np.argmin(state.basis[rows])])
            else:
                r = int(rows[np.argmax(np.abs(w[rows]))])
        step = theta[r]

        degen_streak = degen_streak + 1 if step <= 1e-10 * (1.0 + theta_min) else 0
        bland = degen_streak >= _DEGENERATE_STREAK

        leaving = state.basis[r]
        state.xB -= step * w
        enter_value = (lo[q] if direction > 0 else hi[q]) + direction * step
        state.status[leaving] = AT_LOWER if w[r] > 0 else AT_UPPER
        state.basis[r] = q
        state.status[q] = BASIC
        lo_b[r] = lo[q]
        hi_b[r] = hi[q]

        piv = T[r, q]
        Trow = T[r, :].copy()
        Trow /= piv
        colq = T[:, q].copy()
        colq[r] = 0.0
        # In-place rank-one update T -= colq * Trow, then restore the pivot row.
        dger(-1.0, colq, Trow, a=T, overwrite_a=1)
        T[r, :] = Trow
        z -= z[q] * Trow
        state.xB[r] = enter_value
        it += 1


def _refine(state: _SimplexState, x_all: np.ndarray) -> None:
    """One LU correction of the basic values against the original columns."""
    B = state.M[:, state.basis]
    resid = state.rhs - state.M @ x_all
    try:
        delta = np.linalg.solve(B, resid)
    except np.linalg.LinAlgError:
        return
    state.xB += delta
    # Refinement may nudge a basic value past its bound by rounding noise.
    lo_b = state.lo[state.basis]
    hi_b = state.hi[state.basis]
    np.clip(state.xB, lo_b - 1e-9, hi_b + 1e-9, out=state.xB)
    x_all[state.basis] = state.xB
