"""Self-contained dense two-phase simplex for small linear programs.

Solves  min c'x  s.t.  A x <= b,  x >= 0  on a dense tableau.  Bland's
smallest-index rule protects against cycling, which matters because the
L1-minimization programs fed to this solver are heavily degenerate.
Problem sizes here are a few hundred variables at most, so a plain
tableau is both adequate and easy to audit.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalError

PIVOT_TOL = 1e-9


class InfeasibleProgram(NumericalError):
    """Phase 1 ended with a positive artificial objective."""


class UnboundedProgram(NumericalError):
    """A negative reduced cost column has no positive pivot entry."""


def _pivot(tableau: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    hits = np.flatnonzero(np.abs(tableau[:, col]) > 0)
    for r in hits:
        if r != row:
            tableau[r] -= tableau[r, col] * tableau[row]
    basis[row] = col


def _bland_entering(costs: np.ndarray, allowed: int) -> int | None:
    negative = np.flatnonzero(costs[:allowed] < -PIVOT_TOL)
    return int(negative[0]) if negative.size else None


def _bland_leaving(tableau: np.ndarray, basis: np.ndarray, col: int) -> int:
    column = tableau[:-1, col]
    rhs = tableau[:-1, -1]
    rows = np.flatnonzero(column > PIVOT_TOL)
    if rows.size == 0:
        raise UnboundedProgram("linear program is unbounded")
    ratios = rhs[rows] / column[rows]
    best = ratios.min()
    ties = rows[ratios <= best + PIVOT_TOL]
    # Bland: among minimum-ratio rows, leave the basic variable of
    # smallest index.
    return int(ties[np.argmin(basis[ties])])


def _run_simplex(tableau: np.ndarray, basis: np.ndarray, allowed: int) -> None:
    while True:
        col = _bland_entering(tableau[-1], allowed)
        if col is None:
            return
        row = _bland_leaving(tableau, basis, col)
        _pivot(tableau, basis, row, col)


def solve_lp(c, a_ub, b_ub):
    """Minimize ``c @ x`` subject to ``a_ub @ x <= b_ub`` and ``x >= 0``.

    Returns the optimal ``x``.  Raises :class:`InfeasibleProgram` or
    :class:`UnboundedProgram` when no optimum exists.
    """
    c = np.asarray(c, dtype=float)
    a_ub = np.asarray(a_ub, dtype=float)
    b_ub = np.asarray(b_ub, dtype=float)
    m, n = a_ub.shape

    # Equality form A x + s = b with slack per row; rows with negative
    # rhs are flipped and given an artificial variable for phase 1.
    rows = []
    slack_sign = np.ones(m)
    for i in range(m):
        if b_ub[i] < 0:
            rows.append(-a_ub[i])
            slack_sign[i] = -1.0
        else:
            rows.append(a_ub[i])
    body = np.array(rows)
    rhs = np.abs(b_ub)

    artificial_rows = np.flatnonzero(slack_sign < 0)
    n_art = artificial_rows.size
    n_total = n + m + n_art

    tableau = np.zeros((m + 1, n_total + 1))
    tableau[:m, :n] = body
    tableau[:m, n : n + m] = np.diag(slack_sign)
    for j, i in enumerate(artificial_rows):
        tableau[i, n + m + j] = 1.0
    tableau[:m, -1] = rhs

    basis = np.empty(m, dtype=int)
    basis[:] = n + np.arange(m)
    basis[artificial_rows] = n + m + np.arange(n_art)

    if n_art:
        # Phase 1: minimize the sum of artificials.
        tableau[-1, :] = 0.0
        tableau[-1, n + m : n + m + n_art] = 1.0
        for i in artificial_rows:
            tableau[-1] -= tableau[i]
        _run_simplex(tableau, basis, allowed=n + m)
        if tableau[-1, -1] < -1e-7:
            raise InfeasibleProgram("linear program is infeasible")
        # Drive any artificial still in the basis out of it.
        for row in np.flatnonzero(basis >= n + m):
            pivots = np.flatnonzero(np.abs(tableau[row, : n + m]) > PIVOT_TOL)
            if pivots.size:
                _pivot(tableau, basis, int(row), int(pivots[0]))
            else:
                tableau[row] = 0.0  # redundant constraint
        tableau = np.delete(tableau, np.s_[n + m : n + m + n_art], axis=1)

    # Phase 2: price out the true objective against the current basis.
    tableau[-1, :] = 0.0
    tableau[-1, :n] = c
    for i in range(m):
        if basis[i] < n + m and abs(tableau[-1, basis[i]]) > 0:
            tableau[-1] -= tableau[-1, basis[i]] * tableau[i]
    _run_simplex(tableau, basis, allowed=n + m)

    x = np.zeros(n + m)
    for i in range(m):
        if basis[i] < n + m:
            x[basis[i]] = tableau[i, -1]
    return x[:n]
