"""Self-contained dense two-phase simplex for the gap programs.

Solves  minimize c.x  subject to  A x = b, x >= 0.

Entering variables follow Bland's rule (lowest eligible index); ratio-test
ties go to the row whose basic variable has the lowest index, so certificates
are deterministic. Dimensions here are at most a few hundred variables, so a
dense tableau is plenty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

_TOL = 1e-9


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    value: float | None
    iterations: int


class _Unbounded(Exception):
    pass


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    colvals = T[:, col].copy()
    colvals[row] = 0.0
    T -= np.outer(colvals, T[row])
    # kill roundoff in the pivot column
    T[:, col] = 0.0
    T[row, col] = 1.0
    basis[row] = col


def _iterate(T, basis, n_active, max_iter):
    """Run simplex steps on tableau T until optimal; returns iteration count."""
    m = T.shape[0] - 1
    it = 0
    while True:
        enter = -1
        costs = T[-1, :n_active]
        for j in range(n_active):
            if costs[j] < -_TOL:
                enter = j
                break
        if enter < 0:
            return it
        leave = -1
        best_ratio = np.inf
        for i in range(m):
            a = T[i, enter]
            if a > _TOL:
                ratio = T[i, -1] / a
                if ratio < best_ratio - 1e-12 or (
                    abs(ratio - best_ratio) <= 1e-12
                    and (leave < 0 or basis[i] < basis[leave])
                ):
                    best_ratio = ratio
                    leave = i
        if leave < 0:
            raise _Unbounded(enter)
        _pivot(T, basis, leave, enter)
        it += 1
        if it > max_iter:
            raise ConvergenceError(
                f"simplex exceeded {max_iter} pivots (size {m}x{n_active})"
            )


def solve_lp(c, A, b, max_iter=None):
    """Two-phase simplex for min c.x, A x = b, x >= 0."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    if max_iter is None:
        max_iter = 200 * (m + n + 10)
    A = A.copy()
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # phase 1: artificial basis
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    iters = _iterate(T, basis, n + m, max_iter)

    if -T[-1, -1] > 1e-7:
        return LPResult("infeasible", None, None, iters)

    # drive artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= n:
            piv = -1
            for j in range(n):
                if abs(T[i, j]) > _TOL:
                    piv = j
                    break
            if piv < 0:
                continue  # redundant constraint row
            _pivot(T, basis, i, piv)
        keep.append(i)
    if len(keep) < m:
        rows = keep + [m]
        T = T[rows]
        basis = [basis[i] for i in keep]
        m = len(keep)

    # phase 2 cost row over original columns
    T2 = np.zeros((m + 1, n + 1))
    T2[:m, :n] = T[:m, :n]
    T2[:m, -1] = T[:m, -1]
    T2[-1, :n] = c
    for i in range(m):
        cb = c[basis[i]]
        if cb != 0.0:
            T2[-1] -= cb * T2[i]
    try:
        iters += _iterate(T2, basis, n, max_iter)
    except _Unbounded:
        return LPResult("unbounded", None, None, iters)

    x = np.zeros(n)
    for i in range(m):
        x[basis[i]] = T2[i, -1]
    x = np.clip(x, 0.0, None)
    return LPResult("optimal", x, float(c @ x), iters)
