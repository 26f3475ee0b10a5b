"""Two-player zero-sum equilibrium solving by support enumeration.

For each equal-size support pair (I, J) the solver forms the square
indifference systems

    A[I, J] @ y_J = v * 1,   sum(y_J) = 1
    x_I @ A[I, J] = w * 1,   sum(x_I) = 1

and accepts the first candidate that is a nonnegative solution with no
profitable pure deviation for either player.  By the Shapley-Snow kernel
theorem a square support pair with a feasible solution always exists in a
finite zero-sum game, so exhaustive enumeration cannot come up empty.

``exact=True`` runs the whole search in Fraction arithmetic, which is what
the dual-space return-path construction needs: the equilibrium entries come
out as c/b with an explicit common denominator.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from .games import GameError

EXACT_SIZE_LIMIT = 6


def _solve_fraction_system(rows, rhs):
    """Gaussian elimination over Fractions; None if the system is singular."""
    n = len(rows)
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = Fraction(1, 1) / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]


def _solve_float_system(rows, rhs):
    a = np.asarray(rows, dtype=np.float64)
    b = np.asarray(rhs, dtype=np.float64)
    try:
        sol = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)) or np.linalg.norm(a @ sol - b) > 1e-8:
        return None
    return list(sol)


def _support_candidate(a, rows_i, cols_j, exact):
    """Solve both indifference systems on the support pair; None on failure."""
    k = len(rows_i)
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    solve = _solve_fraction_system if exact else _solve_float_system

    # unknowns (y_J, v):  A[I,J] y - v 1 = 0,  sum(y) = 1
    rows = [[a[i][j] for j in cols_j] + [-one] for i in rows_i]
    rows.append([one] * k + [zero])
    sol = solve(rows, [zero] * k + [one])
    if sol is None:
        return None
    y_support = sol[:k]

    # unknowns (x_I, w):  x A[I,J] - w 1 = 0,  sum(x) = 1
    rows = [[a[i][j] for i in rows_i] + [-one] for j in cols_j]
    rows.append([one] * k + [zero])
    sol = solve(rows, [zero] * k + [one])
    if sol is None:
        return None
    x_support = sol[:k]
    return x_support, y_support


def solve_2p_zero_sum(payoff, exact: bool = False):
    """Equilibrium of the zero-sum game with row-player payoff matrix.

    Returns ``([x, y], value)`` where x, y are probability vectors for the
    row and column player.  With ``exact=True`` the matrix must have
    int/Fraction entries, at most EXACT_SIZE_LIMIT strategies per player,
    and the result is Fraction-valued.
    """
    a = np.asarray(payoff)
    if a.ndim != 2:
        raise GameError("payoff must be a 2-D matrix")
    m, n = a.shape
    if exact:
        if max(m, n) > EXACT_SIZE_LIMIT:
            raise GameError(
                f"exact mode supports at most {EXACT_SIZE_LIMIT} strategies per agent"
            )
        if a.dtype != object:
            if not np.issubdtype(a.dtype, np.integer):
                raise GameError("exact mode needs int or Fraction entries")
            a = a.astype(object)
        if any(isinstance(v, float) for v in a.flat):
            raise GameError("exact mode needs int or Fraction entries")
        a = [[Fraction(v) for v in row] for row in a]
        tol = Fraction(0)
    else:
        a = [[float(v) for v in row] for row in a.astype(np.float64)]
        tol = 1e-10

    for k in range(1, min(m, n) + 1):
        for rows_i in itertools.combinations(range(m), k):
            for cols_j in itertools.combinations(range(n), k):
                cand = _support_candidate(a, rows_i, cols_j, exact)
                if cand is None:
                    continue
                x_s, y_s = cand
                if any(v < -tol for v in x_s) or any(v < -tol for v in y_s):
                    continue
                x = _embed(m, rows_i, x_s, exact)
                y = _embed(n, cols_j, y_s, exact)
                ay = [sum(a[i][j] * y[j] for j in range(n)) for i in range(m)]
                xa = [sum(x[i] * a[i][j] for i in range(m)) for j in range(n)]
                value = sum(x[i] * ay[i] for i in range(m))
                if max(ay) > value + tol:
                    continue
                if min(xa) < value - tol:
                    continue
                if exact:
                    return [np.asarray(x, dtype=object), np.asarray(y, dtype=object)], value
                return [np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)], float(value)

    raise RuntimeError(
        "support enumeration found no equilibrium; "
        "this cannot happen for a finite zero-sum game"
    )


def _embed(size, support, values, exact):
    zero = Fraction(0) if exact else 0.0
    full = [zero] * size
    for idx, v in zip(support, values):
        full[idx] = max(v, zero)
    total = sum(full)
    return [v / total for v in full]


def common_denominator(profile) -> tuple[int, list[list[int]]]:
    """Least common denominator b and integer counts c with x = c/b.

    The profile must be Fraction-valued; this is the (b, c) decomposition
    used by the dual-chain return-path construction.
    """
    denoms = []
    for x in profile:
        for v in np.asarray(x).flat:
            if not isinstance(v, Fraction):
                raise GameError("common_denominator needs a rational profile")
            denoms.append(v.denominator)
    b = math.lcm(*denoms)
    counts = [[int(v * b) for v in np.asarray(x).flat] for x in profile]
    return b, counts
