"""Small dense two-phase simplex over the rationals (Bland's rule).

Only meant for the handful-of-constraints feasibility problems the
arrangement code needs; everything stays in :class:`fractions.Fraction`.
"""

from __future__ import annotations

from fractions import Fraction


class Infeasible(Exception):
    pass


class Unbounded(Exception):
    pass


def _pivot(T, basis, row, col):
    p = T[row][col]
    T[row] = [x / p for x in T[row]]
    for i in range(len(T)):
        if i != row and T[i][col] != 0:
            f = T[i][col]
            T[i] = [a - f * b for a, b in zip(T[i], T[row])]
    basis[row] = col


def _run(T, basis, ncols):
    # last row holds reduced costs of a maximisation: negative entry -> improve
    while True:
        obj = T[-1]
        col = next((j for j in range(ncols) if obj[j] < 0), None)
        if col is None:
            return
        best = None
        for i in range(len(T) - 1):
            a = T[i][col]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise Unbounded()
        _pivot(T, basis, best[1], col)


def maximize(c, A, b):
    """Maximise ``c.x`` subject to ``A x <= b`` with x free.

    Returns ``(value, x)``; raises :class:`Infeasible` or :class:`Unbounded`.
    """
    m = len(A)
    n = len(c)
    c = [Fraction(v) for v in c]
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    # columns: x+ (n), x- (n), slack (m), artificial (m)
    nvar = 2 * n + m
    T = []
    basis = []
    artificial = []
    for i in range(m):
        sign = 1 if b[i] >= 0 else -1
        row = [sign * a for a in A[i]] + [-sign * a for a in A[i]]
        row += [Fraction(sign if j == i else 0) for j in range(m)]
        row += [Fraction(0)] * m
        if sign > 0:
            basis.append(2 * n + i)
        else:
            row[nvar + i] = Fraction(1)
            basis.append(nvar + i)
            artificial.append(i)
        row.append(sign * b[i])
        T.append(row)
    total = nvar + m
    if artificial:
        obj = [Fraction(0)] * (total + 1)
        for i in artificial:
            obj[nvar + i] = Fraction(1)
        for i in artificial:
            obj = [o - r for o, r in zip(obj, T[i])]
        T.append(obj)
        _run(T, basis, total)
        if T[-1][-1] != 0:
            raise Infeasible()
        # drive remaining artificials out of the basis
        for i, bv in enumerate(basis):
            if bv >= nvar:
                col = next((j for j in range(nvar) if T[i][j] != 0), None)
                if col is not None:
                    _pivot(T, basis, i, col)
        T.pop()
    obj = [-v for v in c] + [v for v in c] + [Fraction(0)] * (m + m) + [Fraction(0)]
    T.append(obj)
    for i, bv in enumerate(basis):
        if T[-1][bv] != 0:
            f = T[-1][bv]
            T[-1] = [a - f * r for a, r in zip(T[-1], T[i])]
    # artificial columns never re-enter in phase two
    _run(T, basis, nvar)
    x = [Fraction(0)] * (2 * n)
    for i, bv in enumerate(basis):
        if bv < 2 * n:
            x[bv] = T[i][-1]
    sol = [x[j] - x[n + j] for j in range(n)]
    return T[-1][-1], sol
