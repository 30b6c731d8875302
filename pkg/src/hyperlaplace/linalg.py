"""Exact dense linear algebra over Scalars (small matrices only)."""

from __future__ import annotations


def identity(space, n):
    return [[space.one if i == j else space.zero for j in range(n)] for i in range(n)]


def matmul(a, b):
    space = a[0][0].space
    return [
        [sum((a[i][k] * b[k][j] for k in range(len(b))), space.zero) for j in range(len(b[0]))]
        for i in range(len(a))
    ]


def _echelon(rows):
    """Reduced row echelon form in place; returns pivot columns."""
    pivots = []
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if not rows[i][c].is_zero), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][c].is_zero:
                f = rows[i][c]
                rows[i] = [vi - f * vr for vi, vr in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots


def solve(a, b):
    """Unique solution of ``a @ x = b``; ValueError if singular or inconsistent."""
    n = len(a[0])
    rows = [list(row) + [bi] for row, bi in zip(a, b)]
    pivots = _echelon(rows)
    if n in pivots:
        raise ValueError("inconsistent linear system")
    if len(pivots) != n:
        raise ValueError("singular linear system")
    return [rows[i][n] for i in range(n)]


def solve_any(a, b):
    """Some solution of ``a @ x = b`` (free unknowns set to zero), or None."""
    space = b[0].space
    n = len(a[0])
    rows = [list(row) + [bi] for row, bi in zip(a, b)]
    pivots = _echelon(rows)
    if n in pivots:
        return None
    x = [space.zero] * n
    for i, c in enumerate(pivots):
        x[c] = rows[i][n]
    return x


def rank(a):
    rows = [list(r) for r in a]
    return len(_echelon(rows)) if rows else 0


def inverse(a):
    n = len(a)
    space = a[0][0].space
    rows = [list(a[i]) + identity(space, n)[i] for i in range(n)]
    pivots = _echelon(rows)
    if pivots[:n] != list(range(n)):
        raise ValueError("singular matrix")
    return [row[n:] for row in rows]


def det(a):
    n = len(a)
    rows = [list(r) for r in a]
    space = a[0][0].space
    d = space.one
    for c in range(n):
        p = next((i for i in range(c, n) if not rows[i][c].is_zero), None)
        if p is None:
            return space.zero
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            d = -d
        d = d * rows[c][c]
        inv = 1 / rows[c][c]
        for i in range(c + 1, n):
            if not rows[i][c].is_zero:
                f = rows[i][c] * inv
                rows[i] = [vi - f * vc for vi, vc in zip(rows[i], rows[c])]
    return d


def nullspace(a):
    """Basis of the right kernel."""
    space = a[0][0].space
    n = len(a[0])
    rows = [list(r) for r in a]
    pivots = _echelon(rows)
    basis = []
    for free in (c for c in range(n) if c not in pivots):
        v = [space.zero] * n
        v[free] = space.one
        for i, c in enumerate(pivots):
            v[c] = -rows[i][free]
        basis.append(v)
    return basis


def charpoly(a):
    """Coefficients ``[c_0, ..., c_n]`` of ``det(lam*I - a)`` (Faddeev-LeVerrier)."""
    n = len(a)
    space = a[0][0].space
    coeffs = [space.zero] * (n + 1)
    coeffs[n] = space.one
    m = [[space.zero] * n for _ in range(n)]
    for k in range(1, n + 1):
        m = matmul(a, m)
        for i in range(n):
            m[i][i] = m[i][i] + coeffs[n - k + 1]
        am = matmul(a, m)
        coeffs[n - k] = -sum((am[i][i] for i in range(n)), space.zero) * (space.one / k)
    return coeffs
