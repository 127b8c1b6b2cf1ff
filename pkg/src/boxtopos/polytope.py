"""Exact rational polyhedral routines.

* :func:`rref` and :func:`affine_hull`: Gauss-Jordan over ``Fraction``.
* :func:`polytope_vertices`: double description on the homogenised cone,
  rays kept as primitive integer vectors.
* :func:`basic_feasible_solutions`: independent vertex oracle that tries
  every column basis of the equality system (batched integer kernel).
* :func:`feasibility`: Phase I simplex with Bland's rule, returning either a
  nonnegative solution or an exact Farkas certificate.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .errors import InputError, ResourceError

Vector = tuple


def _frac_rows(rows) -> list[list[Fraction]]:
    return [[Fraction(v) for v in row] for row in rows]


def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; zero rows are dropped. Returns ``(rows, pivots)``."""
    m = _frac_rows(rows)
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        lead = m[r][col]
        m[r] = [v / lead for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def solve(a: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Unique solution of a square nonsingular system."""
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    red, piv = rref(aug)
    n = len(a[0]) if a else 0
    if piv != list(range(n)):
        raise InputError("system is singular")
    return [red[i][n] for i in range(n)]


def integer_row(row: Sequence[Fraction]) -> list[int]:
    """Scale a rational row to a primitive integer row (same sign)."""
    den = 1
    for v in row:
        den = den * Fraction(v).denominator // math.gcd(den, Fraction(v).denominator)
    ints = [int(Fraction(v) * den) for v in row]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    return [v // g for v in ints] if g > 1 else ints


def independent_equalities(a_eq, b_eq):
    """Row-reduced equivalent system ``(A, b)`` with independent rows.

    Raises :class:`InputError` if the system is inconsistent.
    """
    n = len(a_eq[0]) if a_eq else 0
    aug = [list(row) + [rhs] for row, rhs in zip(a_eq, b_eq)]
    red, piv = rref(aug)
    if n in piv:
        raise InputError("equality system is inconsistent")
    return [row[:n] for row in red], [row[n] for row in red], piv


def affine_hull(a_eq, b_eq, n: int):
    """Parametrise ``{x : A x = b}`` as ``x0 + N t``.

    Returns ``(x0, basis)`` where ``basis`` lists the ``k`` direction vectors.
    """
    if not a_eq:
        return [Fraction(0)] * n, [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    rows, rhs, piv = independent_equalities(a_eq, b_eq)
    x0 = [Fraction(0)] * n
    for r, col in enumerate(piv):
        x0[col] = rhs[r]
    free = [j for j in range(n) if j not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, col in enumerate(piv):
            v[col] = -rows[r][f]
        basis.append(v)
    return x0, basis


# -- double description ------------------------------------------------------

def _primitive(v: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for x in v:
        g = math.gcd(g, x)
    return tuple(x // g for x in v) if g > 1 else tuple(v)


def _dot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


def cone_extreme_rays(g: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Extreme rays of the pointed cone ``{y : G y >= 0}`` (``G`` integer, full column rank)."""
    g = [list(map(int, row)) for row in g]
    d = len(g[0])
    # initial simplicial cone from d independent rows, picked greedily
    basis_rows: list[int] = []
    for i in range(len(g)):
        trial = [g[j] for j in basis_rows + [i]]
        if len(rref(trial)[1]) == len(trial):
            basis_rows.append(i)
        if len(basis_rows) == d:
            break
    if len(basis_rows) < d:
        raise InputError("constraint matrix does not have full column rank; cone is not pointed")
    b = [[Fraction(v) for v in g[i]] for i in basis_rows]
    rays = []
    for k in range(d):
        e = [Fraction(int(i == k)) for i in range(d)]
        col = solve(b, e)  # B r_k = e_k, so r_k is tight on every basis row except k
        rays.append(_primitive(integer_row(col)))
    processed = list(basis_rows)

    def zero_set(r) -> int:
        z = 0
        for pos, i in enumerate(processed):
            if _dot(g[i], r) == 0:
                z |= 1 << pos
        return z

    zeros = [zero_set(r) for r in rays]
    for i in range(len(g)):
        if i in basis_rows:
            continue
        vals = [_dot(g[i], r) for r in rays]
        pos = [k for k, v in enumerate(vals) if v > 0]
        neg = [k for k, v in enumerate(vals) if v < 0]
        zer = [k for k, v in enumerate(vals) if v == 0]
        new_rays = [rays[k] for k in pos + zer]
        new_zeros = [zeros[k] for k in pos + zer]
        for kp in pos:
            for kn in neg:
                common = zeros[kp] & zeros[kn]
                if bin(common).count("1") < d - 2:
                    continue
                # adjacent iff no third ray is tight on every common constraint
                if any(k not in (kp, kn) and zeros[k] & common == common for k in range(len(rays))):
                    continue
                r = _primitive([vals[kp] * a - vals[kn] * b_ for a, b_ in zip(rays[kn], rays[kp])])
                new_rays.append(r)
                new_zeros.append(common)
        processed.append(i)
        bit = 1 << (len(processed) - 1)
        rays = new_rays
        zeros = [z | (bit if _dot(g[i], r) == 0 else 0) for z, r in zip(new_zeros, rays)]
    return sorted(set(rays))


def polytope_vertices(a_eq, b_eq, n: int, max_dim: int = 16) -> list[tuple[Fraction, ...]]:
    """Vertices of ``{x ∈ Q^n : A x = b, x >= 0}`` (assumed bounded)."""
    x0, basis = affine_hull(a_eq, b_eq, n)
    k = len(basis)
    if k > max_dim:
        raise ResourceError(f"polytope has {k} free coordinates, above the cap of {max_dim}", max_dim)
    if k == 0:
        return [tuple(x0)] if all(v >= 0 for v in x0) else []
    # homogenise: y = (s, t), x = x0 s + N t >= 0, s >= 0
    cone = [[1] + [0] * k]
    for i in range(n):
        cone.append(integer_row([x0[i]] + [basis[j][i] for j in range(k)]))
    out = set()
    for ray in cone_extreme_rays(cone):
        s = ray[0]
        if s <= 0:
            raise InputError("polytope is unbounded")
        x = tuple(x0[i] + sum(Fraction(ray[j + 1], s) * basis[j][i] for j in range(k)) for i in range(n))
        out.add(x)
    return sorted(out)


# -- basic feasible solutions (independent oracle) ---------------------------

MAX_BASES = 2_000_000


def _hadamard_ok(a: np.ndarray, b: np.ndarray) -> bool:
    aug = np.concatenate([a, b[:, None]], axis=1).astype(object)
    bound = 1
    for row in aug:
        bound *= math.isqrt(int(sum(int(v) * int(v) for v in row))) + 1
    return 2 * bound * bound < 2 ** 62


def _basis_solve_python(a, b, combos):
    det = np.zeros(len(combos), dtype=object)
    num = np.zeros((len(combos), a.shape[0]), dtype=object)
    for t, cols in enumerate(combos):
        sub = [[int(a[i, j]) for j in cols] for i in range(a.shape[0])]
        try:
            x = solve(sub, [int(v) for v in b])
        except InputError:
            continue
        den = math.lcm(*(v.denominator for v in x)) if x else 1
        det[t] = den
        num[t] = [int(v * den) for v in x]
    return det, num


def basic_feasible_solutions(a_eq, b_eq, n: int, kernel=None) -> list[tuple[Fraction, ...]]:
    """Vertices of ``{A x = b, x >= 0}`` as the distinct nonnegative basic solutions."""
    rows, rhs, _ = independent_equalities(a_eq, b_eq) if a_eq else ([], [], [])
    m = len(rows)
    if m == 0:
        zero = tuple(Fraction(0) for _ in range(n))
        return [zero]
    ints = [integer_row(list(r) + [v]) for r, v in zip(rows, rhs)]
    a = np.array([r[:n] for r in ints], dtype=np.int64)
    b = np.array([r[n] for r in ints], dtype=np.int64)
    count = math.comb(n, m)
    if count > MAX_BASES:
        raise ResourceError(f"{count} column bases exceed the oracle cap of {MAX_BASES}", MAX_BASES)
    combos = np.array(list(itertools.combinations(range(n), m)), dtype=np.int64).reshape(count, m)
    if _hadamard_ok(a, b):
        det, num = (kernel or kernels.basis_solve)(a, b, combos)
    else:
        det, num = _basis_solve_python(a, b, combos)
    out = set()
    for t in range(count):
        d = int(det[t])
        if d == 0:
            continue
        x = [Fraction(0)] * n
        ok = True
        for i, col in enumerate(combos[t]):
            v = Fraction(int(num[t][i]), d)
            if v < 0:
                ok = False
                break
            x[int(col)] = v
        if ok:
            out.add(tuple(x))
    return sorted(out)


# -- exact Phase I simplex ---------------------------------------------------

def feasibility(m_rows: Sequence[Sequence], q: Sequence):
    """Decide whether ``M λ = q`` has a solution with ``λ >= 0``.

    Returns ``(True, λ)`` or ``(False, y)`` where ``y`` satisfies
    ``yᵀM <= 0`` componentwise and ``yᵀq > 0`` (a Farkas certificate).
    Both answers are re-verified exactly before returning.
    """
    mat = _frac_rows(m_rows)
    rhs = [Fraction(v) for v in q]
    r = len(mat)
    v = len(mat[0]) if r else 0
    signs = [1 if b >= 0 else -1 for b in rhs]
    mat = [[s * x for x in row] for s, row in zip(signs, mat)]
    rhs = [s * b for s, b in zip(signs, rhs)]
    ncol = v + r
    # tableau rows: [M | I | rhs]
    tab = [row + [Fraction(int(i == j)) for j in range(r)] + [b] for i, (row, b) in enumerate(zip(mat, rhs))]
    cost = [Fraction(0)] * v + [Fraction(1)] * r
    basis = [v + i for i in range(r)]
    # reduced costs c_j - c_B B^-1 A_j, kept as an extra row and pivoted along
    red = [cost[j] - sum((tab[i][j] for i in range(r)), Fraction(0)) for j in range(ncol)] + [Fraction(0)]
    while True:
        enter = next((j for j in range(ncol) if red[j] < 0), None)  # Bland's rule
        if enter is None:
            break
        ratios = [(tab[i][-1] / tab[i][enter], basis[i], i) for i in range(r) if tab[i][enter] > 0]
        if not ratios:  # cannot happen: Phase I objective is bounded below by 0
            raise RuntimeError("unbounded Phase I")
        _, _, leave = min(ratios)
        piv = tab[leave][enter]
        prow = tab[leave] = [x / piv for x in tab[leave]]
        nz = [j for j, x in enumerate(prow) if x]
        for row in tab + [red]:
            f = row[enter]
            if row is not prow and f:
                for j in nz:
                    row[j] -= f * prow[j]
        basis[leave] = enter
    objective = sum(cost[basis[i]] * tab[i][-1] for i in range(r))
    orig = _frac_rows(m_rows)
    origq = [Fraction(x) for x in q]
    if objective == 0:
        lam = [Fraction(0)] * v
        for i, j in enumerate(basis):
            if j < v:
                lam[j] = tab[i][-1]
        if any(x < 0 for x in lam) or any(
                sum(row[j] * lam[j] for j in range(v)) != b for row, b in zip(orig, origq)):
            raise RuntimeError("simplex returned an invalid solution")
        return True, lam
    # dual y solves B^T y = c_B for the final basis B (in the sign-adjusted system)
    bmat = [[(mat[i][j] if j < v else Fraction(int(j - v == i))) for j in basis] for i in range(r)]
    bt = [[bmat[i][k] for i in range(r)] for k in range(r)]
    y = solve(bt, [cost[j] for j in basis])
    y = [s * val for s, val in zip(signs, y)]
    if any(sum(y[i] * orig[i][j] for i in range(r)) > 0 for j in range(v)) or \
            sum(yi * b for yi, b in zip(y, origq)) <= 0:
        raise RuntimeError("simplex returned an invalid Farkas certificate")
    return False, y
