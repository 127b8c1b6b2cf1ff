from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from boxtopos import kernels
from boxtopos.errors import InputError, ResourceError
from boxtopos.polytope import (affine_hull, basic_feasible_solutions, cone_extreme_rays, feasibility,
                               polytope_vertices, rref, solve)


def test_rref_and_solve():
    rows, piv = rref([[2, 4], [1, 2]])
    assert piv == [0] and rows == [[1, 2]]
    assert solve([[2, 1], [1, 3]], [3, 5]) == [Fraction(4, 5), Fraction(7, 5)]
    with pytest.raises(InputError):
        solve([[1, 1], [2, 2]], [1, 2])


def test_affine_hull_of_simplex():
    x0, basis = affine_hull([[1, 1, 1]], [1], 3)
    assert len(basis) == 2
    assert sum(x0) == 1


def test_square_cone_rays():
    # x >= 0, y >= 0 in the plane: rays e1, e2
    assert sorted(cone_extreme_rays([[1, 0], [0, 1]])) == [(0, 1), (1, 0)]


def test_simplex_and_cube_vertices():
    simplex = polytope_vertices([[1, 1, 1]], [1], 3)
    assert sorted(simplex) == sorted([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    # unit square as x + s = 1, y + t = 1
    square = polytope_vertices([[1, 0, 1, 0], [0, 1, 0, 1]], [1, 1], 4)
    assert len(square) == 4


def test_dimension_cap():
    with pytest.raises(ResourceError):
        polytope_vertices([[1] * 6], [1], 6, max_dim=3)


@given(st.integers(2, 5), st.integers(1, 3))
def test_dd_matches_bfs_on_product_of_simplices(n, k):
    # k independent simplices of dimension n-1
    rows, rhs = [], []
    for j in range(k):
        row = [0] * (n * k)
        row[j * n:(j + 1) * n] = [1] * n
        rows.append(row)
        rhs.append(1)
    dd = polytope_vertices(rows, rhs, n * k)
    bfs = basic_feasible_solutions(rows, rhs, n * k)
    assert dd == bfs
    assert len(dd) == n ** k


def test_bfs_kernels_agree():
    rows = [[1, 1, 1, 0], [0, 1, 2, 1]]
    a = basic_feasible_solutions(rows, [1, 1], 4, kernel=kernels.basis_solve_numpy)
    b = basic_feasible_solutions(rows, [1, 1], 4, kernel=kernels.basis_solve_numba)
    assert a == b == polytope_vertices(rows, [1, 1], 4)


def test_feasibility_certificates():
    m = [[1, 0], [0, 1], [1, 1]]
    ok, lam = feasibility(m, [Fraction(1, 3), Fraction(2, 3), 1])
    assert ok and lam == [Fraction(1, 3), Fraction(2, 3)]
    ok, y = feasibility(m, [1, 1, 1])
    assert not ok
    assert all(sum(y[i] * m[i][j] for i in range(3)) <= 0 for j in range(2))
    assert sum(y[i] * q for i, q in enumerate([1, 1, 1])) > 0


@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=1, max_size=4),
       st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_feasibility_always_certified(m, q):
    q = q[:len(m)]
    ok, cert = feasibility(m, q)
    if ok:
        assert all(x >= 0 for x in cert)
        assert all(sum(m[i][j] * cert[j] for j in range(3)) == q[i] for i in range(len(m)))
    else:
        assert all(sum(cert[i] * m[i][j] for i in range(len(m))) <= 0 for j in range(3))
        assert sum(cert[i] * q[i] for i in range(len(m))) > 0
