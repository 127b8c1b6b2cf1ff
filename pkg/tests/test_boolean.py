import itertools

import pytest
from hypothesis import given, strategies as st

from boxtopos.boolean import BoolHom, FiniteBooleanAlgebra, free_boolean_algebra
from boxtopos.errors import InputError


@pytest.mark.parametrize("qs, atoms, size", [((), 1, 2), (("a",), 2, 4), (("a", "b"), 4, 16)])
def test_free_algebra_sizes(qs, atoms, size):
    alg = free_boolean_algebra(qs)
    assert alg.n_atoms == atoms and alg.size == size


def test_atom_order_is_binary_word():
    alg = free_boolean_algebra(["b", "a"])
    assert alg.atoms == ((("a", 0), ("b", 0)), (("a", 0), ("b", 1)), (("a", 1), ("b", 0)), (("a", 1), ("b", 1)))


@given(st.integers(0, 3))
def test_boolean_laws(n):
    alg = FiniteBooleanAlgebra(tuple(range(n)))
    els = list(alg.elements())
    for u, v in itertools.product(els, repeat=2):
        assert alg.meet(u, alg.join(u, v)) == u
        assert alg.join(u, alg.complement(u)) == alg.top
        assert alg.meet(u, alg.complement(u)) == alg.bottom
    for u, v, w in itertools.product(els, repeat=3):
        assert alg.meet(u, alg.join(v, w)) == alg.join(alg.meet(u, v), alg.meet(u, w))


def _perm_hom(n, images):
    a = FiniteBooleanAlgebra(tuple(range(n)))
    return BoolHom(a, a, tuple(images))


def test_structural_check_agrees_with_elementwise_laws():
    a = FiniteBooleanAlgebra(("x", "y"))
    b = FiniteBooleanAlgebra(("p", "q", "r"))
    for images in itertools.product(range(b.size), repeat=a.n_atoms):
        h = BoolHom(a, b, images)
        assert bool(h.check()) == bool(h.check_laws())


def test_from_table_rejects_non_join_preserving():
    a = FiniteBooleanAlgebra(("x", "y"))
    table = {0: 0, 1: 1, 2: 2, 3: 1}
    with pytest.raises(InputError):
        BoolHom.from_table(a, a, table)
    assert BoolHom.from_table(a, a, {0: 0, 1: 1, 2: 2, 3: 3}) == BoolHom.identity(a)


def test_top_failure_is_named():
    a = FiniteBooleanAlgebra(("x",))
    h = BoolHom(a, a, (0,))
    assert "top" in h.check().failed


def test_compose_with_identity():
    h = _perm_hom(3, (2, 4, 1))
    ident = BoolHom.identity(h.source)
    assert h.compose(ident) == h and ident.compose(h) == h
