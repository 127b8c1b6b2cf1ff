import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from boxtopos.boolean import FiniteBooleanAlgebra
from boxtopos.errors import ValidationError
from boxtopos.logic import gbit, general_theory, maximal_contexts, pr_presentation
from boxtopos.phase_space import principal_section, sections_at, upper_set_to_section, phase_space
from boxtopos.poset import FinitePoset, upper_closure
from boxtopos.states import (BoxState, deterministic_state, global_assignments, ns_polytope_vertices,
                             pr_box, random_mixture, uniform_state, validate_state)
from boxtopos.valuations import (InternalValuation, LowerRealAt, check_dedekind_constancy,
                                 colimit_to_valuation, constant_candidate, frame_to_lattice_valuation,
                                 lattice_to_frame_valuation, natural_candidate, state_to_valuation,
                                 table_to_valuation, validate_frame_valuation, validate_valuation,
                                 valuation_from_maximal, valuation_to_colimit, valuation_to_state)

F = frozenset
half = Fraction(1, 2)
PR = pr_presentation()
VERTICES = ns_polytope_vertices(PR)


def test_uniform_valuation_valid():
    assert validate_valuation(state_to_valuation(uniform_state(PR)))


def test_modularity_counterexample():
    c = FinitePoset(["*"])
    a = FiniteBooleanAlgebra(("x", "y"))
    d = general_theory(c, {"*": a}, {})
    v = InternalValuation(d, {"*": (0, 1, 1, 1)})
    chk = validate_valuation(v)
    assert chk.failed == {"modularity"}


def test_signalling_table_fails_naturality():
    table = {c: dict(row) for c, row in uniform_state(PR).table.items()}
    table[F({"a1", "b1"})] = {x: Fraction(int(x == (("a1", 0), ("b1", 0)))) for x in table[F({"a1", "b1"})]}
    v = table_to_valuation(BoxState(PR, table))
    chk = validate_valuation(v)
    assert "naturality" in chk.failed
    with pytest.raises(ValidationError):
        state_to_valuation(BoxState(PR, table))


def test_state_to_valuation_values():
    v = state_to_valuation(pr_box())
    c = F({"a1", "b1"})
    alg = v.diagram.algebras[c]
    u = alg.element([(("a1", 0), ("b1", 0)), (("a1", 1), ("b1", 1))])
    assert v(c, u) == 1
    assert all(v(c2, v.diagram.algebras[c2].top) == 1 for c2 in v.diagram.contexts)
    g = global_assignments(PR)[5]
    vd = state_to_valuation(deterministic_state(PR, g))
    for c2 in vd.diagram.contexts:
        alg2 = vd.diagram.algebras[c2]
        x = tuple((q, g[q]) for q in sorted(c2))
        for w in alg2.elements():
            assert vd(c2, w) == (1 if x in alg2.atoms_of(w) else 0)


def test_roundtrip_on_vertices_and_uniform():
    for s in VERTICES + [uniform_state(PR), uniform_state(gbit())]:
        v = state_to_valuation(s)
        assert validate_valuation(v)
        assert valuation_to_state(v) == s


@given(st.integers(0, 2 ** 32 - 1))
def test_roundtrip_random(seed):
    s = random_mixture(VERTICES, np.random.default_rng(seed))
    assert valuation_to_state(state_to_valuation(s)) == s


@given(st.integers(0, 2 ** 32 - 1))
def test_modularity_is_atom_additivity(seed):
    s = random_mixture(VERTICES, np.random.default_rng(seed))
    v = state_to_valuation(s)
    for c in v.diagram.contexts:
        alg = v.diagram.algebras[c]
        w = v.atom_weights(c)
        for u in alg.elements():
            assert v(c, u) == sum((w[i] for i in range(alg.n_atoms) if u >> i & 1), Fraction(0))


@given(st.integers(1, 3).flatmap(
    lambda n: st.lists(st.fractions(-1, 2, max_denominator=3), min_size=2 ** n, max_size=2 ** n)))
def test_fast_checks_match_pairwise_oracle(table):
    n = len(table).bit_length() - 1
    c = FinitePoset(["*"])
    d = general_theory(c, {"*": FiniteBooleanAlgebra(tuple(f"a{i}" for i in range(n)))}, {})
    failed = validate_valuation(InternalValuation(d, {"*": tuple(table)})).failed
    pairs = list(itertools.product(range(len(table)), repeat=2))
    modular = all(table[a | b] + table[a & b] == table[a] + table[b] for a, b in pairs)
    isotone = all(table[a] <= table[b] for a, b in pairs if a & ~b == 0)
    assert ("modularity" not in failed) == modular
    assert ("isotony" not in failed) == isotone


def test_perturbation_rejected_by_both():
    base = VERTICES[3]
    for k in range(16):
        vec = list(base.vector())
        vec[k] += Fraction(1, 1000)
        t = BoxState.from_vector(PR, vec)
        assert not validate_state(t)
        assert "naturality" in validate_valuation(table_to_valuation(t)).failed


@given(st.lists(st.fractions(0, 1, max_denominator=4), min_size=16, max_size=16))
def test_validators_agree_on_arbitrary_tables(entries):
    t = BoxState.from_vector(PR, entries)
    vs = validate_state(t)
    vv = validate_valuation(table_to_valuation(t))
    assert ("non-signalling" in vs.failed) == ("naturality" in vv.failed)
    assert ("normalization" in vs.failed) == ("normalization" in vv.failed)
    assert bool(vs) == bool(vv)


def test_gbit_colimit_valuation():
    v = state_to_valuation(uniform_state(gbit()))
    cv = valuation_to_colimit(v)
    assert len(cv.rho) == 6
    assert sorted(cv.rho) == [0, half, half, half, half, 1]
    assert colimit_to_valuation(cv) == v


def test_colimit_bounds_and_uniqueness():
    for s in VERTICES[:6]:
        v = state_to_valuation(s)
        cv = valuation_to_colimit(v)
        d = v.diagram
        assert cv(F(), 0) == 0 and cv(F(), 1) == 1
        rows = {c: v.per_context[c] for c in maximal_contexts(d.contexts)}
        rebuilt = valuation_from_maximal(d, rows)
        assert rebuilt == v
        assert valuation_to_colimit(rebuilt).rho == cv.rho


def test_descent_failure_names_pair():
    table = {c: dict(row) for c, row in uniform_state(PR).table.items()}
    table[F({"a1", "b1"})] = {x: Fraction(int(x == (("a1", 0), ("b1", 0)))) for x in table[F({"a1", "b1"})]}
    v = table_to_valuation(BoxState(PR, table))
    with pytest.raises(ValidationError, match="descent"):
        valuation_to_colimit(v)


def test_frame_valuation_examples():
    v = state_to_valuation(uniform_state(gbit()))
    f = lattice_to_frame_valuation(v)
    d = v.diagram
    for c in d.contexts:
        r = f(principal_section(d, c, d.algebras[c].top))
        assert r.is_constant and set(r.values) == {1}
    q1 = F({"q1"})
    s = principal_section(d, F(), 0)
    s = type(s)(F(), s.stages, tuple(d.algebras[c].element([(("q1", 0),)]) if c == q1 else 0 for c in s.stages))
    r = f(s)
    assert r[F()] == 0 and r[q1] == half and r[F({"q2"})] == 0


def test_frame_lattice_roundtrip_gbit_exhaustive():
    v = state_to_valuation(uniform_state(gbit()))
    d = v.diagram
    f = lattice_to_frame_valuation(v)
    assert frame_to_lattice_valuation(f) == v
    g = lattice_to_frame_valuation(frame_to_lattice_valuation(f))
    for c in d.contexts:
        secs = sections_at(d, c)
        assert all(f(s) == g(s) for s in secs)
        assert validate_frame_valuation(f, secs)


def test_frame_valuation_pr_sampled_sections():
    s = random_mixture(VERTICES, np.random.default_rng(7))
    v = state_to_valuation(s)
    d = v.diagram
    f = lattice_to_frame_valuation(v)
    assert frame_to_lattice_valuation(f) == v
    ps = phase_space(d)
    pts = list(ps.points)
    rng = np.random.default_rng(11)
    secs = set()
    for _ in range(40):
        seeds = [pts[int(i)] for i in rng.choice(len(pts), size=int(rng.integers(0, 5)), replace=False)]
        secs.add(upper_set_to_section(ps, F(), upper_closure(ps.points, seeds).members))
    secs = list(secs)
    closed = set(secs)
    for a, b in itertools.combinations(secs, 2):
        closed.add(a.meet(b))
        closed.add(a.join(b))
    assert validate_frame_valuation(f, closed)


def test_frame_valuations_are_stage_dependent():
    v = state_to_valuation(uniform_state(gbit()))
    d = v.diagram
    f = lattice_to_frame_valuation(v)
    assert any(not f(s).is_constant for s in sections_at(d, F()))


def test_broken_frame_valuation_rejected():
    v = state_to_valuation(uniform_state(gbit()))
    d = v.diagram
    good = lattice_to_frame_valuation(v)

    def rule(s):
        r = good(s)
        return LowerRealAt(r.stage, r.stages, tuple(x * x for x in r.values))

    bad = type(good)(d, rule)
    assert "modularity" in validate_frame_valuation(bad, sections_at(d, F())).failed


def test_dedekind_constancy():
    v = state_to_valuation(pr_box())
    assert check_dedekind_constancy(v.diagram, constant_candidate(v))
    assert check_dedekind_constancy(v.diagram, natural_candidate(v))
    c = FinitePoset(["*"])
    a = FiniteBooleanAlgebra(("x", "y"))
    d1 = general_theory(c, {"*": a}, {})
    single = InternalValuation(d1, {"*": (0, Fraction(1, 3), Fraction(2, 3), 1)})
    assert check_dedekind_constancy(d1, constant_candidate(single))


def test_increasing_complemented_value_breaks_modularity():
    v = state_to_valuation(uniform_state(PR))
    d = v.diagram
    cand = constant_candidate(v)
    a1 = F({"a1"})
    u = d.algebras[a1].element([(("a1", 0),)])
    r = cand[(a1, u)]
    cand[(a1, u)] = LowerRealAt(a1, r.stages, tuple(half if c == a1 else Fraction(1) for c in r.stages))
    rep = check_dedekind_constancy(d, cand)
    assert "modularity" in rep.preconditions.failed
    assert "constancy" in rep.constancy.failed


def test_gbit_increasing_top_breaks_normalization():
    v = state_to_valuation(uniform_state(gbit()))
    d = v.diagram
    cand = constant_candidate(v)
    r = cand[(F(), 1)]
    cand[(F(), 1)] = LowerRealAt(F(), r.stages, tuple(half if c == F() else Fraction(1) for c in r.stages))
    rep = check_dedekind_constancy(d, cand)
    assert "normalization" in rep.preconditions.failed
    assert not rep


@given(st.integers(0, 2 ** 32 - 1))
def test_preconditions_force_constancy(seed):
    s = random_mixture(VERTICES, np.random.default_rng(seed))
    v = state_to_valuation(s)
    rep = check_dedekind_constancy(v.diagram, natural_candidate(v))
    assert rep.preconditions and rep.constancy
