"""Probability valuations on logic diagrams and on their ideal completions.

An :class:`InternalValuation` stores one exact table per context, indexed by
algebra element. Values are plain rationals because on a Boolean diagram every
valuation is constant along refinement; genuinely stage-dependent values only
show up for :class:`FrameValuation`, whose values are :class:`LowerRealAt`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping

import numpy as np

from .boolean import EXHAUSTIVE_LIMIT
from .errors import Check, InputError, ResourceError, ValidationError
from .logic import ColimitPresentation, LogicDiagram, colimit, logic_diagram, maximal_contexts
from .phase_space import CompatibleSection, _stages, principal_section
from .poset import canonical_sorted, label
from .states import BoxState, _require_valid

# full element tables are kept only for algebras up to this many atoms
MAX_TABLE_ATOMS = 16
SAMPLE_PAIRS = 4096

ZERO = Fraction(0)


def _subset_sums(weights) -> tuple:
    """Table ``u ↦ Σ_{i ∈ u} weights[i]`` over all masks."""
    n = len(weights)
    if n > MAX_TABLE_ATOMS:
        raise ResourceError(f"algebra with {n} atoms exceeds the table limit of {MAX_TABLE_ATOMS}",
                            MAX_TABLE_ATOMS)
    table = [ZERO] * (1 << n)
    for u in range(1, 1 << n):
        low = u & -u
        table[u] = table[u ^ low] + weights[low.bit_length() - 1]
    return tuple(table)


@dataclass(frozen=True, eq=False)
class InternalValuation:
    """``per_context[c][u]`` is ``P_c(u)`` for every element ``u`` of ``L(c)``."""

    diagram: LogicDiagram
    per_context: Mapping

    def __post_init__(self):
        tables = {}
        for c in self.diagram.contexts:
            if c not in self.per_context:
                raise InputError(f"valuation has no table for context {label(c)}")
            row = tuple(Fraction(x) for x in self.per_context[c])
            if len(row) != self.diagram.algebras[c].size:
                raise InputError(f"table for {label(c)} has {len(row)} entries, "
                                 f"expected {self.diagram.algebras[c].size}")
            tables[c] = row
        object.__setattr__(self, "per_context", tables)

    def __call__(self, c, u: int) -> Fraction:
        return self.per_context[c][u]

    def atom_weights(self, c) -> tuple:
        return tuple(self.per_context[c][1 << i] for i in range(self.diagram.algebras[c].n_atoms))

    def __eq__(self, other) -> bool:
        if not isinstance(other, InternalValuation):
            return NotImplemented
        return self.diagram.contexts == other.diagram.contexts and self.per_context == other.per_context

    __hash__ = None

    @classmethod
    def from_atom_weights(cls, d: LogicDiagram, weights: Mapping) -> "InternalValuation":
        """Additive valuation from per-context atom weights."""
        return cls(d, {c: _subset_sums([Fraction(w) for w in weights[c]]) for c in d.contexts})


def _pairs(size: int, rng):
    if size <= EXHAUSTIVE_LIMIT:
        return itertools.product(range(size), repeat=2)
    rng = rng if rng is not None else np.random.default_rng(0)
    return ((int(a), int(b)) for a, b in rng.integers(0, size, size=(SAMPLE_PAIRS, 2)))


def _modularity_witness(p) -> tuple | None:
    """First pair breaking ``P(u ∨ v) + P(u ∧ v) = P(u) + P(v)``, or ``None``.

    On a finite Boolean algebra modularity holds iff
    ``P(u) = P(0) + Σ_{i ∈ u} (P({i}) - P(0))``. Scanning masks upward, the
    first ``u`` off that formula fails modularity on the disjoint pair
    (lowest atom of ``u``, rest of ``u``), both of which are smaller.
    """
    zero = p[0]
    expected = [zero] * len(p)
    for u in range(1, len(p)):
        low = u & -u
        expected[u] = expected[u ^ low] + p[low] - zero
        if expected[u] != p[u]:
            return low, u ^ low
    return None


def _isotony_witness(p, n_atoms: int) -> tuple | None:
    """First covering pair ``u < u ∨ {i}`` with a drop in value; covers suffice by transitivity."""
    for u in range(len(p)):
        for i in range(n_atoms):
            v = u | (1 << i)
            if v != u and p[u] > p[v]:
                return u, v
    return None


def validate_valuation(v: InternalValuation) -> Check:
    """Range, normalisation, modularity, isotony and naturality, all exact.

    Modularity and isotony are decided in time linear in the algebra size
    (see :func:`_modularity_witness`); naturality is checked on every element.
    """
    chk = Check()
    d = v.diagram
    for c in d.contexts:
        alg = d.algebras[c]
        p = v.per_context[c]
        bad = next((u for u, x in enumerate(p) if not 0 <= x <= 1), None)
        if bad is not None:
            chk.fail("range", f"P_{label(c)}({bad}) = {p[bad]} lies outside [0, 1]")
        if p[0] != 0:
            chk.fail("normalization", f"P_{label(c)}(0) = {p[0]}")
        if p[alg.top] != 1:
            chk.fail("normalization", f"P_{label(c)}(1) = {p[alg.top]}")
        w = _modularity_witness(p)
        if w:
            chk.fail("modularity", f"at ({label(c)}, {w[0]}, {w[1]})")
        w = _isotony_witness(p, alg.n_atoms)
        if w:
            chk.fail("isotony", f"at ({label(c)}, {w[0]}, {w[1]})")
    for c, c2 in d.contexts.relation():
        if c == c2:
            continue
        h = d.transition(c, c2)
        p, q = v.per_context[c], v.per_context[c2]
        for u in d.algebras[c].elements():
            if q[h(u)] != p[u]:
                chk.fail("naturality",
                         f"P_{label(c2)} of the image of {u} is {q[h(u)]} but P_{label(c)}({u}) = {p[u]}")
                break
    return chk


# -- states and valuations ---------------------------------------------------

def _first_refinement(s: BoxState, c) -> frozenset:
    return next(d for d in canonical_sorted(s.table) if c <= d)


def table_to_valuation(s: BoxState) -> InternalValuation:
    """Lift any table, valid or not; smaller contexts read off the first maximal refinement.

    Used to compare the two validators on signalling or unnormalised input.
    """
    d = logic_diagram(s.presentation)
    weights = {}
    for c in d.contexts:
        m = _first_refinement(s, c)
        weights[c] = [s.raw_marginal(c, x, m) for x in d.algebras[c].atoms]
    return InternalValuation.from_atom_weights(d, weights)


def state_to_valuation(s: BoxState) -> InternalValuation:
    """``P_c(u) = Σ_{x ∈ u} marginal(s, c, x)``."""
    _require_valid(s)
    return table_to_valuation(s)


def valuation_to_state(v: InternalValuation) -> BoxState:
    """Read ``p(x | c) = P_c({x})`` off the maximal contexts."""
    b = v.diagram.presentation
    if b is None:
        raise InputError("valuation does not live on a box presentation")
    chk = validate_valuation(v)
    if not chk:
        raise ValidationError("invalid valuation: " + "; ".join(chk.messages))
    table = {c: dict(zip(v.diagram.algebras[c].atoms, v.atom_weights(c)))
             for c in maximal_contexts(v.diagram.contexts)}
    return BoxState(b, table)


# -- colimit form ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ColimitValuation:
    """``rho[k]`` is the value on colimit class ``k``."""

    colim: ColimitPresentation
    rho: tuple

    def __call__(self, c, u: int) -> Fraction:
        return self.rho[self.colim.iota(c, u)]


def valuation_to_colimit(v: InternalValuation, colim: ColimitPresentation | None = None) -> ColimitValuation:
    """Descend ``v`` along the quotient maps; conflicts name both representatives."""
    colim = colim or colimit(v.diagram)
    rho: list = [None] * len(colim)
    witness: list = [None] * len(colim)
    for c, u in v.diagram.elements():
        k = colim.iota(c, u)
        val = v(c, u)
        if rho[k] is None:
            rho[k], witness[k] = val, (c, u)
        elif rho[k] != val:
            c0, u0 = witness[k]
            raise ValidationError(
                f"descent fails: ({label(c0)}, {u0}) and ({label(c)}, {u}) are identified "
                f"but take values {rho[k]} and {val}")
    return ColimitValuation(colim, tuple(rho))


def colimit_to_valuation(cv: ColimitValuation) -> InternalValuation:
    d = cv.colim.diagram
    return InternalValuation(d, {c: tuple(cv(c, u) for u in d.algebras[c].elements()) for c in d.contexts})


def valuation_from_maximal(d: LogicDiagram, rows: Mapping) -> InternalValuation:
    """Rebuild a natural valuation from its maximal-context tables alone.

    Every context sits below some maximal one, and naturality fixes ``P_c`` as
    the pullback of that table along the transition.
    """
    per = {}
    maximal = canonical_sorted(maximal_contexts(d.contexts))
    for c in d.contexts:
        m = next(m for m in maximal if d.contexts.leq(c, m))
        h = d.transition(c, m)
        per[c] = tuple(Fraction(rows[m][h(u)]) for u in d.algebras[c].elements())
    return InternalValuation(d, per)


# -- lower reals and frame valuations -----------------------------------------

@dataclass(frozen=True)
class LowerRealAt:
    """Isotone map ``↑stage -> [0, 1]`` stored as parallel tuples."""

    stage: Hashable
    stages: tuple
    values: tuple

    def __getitem__(self, c) -> Fraction:
        return self.values[self.stages.index(c)]

    def items(self):
        return zip(self.stages, self.values)

    @property
    def is_constant(self) -> bool:
        return len(set(self.values)) <= 1

    @classmethod
    def constant(cls, d: LogicDiagram, stage, value) -> "LowerRealAt":
        stages = _stages(d, stage)
        return cls(stage, stages, (Fraction(value),) * len(stages))

    def restrict(self, d: LogicDiagram, c) -> "LowerRealAt":
        stages = _stages(d, c)
        return LowerRealAt(c, stages, tuple(self[s] for s in stages))

    def __add__(self, other: "LowerRealAt") -> tuple:
        return tuple(a + b for a, b in zip(self.values, other.values))


def check_lower_real(d: LogicDiagram, r: LowerRealAt) -> Check:
    chk = Check()
    if r.stages != _stages(d, r.stage):
        chk.fail("domain", f"lower real at {label(r.stage)} is not defined on exactly the up-set")
        return chk
    for c, x in r.items():
        if not 0 <= x <= 1:
            chk.fail("range", f"value {x} at {label(c)} lies outside [0, 1]")
    for (c, x), (c2, y) in itertools.product(r.items(), repeat=2):
        if d.contexts.lt(c, c2) and x > y:
            chk.fail("isotony", f"value drops from {x} at {label(c)} to {y} at {label(c2)}")
    return chk


@dataclass(frozen=True, eq=False)
class FrameValuation:
    """Assigns a lower real at stage ``s.base`` to each compatible section ``s``."""

    diagram: LogicDiagram
    rule: Callable[[CompatibleSection], LowerRealAt]

    def value(self, s: CompatibleSection) -> LowerRealAt:
        return self.rule(s)

    __call__ = value


def lattice_to_frame_valuation(v: InternalValuation) -> FrameValuation:
    """Extend along the ideal completion: ``s ↦ (c' ↦ P_{c'}(s(c')))``.

    At a finite stage every ideal is principal, so the directed supremum in the
    extension formula is attained at the generator.
    """
    def rule(s: CompatibleSection) -> LowerRealAt:
        return LowerRealAt(s.base, s.stages, tuple(v(c, u) for c, u in s.items()))

    return FrameValuation(v.diagram, rule)


def frame_to_lattice_valuation(f: FrameValuation) -> InternalValuation:
    """Restrict along principal sections and read the value at the base stage."""
    d = f.diagram
    return InternalValuation(d, {c: tuple(f(principal_section(d, c, u))[c] for u in d.algebras[c].elements())
                                 for c in d.contexts})


def validate_frame_valuation(f: FrameValuation, sections: Iterable[CompatibleSection]) -> Check:
    """Lower-real values, normalisation, modularity, isotony and continuity on ``sections``.

    ``sections`` should be closed under meet and join for the modularity check
    to be complete; pairs whose meet or join is missing are still evaluated.
    """
    chk = Check()
    d = f.diagram
    secs = list(sections)
    vals = [f(s) for s in secs]
    for s, r in zip(secs, vals):
        sub = check_lower_real(d, r)
        for m in sub.messages:
            chk.fail("lower-real", f"section at {label(s.base)}: {m}")
    for base in {s.base for s in secs}:
        bottom = CompatibleSection(base, _stages(d, base), (0,) * len(_stages(d, base)))
        top = principal_section(d, base, d.algebras[base].top)
        if any(x != 0 for x in f(bottom).values):
            chk.fail("normalization", f"bottom section at {label(base)} is not sent to 0")
        if any(x != 1 for x in f(top).values):
            chk.fail("normalization", f"top section at {label(base)} is not sent to 1")
    for (s, r), (t, q) in itertools.combinations(zip(secs, vals), 2):
        if s.base != t.base:
            continue
        meet, join = f(s.meet(t)), f(s.join(t))
        if join + meet != r + q:
            chk.fail("modularity", f"sections {s.masks} and {t.masks} at {label(s.base)}")
        for lo, hi, a, b in ((s, t, r, q), (t, s, q, r)):
            if lo <= hi:
                if any(x > y for x, y in zip(a.values, b.values)):
                    chk.fail("isotony", f"sections {lo.masks} <= {hi.masks} at {label(s.base)}")
                # a directed pair has its larger member as join
                if join.values != tuple(max(x, y) for x, y in zip(a.values, b.values)):
                    chk.fail("continuity", f"join of {lo.masks} <= {hi.masks} at {label(s.base)}")
    return chk


# -- Dedekind constancy ------------------------------------------------------

@dataclass
class ConstancyReport:
    preconditions: Check
    constancy: Check

    def __bool__(self) -> bool:
        return bool(self.preconditions) and bool(self.constancy)


def constant_candidate(v: InternalValuation) -> dict:
    """Internal valuation viewed as lower-real valued: ``(c, u) ↦ constant P_c(u)`` on ``↑c``."""
    d = v.diagram
    return {(c, u): LowerRealAt.constant(d, c, v(c, u)) for c, u in d.elements()}


def natural_candidate(v: InternalValuation) -> dict:
    """``(c, u) ↦ (c' ↦ P_{c'}(L(c <= c') u))``; constant exactly when ``v`` is natural."""
    d = v.diagram
    out = {}
    for c, u in d.elements():
        st = _stages(d, c)
        out[(c, u)] = LowerRealAt(c, st, tuple(v(c2, d.transition(c, c2)(u)) for c2 in st))
    return out


def check_dedekind_constancy(d: LogicDiagram, candidate: Mapping) -> ConstancyReport:
    """Is every value of a lower-real valued valuation a constant map?

    ``candidate[(c, u)]`` is a :class:`LowerRealAt` at stage ``c``. The
    preconditions (lower-real values, normalisation, modularity, isotony and
    compatibility with restriction) are reported separately. On a Boolean
    diagram they force constancy: ``P(u)`` and ``P(¬u)`` are isotone and sum
    to 1 at every stage.
    """
    pre, const = Check(), Check()
    for c, u in d.elements():
        if (c, u) not in candidate:
            raise InputError(f"candidate has no value at ({label(c)}, {u})")
    for c in d.contexts:
        alg = d.algebras[c]
        for u in alg.elements():
            r = candidate[(c, u)]
            if r.stage != c:
                raise InputError(f"value at ({label(c)}, {u}) lives at stage {label(r.stage)}")
            for m in check_lower_real(d, r).messages:
                pre.fail("lower-real", f"({label(c)}, {u}): {m}")
        if any(x != 0 for x in candidate[(c, 0)].values):
            pre.fail("normalization", f"value of 0 at {label(c)} is not 0")
        if any(x != 1 for x in candidate[(c, alg.top)].values):
            pre.fail("normalization", f"value of 1 at {label(c)} is not 1")
        for a, b in _pairs(alg.size, None):
            pa, pb = candidate[(c, a)], candidate[(c, b)]
            if candidate[(c, a | b)] + candidate[(c, a & b)] != pa + pb:
                pre.fail("modularity", f"at ({label(c)}, {a}, {b})")
                break
        for a, b in _pairs(alg.size, None):
            if a & ~b == 0 and any(x > y for x, y in zip(candidate[(c, a)].values, candidate[(c, b)].values)):
                pre.fail("isotony", f"at ({label(c)}, {a}, {b})")
                break
    for c, c2 in d.contexts.relation():
        if c == c2:
            continue
        h = d.transition(c, c2)
        for u in d.algebras[c].elements():
            if candidate[(c, u)].restrict(d, c2) != candidate[(c2, h(u))]:
                pre.fail("naturality", f"value at ({label(c)}, {u}) does not restrict to the value at "
                                       f"({label(c2)}, {h(u)})")
                break
    for (c, u), r in candidate.items():
        if not r.is_constant:
            const.fail("constancy", f"value at ({label(c)}, {u}) is not constant on the up-set")
    return ConstancyReport(pre, const)


__all__ = [
    "InternalValuation", "ColimitValuation", "LowerRealAt", "FrameValuation", "ConstancyReport",
    "validate_valuation", "table_to_valuation", "state_to_valuation", "valuation_to_state",
    "valuation_to_colimit", "colimit_to_valuation", "valuation_from_maximal", "check_lower_real",
    "lattice_to_frame_valuation", "frame_to_lattice_valuation", "validate_frame_valuation",
    "constant_candidate", "natural_candidate", "check_dedekind_constancy",
]
