"""Non-signalling box states with exact rational tables.

A state stores one probability row per maximal context; every other
probability is a marginal. Outcomes are tuples of ``(question, bit)`` pairs in
sorted question order. For correlators, bit 0 reads as +1 and bit 1 as -1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .boolean import free_boolean_algebra, restrict_outcome
from .errors import Check, InputError, ResourceError, ShapeError, ValidationError
from .logic import BoxPresentation, contexts_of, maximal_contexts, pr_presentation
from .poset import canonical_sorted, label
from .polytope import basic_feasible_solutions, feasibility, polytope_vertices

Table = Mapping[frozenset, Mapping[tuple, Fraction]]


def outcomes(c) -> tuple:
    return free_boolean_algebra(c).atoms


def coordinates(b: BoxPresentation) -> list[tuple]:
    """``(maximal context, outcome)`` pairs in canonical order."""
    ctx = contexts_of(b)
    return [(c, x) for c in canonical_sorted(maximal_contexts(ctx)) for x in outcomes(c)]


def _as_fraction(v) -> Fraction:
    if isinstance(v, float):
        raise InputError("probabilities must be exact rationals, not floats")
    try:
        return Fraction(v)
    except (TypeError, ValueError):
        raise InputError(f"cannot read {v!r} as a rational") from None


def _normalise_table(b: BoxPresentation, table: Table) -> dict:
    out = {}
    maximal = maximal_contexts(contexts_of(b))
    for c in maximal:
        if c not in table:
            raise InputError(f"table has no row for maximal context {label(c)}")
        row = table[c]
        out[c] = {}
        for x in outcomes(c):
            if x not in row:
                raise InputError(f"table row {label(c)} has no entry for outcome {x!r}")
            out[c][x] = _as_fraction(row[x])
        extra = set(row) - set(out[c])
        if extra:
            raise InputError(f"table row {label(c)} has entries for unknown outcomes {sorted(extra)!r}")
    extra = set(table) - set(maximal)
    if extra:
        raise InputError(f"table has rows for non-maximal contexts {[label(c) for c in extra]}")
    return out


@dataclass(frozen=True, eq=False)
class BoxState:
    presentation: BoxPresentation
    table: dict

    def __post_init__(self):
        object.__setattr__(self, "table", _normalise_table(self.presentation, self.table))

    @classmethod
    def from_vector(cls, b: BoxPresentation, vec: Sequence) -> "BoxState":
        coords = coordinates(b)
        if len(vec) != len(coords):
            raise InputError(f"expected {len(coords)} entries, got {len(vec)}")
        table: dict = {}
        for (c, x), v in zip(coords, vec):
            table.setdefault(c, {})[x] = v
        return cls(b, table)

    def vector(self) -> tuple:
        return tuple(self.table[c][x] for c, x in coordinates(self.presentation))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BoxState):
            return NotImplemented
        return self.presentation == other.presentation and self.table == other.table

    def __hash__(self) -> int:
        return hash((self.presentation, self.vector()))

    def __repr__(self) -> str:
        return f"BoxState({self.presentation!r}, {[str(v) for v in self.vector()]})"

    @cached_property
    def check(self) -> Check:
        return validate_state(self)

    def raw_marginal(self, c, x, d) -> Fraction:
        """Marginal of ``x`` on ``c`` computed from the row of maximal ``d >= c``."""
        return sum((p for y, p in self.table[d].items() if restrict_outcome(y, c) == x), Fraction(0))


def validate_state(s: BoxState) -> Check:
    """Exact check of range, normalisation and non-signalling."""
    chk = Check()
    b = s.presentation
    ctx = contexts_of(b)
    maximal = canonical_sorted(maximal_contexts(ctx))
    for c in maximal:
        for x, p in s.table[c].items():
            if not 0 <= p <= 1:
                chk.fail("range", f"p({x!r} | {label(c)}) = {p} lies outside [0, 1]")
        total = sum(s.table[c].values(), Fraction(0))
        if total != 1:
            chk.fail("normalization", f"row {label(c)} sums to {total}")
    for c in ctx:
        above = [d for d in maximal if c <= d]
        for x in outcomes(c):
            ref = s.raw_marginal(c, x, above[0])
            for d in above[1:]:
                other = s.raw_marginal(c, x, d)
                if other != ref:
                    chk.fail("non-signalling",
                             f"marginal of {x!r} on {label(c)} is {ref} from {label(above[0])} "
                             f"but {other} from {label(d)}")
    return chk


def _require_valid(s: BoxState) -> None:
    if not s.check:
        raise ValidationError("invalid state: " + "; ".join(s.check.messages))


def _context(b: BoxPresentation, c) -> frozenset:
    c = frozenset(c)
    if not b.is_context(c):
        raise InputError(f"{sorted(c)} is not a context of {b!r}")
    return c


def _outcome(c: frozenset, x) -> tuple:
    if isinstance(x, Mapping):
        x = tuple((q, int(x[q])) for q in sorted(x))
    x = tuple(x)
    if x not in outcomes(c):
        raise InputError(f"{x!r} is not an outcome on {label(c)}")
    return x


def marginal(s: BoxState, c, x) -> Fraction:
    """Probability of outcome ``x`` on context ``c`` (any maximal refinement gives the same)."""
    _require_valid(s)
    c = _context(s.presentation, c)
    x = _outcome(c, x)
    d = next(d for d in canonical_sorted(s.table) if c <= d)
    return s.raw_marginal(c, x, d)


# -- constructors ------------------------------------------------------------

def _table_from(b: BoxPresentation, fn) -> dict:
    return {c: {x: fn(c, x) for x in outcomes(c)} for c in maximal_contexts(contexts_of(b))}


def pr_box(b: BoxPresentation | None = None) -> BoxState:
    """``p(α, β | a_i, b_j) = 1/2`` when ``α ⊕ β = (i-1)(j-1)``, else 0."""
    b = b or pr_presentation()
    (qa1, qa2), (qb1, qb2) = _chsh_questions(b)
    index = {qa1: 0, qa2: 1, qb1: 0, qb2: 1}
    half = Fraction(1, 2)

    def entry(c, x):
        (qa, alpha), (qb, beta) = sorted(x, key=lambda t: (t[0] not in (qa1, qa2)))
        return half if alpha ^ beta == index[qa] * index[qb] else Fraction(0)

    return BoxState(b, _table_from(b, entry))


def deterministic_state(b: BoxPresentation, g: Mapping[str, int]) -> BoxState:
    """Point mass on the restriction of the global assignment ``g``."""
    missing = [q for q in b.questions if q not in g]
    if missing:
        raise InputError(f"assignment is partial: no value for {missing}")
    if any(int(g[q]) not in (0, 1) for q in b.questions):
        raise InputError("assignment values must be 0 or 1")
    return BoxState(b, _table_from(b, lambda c, x: Fraction(int(all(g[q] == v for q, v in x)))))


def uniform_state(b: BoxPresentation) -> BoxState:
    return BoxState(b, _table_from(b, lambda c, x: Fraction(1, 2 ** len(c))))


def global_assignments(b: BoxPresentation) -> list[dict]:
    return [dict(zip(b.questions, bits)) for bits in itertools.product((0, 1), repeat=len(b.questions))]


def mix(states: Sequence[BoxState], weights: Sequence) -> BoxState:
    if not states or len(states) != len(weights):
        raise InputError("need one weight per state and at least one state")
    b = states[0].presentation
    if any(s.presentation != b for s in states):
        raise InputError("cannot mix states on different presentations")
    w = [_as_fraction(x) for x in weights]
    if any(x < 0 for x in w):
        raise InputError("weights must be nonnegative")
    if sum(w) != 1:
        raise InputError(f"weights sum to {sum(w)}, not 1")
    vecs = [s.vector() for s in states]
    return BoxState.from_vector(b, [sum((wi * v[k] for wi, v in zip(w, vecs)), Fraction(0))
                                    for k in range(len(vecs[0]))])


# -- Bell functionals --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BellFunctional:
    presentation: BoxPresentation
    coefficients: dict

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _normalise_table(self.presentation, self.coefficients))

    @classmethod
    def from_vector(cls, b: BoxPresentation, vec: Sequence) -> "BellFunctional":
        table: dict = {}
        for (c, x), v in zip(coordinates(b), vec):
            table.setdefault(c, {})[x] = v
        return cls(b, table)

    def vector(self) -> tuple:
        return tuple(self.coefficients[c][x] for c, x in coordinates(self.presentation))

    def __call__(self, s: BoxState) -> Fraction:
        return bell_value(s, self)


def bell_value(s: BoxState, f: BellFunctional) -> Fraction:
    if s.presentation != f.presentation:
        raise InputError("state and functional live on different presentations")
    _require_valid(s)
    return sum((a * p for a, p in zip(f.vector(), s.vector())), Fraction(0))


def _chsh_questions(b: BoxPresentation):
    fibers = [b.fiber(i) for i in b.parties]
    if len(b.parties) != 2 or any(len(f) != 2 for f in fibers):
        raise ShapeError(f"CHSH needs two parties with two questions each, got {b!r}")
    return fibers[0], fibers[1]


def chsh_functional(b: BoxPresentation | None = None, signs: Sequence[int] = (1, 1, 1, -1)) -> BellFunctional:
    """Correlator combination ``Σ signs[ij] ⟨a_i b_j⟩`` with ``(11, 12, 21, 22)`` ordering."""
    b = b or pr_presentation()
    (qa1, qa2), (qb1, qb2) = _chsh_questions(b)
    sign = {frozenset((qa, qb)): signs[2 * i + j]
            for i, qa in enumerate((qa1, qa2)) for j, qb in enumerate((qb1, qb2))}

    def coef(c, x):
        bits = [v for _, v in x]
        return Fraction(sign[c] * (1 if bits[0] == bits[1] else -1))

    return BellFunctional(b, _table_from(b, coef))


def chsh_variants(b: BoxPresentation | None = None) -> list[BellFunctional]:
    """The eight CHSH expressions: one minus sign in any slot, times ±1."""
    out = []
    for k in range(4):
        signs = [1, 1, 1, 1]
        signs[k] = -1
        out.append(chsh_functional(b, signs))
        out.append(chsh_functional(b, [-s for s in signs]))
    return out


def chsh(s: BoxState) -> Fraction:
    """``⟨a1 b1⟩ + ⟨a1 b2⟩ + ⟨a2 b1⟩ − ⟨a2 b2⟩`` with 0 ↦ +1, 1 ↦ −1."""
    return bell_value(s, chsh_functional(s.presentation))


def tsirelson_constant() -> float:
    """2√2, the quantum bound on CHSH; reported only, never derived."""
    return 2 * math.sqrt(2)


# -- the polytope ------------------------------------------------------------

def equality_system(b: BoxPresentation):
    """Normalisation and non-signalling equalities over :func:`coordinates`."""
    coords = coordinates(b)
    col = {cx: k for k, cx in enumerate(coords)}
    n = len(coords)
    ctx = contexts_of(b)
    maximal = canonical_sorted(maximal_contexts(ctx))
    rows, rhs = [], []
    for c in maximal:
        row = [0] * n
        for x in outcomes(c):
            row[col[(c, x)]] = 1
        rows.append(row)
        rhs.append(1)
    for c in ctx:
        above = [d for d in maximal if c <= d]
        for x in outcomes(c):
            for d in above[1:]:
                row = [0] * n
                for y in outcomes(above[0]):
                    if restrict_outcome(y, c) == x:
                        row[col[(above[0], y)]] += 1
                for y in outcomes(d):
                    if restrict_outcome(y, c) == x:
                        row[col[(d, y)]] -= 1
                rows.append(row)
                rhs.append(0)
    return coords, rows, rhs


def ns_polytope_vertices(b: BoxPresentation, max_dim: int = 16) -> list[BoxState]:
    """All vertices of the non-signalling polytope, canonically ordered."""
    coords, rows, rhs = equality_system(b)
    verts = polytope_vertices(rows, rhs, len(coords), max_dim=max_dim)
    return [BoxState.from_vector(b, v) for v in verts]


def ns_polytope_vertices_bfs(b: BoxPresentation, kernel=None) -> list[BoxState]:
    """Same vertex set via basic feasible solutions; used to cross-check."""
    coords, rows, rhs = equality_system(b)
    verts = basic_feasible_solutions(rows, rhs, len(coords), kernel=kernel)
    return [BoxState.from_vector(b, v) for v in verts]


def random_mixture(vertices: Sequence[BoxState], rng: np.random.Generator, max_weight: int = 20) -> BoxState:
    raw = [int(v) for v in rng.integers(0, max_weight + 1, size=len(vertices))]
    if sum(raw) == 0:
        raw[int(rng.integers(0, len(vertices)))] = 1
    total = sum(raw)
    return mix(list(vertices), [Fraction(r, total) for r in raw])


# -- classicality ------------------------------------------------------------

MAX_DETERMINISTIC = 1 << 12


@dataclass
class Classicality:
    classical: bool
    weights: dict | None = None
    functional: BellFunctional | None = None
    bound: Fraction | None = None

    def __bool__(self) -> bool:
        return self.classical


def is_classical(s: BoxState, cap: int = MAX_DETERMINISTIC) -> Classicality:
    """Exact LP: is ``s`` a mixture of deterministic states?

    On success ``weights`` maps each used assignment (as a bit string over the
    sorted questions) to its weight. Otherwise ``functional`` is a Bell
    functional with ``functional(D) <= bound < functional(s)`` for every
    deterministic ``D``, shifted and scaled so that ``bound == 2``.
    """
    _require_valid(s)
    b = s.presentation
    n_det = 2 ** len(b.questions)
    if n_det > cap:
        raise ResourceError(f"{n_det} deterministic states exceed the cap of {cap}", cap)
    assignments = global_assignments(b)
    dets = [deterministic_state(b, g).vector() for g in assignments]
    target = s.vector()
    m_rows = [[d[k] for d in dets] for k in range(len(target))] + [[1] * len(dets)]
    q = list(target) + [1]
    ok, sol = feasibility(m_rows, q)
    if ok:
        weights = {"".join(str(g[x]) for x in b.questions): w for g, w in zip(assignments, sol) if w != 0}
        return Classicality(True, weights=weights)
    f = list(sol[:-1])
    classical_max = max(sum((a * v for a, v in zip(f, d)), Fraction(0)) for d in dets)
    # Adding t to every coefficient of one maximal row adds t to every state's value.
    coords = coordinates(b)
    first = coords[0][0]
    shift = 1 - classical_max
    f = [2 * (a + (shift if c == first else 0)) for a, (c, _) in zip(f, coords)]
    functional = BellFunctional.from_vector(b, f)
    return Classicality(False, functional=functional, bound=Fraction(2))
