"""Box presentations, their context posets and measurement-logic diagrams.

A box presentation is a map ``S -> I`` from questions to parties. A context is
a set of questions hitting each party at most once; contexts are frozensets of
question ids ordered by inclusion. The logic diagram assigns to each context
the free Boolean algebra on its outcomes, and to each inclusion ``c <= c'`` the
homomorphism taking a set of outcomes on ``c`` to the set of outcomes on
``c'`` that restrict into it.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping

from .boolean import BoolHom, FiniteBooleanAlgebra, free_boolean_algebra, restrict_outcome
from .errors import Check, InputError, ValidationError
from .poset import FinitePoset, IsotoneMap, canonical_key, canonical_sorted, label


# -- presentations -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BoxPresentation:
    parties: tuple
    questions: tuple
    fibration: Mapping

    def __post_init__(self):
        parties = tuple(sorted(self.parties))
        questions = tuple(sorted(self.questions))
        if len(set(parties)) != len(parties):
            raise InputError("party ids must be unique")
        if len(set(questions)) != len(questions):
            raise InputError("question ids must be unique")
        fib = dict(self.fibration)
        for q in questions:
            if q not in fib:
                raise InputError(f"question {q!r} is not assigned to a party")
            if fib[q] not in parties:
                raise InputError(f"question {q!r} maps to unknown party {fib[q]!r}")
        extra = set(fib) - set(questions)
        if extra:
            raise InputError(f"fibration mentions unknown questions {sorted(extra)!r}")
        object.__setattr__(self, "parties", parties)
        object.__setattr__(self, "questions", questions)
        object.__setattr__(self, "fibration", fib)

    @classmethod
    def from_fibers(cls, fibers: Mapping[str, Iterable[str]]) -> "BoxPresentation":
        fib = {q: i for i, qs in fibers.items() for q in qs}
        return cls(tuple(fibers), tuple(fib), fib)

    def fiber(self, party) -> tuple:
        return tuple(q for q in self.questions if self.fibration[q] == party)

    def fibers(self) -> dict:
        return {i: self.fiber(i) for i in self.parties}

    def __eq__(self, other) -> bool:
        if not isinstance(other, BoxPresentation):
            return NotImplemented
        return (self.parties, self.questions, self.fibration) == (other.parties, other.questions, other.fibration)

    def __hash__(self) -> int:
        return hash((self.parties, self.questions, tuple(sorted(self.fibration.items()))))

    def __repr__(self) -> str:
        body = ", ".join(f"{i}:{{{','.join(self.fiber(i))}}}" for i in self.parties)
        return f"BoxPresentation({body})"

    def is_context(self, c: Iterable[str]) -> bool:
        c = list(c)
        if any(q not in self.fibration for q in c):
            return False
        owners = [self.fibration[q] for q in c]
        return len(owners) == len(set(owners))


def gbit() -> BoxPresentation:
    """The unique map 2 -> 1."""
    return BoxPresentation.from_fibers({"A": ["q1", "q2"]})


def pr_presentation() -> BoxPresentation:
    """Two parties with two binary questions each, 2 ⊔ 2 -> 1 ⊔ 1."""
    return BoxPresentation.from_fibers({"A": ["a1", "a2"], "B": ["b1", "b2"]})


def empty_presentation() -> BoxPresentation:
    return BoxPresentation((), (), {})


PRESETS = {"gbit": gbit, "pr": pr_presentation, "empty": empty_presentation}


def preset(name: str) -> BoxPresentation:
    try:
        return PRESETS[name]()
    except KeyError:
        raise InputError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def presentations_isomorphic(b1: BoxPresentation, b2: BoxPresentation) -> bool:
    """Isomorphism in Box only sees the multiset of fibre sizes."""
    return (Counter(len(b1.fiber(i)) for i in b1.parties)
            == Counter(len(b2.fiber(i)) for i in b2.parties))


# -- contexts ----------------------------------------------------------------

def contexts_of(b: BoxPresentation) -> FinitePoset:
    """Poset of partial sections of ``b``, ordered by inclusion."""
    choices = [(None,) + b.fiber(i) for i in b.parties]
    contexts = [frozenset(q for q in pick if q is not None) for pick in itertools.product(*choices)]
    return FinitePoset(contexts, [(c, d) for c in contexts for d in contexts if c <= d], check=False)


def maximal_contexts(c: FinitePoset) -> frozenset:
    return frozenset(c.maximal())


def context_label(c: frozenset) -> str:
    return ",".join(sorted(c))


# -- morphisms ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BoxMorphism:
    """A commuting square from ``source`` (S'/I') to ``target`` (S/I)."""

    source: BoxPresentation
    target: BoxPresentation
    question_map: Mapping
    party_map: Mapping

    def __eq__(self, other) -> bool:
        if not isinstance(other, BoxMorphism):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and dict(self.question_map) == dict(other.question_map)
                and dict(self.party_map) == dict(other.party_map))

    __hash__ = None

    def compose(self, first: "BoxMorphism") -> "BoxMorphism":
        """``self ∘ first``; ``first.target`` must be ``self.source``."""
        if first.target != self.source:
            raise InputError("morphisms are not composable")
        return BoxMorphism(first.source, self.target,
                           {q: self.question_map[first.question_map[q]] for q in first.source.questions},
                           {i: self.party_map[first.party_map[i]] for i in first.source.parties})

    @classmethod
    def identity(cls, b: BoxPresentation) -> "BoxMorphism":
        return cls(b, b, {q: q for q in b.questions}, {i: i for i in b.parties})


def validate_box_morphism(m: BoxMorphism) -> Check:
    chk = Check()
    src, tgt = m.source, m.target
    for q in src.questions:
        if m.question_map.get(q) not in tgt.fibration:
            chk.fail("total", f"question {q!r} has no image in the target")
    for i in src.parties:
        if m.party_map.get(i) not in tgt.parties:
            chk.fail("total", f"party {i!r} has no image in the target")
    if not chk:
        return chk
    for q in src.questions:
        if tgt.fibration[m.question_map[q]] != m.party_map[src.fibration[q]]:
            chk.fail("commutes", f"square fails at question {q!r}")
    for i in src.parties:
        images = [m.question_map[q] for q in src.fiber(i)]
        if len(images) != len(set(images)):
            chk.fail("injective", f"fibre of party {i!r} is not mapped injectively")
    return chk


def _require_valid(m: BoxMorphism) -> None:
    chk = validate_box_morphism(m)
    if not chk:
        raise ValidationError("; ".join(chk.messages))


def induced_context_map(m: BoxMorphism) -> IsotoneMap:
    """Contravariant map ``C_{S/I} -> C_{S'/I'}``, ``c ↦ φ⁻¹(c)``."""
    _require_valid(m)
    target_ctx = contexts_of(m.target)
    source_ctx = contexts_of(m.source)
    assignment = {c: frozenset(q for q in m.source.questions if m.question_map[q] in c) for c in target_ctx}
    return IsotoneMap(target_ctx, source_ctx, assignment)


def coproduct(b1: BoxPresentation, b2: BoxPresentation, tags: tuple[str, str] = ("0", "1")):
    """Disjoint union ``(S ⊔ T)/(I ⊔ J)`` with ids prefixed by ``tag:``.

    Returns the presentation and the two inclusion morphisms.
    """
    t1, t2 = tags
    if t1 == t2:
        raise InputError("coproduct tags must differ")
    fib = {f"{t1}:{q}": f"{t1}:{i}" for q, i in b1.fibration.items()}
    fib.update({f"{t2}:{q}": f"{t2}:{i}" for q, i in b2.fibration.items()})
    parties = [f"{t1}:{i}" for i in b1.parties] + [f"{t2}:{i}" for i in b2.parties]
    total = BoxPresentation(tuple(parties), tuple(fib), fib)
    inc = []
    for b, t in ((b1, t1), (b2, t2)):
        inc.append(BoxMorphism(b, total, {q: f"{t}:{q}" for q in b.questions}, {i: f"{t}:{i}" for i in b.parties}))
    return total, inc[0], inc[1]


def untag(c: Iterable[str], tag: str) -> frozenset:
    prefix = tag + ":"
    return frozenset(q[len(prefix):] for q in c if q.startswith(prefix))


def gbit_inclusions() -> tuple[BoxMorphism, BoxMorphism]:
    """The two inclusions of the gbit into the PR presentation (party A, party B)."""
    g, pr = gbit(), pr_presentation()
    left = BoxMorphism(g, pr, {"q1": "a1", "q2": "a2"}, {"A": "A"})
    right = BoxMorphism(g, pr, {"q1": "b1", "q2": "b2"}, {"A": "B"})
    return left, right


# -- logic diagrams ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LogicDiagram:
    """A functor from a context poset to finite Boolean algebras.

    ``transitions`` holds a homomorphism for every comparable pair ``(c, c')``
    with ``c <= c'``, identities included.
    """

    contexts: FinitePoset
    algebras: Mapping[Hashable, FiniteBooleanAlgebra]
    transitions: Mapping[tuple, BoolHom]
    presentation: BoxPresentation | None = field(default=None)

    def algebra(self, c) -> FiniteBooleanAlgebra:
        return self.algebras[c]

    def transition(self, c, c2) -> BoolHom:
        try:
            return self.transitions[(c, c2)]
        except KeyError:
            raise InputError(f"{label(c)} is not below {label(c2)}") from None

    def elements(self):
        """All ``(context, element)`` pairs of the disjoint union, canonical order."""
        for c in self.contexts:
            for u in self.algebras[c].elements():
                yield c, u


def logic_diagram(b: BoxPresentation) -> LogicDiagram:
    ctx = contexts_of(b)
    algebras = {c: free_boolean_algebra(c) for c in ctx}
    transitions = {}
    for c, c2 in ctx.relation():
        src, tgt = algebras[c], algebras[c2]
        index = {x: i for i, x in enumerate(src.atoms)}
        images = [0] * src.n_atoms
        for j, y in enumerate(tgt.atoms):
            images[index[restrict_outcome(y, c)]] |= 1 << j
        transitions[(c, c2)] = BoolHom(src, tgt, tuple(images))
    return LogicDiagram(ctx, algebras, transitions, b)


def check_diagram(d: LogicDiagram) -> Check:
    """Functor laws plus homomorphism laws for every transition."""
    chk = Check()
    ctx = d.contexts
    for c in ctx:
        if c not in d.algebras:
            chk.fail("algebra", f"no algebra for context {label(c)}")
    if not chk:
        return chk
    for c, c2 in ctx.relation():
        if (c, c2) not in d.transitions:
            chk.fail("transition", f"missing transition {label(c)} <= {label(c2)}")
            continue
        h = d.transitions[(c, c2)]
        if h.source != d.algebras[c] or h.target != d.algebras[c2]:
            chk.fail("transition", f"transition {label(c)} <= {label(c2)} has the wrong (co)domain")
            continue
        hom = h.check()
        if not hom:
            for msg in hom.messages:
                chk.fail("homomorphism", f"{label(c)} <= {label(c2)}: {msg}")
    for key in d.transitions:
        if key[0] not in ctx or key[1] not in ctx or not ctx.leq(*key):
            chk.fail("transition", f"transition given for non-comparable pair {label(key[0])}, {label(key[1])}")
    if not chk:
        return chk
    for c in ctx:
        if d.transitions[(c, c)] != BoolHom.identity(d.algebras[c]):
            chk.fail("identity", f"transition {label(c)} <= {label(c)} is not the identity")
    for c, c2 in ctx.relation():
        for c3 in ctx.up(c2):
            long = d.transitions[(c, c3)]
            short = d.transitions[(c2, c3)].compose(d.transitions[(c, c2)])
            if long.images != short.images:
                chk.fail("composition",
                         f"{label(c)} <= {label(c3)} differs from the composite through {label(c2)}")
    return chk


def general_theory(contexts: FinitePoset, algebras: Mapping, transitions: Mapping) -> LogicDiagram:
    """Validated logic diagram not necessarily coming from a presentation.

    ``transitions`` maps ``(c, c')`` to a :class:`BoolHom`. Identities may be
    omitted; any other comparable pair without a transition is filled in by
    composing along a chain of covers.
    """
    trans = dict(transitions)
    for c in contexts:
        if c in algebras:
            trans.setdefault((c, c), BoolHom.identity(algebras[c]))
    changed = True
    while changed:
        changed = False
        for c, c3 in contexts.relation():
            if (c, c3) in trans:
                continue
            for c_, c2 in contexts.covers:
                if c_ == c and contexts.leq(c2, c3) and (c, c2) in trans and (c2, c3) in trans:
                    trans[(c, c3)] = trans[(c2, c3)].compose(trans[(c, c2)])
                    changed = True
                    break
    d = LogicDiagram(contexts, dict(algebras), trans)
    chk = check_diagram(d)
    if not chk:
        raise ValidationError("; ".join(chk.messages))
    return d


# -- colimit -----------------------------------------------------------------

class UnionFind:
    def __init__(self, items: Iterable[Hashable] = ()):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            if canonical_key(ry) < canonical_key(rx):
                rx, ry = ry, rx
            self.parent[ry] = rx

    def groups(self) -> list[frozenset]:
        out: dict = {}
        for x in self.parent:
            out.setdefault(self.find(x), set()).add(x)
        return [frozenset(g) for g in out.values()]


@dataclass(frozen=True, eq=False)
class ColimitPresentation:
    """Quotient of ``⨿_c L(c)`` by ``(c, u) ~ (c', L(c <= c') u)``.

    Class ids are ``0..n-1`` ordered by the canonical key of each class's least
    member.
    """

    diagram: LogicDiagram
    classes: tuple
    injection: Mapping

    def __len__(self) -> int:
        return len(self.classes)

    def iota(self, c, u: int) -> int:
        return self.injection[(c, u)]


def colimit(d: LogicDiagram) -> ColimitPresentation:
    uf = UnionFind(d.elements())
    for (c, c2), h in d.transitions.items():
        if c == c2:
            continue
        for u in d.algebras[c].elements():
            uf.union((c, u), (c2, h(u)))
    groups = sorted(uf.groups(), key=lambda g: min(canonical_key(x) for x in g))
    injection = {x: k for k, g in enumerate(groups) for x in g}
    return ColimitPresentation(d, tuple(groups), injection)


# -- spectral presheaf -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpectralPresheaf:
    """Contravariant atom-set functor: ``sets[c]`` are the atoms of ``L(c)`` and
    ``maps[(c, c')]`` sends each atom of ``L(c')`` to an atom of ``L(c)``."""

    diagram: LogicDiagram
    sets: Mapping
    maps: Mapping

    def restrict(self, c, c2, atom):
        return self.maps[(c, c2)][atom]


def spectral_presheaf(d: LogicDiagram) -> SpectralPresheaf:
    sets = {c: d.algebras[c].atoms for c in d.contexts}
    maps = {}
    for (c, c2), h in d.transitions.items():
        src, tgt = d.algebras[c], d.algebras[c2]
        m = {}
        for j, y in enumerate(tgt.atoms):
            owners = [src.atoms[i] for i, img in enumerate(h.images) if img >> j & 1]
            if len(owners) != 1:
                raise ValidationError(
                    f"atom {y!r} of {label(c2)} lifts to {len(owners)} atoms of {label(c)} (expected exactly one)")
            m[y] = owners[0]
        maps[(c, c2)] = m
    return SpectralPresheaf(d, sets, maps)


def contexts_listing(b: BoxPresentation) -> list[list[str]]:
    return [sorted(c) for c in contexts_of(b)]


__all__ = [
    "BoxPresentation", "BoxMorphism", "LogicDiagram", "ColimitPresentation", "SpectralPresheaf",
    "UnionFind", "gbit", "pr_presentation", "empty_presentation", "preset", "PRESETS",
    "contexts_of", "maximal_contexts", "validate_box_morphism", "induced_context_map", "coproduct",
    "logic_diagram", "general_theory", "check_diagram", "colimit", "spectral_presheaf",
    "gbit_inclusions", "presentations_isomorphic", "untag", "context_label", "canonical_sorted",
]
