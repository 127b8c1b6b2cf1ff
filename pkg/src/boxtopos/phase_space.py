"""External phase space: the category of elements of the spectral presheaf.

Points are pairs ``(context, atom)``; for a box presentation an atom is an
outcome ``c -> 2`` and ``(c', x') <= (c, x)`` says that ``x`` refines ``x'``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping

from .errors import Check, InputError, ResourceError, ValidationError, resolve_cap
from .logic import (BoxMorphism, BoxPresentation, LogicDiagram, SpectralPresheaf, contexts_of, coproduct,
                    induced_context_map, logic_diagram, spectral_presheaf, untag)
from .poset import (AlexandrovFrame, FinitePoset, IsotoneMap, UpperSet, all_upper_sets, find_isomorphism,
                    label, poset_product)


@dataclass(frozen=True, eq=False)
class PhaseSpace:
    diagram: LogicDiagram
    presheaf: SpectralPresheaf
    points: FinitePoset
    projection: IsotoneMap

    @property
    def contexts(self) -> FinitePoset:
        return self.diagram.contexts

    def fiber(self, c) -> list:
        return [p for p in self.points if p[0] == c]

    def __len__(self) -> int:
        return len(self.points)


def phase_space(d: LogicDiagram | BoxPresentation) -> PhaseSpace:
    if isinstance(d, BoxPresentation):
        d = logic_diagram(d)
    sp = spectral_presheaf(d)
    points = [(c, x) for c in d.contexts for x in sp.sets[c]]
    pairs = []
    for c_lo, c_hi in d.contexts.relation():
        restrict = sp.maps[(c_lo, c_hi)]
        for x in sp.sets[c_hi]:
            pairs.append(((c_lo, restrict[x]), (c_hi, x)))
    poset = FinitePoset(points, pairs, check=False)
    projection = IsotoneMap(poset, d.contexts, {p: p[0] for p in points})
    return PhaseSpace(d, sp, poset, projection)


# -- the frame of opens and the map from opens of the context poset ----------

@dataclass(frozen=True, eq=False)
class ExternalFrame:
    """Opens of the phase space plus the frame map ``O(C) -> O(X)``.

    ``frame`` is ``None`` in homomorphism-only mode.
    """

    space: PhaseSpace
    frame: AlexandrovFrame | None

    def pullback(self, u: UpperSet) -> UpperSet:
        """Send an upper set of contexts to its preimage under the projection."""
        if u.carrier != self.space.contexts:
            raise InputError("upper set does not live on this context poset")
        return self.space.projection.preimage(u)

    def __len__(self) -> int:
        if self.frame is None:
            raise ResourceError("frame was not materialised")
        return len(self.frame)


def external_frame(ps: PhaseSpace, cap: int | None = None, materialize: bool = True) -> ExternalFrame:
    frame = all_upper_sets(ps.points, cap) if materialize else None
    return ExternalFrame(ps, frame)


# -- compatible sections -----------------------------------------------------

@dataclass(frozen=True)
class CompatibleSection:
    """Assignment ``c' ↦ u(c') ∈ L(c')`` on the up-set of ``base``.

    ``stages`` are the contexts above ``base`` in a fixed linear extension and
    ``masks[k]`` is the algebra element chosen at ``stages[k]``.
    """

    base: Hashable
    stages: tuple
    masks: tuple

    def __getitem__(self, c) -> int:
        return self.masks[self.stages.index(c)]

    def items(self):
        return zip(self.stages, self.masks)

    def meet(self, other: "CompatibleSection") -> "CompatibleSection":
        return CompatibleSection(self.base, self.stages, tuple(a & b for a, b in zip(self.masks, other.masks)))

    def join(self, other: "CompatibleSection") -> "CompatibleSection":
        return CompatibleSection(self.base, self.stages, tuple(a | b for a, b in zip(self.masks, other.masks)))

    def __le__(self, other: "CompatibleSection") -> bool:
        return all(a & ~b == 0 for a, b in zip(self.masks, other.masks))


def _stages(d: LogicDiagram, c) -> tuple:
    if c not in d.contexts:
        raise InputError(f"unknown context {label(c)}")
    above = set(d.contexts.up(c))
    return tuple(s for s in d.contexts.linear_extension() if s in above)


def check_section(d: LogicDiagram, s: CompatibleSection) -> Check:
    chk = Check()
    for c, u in s.items():
        if not d.algebras[c].contains(u):
            chk.fail("range", f"value at {label(c)} is not an element of its algebra")
    for c, u in s.items():
        for c2, v in s.items():
            if c != c2 and d.contexts.leq(c, c2):
                image = d.transition(c, c2)(u)
                if image & ~v:
                    chk.fail("compatibility",
                             f"transition of the value at {label(c)} is not below the value at {label(c2)}")
    return chk


def make_section(d: LogicDiagram, base, values: Mapping) -> CompatibleSection:
    """Validated section from a mapping ``stage -> element``."""
    stages = _stages(d, base)
    missing = [s for s in stages if s not in values]
    if missing:
        raise InputError(f"section has no value at {label(missing[0])}")
    s = CompatibleSection(base, stages, tuple(int(values[c]) for c in stages))
    chk = check_section(d, s)
    if not chk:
        raise ValidationError("; ".join(chk.messages))
    return s


def principal_section(d: LogicDiagram, base, u: int) -> CompatibleSection:
    """The section generated by ``u ∈ L(base)``: ``c' ↦ L(base <= c') u``."""
    stages = _stages(d, base)
    return CompatibleSection(base, stages, tuple(d.transition(base, c)(u) for c in stages))


def _points_above(d: LogicDiagram, stages) -> int:
    return sum(d.algebras[c].n_atoms for c in stages)


def sections_at(d: LogicDiagram, c, cap: int | None = None) -> list[CompatibleSection]:
    """Every compatible section on the up-set of ``c``.

    Stages are filled in a linear extension; each value must lie above the
    transported values of the stages it covers, so the admissible choices are
    exactly the supersets of that lower bound.
    """
    cap = resolve_cap(cap)
    stages = _stages(d, c)
    n_points = _points_above(d, stages)
    if n_points > cap:
        raise ResourceError(
            f"{n_points} phase-space points above {label(c)} exceed the enumeration cap of {cap}", cap)
    pos = {s: k for k, s in enumerate(stages)}
    feeders = [[] for _ in stages]
    for lo, hi in d.contexts.covers:
        if lo in pos and hi in pos:
            feeders[pos[hi]].append((pos[lo], d.transition(lo, hi)))
    tops = [d.algebras[s].top for s in stages]
    out: list[CompatibleSection] = []
    chosen = [0] * len(stages)

    def fill(k: int) -> None:
        if k == len(stages):
            out.append(CompatibleSection(c, stages, tuple(chosen)))
            return
        lower = 0
        for j, h in feeders[k]:
            lower |= h(chosen[j])
        free = tops[k] & ~lower
        sub = free
        while True:
            chosen[k] = lower | sub
            fill(k + 1)
            if sub == 0:
                break
            sub = (sub - 1) & free

    fill(0)
    out.sort(key=lambda s: s.masks)
    return out


def section_to_upper_set(ps: PhaseSpace, s: CompatibleSection) -> frozenset:
    """Points ``(c', x)`` with ``x`` an atom of ``s(c')``."""
    pts = []
    for c, u in s.items():
        alg = ps.diagram.algebras[c]
        pts.extend((c, x) for x in alg.atoms_of(u))
    return frozenset(pts)


def upper_set_to_section(ps: PhaseSpace, base, members) -> CompatibleSection:
    stages = _stages(ps.diagram, base)
    masks = []
    members = set(members)
    for c in stages:
        alg = ps.diagram.algebras[c]
        masks.append(alg.element([x for x in alg.atoms if (c, x) in members]))
    return CompatibleSection(base, stages, tuple(masks))


def restricted_points(ps: PhaseSpace, base) -> FinitePoset:
    """The phase space cut down to the fibres over the up-set of ``base``."""
    above = set(ps.contexts.up(base))
    return ps.points.restrict(p for p in ps.points if p[0] in above)


# -- functoriality -----------------------------------------------------------

def pull_outcome(m: BoxMorphism, x: tuple) -> tuple:
    """``x ∘ φ`` as an outcome on ``φ⁻¹(c)``."""
    val = dict(x)
    return tuple((q, val[m.question_map[q]]) for q in m.source.questions if m.question_map[q] in val)


def phase_space_map(m: BoxMorphism) -> IsotoneMap:
    """Lift of the context map: ``(c, x) ↦ (φ⁻¹(c), x ∘ φ)``."""
    phi = induced_context_map(m)
    big, small = phase_space(m.target), phase_space(m.source)
    assignment = {(c, x): (phi(c), pull_outcome(m, x)) for c, x in big.points}
    return IsotoneMap(big.points, small.points, assignment)


def projection_square_commutes(m: BoxMorphism) -> bool:
    phi = induced_context_map(m)
    lift = phase_space_map(m)
    big, small = phase_space(m.target), phase_space(m.source)
    return all(small.projection(lift(p)) == phi(big.projection(p)) for p in big.points)


def _untag_outcome(x: tuple, tag: str) -> tuple:
    prefix = tag + ":"
    return tuple((q[len(prefix):], b) for q, b in x if q.startswith(prefix))


def check_product_phase_space(b1: BoxPresentation, b2: BoxPresentation) -> bool:
    """Is ``X(b1 ⊔ b2)`` the product ``X(b1) × X(b2)`` over ``C(b1) × C(b2)``?"""
    total, _, _ = coproduct(b1, b2, ("0", "1"))
    x12 = phase_space(total)
    x1, x2 = phase_space(b1), phase_space(b2)
    prod = poset_product(x1.points, x2.points)
    pairing = {(c, x): ((untag(c, "0"), _untag_outcome(x, "0")), (untag(c, "1"), _untag_outcome(x, "1")))
               for c, x in x12.points}
    if not find_isomorphism(x12.points, prod, pairing):
        return False
    ctx_prod = poset_product(x1.contexts, x2.contexts)
    ctx_pairing = {c: (untag(c, "0"), untag(c, "1")) for c in x12.contexts}
    if not find_isomorphism(x12.contexts, ctx_prod, ctx_pairing):
        return False
    # projections commute with the pairings
    return all(ctx_pairing[c] == (pairing[(c, x)][0][0], pairing[(c, x)][1][0]) for c, x in x12.points)


__all__ = [
    "PhaseSpace", "ExternalFrame", "CompatibleSection", "phase_space", "external_frame", "sections_at",
    "make_section", "principal_section", "check_section", "section_to_upper_set", "upper_set_to_section",
    "restricted_points", "phase_space_map", "projection_square_commutes", "check_product_phase_space",
    "pull_outcome", "contexts_of",
]
