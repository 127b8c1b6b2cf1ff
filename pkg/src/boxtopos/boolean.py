"""Finite Boolean algebras as bit vectors over an ordered atom list."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

from .errors import Check, InputError, ResourceError
from .poset import iter_bits

# exhaustive law checks up to this many elements, seeded sampling above
EXHAUSTIVE_LIMIT = 1 << 8


@dataclass(frozen=True)
class FiniteBooleanAlgebra:
    """Power set of ``atoms``; element ``u`` is an int whose bit ``i`` marks ``atoms[i]``."""

    atoms: tuple

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if len(set(self.atoms)) != len(self.atoms):
            raise InputError("atom ids must be unique")

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def size(self) -> int:
        return 1 << len(self.atoms)

    @property
    def top(self) -> int:
        return (1 << len(self.atoms)) - 1

    bottom = 0

    def elements(self) -> range:
        return range(self.size)

    def atom_index(self, atom) -> int:
        try:
            return self.atoms.index(atom)
        except ValueError:
            raise InputError(f"{atom!r} is not an atom") from None

    def element(self, atoms: Sequence[Hashable]) -> int:
        mask = 0
        for a in atoms:
            mask |= 1 << self.atom_index(a)
        return mask

    def atoms_of(self, u: int) -> list:
        return [self.atoms[i] for i in iter_bits(u)]

    def meet(self, u: int, v: int) -> int:
        return u & v

    def join(self, u: int, v: int) -> int:
        return u | v

    def complement(self, u: int) -> int:
        return self.top ^ u

    def leq(self, u: int, v: int) -> bool:
        return u & ~v == 0

    def contains(self, u: int) -> bool:
        return 0 <= u <= self.top


def free_boolean_algebra(questions) -> FiniteBooleanAlgebra:
    """Algebra whose atoms are the outcomes ``c -> 2`` of a context ``c``.

    An outcome is a tuple of ``(question, bit)`` pairs in sorted question
    order; atoms run through the binary words over that order, first question
    most significant.
    """
    qs = sorted(questions)
    atoms = tuple(tuple(zip(qs, bits)) for bits in itertools.product((0, 1), repeat=len(qs)))
    return FiniteBooleanAlgebra(atoms)


def restrict_outcome(x: tuple, questions) -> tuple:
    keep = set(questions)
    return tuple((q, b) for q, b in x if q in keep)


@dataclass(frozen=True)
class BoolHom:
    """Map between finite Boolean algebras, stored by the images of the atoms.

    Joins and the bottom are preserved by construction; :meth:`check` decides
    whether it also preserves top, meets and complements, which happens iff
    the atom images are pairwise disjoint and cover the target.
    """

    source: FiniteBooleanAlgebra
    target: FiniteBooleanAlgebra
    images: tuple

    def __call__(self, u: int) -> int:
        out = 0
        for i in iter_bits(u):
            out |= self.images[i]
        return out

    @classmethod
    def identity(cls, alg: FiniteBooleanAlgebra) -> "BoolHom":
        return cls(alg, alg, tuple(1 << i for i in range(alg.n_atoms)))

    @classmethod
    def from_atom_images(cls, source, target, images: Mapping) -> "BoolHom":
        """``images`` maps each source atom to a list of target atoms."""
        unknown = set(images) - set(source.atoms)
        if unknown:
            raise InputError(f"images given for unknown atoms {sorted(map(str, unknown))}")
        out = []
        for a in source.atoms:
            if a not in images:
                raise InputError(f"no image given for atom {a!r}")
            out.append(target.element(images[a]))
        return cls(source, target, tuple(out))

    @classmethod
    def from_table(cls, source, target, table: Mapping[int, int]) -> "BoolHom":
        """Build from a full element table; the table must be join-preserving."""
        if source.size > 1 << 16:
            raise ResourceError("element tables are limited to algebras with 16 atoms")
        for u in source.elements():
            if u not in table:
                raise InputError(f"element table has no entry for {u}")
        hom = cls(source, target, tuple(table[1 << i] for i in range(source.n_atoms)))
        if table[0] != 0:
            raise InputError(f"table sends 0 to {table[0]}; does not preserve bottom")
        for u in source.elements():
            if hom(u) != table[u]:
                raise InputError(f"table is not join-preserving at element {u}")
        return hom

    def compose(self, first: "BoolHom") -> "BoolHom":
        """``self ∘ first``."""
        return BoolHom(first.source, self.target, tuple(self(m) for m in first.images))

    def check(self) -> Check:
        chk = Check()
        top = self.target.top
        seen = 0
        for i, img in enumerate(self.images):
            if not self.target.contains(img):
                chk.fail("range", f"image of atom {self.source.atoms[i]!r} lies outside the target")
            elif img & seen:
                chk.fail("meet", f"image of atom {self.source.atoms[i]!r} overlaps an earlier atom image")
            seen |= img
        if seen != top:
            chk.fail("top", "does not preserve top")
        return chk

    def check_laws(self, rng=None) -> Check:
        """Element-wise check of 0, 1, meet, join and complement.

        Exhaustive below :data:`EXHAUSTIVE_LIMIT` elements, seeded sample above.
        """
        chk = Check()
        src = self.source
        if self(0) != 0:
            chk.fail("bottom", "does not preserve bottom")
        if self(src.top) != self.target.top:
            chk.fail("top", "does not preserve top")
        if src.size <= EXHAUSTIVE_LIMIT:
            pairs = itertools.product(src.elements(), repeat=2)
        else:
            import numpy as np
            rng = rng or np.random.default_rng(0)
            pairs = ((int(a), int(b)) for a, b in rng.integers(0, src.size, size=(4096, 2)))
        for u, v in pairs:
            if self(u & v) != self(u) & self(v):
                chk.fail("meet", f"h({u} ∧ {v}) differs from h({u}) ∧ h({v})")
                break
            if self(u | v) != self(u) | self(v):
                chk.fail("join", f"h({u} ∨ {v}) differs from h({u}) ∨ h({v})")
                break
            if self(src.complement(u)) != self.target.complement(self(u)):
                chk.fail("complement", f"h(¬{u}) differs from ¬h({u})")
                break
        return chk
