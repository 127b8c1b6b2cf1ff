"""Finite posets, isotone maps, upper sets and Alexandrov frames.

Elements are arbitrary hashable values (strings, frozensets of strings,
tuples of those). They are always kept in the deterministic order given by
:func:`canonical_key`, and that order fixes the bit assigned to each element
whenever a subset is encoded as an integer mask.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Hashable, Iterable, Mapping

import numpy as np

from . import kernels
from .errors import InputError, ResourceError, resolve_cap


def canonical_key(x: Any):
    """Sort key giving a total, reproducible order on element ids.

    Strings sort lexicographically; frozensets by size then by their sorted
    members (so the empty context comes first); tuples componentwise.
    """
    if isinstance(x, str):
        return (0, x)
    if isinstance(x, bool):
        return (1, int(x))
    if isinstance(x, int):
        return (1, x)
    if isinstance(x, (frozenset, set)):
        keys = sorted(canonical_key(y) for y in x)
        return (2, len(keys), tuple(keys))
    if isinstance(x, tuple):
        return (3, tuple(canonical_key(y) for y in x))
    raise InputError(f"unsupported element id {x!r}")


def canonical_sorted(items: Iterable[Hashable]) -> list:
    return sorted(items, key=canonical_key)


def label(x: Any) -> str:
    """Human-readable string for an element id (used by DOT output)."""
    if isinstance(x, str):
        return x
    if isinstance(x, (frozenset, set)):
        return "{" + ",".join(label(y) for y in canonical_sorted(x)) + "}"
    if isinstance(x, tuple):
        return "(" + ",".join(label(y) for y in x) + ")"
    return str(x)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def iter_bits(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


class FinitePoset:
    """An immutable finite partial order.

    ``leq`` must be the full relation (reflexive pairs may be omitted). Use
    :meth:`generated` to close an arbitrary relation instead.
    """

    def __init__(self, elements: Iterable[Hashable], leq: Iterable[tuple] = (), *, check: bool = True):
        elems = list(elements)
        if len(set(elems)) != len(elems):
            raise InputError("poset element ids must be unique")
        self.elements: tuple = tuple(canonical_sorted(elems))
        self.index: dict = {e: i for i, e in enumerate(self.elements)}
        n = len(self.elements)
        mat = np.eye(n, dtype=bool)
        for a, b in leq:
            if a not in self.index or b not in self.index:
                raise InputError(f"relation pair ({a!r}, {b!r}) mentions an unknown element")
            mat[self.index[a], self.index[b]] = True
        mat.setflags(write=False)
        self.matrix = mat
        if check:
            self._check_order()

    @classmethod
    def generated(cls, elements: Iterable[Hashable], pairs: Iterable[tuple]) -> "FinitePoset":
        """Reflexive-transitive closure of ``pairs``; antisymmetry is still checked."""
        elems = list(elements)
        idx = {e: i for i, e in enumerate(elems)}
        n = len(elems)
        mat = np.eye(n, dtype=bool)
        for a, b in pairs:
            try:
                mat[idx[a], idx[b]] = True
            except KeyError:
                raise InputError(f"relation pair ({a!r}, {b!r}) mentions an unknown element") from None
        for k in range(n):
            mat |= np.outer(mat[:, k], mat[k, :])
        full = [(elems[i], elems[j]) for i, j in zip(*np.nonzero(mat))]
        return cls(elems, full)

    @classmethod
    def from_predicate(cls, elements: Iterable[Hashable], leq: Callable[[Any, Any], bool]) -> "FinitePoset":
        elems = list(elements)
        return cls(elems, [(a, b) for a in elems for b in elems if leq(a, b)])

    def _check_order(self) -> None:
        m = self.matrix
        sym = m & m.T
        np.fill_diagonal(sym, False)
        if sym.any():
            i, j = map(int, np.argwhere(sym)[0])
            raise InputError(
                f"relation is not antisymmetric: {self.elements[i]!r} and {self.elements[j]!r}")
        comp = (m.astype(np.int64) @ m.astype(np.int64)) > 0
        missing = comp & ~m
        if missing.any():
            i, j = map(int, np.argwhere(missing)[0])
            raise InputError(
                f"relation is not transitive: {self.elements[i]!r} <= {self.elements[j]!r} is implied but absent")

    # -- basic queries --------------------------------------------------

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x) -> bool:
        try:
            return x in self.index
        except TypeError:
            return False

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinitePoset):
            return NotImplemented
        return self.elements == other.elements and bool(np.array_equal(self.matrix, other.matrix))

    def __hash__(self) -> int:
        return hash((self.elements, self.matrix.tobytes()))

    def __repr__(self) -> str:
        return f"FinitePoset({len(self)} elements)"

    def leq(self, a, b) -> bool:
        return bool(self.matrix[self.index[a], self.index[b]])

    def lt(self, a, b) -> bool:
        return a != b and self.leq(a, b)

    def relation(self) -> list[tuple]:
        """Every pair ``(a, b)`` with ``a <= b``, in canonical order."""
        return [(self.elements[i], self.elements[j]) for i, j in zip(*np.nonzero(self.matrix))]

    def up(self, a) -> list:
        return [self.elements[j] for j in np.nonzero(self.matrix[self.index[a]])[0]]

    def down(self, a) -> list:
        return [self.elements[i] for i in np.nonzero(self.matrix[:, self.index[a]])[0]]

    def maximal(self) -> list:
        counts = self.matrix.sum(axis=1)
        return [e for e, c in zip(self.elements, counts) if c == 1]

    def minimal(self) -> list:
        counts = self.matrix.sum(axis=0)
        return [e for e, c in zip(self.elements, counts) if c == 1]

    def restrict(self, subset: Iterable[Hashable]) -> "FinitePoset":
        keep = set(subset)
        return FinitePoset(keep, [(a, b) for a, b in self.relation() if a in keep and b in keep], check=False)

    @cached_property
    def up_masks(self) -> tuple[int, ...]:
        """``up_masks[i]`` has bit ``j`` set iff element ``i`` <= element ``j``."""
        return tuple(sum(1 << int(j) for j in np.nonzero(row)[0]) for row in self.matrix)

    @cached_property
    def covers(self) -> list[tuple]:
        """Hasse diagram: pairs ``(a, b)`` with ``a < b`` and nothing strictly between."""
        lt = self.matrix.copy()
        np.fill_diagonal(lt, False)
        between = (lt.astype(np.int64) @ lt.astype(np.int64)) > 0
        cov = lt & ~between
        return [(self.elements[i], self.elements[j]) for i, j in zip(*np.nonzero(cov))]

    def linear_extension(self) -> list:
        """Elements sorted so that every element precedes its strict upper bounds."""
        below = self.matrix.sum(axis=0)
        return [self.elements[i] for i in sorted(range(len(self)), key=lambda i: (int(below[i]), i))]

    def mask_of(self, members: Iterable[Hashable]) -> int:
        mask = 0
        for a in members:
            try:
                mask |= 1 << self.index[a]
            except KeyError:
                raise InputError(f"unknown element id {a!r}") from None
        return mask

    def members_of(self, mask: int) -> frozenset:
        return frozenset(self.elements[i] for i in iter_bits(mask))

    def is_upper_mask(self, mask: int) -> bool:
        return all(self.up_masks[i] & ~mask == 0 for i in iter_bits(mask))


@dataclass(frozen=True)
class UpperSet:
    carrier: FinitePoset
    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        if not self.carrier.is_upper_mask(self.carrier.mask_of(self.members)):
            raise InputError("member set is not upward closed")

    @property
    def mask(self) -> int:
        return self.carrier.mask_of(self.members)

    def __contains__(self, x) -> bool:
        return x in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __or__(self, other: "UpperSet") -> "UpperSet":
        return UpperSet(self.carrier, self.members | other.members)

    def __and__(self, other: "UpperSet") -> "UpperSet":
        return UpperSet(self.carrier, self.members & other.members)

    def __le__(self, other: "UpperSet") -> bool:
        return self.members <= other.members


@dataclass(frozen=True, eq=False)
class IsotoneMap:
    source: FinitePoset
    target: FinitePoset
    assignment: Mapping

    def __post_init__(self):
        for a in self.source:
            if a not in self.assignment:
                raise InputError(f"map is not total: no image for {a!r}")
            if self.assignment[a] not in self.target:
                raise InputError(f"image {self.assignment[a]!r} of {a!r} is not in the target")

    def __call__(self, a):
        return self.assignment[a]

    def __eq__(self, other) -> bool:
        if not isinstance(other, IsotoneMap):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and all(self.assignment[a] == other.assignment[a] for a in self.source))

    __hash__ = None

    def compose(self, first: "IsotoneMap") -> "IsotoneMap":
        """``self ∘ first``."""
        return IsotoneMap(first.source, self.target, {a: self(first(a)) for a in first.source})

    def preimage(self, u: UpperSet) -> UpperSet:
        return UpperSet(self.source, frozenset(a for a in self.source if self(a) in u.members))

    @classmethod
    def identity(cls, p: FinitePoset) -> "IsotoneMap":
        return cls(p, p, {a: a for a in p})


def check_isotone(f: IsotoneMap) -> bool:
    """True iff ``a <= b`` implies ``f(a) <= f(b)`` for every comparable pair."""
    return all(f.target.leq(f(a), f(b)) for a, b in f.source.relation())


def upper_closure(p: FinitePoset, a: Iterable[Hashable]) -> UpperSet:
    mask = 0
    for i in iter_bits(p.mask_of(a)):
        mask |= p.up_masks[i]
    return UpperSet(p, p.members_of(mask))


def principal_upper(p: FinitePoset, a) -> UpperSet:
    return upper_closure(p, [a])


class AlexandrovFrame:
    """All upper sets of a finite poset, held as sorted integer masks.

    :class:`UpperSet` objects are only built on demand, since the opens of a
    25-point space already run into the hundreds of thousands.
    """

    def __init__(self, carrier: FinitePoset, masks: np.ndarray):
        self.carrier = carrier
        self.masks = np.asarray(masks, dtype=np.int64)
        self._mask_set = None

    def __len__(self) -> int:
        return int(self.masks.shape[0])

    def __contains__(self, u) -> bool:
        mask = u.mask if isinstance(u, UpperSet) else int(u)
        if self._mask_set is None:
            self._mask_set = set(int(m) for m in self.masks)
        return mask in self._mask_set

    @property
    def opens(self) -> list[UpperSet]:
        return [UpperSet(self.carrier, self.carrier.members_of(int(m))) for m in self.masks]

    @property
    def top(self) -> UpperSet:
        return UpperSet(self.carrier, frozenset(self.carrier.elements))

    @property
    def bottom(self) -> UpperSet:
        return UpperSet(self.carrier, frozenset())

    @staticmethod
    def meet(u: UpperSet, v: UpperSet) -> UpperSet:
        return u & v

    @staticmethod
    def join(u: UpperSet, v: UpperSet) -> UpperSet:
        return u | v


def _kernel_inputs(p: FinitePoset):
    n = len(p)
    strict = np.array([m & ~(1 << i) for i, m in enumerate(p.up_masks)], dtype=np.int64)
    # every element must come after all of its strict upper bounds
    order = np.array([p.index[e] for e in reversed(p.linear_extension())], dtype=np.int64)
    return n, strict, order


def upper_set_masks(p: FinitePoset, cap: int | None = None) -> np.ndarray:
    cap = resolve_cap(cap)
    if len(p) > cap:
        raise ResourceError(
            f"poset has {len(p)} elements, above the enumeration cap of {cap}; raise it with --cap or BOXTOPOS_CAP",
            cap)
    if len(p) > kernels.MAX_MASK_BITS:
        raise ResourceError(f"poset has {len(p)} elements; at most {kernels.MAX_MASK_BITS} fit a mask", cap)
    _, strict, order = _kernel_inputs(p)
    return kernels.upper_set_masks(strict, order)


def all_upper_sets(p: FinitePoset, cap: int | None = None) -> AlexandrovFrame:
    """Every upper set of ``p``; refuses posets larger than the cap (default 20)."""
    return AlexandrovFrame(p, upper_set_masks(p, cap))


def poset_product(p: FinitePoset, q: FinitePoset) -> FinitePoset:
    elements = list(itertools.product(p.elements, q.elements))
    pairs = [((a, b), (a2, b2)) for a, a2 in p.relation() for b, b2 in q.relation()]
    return FinitePoset(elements, pairs, check=False)


def one_point() -> FinitePoset:
    return FinitePoset(["*"])


def chain(n: int) -> FinitePoset:
    elems = [str(i) for i in range(n)]
    return FinitePoset(elems, [(elems[i], elems[j]) for i in range(n) for j in range(i, n)])


def antichain(n: int) -> FinitePoset:
    return FinitePoset([str(i) for i in range(n)])


def find_isomorphism(p: FinitePoset, q: FinitePoset, candidate: Mapping) -> bool:
    """Check that ``candidate`` is an order isomorphism ``p -> q``."""
    if len(p) != len(q):
        return False
    try:
        images = [candidate[a] for a in p]
    except KeyError:
        return False
    if set(images) != set(q.elements):
        return False
    return all(p.leq(a, b) == q.leq(candidate[a], candidate[b]) for a in p for b in p)
