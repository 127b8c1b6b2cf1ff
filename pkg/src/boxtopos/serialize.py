"""JSON and DOT encodings.

Rationals are written as ``"num/den"`` strings (integers without a
denominator). Context keys are comma-joined sorted question ids, the empty
context being ``""``. Outcome keys are bit strings over the sorted questions
of their context.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Callable, Mapping

from .boolean import BoolHom, FiniteBooleanAlgebra
from .errors import InputError
from .logic import BoxMorphism, BoxPresentation, LogicDiagram, general_theory, maximal_contexts
from .phase_space import PhaseSpace
from .poset import FinitePoset, canonical_sorted, label
from .states import BellFunctional, BoxState, outcomes
from .valuations import InternalValuation, _subset_sums


def rational(x: Fraction, approx: bool = False):
    if approx:
        return float(format(float(x), ".12g"))
    return str(Fraction(x))


def parse_rational(s) -> Fraction:
    if isinstance(s, bool) or isinstance(s, float):
        raise InputError(f"rationals must be strings like '1/2' or integers, got {s!r}")
    try:
        return Fraction(s)
    except (TypeError, ValueError, ZeroDivisionError):
        raise InputError(f"cannot parse rational {s!r}") from None


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False)


# -- presentations and morphisms ---------------------------------------------

def presentation_to_json(b: BoxPresentation) -> dict:
    return {"parties": list(b.parties),
            "questions": [{"id": q, "party": b.fibration[q]} for q in b.questions]}


def presentation_from_json(doc) -> BoxPresentation:
    try:
        parties = [str(i) for i in doc["parties"]]
        fib = {str(q["id"]): str(q["party"]) for q in doc["questions"]}
    except (KeyError, TypeError):
        raise InputError("presentation needs 'parties' and 'questions' with 'id' and 'party'") from None
    if len(fib) != len(doc["questions"]):
        raise InputError("question ids must be unique")
    return BoxPresentation(tuple(parties), tuple(fib), fib)


def morphism_to_json(m: BoxMorphism) -> dict:
    return {"source": presentation_to_json(m.source), "target": presentation_to_json(m.target),
            "question_map": dict(m.question_map), "party_map": dict(m.party_map)}


def morphism_from_json(doc) -> BoxMorphism:
    try:
        return BoxMorphism(presentation_from_json(doc["source"]), presentation_from_json(doc["target"]),
                           dict(doc["question_map"]), dict(doc["party_map"]))
    except (KeyError, TypeError):
        raise InputError("morphism needs 'source', 'target', 'question_map' and 'party_map'") from None


# -- contexts and outcomes ---------------------------------------------------

def context_key(c) -> str:
    return ",".join(sorted(c))


def parse_context(s: str) -> frozenset:
    return frozenset(q for q in s.split(",") if q) if s else frozenset()


def outcome_key(x: tuple) -> str:
    return "".join(str(b) for _, b in x)


def parse_outcome(c: frozenset, s: str) -> tuple:
    qs = sorted(c)
    if len(s) != len(qs) or any(ch not in "01" for ch in s):
        raise InputError(f"outcome {s!r} is not a bit string of length {len(qs)} for context {label(c)}")
    return tuple((q, int(ch)) for q, ch in zip(qs, s))


def outcome_to_json(x: tuple) -> dict:
    return {q: b for q, b in x}


# -- states ------------------------------------------------------------------

def _rows_to_json(rows: Mapping, approx: bool) -> dict:
    return {context_key(c): {outcome_key(x): rational(p, approx) for x, p in row.items()}
            for c, row in rows.items()}


def _rows_from_json(doc) -> dict:
    if not isinstance(doc, Mapping):
        raise InputError("table must be an object keyed by context")
    out = {}
    for ck, row in doc.items():
        c = parse_context(ck)
        if not isinstance(row, Mapping):
            raise InputError(f"row {ck!r} must be an object keyed by outcome")
        out[c] = {parse_outcome(c, xk): parse_rational(v) for xk, v in row.items()}
    return out


def state_to_json(s: BoxState, approx: bool = False) -> dict:
    return {"presentation": presentation_to_json(s.presentation), "table": _rows_to_json(s.table, approx)}


def state_from_json(doc) -> BoxState:
    try:
        b, table = presentation_from_json(doc["presentation"]), doc["table"]
    except (KeyError, TypeError):
        raise InputError("state needs 'presentation' and 'table'") from None
    return BoxState(b, _rows_from_json(table))


def functional_from_json(doc) -> BellFunctional:
    try:
        b, coef = presentation_from_json(doc["presentation"]), doc["coefficients"]
    except (KeyError, TypeError):
        raise InputError("functional needs 'presentation' and 'coefficients'") from None
    return BellFunctional(b, _rows_from_json(coef))


def functional_to_json(f: BellFunctional, approx: bool = False) -> dict:
    return {"presentation": presentation_to_json(f.presentation),
            "coefficients": _rows_to_json(f.coefficients, approx)}


# -- valuations --------------------------------------------------------------

def valuation_to_json(v: InternalValuation, approx: bool = False) -> dict:
    """State schema plus ``rows``: atom weights on every non-maximal context."""
    d = v.diagram
    if d.presentation is None:
        raise InputError("only valuations on box presentations serialise")
    maximal = maximal_contexts(d.contexts)

    def rows(cs):
        return {c: dict(zip(d.algebras[c].atoms, v.atom_weights(c))) for c in cs}

    return {"presentation": presentation_to_json(d.presentation),
            "table": _rows_to_json(rows(maximal), approx),
            "rows": _rows_to_json(rows(c for c in d.contexts if c not in maximal), approx)}


def valuation_from_json(doc) -> InternalValuation:
    """Non-maximal rows default to pullbacks of the first maximal refinement."""
    from .logic import logic_diagram

    s_doc = {"presentation": doc.get("presentation"), "table": doc.get("table")}
    if s_doc["presentation"] is None or s_doc["table"] is None:
        raise InputError("valuation needs 'presentation' and 'table'")
    # BoxState does the completeness checks for the maximal rows
    s = BoxState(presentation_from_json(s_doc["presentation"]), _rows_from_json(s_doc["table"]))
    d = logic_diagram(s.presentation)
    extra = _rows_from_json(doc.get("rows", {}))
    maximal = canonical_sorted(maximal_contexts(d.contexts))
    per = {}
    for c in d.contexts:
        if c in s.table:
            w = [s.table[c][x] for x in outcomes(c)]
        elif c in extra:
            row = extra[c]
            missing = [x for x in outcomes(c) if x not in row]
            if missing:
                raise InputError(f"row {context_key(c)!r} has no entry for outcome {outcome_key(missing[0])!r}")
            w = [row[x] for x in outcomes(c)]
        else:
            m = next(m for m in maximal if c <= m)
            w = [s.raw_marginal(c, x, m) for x in outcomes(c)]
        per[c] = _subset_sums(w)
    unknown = [c for c in extra if c not in d.contexts or c in s.table]
    if unknown:
        raise InputError(f"'rows' has entries for {[context_key(c) for c in unknown]}, "
                         "which are not non-maximal contexts")
    return InternalValuation(d, per)


# -- posets, phase spaces, general theories -----------------------------------

def element_to_json(x):
    if isinstance(x, frozenset):
        return sorted(x)
    if isinstance(x, tuple) and len(x) == 2 and isinstance(x[0], frozenset):
        return {"context": sorted(x[0]), "outcome": outcome_to_json(x[1])}
    if isinstance(x, tuple):
        return [element_to_json(y) for y in x]
    return x


def poset_to_json(p: FinitePoset) -> dict:
    return {"elements": [element_to_json(x) for x in p],
            "leq": [[element_to_json(a), element_to_json(b)] for a, b in p.relation()]}


def poset_from_json(doc) -> FinitePoset:
    """Plain string ids; ``leq`` may be any generating relation."""
    try:
        elements = [str(x) for x in doc["elements"]]
        pairs = [(str(a), str(b)) for a, b in doc.get("leq", [])]
    except (KeyError, TypeError, ValueError):
        raise InputError("poset needs 'elements' and a list of [a, b] pairs under 'leq'") from None
    unknown = {x for pair in pairs for x in pair} - set(elements)
    if unknown:
        raise InputError(f"leq mentions unknown elements {sorted(unknown)}")
    return FinitePoset.generated(elements, pairs)


def phase_space_to_json(ps: PhaseSpace) -> dict:
    pts = list(ps.points)
    index = {p: k for k, p in enumerate(pts)}
    return {"points": [element_to_json(p) for p in pts],
            "leq": [[index[a], index[b]] for a, b in ps.points.relation()]}


def theory_from_json(doc) -> LogicDiagram:
    """``{"contexts": poset, "algebras": {ctx: [atoms]}, "transitions": {"c<=d": {atom: [atoms]}}}``."""
    try:
        ctx = poset_from_json(doc["contexts"])
        algebras = {c: FiniteBooleanAlgebra(tuple(str(a) for a in doc["algebras"][c])) for c in ctx}
        raw = doc.get("transitions", {})
    except (KeyError, TypeError):
        raise InputError("theory needs 'contexts', 'algebras' for every context, and 'transitions'") from None
    transitions = {}
    for key, images in raw.items():
        lo, sep, hi = key.partition("<=")
        if not sep or lo not in algebras or hi not in algebras:
            raise InputError(f"transition key {key!r} must read 'c<=d' with known contexts")
        transitions[(lo, hi)] = BoolHom.from_atom_images(algebras[lo], algebras[hi], images)
    return general_theory(ctx, algebras, transitions)


def theory_to_json(d: LogicDiagram) -> dict:
    def key(c):
        return context_key(c) if isinstance(c, frozenset) else str(c)

    def atom(a):
        return outcome_key(a) if isinstance(a, tuple) else str(a)

    return {
        "contexts": {"elements": [key(c) for c in d.contexts],
                     "leq": [[key(a), key(b)] for a, b in d.contexts.relation()]},
        "algebras": {key(c): [atom(a) for a in d.algebras[c].atoms] for c in d.contexts},
        "transitions": {f"{key(a)}<={key(b)}": {atom(x): [atom(y) for y in h.target.atoms_of(h(1 << i))]
                                                 for i, x in enumerate(h.source.atoms)}
                        for (a, b), h in d.transitions.items() if a != b},
    }


# -- DOT ---------------------------------------------------------------------

def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _point_label(p) -> str:
    if isinstance(p, tuple) and len(p) == 2 and isinstance(p[0], frozenset):
        c, x = p
        return ("{" + ",".join(f"{q}={b}" for q, b in x) + "}") if x else "*"
    if isinstance(p, frozenset) and not p:
        return "∅"
    return label(p)


def hasse_dot(p: FinitePoset, name: str = "poset", node_label: Callable = _point_label) -> str:
    """Bottom-to-top Hasse diagram; nodes in canonical order."""
    ids = {x: f"n{k}" for k, x in enumerate(p)}
    lines = [f"digraph {name} {{", "  rankdir=BT;"]
    lines += [f"  {ids[x]} [label={_quote(node_label(x))}];" for x in p]
    lines += [f"  {ids[a]} -> {ids[b]};" for a, b in p.covers]
    lines.append("}")
    return "\n".join(lines) + "\n"


def phase_space_dot(ps: PhaseSpace, name: str = "phase_space") -> str:
    """Points clustered by the context they project to."""
    ids = {x: f"n{k}" for k, x in enumerate(ps.points)}
    lines = [f"digraph {name} {{", "  rankdir=BT;"]
    for k, c in enumerate(ps.contexts):
        lines.append(f"  subgraph cluster_{k} {{")
        lines.append(f"    label={_quote(_point_label(c))};")
        lines += [f"    {ids[p]} [label={_quote(_point_label(p))}];" for p in ps.fiber(c)]
        lines.append("  }")
    lines += [f"  {ids[a]} -> {ids[b]};" for a, b in ps.points.covers]
    lines.append("}")
    return "\n".join(lines) + "\n"
