"""Command-line front end: ``boxtopos <command> [options]``.

Every command is a thin adapter over a library call. JSON goes to stdout, DOT
with ``--format dot``. Exit codes: 0 success, 1 input or validation error,
2 enumeration cap exceeded; errors are reported as JSON on stderr.
"""

from __future__ import annotations

import argparse
import importlib
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from . import logic, states as st, valuations as val
from . import serialize as ser
from .errors import BoxToposError, InputError
from .poset import all_upper_sets, canonical_sorted

# the package re-exports a function under the module's name
phs = importlib.import_module(".phase_space", __package__)


@dataclass
class CommandResult:
    status: str
    payload: Any
    diagnostics: list = field(default_factory=list)
    exit_code: int = 0
    text: str | None = None

    def render(self) -> str:
        if self.text is not None:
            return self.text
        return ser.dumps(self.payload) + "\n"


# -- input helpers -----------------------------------------------------------

def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc.msg} at line {exc.lineno}") from None


def _need_input(args) -> Any:
    if not args.input:
        raise InputError("this command needs --input FILE (or '-' for stdin)")
    return _read_json(args.input)


def _presentation(args) -> logic.BoxPresentation:
    if args.preset:
        return logic.preset(args.preset)
    doc = _need_input(args)
    if isinstance(doc, dict) and "presentation" in doc:
        doc = doc["presentation"]
    return ser.presentation_from_json(doc)


def _diagram(args) -> logic.LogicDiagram:
    """Presentation (preset or file) or a general theory file."""
    if args.preset:
        return logic.logic_diagram(logic.preset(args.preset))
    doc = _need_input(args)
    if isinstance(doc, dict) and "contexts" in doc:
        return ser.theory_from_json(doc)
    if isinstance(doc, dict) and "presentation" in doc:
        doc = doc["presentation"]
    return logic.logic_diagram(ser.presentation_from_json(doc))


def _state(args) -> st.BoxState:
    if args.preset and not args.input:
        raise InputError("this command reads a state; pass --state FILE (use 'pr-box' to make one)")
    return ser.state_from_json(_need_input(args))


def _context_arg(d: logic.LogicDiagram, raw: str):
    if raw in d.contexts:
        return raw
    c = ser.parse_context(raw)
    if c not in d.contexts:
        raise InputError(f"{raw!r} is not a context")
    return c


def _r(args, x: Fraction):
    return ser.rational(x, args.approx)


def _check_payload(chk, key="valid") -> CommandResult:
    return CommandResult("ok" if chk else "error", {key: bool(chk), "failed": sorted(chk.failed),
                                                    "diagnostics": chk.messages},
                         chk.messages, 0 if chk else 1)


# -- commands ----------------------------------------------------------------

def cmd_contexts(args) -> CommandResult:
    d = _diagram(args)
    if args.format == "dot":
        return CommandResult("ok", None, text=ser.hasse_dot(d.contexts, "contexts"))
    key = ser.context_key if d.presentation else str
    return CommandResult("ok", {"count": len(d.contexts),
                                "contexts": [key(c) for c in d.contexts],
                                "maximal": [key(c) for c in canonical_sorted(logic.maximal_contexts(d.contexts))],
                                "poset": ser.poset_to_json(d.contexts)})


def cmd_phase_space(args) -> CommandResult:
    ps = phs.phase_space(_diagram(args))
    if args.format == "dot":
        return CommandResult("ok", None, text=ser.phase_space_dot(ps))
    doc = ser.phase_space_to_json(ps)
    doc["count"] = len(ps)
    return CommandResult("ok", doc)


def cmd_frame(args) -> CommandResult:
    ps = phs.phase_space(_diagram(args))
    frame = all_upper_sets(ps.points, args.cap)
    pts = list(ps.points)
    opens = [[pts.index(p) for p in canonical_sorted(u.members)] for u in frame.opens]
    return CommandResult("ok", {"points": len(pts), "count": len(frame), "opens": opens})


def cmd_sections(args) -> CommandResult:
    d = _diagram(args)
    base = _context_arg(d, args.context)
    secs = phs.sections_at(d, base, args.cap)
    key = ser.context_key if d.presentation else str

    def atom(a):
        return ser.outcome_key(a) if isinstance(a, tuple) else str(a)

    rows = [{key(c): [atom(a) for a in d.algebras[c].atoms_of(u)] for c, u in s.items()} for s in secs]
    return CommandResult("ok", {"stage": key(base), "count": len(secs), "sections": rows})


def cmd_colimit(args) -> CommandResult:
    d = _diagram(args)
    col = logic.colimit(d)
    key = ser.context_key if d.presentation else str

    def atom(a):
        return ser.outcome_key(a) if isinstance(a, tuple) else str(a)

    classes = [[{"context": key(c), "element": [atom(a) for a in d.algebras[c].atoms_of(u)]}
                for c, u in canonical_sorted(g)] for g in col.classes]
    return CommandResult("ok", {"count": len(col), "classes": classes})


def cmd_validate_state(args) -> CommandResult:
    return _check_payload(st.validate_state(_state(args)))


def cmd_marginal(args) -> CommandResult:
    s = _state(args)
    c = ser.parse_context(args.context)
    if not s.presentation.is_context(c):
        raise InputError(f"{args.context!r} is not a context")
    x = ser.parse_outcome(c, args.outcome)
    return CommandResult("ok", _r(args, st.marginal(s, c, x)))


def cmd_chsh(args) -> CommandResult:
    return CommandResult("ok", _r(args, st.chsh(_state(args))))


def cmd_bell(args) -> CommandResult:
    s = _state(args)
    f = ser.functional_from_json(_read_json(args.functional))
    return CommandResult("ok", _r(args, st.bell_value(s, f)))


def cmd_vertices(args) -> CommandResult:
    b = _presentation(args)
    verts = st.ns_polytope_vertices(b, max_dim=args.max_dim)
    return CommandResult("ok", {"count": len(verts),
                                "vertices": [ser.state_to_json(v, args.approx)["table"] for v in verts]})


def cmd_is_classical(args) -> CommandResult:
    s = _state(args)
    res = st.is_classical(s)
    if res.classical:
        return CommandResult("ok", {"classical": True,
                                    "weights": {k: _r(args, w) for k, w in sorted(res.weights.items())}})
    f = res.functional
    return CommandResult("ok", {"classical": False, "bound": _r(args, res.bound), "value": _r(args, f(s)),
                                "functional": ser.functional_to_json(f, args.approx)["coefficients"]})


def cmd_pr_box(args) -> CommandResult:
    b = logic.preset(args.preset) if args.preset else None
    return CommandResult("ok", ser.state_to_json(st.pr_box(b), args.approx))


def _assignment(b: logic.BoxPresentation, raw: str) -> dict:
    if "=" in raw:
        g = {}
        for part in raw.split(","):
            q, _, v = part.partition("=")
            if v not in ("0", "1"):
                raise InputError(f"bad assignment entry {part!r}")
            g[q.strip()] = int(v)
        unknown = set(g) - set(b.questions)
        if unknown:
            raise InputError(f"unknown questions {sorted(unknown)}")
        return g
    if any(ch not in "01" for ch in raw):
        raise InputError(f"assignment {raw!r} must be a bit string or q=b pairs")
    if len(raw) != len(b.questions):
        raise InputError(f"assignment {raw!r} is partial: {len(b.questions)} questions to assign")
    return dict(zip(b.questions, map(int, raw)))


def cmd_deterministic(args) -> CommandResult:
    b = _presentation(args)
    return CommandResult("ok", ser.state_to_json(st.deterministic_state(b, _assignment(b, args.assignment)),
                                                 args.approx))


def cmd_uniform(args) -> CommandResult:
    return CommandResult("ok", ser.state_to_json(st.uniform_state(_presentation(args)), args.approx))


def cmd_mix(args) -> CommandResult:
    """Explicit mixture, or with no ``--states`` a seeded random mixture of polytope vertices."""
    if not args.states:
        if args.weights:
            raise InputError("--weights needs --states")
        b = _presentation(args) if args.preset or args.input else logic.preset("pr")
        s = st.random_mixture(st.ns_polytope_vertices(b), np.random.default_rng(args.seed))
        return CommandResult("ok", ser.state_to_json(s, args.approx))
    if not args.weights:
        raise InputError("--states needs --weights")
    states = [ser.state_from_json(_read_json(p)) for p in args.states]
    weights = [ser.parse_rational(w) for w in args.weights]
    return CommandResult("ok", ser.state_to_json(st.mix(states, weights), args.approx))


def cmd_state_to_valuation(args) -> CommandResult:
    return CommandResult("ok", ser.valuation_to_json(val.state_to_valuation(_state(args)), args.approx))


def cmd_valuation_to_state(args) -> CommandResult:
    v = ser.valuation_from_json(_need_input(args))
    return CommandResult("ok", ser.state_to_json(val.valuation_to_state(v), args.approx))


def cmd_roundtrip(args) -> CommandResult:
    s = _state(args)
    v = val.state_to_valuation(s)
    back = val.valuation_to_state(v)
    chk = val.validate_valuation(v)
    return CommandResult("ok", {"identity": back == s, "valuation_valid": bool(chk)})


def cmd_validate_valuation(args) -> CommandResult:
    v = ser.valuation_from_json(_need_input(args))
    return _check_payload(val.validate_valuation(v))


def cmd_colimit_valuation(args) -> CommandResult:
    v = ser.valuation_from_json(_need_input(args))
    cv = val.valuation_to_colimit(v)
    return CommandResult("ok", {"count": len(cv.rho), "rho": [_r(args, x) for x in cv.rho]})


def _morphism(args) -> logic.BoxMorphism:
    if args.inclusion:
        left, right = logic.gbit_inclusions()
        return left if args.inclusion == "left" else right
    return ser.morphism_from_json(_need_input(args))


def cmd_map(args) -> CommandResult:
    m = _morphism(args)
    chk = logic.validate_box_morphism(m)
    if not chk:
        return _check_payload(chk)
    phi = logic.induced_context_map(m)
    lift = phs.phase_space_map(m)
    ctx = {ser.context_key(c): ser.context_key(phi(c)) for c in phi.source}
    pts = [[ser.element_to_json(p), ser.element_to_json(lift(p))] for p in lift.source]
    return CommandResult("ok", {"valid": True, "context_map": ctx, "phase_space_map": pts,
                                "commutes": phs.projection_square_commutes(m)})


def cmd_product_check(args) -> CommandResult:
    if args.input:
        doc = _read_json(args.input)
        if not isinstance(doc, list) or len(doc) != 2:
            raise InputError("product-check input must be a list of two presentations")
        b1, b2 = (ser.presentation_from_json(x) for x in doc)
    else:
        b1, b2 = logic.preset(args.preset or "gbit"), logic.preset(args.other)
    return CommandResult("ok", {"product": phs.check_product_phase_space(b1, b2)})


def cmd_export(args) -> CommandResult:
    b = logic.preset(args.preset or "pr")
    if args.kind == "presentation":
        doc = ser.presentation_to_json(b)
    elif args.kind == "theory":
        doc = ser.theory_to_json(logic.logic_diagram(b))
    elif args.kind == "pr-box":
        doc = ser.state_to_json(st.pr_box(b))
    elif args.kind == "morphism":
        doc = ser.morphism_to_json(logic.gbit_inclusions()[0])
    else:
        doc = ser.functional_to_json(st.chsh_functional(b))
    if args.format == "dot":
        return CommandResult("ok", None, text=ser.hasse_dot(logic.contexts_of(b), "contexts"))
    return CommandResult("ok", doc)


# -- parser ------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("-i", "--input", "--state", dest="input", help="JSON file, or '-' for stdin")
    p.add_argument("--preset", choices=sorted(logic.PRESETS), help="built-in presentation")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.add_argument("--approx", action="store_true", help="print rationals as 12-digit floats")
    p.add_argument("--cap", type=int, default=None, help="enumeration cap (default: $BOXTOPOS_CAP or 20)")
    p.add_argument("--seed", type=int, default=0, help="seed for random mixtures")
    return p


COMMANDS: dict[str, tuple[Callable, str]] = {
    "contexts": (cmd_contexts, "list the context poset"),
    "phase-space": (cmd_phase_space, "external phase space"),
    "frame": (cmd_frame, "all opens of the phase space"),
    "sections": (cmd_sections, "compatible sections above a context"),
    "colimit": (cmd_colimit, "colimit classes of the logic diagram"),
    "validate-state": (cmd_validate_state, "check normalisation and non-signalling"),
    "marginal": (cmd_marginal, "marginal probability of an outcome"),
    "chsh": (cmd_chsh, "CHSH value"),
    "bell": (cmd_bell, "value of a Bell functional"),
    "vertices": (cmd_vertices, "vertices of the non-signalling polytope"),
    "is-classical": (cmd_is_classical, "mixture of deterministic states?"),
    "pr-box": (cmd_pr_box, "the PR box state"),
    "deterministic": (cmd_deterministic, "deterministic state of a global assignment"),
    "uniform": (cmd_uniform, "uniform state"),
    "mix": (cmd_mix, "convex combination of states"),
    "state-to-valuation": (cmd_state_to_valuation, "state to internal valuation"),
    "valuation-to-state": (cmd_valuation_to_state, "internal valuation to state"),
    "roundtrip": (cmd_roundtrip, "state -> valuation -> state"),
    "validate-valuation": (cmd_validate_valuation, "check valuation laws"),
    "colimit-valuation": (cmd_colimit_valuation, "descend a valuation to the colimit"),
    "map": (cmd_map, "context and phase-space maps of a morphism"),
    "product-check": (cmd_product_check, "phase space of a coproduct is the product"),
    "export": (cmd_export, "print an embedded preset document"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boxtopos", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    subs = {name: sub.add_parser(name, parents=[common], help=help_) for name, (_, help_) in COMMANDS.items()}
    subs["sections"].add_argument("--context", default="", help="stage, e.g. 'a1' (default: empty context)")
    subs["marginal"].add_argument("--context", required=True, help="e.g. 'a1,b1'")
    subs["marginal"].add_argument("--outcome", required=True, help="bit string over the sorted questions")
    subs["bell"].add_argument("--functional", required=True, help="functional JSON file")
    subs["vertices"].add_argument("--max-dim", type=int, default=16, help="largest affine dimension")
    subs["deterministic"].add_argument("--assignment", required=True, help="'a1=0,a2=1,...' or a bit string")
    subs["mix"].add_argument("--states", nargs="+", help="state files (omit for a seeded random mixture)")
    subs["mix"].add_argument("--weights", nargs="+")
    subs["map"].add_argument("--inclusion", choices=("left", "right"), help="gbit into PR inclusion")
    subs["product-check"].add_argument("--other", default="gbit", choices=sorted(logic.PRESETS))
    subs["export"].add_argument("--kind", default="presentation",
                                choices=("presentation", "theory", "pr-box", "morphism", "chsh"))
    return parser


def run(argv: list[str] | None = None) -> CommandResult:
    args = build_parser().parse_args(argv)
    handler = COMMANDS[args.command][0]
    try:
        return handler(args)
    except BoxToposError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
        return CommandResult("error", payload, [str(exc)], exc.exit_code)


def main(argv: list[str] | None = None) -> int:
    res = run(argv)
    if res.status == "error" and "error" in (res.payload or {}):
        sys.stderr.write(ser.dumps(res.payload) + "\n")
    else:
        sys.stdout.write(res.render())
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
