from fractions import Fraction

import pytest
from hypothesis import given

from boxtopos import serialize as ser
from boxtopos.errors import InputError
from boxtopos.logic import gbit, logic_diagram, pr_presentation
from boxtopos.states import pr_box, uniform_state
from boxtopos.valuations import state_to_valuation
from strategies import presentations


def test_rationals():
    assert ser.rational(Fraction(1, 2)) == "1/2"
    assert ser.rational(Fraction(4)) == "4"
    assert ser.rational(Fraction(1, 3), approx=True) == 0.333333333333
    assert ser.parse_rational("3/6") == Fraction(1, 2)
    with pytest.raises(InputError):
        ser.parse_rational(0.5)


@given(presentations())
def test_presentation_roundtrip(b):
    assert ser.presentation_from_json(ser.presentation_to_json(b)) == b


def test_state_roundtrip_and_keys():
    doc = ser.state_to_json(pr_box())
    assert doc["table"]["a1,b1"]["00"] == "1/2"
    assert doc["table"]["a2,b2"]["01"] == "1/2"
    assert ser.state_from_json(doc) == pr_box()


def test_valuation_rows_optional():
    v = state_to_valuation(uniform_state(pr_presentation()))
    doc = ser.valuation_to_json(v)
    assert ser.valuation_from_json(doc) == v
    doc.pop("rows")
    assert ser.valuation_from_json(doc) == v


def test_theory_roundtrip():
    d = logic_diagram(gbit())
    t = ser.theory_from_json(ser.theory_to_json(d))
    assert len(t.contexts) == 3
    assert sorted(len(a.atoms) for a in t.algebras.values()) == [1, 2, 2]


def test_bad_outcome_key():
    doc = ser.state_to_json(pr_box())
    doc["table"]["a1,b1"]["0"] = "0"
    with pytest.raises(InputError):
        ser.state_from_json(doc)


def test_dot_is_deterministic():
    d = logic_diagram(pr_presentation())
    assert ser.hasse_dot(d.contexts) == ser.hasse_dot(d.contexts)
    assert ser.hasse_dot(d.contexts).count("->") == 12
