import json

import pytest

from horn_abduce.core import Const, FlatSkolem, Skolem
from horn_abduce.ingest import (InstanceSemanticError, InstanceSyntaxError, SolutionFormatError, parse_atom,
                                parse_instance, parse_solution, parse_term, render_instance, render_solution)

from conftest import data_path


def test_example1_parses(ex1):
    assert [ax.id for ax in ex1.axioms] == ["r4", "r5", "r6", "r7", "r8", "r9", "r10"]
    assert [str(g) for g in ex1.goal] == ["name(m,mary)", "lost(m,f)", "fatherof(f,m)", "inst(s,female)",
                                          "is(s,depressed)"]
    assert ex1.sort_names == {"person", "male", "female", "dead", "depressed"}
    assert ex1.axiom("r10").existential_vars == ()
    assert ex1.axiom("r4").existential_vars == ("Y",)


@pytest.mark.parametrize("name", ["example1.kb", "cyclic.kb", "tiny_nogood.kb", "accel/shop.kb", "accel/rob.kb",
                                  "accel/dine.kb"])
def test_render_roundtrip(name):
    with open(data_path(name)) as fh:
        inst = parse_instance(fh.read())
    again = parse_instance(render_instance(inst))
    assert render_instance(again) == render_instance(inst)
    assert again.axioms == inst.axioms and again.goal == inst.goal
    assert again.nogoods == inst.nogoods and again.unique_slots == inst.unique_slots


def test_weights_costs_and_implicit_ids():
    inst = parse_instance("axiom @w=3/10,0.9: h(X) <- b(X), c(X).\naxiom: h(X) <- d(X).\n"
                          "goal: h(a).\ncost: h(a) = 40.\n")
    assert [ax.id for ax in inst.axioms] == ["r1", "r2"]
    assert [str(w) for w in inst.axioms[0].weights] == ["3/10", "9/10"]
    assert inst.ic(parse_atom("h(a)")) == 40
    assert "@w=3/10,9/10" in render_instance(inst)


def test_goal_variables_become_fresh_constants():
    inst = parse_instance("axiom r: h(X) <- b(X).\ngoal: h(X), b(X), c(a, Y).\n")
    assert [str(g) for g in inst.goal] == ["h(x)", "b(x)", "c(a,y)"]


def test_unique_slot_declaration():
    inst = parse_instance("axiom r: h(X) <- b(X).\ngoal: h(a).\nunique: goer(G; P).\nnogood: b(X), h(X).\n")
    us = inst.unique_slots[0]
    assert (us.predicate, us.arity, us.key_positions, us.value_positions) == ("goer", 2, (0,), (1,))
    assert len(inst.nogoods[0].patterns) == 2


@pytest.mark.parametrize("text,err", [
    ("axiom r: h(X) <- .\ngoal: h(a).", InstanceSyntaxError),
    ("axiom r: h(X) b(X).\ngoal: h(a).", InstanceSyntaxError),
    ("axiom r: h(X) <- b(Y).\ngoal: h(a).", InstanceSemanticError),
    ("axiom r: h(X) <- b(X).\n", InstanceSemanticError),
    ("axiom r: h(X) <- b(X).\naxiom r: h(X) <- c(X).\ngoal: h(a).", InstanceSemanticError),
    ("axiom r @w=1: h(X) <- b(X), c(X).\ngoal: h(a).", InstanceSemanticError),
    ("axiom r: h(X) <- b(X).\ngoal: h(a), h(a).", InstanceSemanticError),
    ("axiom r: h(X) <- b(X).\ngoal: h(a).\ncost: b(a) = 3.", InstanceSemanticError),
    ("frobnicate: h(a).", InstanceSyntaxError),
])
def test_parse_errors(text, err):
    with pytest.raises(err):
        parse_instance(text)


def test_error_position_reported():
    with pytest.raises(InstanceSyntaxError) as ei:
        parse_instance("goal: h(a).\naxiom r: h(X) <- b(X)\n")
    assert "line" in str(ei.value)


def test_term_parsing():
    assert parse_term("m") == Const("m")
    assert parse_term("p12") == FlatSkolem(12)
    assert parse_term('s(r4,"Y",s(r9,"Y",s))') == Skolem("r4", "Y", [Skolem("r9", "Y", [Const("s")])])


def test_solution_roundtrip(fig1):
    text = render_solution(fig1)
    again = parse_solution(text)
    assert again == fig1
    doc = json.loads(text)
    assert set(doc) == {"objective", "cost", "abduced", "inferred", "factored", "eq_classes"}
    assert doc["cost"] == 188


@pytest.mark.parametrize("text", ["{", "[]", '{"abduced": ["f("]}', '{"inferred": [{"atom": "a(b)"}]}',
                                  '{"factored": [{"from": "a(b)", "to": "a(c)"}, {"from": "a(b)", "to": "a(d)"}]}'])
def test_solution_format_errors(text):
    with pytest.raises(SolutionFormatError):
        parse_solution(text)
