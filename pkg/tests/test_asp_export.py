import os

import pytest

from horn_abduce.asp_export import (OBJECTIVES, VARIANTS, VOCABULARY, ExportError, emit_axiom_rules, emit_encoding,
                                    emit_facts, emit_global_constraints, emit_objective, emit_program,
                                    rule_predicates)
from horn_abduce.grounder import acyclic_subtheory, ground_potential_graph
from horn_abduce.ingest import parse_instance
from horn_abduce.solver import solve

from conftest import TESTS, load

GOLDEN = os.path.join(TESTS, "golden")
COMBOS = [(v, o) for v in VARIANTS for o in OBJECTIVES if v != "fwda" or o == "card"]


def test_facts(ex1):
    facts = emit_facts(ex1)
    assert "goal(c(name,m,mary)).\n" in facts
    assert "sortname(person).\n" in facts
    assert "numberofbodies(r10,3).\n" in facts
    assert "sortname" not in emit_facts(parse_instance("axiom r: h(X) <- b(X).\ngoal: h(a).\n"))
    assert "numberofbodies" not in emit_facts(ex1, bodies=False)


def test_axiom_rewriting_with_existential(ex1):
    text = emit_axiom_rules(ex1, "bwda")
    block = text[text.index("% r9:"):text.index("% r10:")].splitlines()[1:]
    assert block == [
        'mayInferVia(r9,c(is,V1,depressed),l(V2)) :- pot(c(is,V1,depressed)), V2 = s(r9,"Y",V1).',
        "inferenceNeeds(c(is,V1,depressed),r9,c(is,V2,dead)) :- mayInferVia(r9,c(is,V1,depressed),l(V2)).",
        "inferenceNeeds(c(is,V1,depressed),r9,c(importantfor,V2,V1)) :- "
        "mayInferVia(r9,c(is,V1,depressed),l(V2)).",
        "numberofbodies(r9,2).",
    ]


def test_axiom_rewriting_without_existential(ex1):
    text = emit_axiom_rules(ex1, "bwdg")
    assert "mayInferVia(r5,c(inst,V1,female),l) :- pot(c(inst,V1,female)).\n" in text


def test_forward_rewriting(ex1):
    text = emit_axiom_rules(ex1, "fwda")
    block = text[text.index("% r9:"):text.index("% r10:")].splitlines()[1:]
    assert block == [
        "infer(c(is,V1,depressed)) :- true(c(is,V2,dead)), true(c(importantfor,V2,V1)).",
        'pot(c(is,V2,dead)) :- pot(c(is,V1,depressed)), V2 = s(r9,"Y",V1).',
        'pot(c(importantfor,V2,V1)) :- pot(c(is,V1,depressed)), V2 = s(r9,"Y",V1).',
    ]


def test_encodings_contain_their_blocks():
    bwda = emit_encoding("bwda")
    assert "fa(P) :- fai(P).\n" in bwda
    assert "factorClusterAbove(A) :- factorCluster(A,_).\n" in bwda
    assert "factorVia(A,B) :- factorCluster(A,B), not factorClusterAbove(B).\n" in bwda
    assert "below(A,C) :- below(A,B), below(B,C).\n" in emit_encoding("bwdg")
    assert "factorI(P) :- factorViaI(P,_).\n" in emit_encoding("bwdai")
    assert ":- goal(A), not true(A).\n" in emit_encoding("fwda")
    # transitivity is a constraint, not a rule
    assert ":- eq(A,B), eq(B,C), A != B, B != C, A != C, not eq(A,C).\n" in bwda


def test_hu_rules_per_arity():
    text = emit_encoding("bwda", arities=(1, 3))
    hu = [ln for ln in text.splitlines() if ln.startswith("hu(")]
    assert hu == ["hu(X) :- pot(c(_,X)).", "hu(X) :- pot(c(_,X,_,_)).", "hu(X) :- pot(c(_,_,X,_)).",
                  "hu(X) :- pot(c(_,_,_,X))."]


def test_objectives():
    assert emit_objective("card") == ":~ abduce(P). [1@1,P]\n"
    assert "pcost(P,100) :- goal(P).\n" in emit_objective("wa")
    assert "reach(P,P) :- goal(P).\n" in emit_objective("coh")
    assert "Mc = #max { (C*6/5)/N ; 1 }" in emit_objective("wa")


def test_global_constraints():
    inst = load("accel/shop.kb")
    lines = emit_global_constraints(inst).splitlines()
    assert lines[0] == ":- abduce(c(go_step,V1,V2)), abduce(c(goer,V3,V4)), eq(V2,V3)."
    assert lines[1] == ":- true(c(goer,V1,V2)), true(c(goer,V3,V4)), eq(V1,V3), V2 < V4, not eq(V2,V4)."
    assert emit_global_constraints(load("example1.kb")) == ""


def test_nogood_with_constant_joins_via_eq():
    inst = parse_instance("axiom r: h(X) <- b(X).\ngoal: h(a).\nnogood: b(a), h(_).\n")
    assert emit_global_constraints(inst) == ":- abduce(c(b,V1)), abduce(c(h,_)), eq(V1,a).\n"


def test_export_errors(ex1):
    with pytest.raises(ExportError):
        emit_encoding("bwdx")
    with pytest.raises(ExportError):
        emit_objective("wa", "fwda")
    weighted = parse_instance("axiom r @w=1/2: h(X) <- b(X).\ngoal: h(a).\n")
    with pytest.raises(ExportError):
        emit_program(weighted, "bwda", "wa")
    assert emit_program(weighted, "bwda", "card")
    seeded = parse_instance("axiom r: h(X) <- b(X).\ngoal: h(a).\ncost: h(a) = 50.\n")
    with pytest.raises(ExportError):
        emit_program(seeded, "bwda", "wa")


@pytest.mark.parametrize("variant,objective", COMBOS)
def test_golden_files(ex1, variant, objective):
    with open(os.path.join(GOLDEN, "example1_%s_%s.lp" % (variant, objective)), encoding="utf-8") as fh:
        assert emit_program(ex1, variant, objective) == fh.read()


@pytest.mark.parametrize("variant,objective", COMBOS)
def test_vocabulary_closure(variant, objective):
    for name in ("example1.kb", "accel/shop.kb", "tiny_nogood.kb"):
        preds = rule_predicates(emit_program(load(name), variant, objective))
        assert preds <= VOCABULARY, preds - VOCABULARY


def test_rule_predicates_ignores_terms():
    text = 'mayInferVia(r,c(p,V1),l(V2)) :- pot(c(p,V1)), V2 = s(r,"Y",V1). % comment(x)\n'
    assert rule_predicates(text) == {"mayInferVia", "pot"}


# -- optional cross-check with clingo ---------------------------------------

def _clingo_cost(program):
    clingo = pytest.importorskip("clingo")
    ctl = clingo.Control(["--opt-mode=opt", "--warn=none"])
    ctl.add("base", [], program)
    ctl.ground([("base", [])])
    best = []
    ctl.solve(on_model=lambda m: best.append(m.cost))
    if not best:
        return None  # unsatisfiable
    return best[-1][0] if best[-1] else 0


@pytest.mark.asp
@pytest.mark.parametrize("variant,objective", COMBOS)
def test_clingo_example1(ex1, ex1_graph, variant, objective):
    assert _clingo_cost(emit_program(ex1, variant, objective)) == solve(ex1, ex1_graph, objective).cost


@pytest.mark.asp
def test_clingo_corpus():
    from corpus import corpus
    for text, inst, graph in corpus(60):
        for obj in OBJECTIVES:
            want = solve(inst, graph, obj).cost
            assert _clingo_cost(emit_program(inst, "bwda", obj)) == want, text


@pytest.mark.asp
@pytest.mark.parametrize("name", ["accel/shop.kb", "accel/rob.kb", "accel/dine.kb", "tiny_nogood.kb"])
def test_clingo_fixtures(name):
    inst = acyclic_subtheory(load(name))
    g = ground_potential_graph(inst)
    for obj in OBJECTIVES:
        assert _clingo_cost(emit_program(inst, "bwda", obj)) == solve(inst, g, obj).cost
