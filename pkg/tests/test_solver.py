import pytest

from horn_abduce import _pykernels
from horn_abduce.core import Const, EqRelation, Solution
from horn_abduce.grounder import SkolemPolicy, acyclic_subtheory, ground_potential_graph
from horn_abduce.ingest import parse_atom, parse_instance, render_solution
from horn_abduce.solver import (INFEASIBLE, OPTIMAL, TIMEOUT, OracleLimit, SolveOptions, brute_force,
                                brute_force_all, canonical_factoring, check_global_constraints,
                                find_lazy_violations, lower_bound_costs, solve, verify)
from horn_abduce.solver.oracle import set_partitions

from conftest import load

BELL = [1, 1, 2, 5, 15, 52, 203, 877]


@pytest.mark.parametrize("n", range(len(BELL)))
def test_set_partitions_count(n):
    parts = list(set_partitions(list(range(n))))
    assert len(parts) == BELL[n]
    assert len({tuple(map(tuple, p)) for p in parts}) == BELL[n]


def test_canonical_factoring_picks_smallest_rep():
    m, s = Const("m"), Const("s")
    x, y = parse_atom("name(m, mary)"), parse_atom("name(s, mary)")
    factored, abduced = canonical_factoring({x, y}, [x, y], EqRelation([(m, s)]))
    assert factored == {y: x} and abduced == {x}
    factored, abduced = canonical_factoring({x, y}, [x, y], EqRelation())
    assert factored == {} and abduced == {x, y}


@pytest.mark.parametrize("objective,cost", [("card", 3), ("coh", 6), ("wa", 188)])
@pytest.mark.parametrize("lazy", [True, False])
def test_example1_optima(ex1, ex1_graph, objective, cost, lazy):
    res = solve(ex1, ex1_graph, objective, SolveOptions(lazy=lazy))
    assert res.status == OPTIMAL and res.cost == cost
    assert verify(ex1, res.solution, objective, graph=ex1_graph).cost == cost


def test_solve_with_python_kernels(ex1, ex1_graph):
    res = solve(ex1, ex1_graph, "wa", kernel_mod=_pykernels)
    assert res.cost == 188 and res.stats["backend"] == "python"


def test_solution_is_deterministic(ex1, ex1_graph):
    a = render_solution(solve(ex1, ex1_graph, "coh").solution)
    b = render_solution(solve(ex1, ex1_graph, "coh").solution)
    assert a == b


def test_lower_bounds(ex1, ex1_graph):
    lb = lower_bound_costs(ex1, ex1_graph)
    assert lb[parse_atom("name(m, mary)")] == 100
    assert lb[parse_atom("is(f, dead)")] == 40
    assert all(v >= 1 for v in lb.values())


def test_bound_makes_problem_infeasible(ex1, ex1_graph):
    res = solve(ex1, ex1_graph, "wa", SolveOptions(bound=150))
    assert res.status == INFEASIBLE and res.solution is None
    assert solve(ex1, ex1_graph, "wa", SolveOptions(bound=188)).cost == 188


def test_timeout_keeps_incumbent():
    inst = load("accel/rob.kb")
    g = ground_potential_graph(inst, SkolemPolicy.parse("g1"))
    res = solve(inst, g, "coh", SolveOptions(time_limit=0.05))
    assert res.status == TIMEOUT
    assert res.solution is not None and verify(inst, res.solution, "coh", graph=g).valid


def test_nogood_can_make_instance_infeasible():
    inst = parse_instance("axiom r: h(X) <- b(X).\ngoal: h(a), c(a).\nnogood: h(X), c(Y).\nnogood: b(X), c(Y).\n")
    g = ground_potential_graph(inst)
    assert solve(inst, g, "card").status == INFEASIBLE
    assert brute_force(inst, g, "card")[0] is None


def test_unique_slot_forces_value_merge():
    text = "axiom r: g(X) <- h(X, Y).\ngoal: h(a, c), h(a, d).\n"
    slot = parse_instance(text + "unique: h(K; V).\n")
    res = solve(slot, ground_potential_graph(slot), "wa")
    assert res.cost == 100 and res.solution.eq.related(Const("c"), Const("d"))
    unmerged = Solution({}, {}, frozenset(slot.goal))
    assert check_global_constraints(unmerged, unmerged.eq, slot.nogoods, slot.unique_slots)

    # with d a sort name the values cannot merge
    sorted_free = parse_instance(text + "sortname: d.\n")
    assert solve(sorted_free, ground_potential_graph(sorted_free), "wa").cost == 200
    blocked = parse_instance(text + "sortname: d.\nunique: h(K; V).\n")
    g = ground_potential_graph(blocked)
    assert solve(blocked, g, "wa").status == INFEASIBLE
    assert brute_force(blocked, g, "wa")[0] is None


def test_constraint_fixture_matches_oracle():
    inst = load("tiny_nogood.kb")
    g = ground_potential_graph(inst)
    best = brute_force_all(inst, g)
    for obj, (cost, sols) in best.items():
        for lazy in (True, False):
            res = solve(inst, g, obj, SolveOptions(lazy=lazy))
            assert res.cost == cost
            assert not check_global_constraints(res.solution, res.solution.eq, inst.nogoods, inst.unique_slots)


def test_bwdg_oracle_mode():
    inst = load("tiny_nogood.kb")
    g = ground_potential_graph(inst)
    for obj in ("card", "coh", "wa"):
        res = solve(inst, g, obj, SolveOptions(factoring_mode="bwdg-oracle"))
        assert res.status == OPTIMAL and res.cost == solve(inst, g, obj).cost


def test_oracle_limits(ex1, ex1_graph):
    with pytest.raises(OracleLimit):
        brute_force(ex1, ex1_graph, "card")
    cost, sols = brute_force(ex1, ex1_graph, "wa", max_pot=20, max_terms=10)
    assert cost == 188 and sols


def test_find_lazy_violations():
    a, b, c = (Const(x) for x in "abc")
    p, q = parse_atom("p(a)"), parse_atom("q(a)")
    out = find_lazy_violations(EqRelation([(a, b), (b, c)]), [(p, q), (q, p)])
    kinds = sorted(v.kind for v in out)
    assert kinds == ["cycle", "transitivity"]


def test_accel_fixtures_lazy_equals_eager():
    for name in ("accel/shop.kb", "accel/rob.kb", "accel/dine.kb"):
        inst = acyclic_subtheory(load(name))
        g = ground_potential_graph(inst)
        for obj in ("card", "coh", "wa"):
            lazy = solve(inst, g, obj, SolveOptions(lazy=True))
            eager = solve(inst, g, obj, SolveOptions(lazy=False))
            assert lazy.cost == eager.cost
            assert lazy.solution.eq.is_transitive()


# -- verifier --------------------------------------------------------------

def test_verify_accepts_fig1(ex1, fig1):
    res = verify(ex1, fig1)
    assert res.valid and res.cost == 188
    assert str(res) == "valid (cost 188)"


def test_verify_rejects_unneeded_atom(ex1, fig1):
    bad = Solution(fig1.inferred, fig1.factored, fig1.abduced | {parse_atom("inst(f, female)")}, fig1.eq, "wa")
    res = verify(ex1, bad)
    assert not res.valid
    assert any("neither a goal nor needed" in r for r in res.reasons)


def test_verify_rejects_missing_goal(ex1, fig1):
    goal = parse_atom("name(m, mary)")
    factored = {k: v for k, v in fig1.factored.items() if v != goal}
    bad = Solution(fig1.inferred, factored, fig1.abduced - {goal}, fig1.eq, "wa")
    assert any(r.startswith("goal name(m,mary) not true") for r in verify(ex1, bad).reasons)


def test_verify_rejects_unknown_inference(ex1, fig1):
    from horn_abduce.core import Inference
    inferred = dict(fig1.inferred)
    inferred[parse_atom("lost(m, f)")] = Inference("r9")
    res = verify(ex1, Solution(inferred, fig1.factored, fig1.abduced, fig1.eq, "wa"))
    assert any("not in the potential graph" in r for r in res.reasons)
