"""Independent checker for labeled proof graphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import networkx as nx

from ..core import AbductionInstance, Solution, unifiable_under_eq
from ..grounder import UNLIMITED, PotentialGraph, SkolemPolicy, ground_potential_graph
from ..objectives import evaluate
from .constraints import check_global_constraints


@dataclass
class VerifyResult:
    valid: bool
    cost: Optional[int] = None
    reasons: List[str] = field(default_factory=list)

    def __bool__(self):
        return self.valid

    def __str__(self):
        if self.valid:
            return "valid (cost %s)" % self.cost
        return "invalid: " + "; ".join(self.reasons)


def verify(instance: AbductionInstance, sol: Solution, objective: Optional[str] = None,
           graph: Optional[PotentialGraph] = None, policy: SkolemPolicy = UNLIMITED) -> VerifyResult:
    """Check goals, inferences, factoring, acyclicity, eq, constraints and cost.

    Factoring targets may be abduced or inferred atoms.  The objective
    defaults to the one recorded in the solution.
    """
    reasons = []
    if graph is None:
        graph = ground_potential_graph(instance, policy)
    true_atoms = sol.true_atoms

    for a, b, what in ((sol.inferred, sol.factored, "inferred and factored"),
                       (sol.inferred, sol.abduced, "inferred and abduced"),
                       (sol.factored, sol.abduced, "factored and abduced")):
        for atom in sorted(set(a) & set(b)):
            reasons.append("atom %s is both %s" % (atom, what))

    for g in instance.goal:
        if g not in true_atoms:
            reasons.append("goal %s not true" % g)

    needed = set(instance.goal)
    for head, inf in sorted(sol.inferred.items()):
        mi = graph.find(inf.axiom_id, head)
        if mi is None or tuple(mi.binding) != tuple(inf.binding):
            reasons.append("inference of %s via %s not in the potential graph" % (head, inf.axiom_id))
            continue
        for b in mi.body:
            needed.add(b)
            if b not in true_atoms:
                reasons.append("inference body not true: %s needs %s" % (head, b))

    for src, dst in sorted(sol.factored.items()):
        if dst not in sol.abduced and dst not in sol.inferred:
            reasons.append("factoring target %s of %s is neither abduced nor inferred" % (dst, src))
        if not unifiable_under_eq(src, dst, sol.eq, instance.sort_names):
            reasons.append("factored atom %s does not unify with %s" % (src, dst))

    for atom in sorted(true_atoms - needed):
        reasons.append("atom %s is neither a goal nor needed by an inference" % atom)

    edges = []
    for head, inf in sol.inferred.items():
        mi = graph.find(inf.axiom_id, head)
        if mi is not None:
            edges.extend((head, b) for b in mi.body)
    edges.extend(sol.factored.items())
    g = nx.DiGraph(edges)
    if not nx.is_directed_acyclic_graph(g):
        cyc = nx.find_cycle(g)
        reasons.append("proof graph is cyclic: %s" % " -> ".join(str(u) for u, _ in cyc))

    viols = sol.eq.transitivity_violations()
    if viols:
        a, b, c = viols[0]
        reasons.append("eq not transitive: %s~%s, %s~%s but not %s~%s" % (a, b, b, c, a, c))
    for a, b in sorted(sol.eq.pairs):
        if instance.is_sort(a) or instance.is_sort(b):
            reasons.append("sort name merged: %s~%s" % (a, b))

    if instance.has_constraints and not viols:
        for v in check_global_constraints(sol, sol.eq, instance.nogoods, instance.unique_slots):
            reasons.append(str(v))

    if reasons:
        return VerifyResult(False, None, reasons)
    objective = objective or sol.objective
    if objective is None:
        return VerifyResult(True, None, [])
    cost = evaluate(objective, instance, sol)
    if sol.objective_value is not None and sol.objective_value != cost:
        return VerifyResult(False, cost, ["objective_value %d differs from recomputed %s cost %d"
                                          % (sol.objective_value, objective, cost)])
    return VerifyResult(True, cost, [])
