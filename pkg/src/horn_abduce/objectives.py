"""Objective functions over labeled proof graphs."""

from __future__ import annotations

import itertools
from typing import Dict, FrozenSet, Set

import networkx as nx

from .core import AbductionInstance, Atom, Solution

OBJECTIVES = ("card", "coh", "wa")


class CycleDetected(ValueError):
    pass


def eval_card(sol: Solution) -> int:
    return len(sol.abduced)


def _graph(instance: AbductionInstance, sol: Solution) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(sol.true_atoms)
    g.add_nodes_from(instance.goal)
    g.add_edges_from(sol.edges(instance))
    return g


def reachable_from_goals(instance: AbductionInstance, sol: Solution) -> Dict[Atom, FrozenSet[Atom]]:
    """Map each atom to the goals that reach it along inference and factoring edges."""
    g = _graph(instance, sol)
    reach: Dict[Atom, Set[Atom]] = {a: set() for a in g}
    for goal in instance.goal:
        reach[goal].add(goal)
        for a in nx.descendants(g, goal):
            reach[a].add(goal)
    return {a: frozenset(s) for a, s in reach.items()}


def eval_coherence(instance: AbductionInstance, sol: Solution) -> int:
    """Number of goal pairs with no atom reachable from both."""
    g = _graph(instance, sol)
    closure = {goal: nx.descendants(g, goal) | {goal} for goal in instance.goal}
    goals = sorted(instance.goal)
    return sum(1 for a, b in itertools.combinations(goals, 2) if closure[a].isdisjoint(closure[b]))


def _topological(instance: AbductionInstance, sol: Solution):
    g = _graph(instance, sol)
    try:
        return g, list(nx.lexicographical_topological_sort(g, key=lambda a: a.key))
    except nx.NetworkXUnfeasible:
        cycle = nx.find_cycle(g)
        raise CycleDetected("proof graph has a cycle through %s" % ", ".join(str(u) for u, _ in cycle)) from None


def propagate_pcost(instance: AbductionInstance, sol: Solution, min_only: bool = False) -> Dict[Atom, FrozenSet[int]]:
    """Potential cost sets of all true atoms.

    With ``min_only`` only the smallest cost of each atom is pushed along
    edges; the per-atom minimum is the same either way.
    """
    _, order = _topological(instance, sol)
    bodies = sol.bodies(instance)
    costs: Dict[Atom, Set[int]] = {a: set() for a in order}
    for goal in instance.goal:
        costs[goal].add(instance.ic(goal))
    for atom in order:
        here = costs[atom]
        if not here:
            continue
        if min_only:
            here = {min(here)}
        if atom in sol.inferred:
            ax = instance.axiom(sol.inferred[atom].axiom_id)
            for i, b in enumerate(bodies[atom]):
                costs[b].update(ax.body_cost(c, i) for c in here)
        elif atom in sol.factored:
            costs[sol.factored[atom]].update(here)
    return {a: frozenset(s) for a, s in costs.items()}


def eval_wa(instance: AbductionInstance, sol: Solution, min_only: bool = False) -> int:
    costs = propagate_pcost(instance, sol, min_only)
    total = 0
    for a in sol.abduced:
        if not costs.get(a):
            raise ValueError("abduced atom %s is not reachable from the goal" % a)
        total += min(costs[a])
    return total


def evaluate(objective: str, instance: AbductionInstance, sol: Solution) -> int:
    if objective == "card":
        return eval_card(sol)
    if objective == "coh":
        return eval_coherence(instance, sol)
    if objective == "wa":
        return eval_wa(instance, sol)
    raise ValueError("unknown objective %r" % objective)
