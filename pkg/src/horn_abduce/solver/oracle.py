"""Exhaustive reference solver for small instances.

Deliberately independent of the search and of the compiled kernels: it
enumerates every inference labeling, every set partition of the eligible
terms and (in ``bwdg`` mode) every acyclic choice of factoring targets,
then scores candidates with the plain objective evaluators.
"""

from __future__ import annotations

import itertools
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import networkx as nx

from ..core import AbductionInstance, EqRelation, Inference, Solution, unifiable_under_eq
from ..grounder import PotentialGraph
from ..objectives import eval_card, eval_coherence, eval_wa
from .constraints import check_global_constraints
from .factoring import canonical_factoring

DEFAULT_MAX_POT = 12
DEFAULT_MAX_TERMS = 8


class OracleLimit(Exception):
    pass


def set_partitions(items: Sequence) -> Iterator[List[List]]:
    """All set partitions, generated as restricted growth strings."""
    n = len(items)
    if n == 0:
        yield []
        return
    code = [0] * n

    def rec(i, top):
        if i == n:
            blocks = [[] for _ in range(top + 1)]
            for x, b in zip(items, code):
                blocks[b].append(x)
            yield blocks
            return
        for b in range(top + 2):
            code[i] = b
            yield from rec(i + 1, max(top, b))

    code[0] = 0
    yield from rec(1, 0)


def inference_labelings(graph: PotentialGraph):
    """Yield (inferred map, not-inferred list) for every acyclic back-chaining choice."""
    goals = sorted(graph.goal)

    def reaches(inferred, src, target):
        stack, seen = [src], set()
        while stack:
            x = stack.pop()
            if x == target:
                return True
            if x not in seen:
                seen.add(x)
                if x in inferred:
                    stack.extend(inferred[x].body)
        return False

    def rec(order, k, inferred, fai):
        if k == len(order):
            yield dict(inferred), list(fai)
            return
        atom = order[k]
        fai.append(atom)
        yield from rec(order, k + 1, inferred, fai)
        fai.pop()
        for mi in graph.inferences_for(atom):
            if any(reaches(inferred, b, atom) for b in mi.body):
                continue
            inferred[atom] = mi
            added = [b for b in dict.fromkeys(mi.body) if b not in order]
            yield from rec(order + added, k + 1, inferred, fai)
            del inferred[atom]

    yield from rec(goals, 0, {}, [])


def _general_factorings(instance, inferred, fai, eq):
    """Def.-2 style assignments: every not-inferred atom is abduced or factored
    onto one unifiable inferred or abduced atom, without cycles."""
    options = []
    for a in fai:
        opts = [None]
        for b in sorted(set(inferred) | set(fai)):
            if b != a and unifiable_under_eq(a, b, eq, instance.sort_names):
                opts.append(b)
        options.append(opts)
    base = nx.DiGraph()
    for h, mi in inferred.items():
        for b in mi.body:
            base.add_edge(h, b)
    for choice in itertools.product(*options):
        targets = dict(zip(fai, choice))
        if any(t is not None and t in targets and targets[t] is not None for t in choice):
            continue  # target must be abduced or inferred
        factored = {a: t for a, t in targets.items() if t is not None}
        g = base.copy()
        g.add_edges_from(factored.items())
        if not nx.is_directed_acyclic_graph(g):
            continue
        yield factored, frozenset(a for a, t in targets.items() if t is None)


def candidates(instance: AbductionInstance, graph: PotentialGraph, factoring_mode: str = "bwda",
               max_pot: int = DEFAULT_MAX_POT, max_terms: int = DEFAULT_MAX_TERMS):
    if factoring_mode not in ("bwda", "bwdg"):
        raise ValueError("oracle factoring mode must be bwda or bwdg")
    if len(graph.pot) > max_pot:
        raise OracleLimit("potential graph has %d atoms (limit %d)" % (len(graph.pot), max_pot))
    eligible_all = {t for a in graph.pot for t in a.args if not instance.is_sort(t)}
    if len(eligible_all) > max_terms:
        raise OracleLimit("%d eq-eligible terms (limit %d)" % (len(eligible_all), max_terms))
    for inferred_mi, fai in inference_labelings(graph):
        true_atoms = set(inferred_mi) | set(fai)
        for mi in inferred_mi.values():
            true_atoms.update(mi.body)
        inferred = {a: Inference(mi.axiom_id, mi.binding) for a, mi in inferred_mi.items()}
        terms = sorted({t for a in true_atoms for t in a.args if not instance.is_sort(t)})
        for blocks in set_partitions(terms):
            eq = EqRelation.from_classes(b for b in blocks if len(b) > 1)
            if factoring_mode == "bwda":
                factored, abduced = canonical_factoring(true_atoms, fai, eq)
                yield Solution(inferred, factored, abduced, eq)
            else:
                for factored, abduced in _general_factorings(instance, inferred_mi, fai, eq):
                    yield Solution(inferred, factored, abduced, eq)


_EVAL = {
    "card": lambda inst, sol: eval_card(sol),
    "coh": eval_coherence,
    "wa": eval_wa,
}


def brute_force_all(instance: AbductionInstance, graph: PotentialGraph, objectives=("card", "coh", "wa"),
                    factoring_mode: str = "bwda", **limits) -> Dict[str, Tuple[Optional[int], List[Solution]]]:
    """Optimal cost and all optimal solutions for several objectives in one sweep."""
    best: Dict[str, Tuple[Optional[int], List[Solution]]] = {o: (None, []) for o in objectives}
    for sol in candidates(instance, graph, factoring_mode, **limits):
        if instance.has_constraints and check_global_constraints(
                sol, sol.eq, instance.nogoods, instance.unique_slots):
            continue
        for o in objectives:
            c = _EVAL[o](instance, sol)
            cur, sols = best[o]
            if cur is None or c < cur:
                best[o] = (c, [sol.with_value(o, c)])
            elif c == cur:
                sols.append(sol.with_value(o, c))
    for o in objectives:
        c, sols = best[o]
        best[o] = (c, sorted(sols, key=lambda s: s.sort_key()))
    return best


def brute_force(instance: AbductionInstance, graph: PotentialGraph, objective: str,
                factoring_mode: str = "bwda", **limits) -> Tuple[Optional[int], List[Solution]]:
    return brute_force_all(instance, graph, (objective,), factoring_mode, **limits)[objective]
