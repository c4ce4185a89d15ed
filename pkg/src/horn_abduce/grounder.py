"""Potential proof graph construction by back-chaining from the goal."""

from __future__ import annotations

import collections
import json
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx

from .core import (
    AbductionInstance,
    DisjointSet,
    Var,
    Atom,
    Const,
    FlatSkolem,
    Skolem,
    Term,
    pair_occurrences,
    skolem_depth,
    subterms,
)

DEFAULT_POT_LIMIT = 10 ** 6


class GroundingError(Exception):
    pass


class CyclicTheory(GroundingError):
    def __init__(self, sccs):
        self.sccs = sccs
        super().__init__("unlimited Skolemization on a cyclic theory (cycles over %s)"
                         % "; ".join("{%s}" % ", ".join(c) for c in sccs))


class ResourceLimit(GroundingError):
    pass


class _BlockedType:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "Blocked"

    def __bool__(self):
        return False


Blocked = _BlockedType()


@dataclass(frozen=True)
class SkolemPolicy:
    """Value-invention limit.

    ``variant`` is ``"inf"`` (unlimited), ``"parent"`` (block when a head
    argument already has ``depth`` nested Skolem layers) or ``"generation"``
    (block when a head argument already carries ``depth`` layers built for
    the same axiom and variable).
    """

    variant: str = "inf"
    depth: int = 0
    naming: str = "structured"

    def __post_init__(self):
        if self.variant not in ("inf", "parent", "generation"):
            raise ValueError("unknown Skolem policy %r" % self.variant)
        if self.variant != "inf" and self.depth < 1:
            raise ValueError("policy depth must be >= 1")
        if self.naming not in ("structured", "flat"):
            raise ValueError("unknown naming %r" % self.naming)

    @classmethod
    def parse(cls, text: str, naming: str = "structured") -> "SkolemPolicy":
        text = text.strip().lower()
        if text in ("inf", "unlimited"):
            return cls("inf", 0, naming)
        m = re.fullmatch(r"([pg])(\d+)", text)
        if not m or int(m.group(2)) < 1:
            raise ValueError("bad Skolem policy %r (expected inf, p<i> or g<i>)" % text)
        return cls("parent" if m.group(1) == "p" else "generation", int(m.group(2)), naming)

    @property
    def unlimited(self) -> bool:
        return self.variant == "inf"

    def __str__(self):
        if self.variant == "inf":
            return "inf"
        return "%s%d" % ("p" if self.variant == "parent" else "g", self.depth)


UNLIMITED = SkolemPolicy()


def skolemize(policy: SkolemPolicy, axiom_id: str, var_name: str, head_args: Sequence[Term]):
    """Structured Skolem term for an existential variable, or ``Blocked``.

    Operates on structured terms only; flat renaming is applied by the grounder.
    """
    if policy.variant == "parent":
        if any(skolem_depth(t) >= policy.depth for t in head_args):
            return Blocked
    elif policy.variant == "generation":
        if any(pair_occurrences(t, axiom_id, var_name) >= policy.depth for t in head_args):
            return Blocked
    return Skolem(axiom_id, var_name, head_args)


@dataclass(frozen=True)
class MayInfer:
    axiom_id: str
    head: Atom
    binding: Tuple[Term, ...]
    body: Tuple[Atom, ...]


@dataclass
class PotentialGraph:
    pot: Tuple[Atom, ...]
    may_infer: Tuple[MayInfer, ...]
    goal: Tuple[Atom, ...]
    policy: SkolemPolicy = UNLIMITED
    skolem_terms: Tuple[Term, ...] = ()
    # flat constant -> structured term it stands for
    flat_map: Dict[Term, Term] = field(default_factory=dict)

    def __post_init__(self):
        by_head = collections.defaultdict(list)
        for mi in self.may_infer:
            by_head[mi.head].append(mi)
        self.by_head = dict(by_head)
        self.pot_set = frozenset(self.pot)

    @property
    def needs(self) -> Tuple[Tuple[Atom, str, Atom], ...]:
        out = []
        for mi in self.may_infer:
            for b in dict.fromkeys(mi.body):
                out.append((mi.head, mi.axiom_id, b))
        return tuple(out)

    @property
    def skolem_count(self) -> int:
        return len(self.skolem_terms)

    def inferences_for(self, atom: Atom) -> List[MayInfer]:
        return self.by_head.get(atom, [])

    def find(self, axiom_id: str, head: Atom) -> Optional[MayInfer]:
        for mi in self.by_head.get(head, ()):
            if mi.axiom_id == axiom_id:
                return mi
        return None

    def structured(self, t: Term) -> Term:
        return self.flat_map.get(t, t)

    def terms(self) -> FrozenSet[Term]:
        return frozenset(t for a in self.pot for t in a.args)

    def to_dict(self) -> dict:
        return {
            "policy": str(self.policy),
            "pot": [str(a) for a in self.pot],
            "may_infer": [
                {"axiom": mi.axiom_id, "head": str(mi.head), "binding": [str(t) for t in mi.binding]}
                for mi in self.may_infer
            ],
            "needs": [{"head": str(h), "axiom": r, "body": str(b)} for h, r, b in self.needs],
            "skolem_terms": [
                {"term": str(t), "structure": str(self.flat_map[t])} if t in self.flat_map else str(t)
                for t in self.skolem_terms
            ],
        }

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _patterns_unify(a, b) -> bool:
    """Unifiability of two axiom atoms after renaming them apart."""
    if a.predicate != b.predicate or len(a.args) != len(b.args):
        return False
    ds = DisjointSet()
    for x, y in zip(a.args, b.args):
        ds.union(_node("a", x), _node("b", y))
    # a class holding two distinct constants is a clash
    return all(sum(1 for n in g if n[0] == "c") <= 1 for g in ds.groups().values())


def _node(side, x):
    return ("c", x.name) if isinstance(x, Const) else ("v", side, x.name)


def dependency_graph(instance: AbductionInstance) -> nx.DiGraph:
    """Axiom graph: r -> r' when a body atom of r unifies with the head of r'."""
    g = nx.DiGraph()
    for ax in instance.axioms:
        g.add_node(ax.id)
    for ax in instance.axioms:
        for other in instance.axioms:
            if any(_patterns_unify(b, other.head) for b in ax.body):
                g.add_edge(ax.id, other.id)
    return g


def _cyclic_axiom_sets(instance: AbductionInstance):
    g = dependency_graph(instance)
    for scc in nx.strongly_connected_components(g):
        if len(scc) > 1 or any(g.has_edge(r, r) for r in scc):
            yield scc


def detect_cycles(instance: AbductionInstance) -> List[List[str]]:
    """Head predicates of each cyclic component of the axiom graph, sorted."""
    out = []
    for scc in _cyclic_axiom_sets(instance):
        out.append(sorted({instance.axiom(r).head.predicate for r in scc}))
    return sorted(out)


def acyclic_subtheory(instance: AbductionInstance, drop: Optional[Sequence[str]] = None) -> AbductionInstance:
    """Remove axioms until the axiom graph is acyclic.

    Without ``drop``, the latest-declared axiom on a cycle is removed first,
    repeatedly, so earlier axioms survive.
    """
    if drop is None:
        g = dependency_graph(instance)
        order = {ax.id: i for i, ax in enumerate(instance.axioms)}
        drop = []
        while True:
            on_cycle = [r for scc in nx.strongly_connected_components(g)
                        for r in scc if len(scc) > 1 or g.has_edge(r, r)]
            if not on_cycle:
                break
            r = max(on_cycle, key=order.get)
            g.remove_node(r)
            drop.append(r)
    drop = set(drop)
    keep = tuple(ax for ax in instance.axioms if ax.id not in drop)
    return AbductionInstance(keep, instance.goal, instance.initial_costs, instance.sort_names,
                             instance.nogoods, instance.unique_slots)


def ground_potential_graph(instance: AbductionInstance, policy: SkolemPolicy = UNLIMITED,
                           pot_limit: int = DEFAULT_POT_LIMIT) -> PotentialGraph:
    """Least fixpoint of back-chaining from the goal atoms."""
    if policy.unlimited:
        sccs = detect_cycles(instance)
        if sccs:
            raise CyclicTheory(sccs)

    flat = policy.naming == "flat"
    to_flat: Dict[Term, Term] = {}
    flat_map: Dict[Term, Term] = {}
    skolems: Dict[Term, None] = {}

    def structured(t):
        return flat_map.get(t, t)

    def name(t):
        if not flat:
            return t
        f = to_flat.get(t)
        if f is None:
            f = FlatSkolem(len(to_flat) + 1)
            to_flat[t] = f
            flat_map[f] = t
        return f

    by_pred = collections.defaultdict(list)
    for ax in instance.axioms:
        by_pred[(ax.head.predicate, ax.head.arity)].append(ax)

    pot: Dict[Atom, None] = dict.fromkeys(instance.goal)
    may_infer = []
    queue = collections.deque(pot)
    while queue:
        atom = queue.popleft()
        for ax in by_pred.get((atom.predicate, atom.arity), ()):
            binding = ax.match_head(atom)
            if binding is None:
                continue
            head_args = [structured(binding[v]) for v in ax.head_vars]
            ex_terms = []
            for v in ax.existential_vars:
                t = skolemize(policy, ax.id, v, head_args)
                if t is Blocked:
                    break
                ex_terms.append(t)
            else:
                named = [name(t) for t in ex_terms]
                for t in named:
                    skolems.setdefault(t)
                binding.update(zip(ax.existential_vars, named))
                body = tuple(b.substitute(binding) for b in ax.body)
                may_infer.append(MayInfer(ax.id, atom, tuple(named), body))
                for b in body:
                    if b not in pot:
                        pot[b] = None
                        if len(pot) > pot_limit:
                            raise ResourceLimit("potential graph exceeds %d atoms" % pot_limit)
                        queue.append(b)

    return PotentialGraph(
        pot=tuple(sorted(pot)),
        may_infer=tuple(sorted(may_infer, key=lambda m: (m.head.key, m.axiom_id))),
        goal=tuple(instance.goal),
        policy=policy,
        skolem_terms=tuple(sorted(skolems)),
        flat_map=flat_map,
    )


def term_depth(t: Term) -> int:
    if isinstance(t, Skolem):
        return 1 + max((term_depth(a) for a in t.args), default=0)
    return 0


def grounding_stats(g: PotentialGraph) -> dict:
    max_depth = 0
    for a in g.pot:
        for t in a.args:
            max_depth = max(max_depth, term_depth(g.structured(t)))
    return {
        "pot_count": len(g.pot),
        "edge_count": len(g.needs),
        "skolem_count": g.skolem_count,
        "max_term_depth": max_depth,
    }


def inventable_terms(g: PotentialGraph) -> FrozenSet[Term]:
    """Structured Skolem terms created during grounding (sub-terms included)."""
    out = set()
    for t in g.skolem_terms:
        for s in subterms(g.structured(t)):
            if isinstance(s, Skolem):
                out.add(s)
    return frozenset(out)
