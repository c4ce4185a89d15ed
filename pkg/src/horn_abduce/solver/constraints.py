"""Global constraints (assumption nogoods, unique slots) and on-demand checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from ..core import Atom, EqRelation, Nogood, Term, UniqueSlot, Var


@dataclass(frozen=True)
class Violation:
    kind: str  # "nogood" | "unique"
    atoms: Tuple[Atom, ...]

    def __str__(self):
        what = "assumption nogood" if self.kind == "nogood" else "unique slot"
        return "%s violated by %s" % (what, ", ".join(str(a) for a in self.atoms))


@dataclass(frozen=True)
class LazyNogood:
    """Forbidden partial pattern learned from a rejected candidate.

    ``transitivity`` carries a term triple (a, b, c) meaning a~b, b~c, a!~c
    is not allowed; ``cycle`` carries the edge list of a basic cycle.
    """

    kind: str
    terms: Tuple[Term, ...] = ()
    edges: Tuple[Tuple[Atom, Atom], ...] = ()


Same = Callable[[Term, Term], bool]


def _nogood_matches(patterns: Sequence, atoms: Sequence[Atom], same: Same) -> Optional[Tuple[Atom, ...]]:
    by_pred = {}
    for a in atoms:
        by_pred.setdefault((a.predicate, a.arity), []).append(a)

    def extend(k, binding, chosen):
        if k == len(patterns):
            return tuple(chosen)
        pat = patterns[k]
        for atom in by_pred.get((pat.predicate, pat.arity), ()):
            b = dict(binding)
            ok = True
            for p, t in zip(pat.args, atom.args):
                if isinstance(p, Var):
                    if p.name == "_":
                        continue
                    if p.name in b:
                        if not same(b[p.name], t):
                            ok = False
                            break
                    else:
                        b[p.name] = t
                elif not same(p, t):
                    ok = False
                    break
            if ok:
                found = extend(k + 1, b, chosen + [atom])
                if found is not None:
                    return found
        return None

    return extend(0, {}, [])


def nogood_violations(nogoods: Iterable[Nogood], abduced: Iterable[Atom], same: Same) -> List[Violation]:
    abduced = sorted(abduced)
    out = []
    for ng in nogoods:
        hit = _nogood_matches(ng.patterns, abduced, same)
        if hit is not None:
            out.append(Violation("nogood", hit))
    return out


def unique_violations(slots: Iterable[UniqueSlot], true_atoms: Iterable[Atom], same: Same) -> List[Violation]:
    true_atoms = sorted(true_atoms)
    out = []
    for us in slots:
        group = [a for a in true_atoms if a.predicate == us.predicate and a.arity == us.arity]
        for i, a in enumerate(group):
            for b in group[i + 1:]:
                if all(same(a.args[k], b.args[k]) for k in us.key_positions) and \
                        not all(same(a.args[k], b.args[k]) for k in us.value_positions):
                    out.append(Violation("unique", (a, b)))
    return out


def eq_same(eq: EqRelation) -> Same:
    return lambda x, y: x == y or eq.related(x, y)


def check_global_constraints(sol, eq: EqRelation, nogoods: Iterable[Nogood] = (),
                             unique_slots: Iterable[UniqueSlot] = ()) -> List[Violation]:
    """Nogoods apply to abduced atoms, unique slots to all true atoms."""
    same = eq_same(eq)
    return nogood_violations(nogoods, sol.abduced, same) + unique_violations(unique_slots, sol.true_atoms, same)


def find_lazy_violations(eq: EqRelation, edges: Iterable[Tuple[Atom, Atom]] = ()) -> List[LazyNogood]:
    out = [LazyNogood("transitivity", terms=t) for t in eq.transitivity_violations()]
    g = nx.DiGraph(list(edges))
    for cyc in sorted(nx.simple_cycles(g), key=lambda c: [a.key for a in c]):
        k = min(range(len(cyc)), key=lambda i: cyc[i].key)
        cyc = cyc[k:] + cyc[:k]
        out.append(LazyNogood("cycle", edges=tuple(zip(cyc, cyc[1:] + cyc[:1]))))
    return out
