"""Canonical factoring: each cluster of unifiable atoms keeps its smallest member."""

from __future__ import annotations

from typing import Dict, FrozenSet, Iterable, Tuple

from ..core import Atom, DisjointSet, EqRelation


def eq_labels(eq: EqRelation) -> Dict:
    """Representative of each term's class (terms absent from the map are singletons)."""
    ds = DisjointSet()
    for a, b in eq.pairs:
        ds.union(a, b)
    return {t: ds.find(t) for t in list(ds.parent)}


def canonical_factoring(true_atoms: Iterable[Atom], not_inferred: Iterable[Atom],
                        eq: EqRelation) -> Tuple[Dict[Atom, Atom], FrozenSet[Atom]]:
    """Split not-inferred atoms into factored (atom -> target) and abduced.

    ``eq`` must be an equivalence relation.  Sort names never take part in
    a pair, so comparing class labels is enough to decide unifiability.
    ``true_atoms`` is accepted for symmetry with the encoding but unused:
    factoring targets are restricted to not-inferred atoms.
    """
    label = eq_labels(eq)
    first: Dict[tuple, Atom] = {}
    factored: Dict[Atom, Atom] = {}
    abduced = set()
    for atom in sorted(set(not_inferred)):
        key = (atom.predicate, tuple(label.get(t, t) for t in atom.args))
        rep = first.setdefault(key, atom)
        if rep is atom:
            abduced.add(atom)
        else:
            factored[atom] = rep
    return factored, frozenset(abduced)
