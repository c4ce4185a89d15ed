"""Ground data model: terms, atoms, axiom schemas, instances and solutions.

All values are immutable.  Terms and atoms carry a precomputed sort key so
that the total order used for canonical factoring is cheap to evaluate.
"""

from __future__ import annotations

import collections
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

DEFAULT_INITIAL_COST = 100

# kind ranks for the total order: Const < FlatSkolem < Skolem
_CONST, _FLAT, _SKOLEM = 0, 1, 2


class Term:
    __slots__ = ("_key", "_hash")

    def __eq__(self, other):
        return isinstance(other, Term) and self._key == other._key

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self._key < other._key

    def __le__(self, other):
        return self._key <= other._key

    def __gt__(self, other):
        return self._key > other._key

    def __ge__(self, other):
        return self._key >= other._key

    @property
    def key(self):
        return self._key

    def __repr__(self):
        return "%s(%s)" % (type(self).__name__, self)


class Const(Term):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self._key = (_CONST, name)
        self._hash = hash(self._key)

    def __str__(self):
        return self.name


class FlatSkolem(Term):
    """Skolem constant rendered as ``p<index>``."""

    __slots__ = ("index",)

    def __init__(self, index: int):
        self.index = index
        self._key = (_FLAT, index)
        self._hash = hash(self._key)

    def __str__(self):
        return "p%d" % self.index


class Skolem(Term):
    __slots__ = ("axiom_id", "var_name", "args")

    def __init__(self, axiom_id: str, var_name: str, args: Sequence[Term] = ()):
        self.axiom_id = axiom_id
        self.var_name = var_name
        self.args = tuple(args)
        self._key = (_SKOLEM, axiom_id, var_name, tuple(a._key for a in self.args))
        self._hash = hash(self._key)

    def __str__(self):
        inner = [self.axiom_id, '"%s"' % self.var_name]
        inner.extend(str(a) for a in self.args)
        return "s(%s)" % ",".join(inner)


def skolem_depth(t: Term) -> int:
    """Length of the longest chain of nested Skolem terms in ``t``."""
    if not isinstance(t, Skolem):
        return 0
    return 1 + max((skolem_depth(a) for a in t.args), default=0)


def pair_occurrences(t: Term, axiom_id: str, var_name: str) -> int:
    """Max number of ``s(axiom_id, var_name, ...)`` layers along any path in ``t``."""
    if not isinstance(t, Skolem):
        return 0
    below = max((pair_occurrences(a, axiom_id, var_name) for a in t.args), default=0)
    if t.axiom_id == axiom_id and t.var_name == var_name:
        return below + 1
    return below


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, Skolem):
        for a in t.args:
            yield from subterms(a)


class Atom:
    __slots__ = ("predicate", "args", "_key", "_hash")

    def __init__(self, predicate: str, args: Sequence[Term] = ()):
        self.predicate = predicate
        self.args = tuple(args)
        self._key = (predicate, tuple(a._key for a in self.args))
        self._hash = hash(self._key)

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def key(self):
        return self._key

    def __eq__(self, other):
        return isinstance(other, Atom) and self._key == other._key

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self._key < other._key

    def __le__(self, other):
        return self._key <= other._key

    def __gt__(self, other):
        return self._key > other._key

    def __ge__(self, other):
        return self._key >= other._key

    def __str__(self):
        if not self.args:
            return self.predicate
        return "%s(%s)" % (self.predicate, ",".join(str(a) for a in self.args))

    def __repr__(self):
        return "Atom(%s)" % self


def atom_order(a: Atom, b: Atom) -> int:
    """Three-way comparison: -1, 0 or 1."""
    if a._key < b._key:
        return -1
    if a._key > b._key:
        return 1
    return 0


# -- patterns ---------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


PatternTerm = object  # Var | Const


@dataclass(frozen=True)
class AtomPattern:
    predicate: str
    args: Tuple[object, ...] = ()

    @property
    def arity(self):
        return len(self.args)

    def variables(self) -> Iterator[str]:
        for a in self.args:
            if isinstance(a, Var):
                yield a.name

    def substitute(self, binding: Mapping[str, Term]) -> Atom:
        return Atom(self.predicate, [binding[a.name] if isinstance(a, Var) else a for a in self.args])

    def match(self, atom: Atom, binding: Optional[Dict[str, Term]] = None) -> Optional[Dict[str, Term]]:
        """Syntactic match against a ground atom, extending ``binding``."""
        if atom.predicate != self.predicate or len(atom.args) != len(self.args):
            return None
        out = dict(binding) if binding else {}
        for p, t in zip(self.args, atom.args):
            if isinstance(p, Var):
                if p.name == "_":
                    continue
                bound = out.get(p.name)
                if bound is None:
                    out[p.name] = t
                elif bound != t:
                    return None
            elif p != t:
                return None
        return out

    def __str__(self):
        if not self.args:
            return self.predicate
        return "%s(%s)" % (self.predicate, ",".join(str(a) for a in self.args))


def _ordered_unique(names: Iterable[str]) -> Tuple[str, ...]:
    seen = []
    for n in names:
        if n not in seen:
            seen.append(n)
    return tuple(seen)


@dataclass(frozen=True)
class Axiom:
    """Single-head Horn clause ``head <- body`` with per-body cost multipliers.

    ``weights`` is None when the default (1.2 spread evenly over the body)
    applies; the default uses two-step integer truncation ``(c*6/5)/N``.
    """

    id: str
    head: AtomPattern
    body: Tuple[AtomPattern, ...]
    weights: Optional[Tuple[Fraction, ...]] = None

    @property
    def head_vars(self) -> Tuple[str, ...]:
        return _ordered_unique(self.head.variables())

    @property
    def body_vars(self) -> Tuple[str, ...]:
        return _ordered_unique(v for b in self.body for v in b.variables())

    @property
    def existential_vars(self) -> Tuple[str, ...]:
        hv = set(self.head_vars)
        return tuple(v for v in self.body_vars if v not in hv)

    def match_head(self, atom: Atom) -> Optional[Dict[str, Term]]:
        return self.head.match(atom)

    def instantiate(self, head: Atom, existentials: Sequence[Term]) -> Optional[Tuple[Atom, ...]]:
        """Body atoms for back-chaining ``head`` with the given existential terms."""
        binding = self.match_head(head)
        if binding is None:
            return None
        ex = self.existential_vars
        if len(ex) != len(existentials):
            return None
        binding.update(zip(ex, existentials))
        return tuple(b.substitute(binding) for b in self.body)

    def body_cost(self, cost: int, index: int) -> int:
        if self.weights is None:
            c = (cost * 6 // 5) // len(self.body)
        else:
            w = self.weights[index]
            c = cost * w.numerator // w.denominator
        return c if c > 1 else 1

    @property
    def has_default_weights(self) -> bool:
        return self.weights is None

    def effective_weights(self) -> Tuple[Fraction, ...]:
        if self.weights is not None:
            return self.weights
        return tuple(Fraction(6, 5 * len(self.body)) for _ in self.body)


@dataclass(frozen=True)
class Nogood:
    """Forbidden conjunction of abduced atoms; shared variables join via eq."""

    patterns: Tuple[AtomPattern, ...]


@dataclass(frozen=True)
class UniqueSlot:
    predicate: str
    arity: int
    key_positions: Tuple[int, ...]
    value_positions: Tuple[int, ...]


@dataclass(frozen=True)
class AbductionInstance:
    axioms: Tuple[Axiom, ...]
    goal: Tuple[Atom, ...]
    initial_costs: Mapping[Atom, int] = field(default_factory=dict)
    sort_names: FrozenSet[str] = frozenset()
    nogoods: Tuple[Nogood, ...] = ()
    unique_slots: Tuple[UniqueSlot, ...] = ()

    def __hash__(self):
        return id(self)

    def ic(self, atom: Atom) -> int:
        return self.initial_costs.get(atom, DEFAULT_INITIAL_COST)

    def axiom(self, axiom_id: str) -> Axiom:
        for ax in self.axioms:
            if ax.id == axiom_id:
                return ax
        raise KeyError(axiom_id)

    def is_sort(self, t: Term) -> bool:
        return isinstance(t, Const) and t.name in self.sort_names

    def goal_set(self) -> FrozenSet[Atom]:
        return frozenset(self.goal)

    @property
    def has_constraints(self) -> bool:
        return bool(self.nogoods or self.unique_slots)


# -- equivalence ------------------------------------------------------------


class DisjointSet:
    def __init__(self, items: Iterable = ()):
        self.parent = {}
        for x in items:
            self.parent[x] = x

    def find(self, x):
        parent = self.parent
        if x not in parent:
            parent[x] = x
            return x
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        # the smaller element becomes the representative
        if ry < rx:
            rx, ry = ry, rx
        self.parent[ry] = rx
        return True

    def groups(self):
        out = collections.defaultdict(list)
        for x in list(self.parent):
            out[self.find(x)].append(x)
        return out


class EqRelation:
    """Symmetric relation over terms, stored as non-reflexive unordered pairs.

    Reflexivity is implicit.  The relation is not forced to be transitive so
    that malformed solutions can be represented and rejected by the verifier.
    """

    __slots__ = ("pairs", "_adj")

    def __init__(self, pairs: Iterable[Tuple[Term, Term]] = ()):
        norm = set()
        for a, b in pairs:
            if a == b:
                continue
            norm.add((a, b) if a < b else (b, a))
        self.pairs = frozenset(norm)
        adj = collections.defaultdict(set)
        for a, b in self.pairs:
            adj[a].add(b)
            adj[b].add(a)
        self._adj = adj

    @classmethod
    def from_classes(cls, classes: Iterable[Iterable[Term]]) -> "EqRelation":
        pairs = []
        for c in classes:
            c = sorted(set(c))
            for i in range(len(c)):
                for j in range(i + 1, len(c)):
                    pairs.append((c[i], c[j]))
        return cls(pairs)

    def related(self, a: Term, b: Term) -> bool:
        return a == b or b in self._adj.get(a, ())

    __call__ = related

    def terms(self) -> FrozenSet[Term]:
        return frozenset(self._adj)

    def classes(self) -> list:
        """Connected components with more than one element, sorted."""
        ds = DisjointSet()
        for a, b in self.pairs:
            ds.union(a, b)
        return sorted(sorted(g) for g in ds.groups().values() if len(g) > 1)

    def transitivity_violations(self) -> list:
        """Triples (a, b, c) with a~b, b~c, a!~c, reported with a < c."""
        out = []
        for b in sorted(self._adj):
            nb = sorted(self._adj[b])
            for i, a in enumerate(nb):
                for c in nb[i + 1:]:
                    if c not in self._adj[a]:
                        out.append((a, b, c))
        return out

    def is_transitive(self) -> bool:
        return not self.transitivity_violations()

    def __eq__(self, other):
        return isinstance(other, EqRelation) and self.pairs == other.pairs

    def __hash__(self):
        return hash(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def __repr__(self):
        return "EqRelation(%s)" % ", ".join("%s~%s" % p for p in sorted(self.pairs))


IDENTITY = EqRelation()


def unifiable_under_eq(a: Atom, b: Atom, eq: EqRelation, sort_names: FrozenSet[str] = frozenset()) -> bool:
    if a.predicate != b.predicate or len(a.args) != len(b.args):
        return False
    for x, y in zip(a.args, b.args):
        if x == y:
            continue
        if isinstance(x, Const) and x.name in sort_names:
            return False
        if isinstance(y, Const) and y.name in sort_names:
            return False
        if not eq.related(x, y):
            return False
    return True


# -- solutions --------------------------------------------------------------


@dataclass(frozen=True)
class Inference:
    axiom_id: str
    binding: Tuple[Term, ...] = ()


@dataclass(frozen=True)
class Solution:
    """Labeled proof graph: every true atom is inferred, factored or abduced."""

    inferred: Mapping[Atom, Inference]
    factored: Mapping[Atom, Atom]
    abduced: FrozenSet[Atom]
    eq: EqRelation = IDENTITY
    objective: Optional[str] = None
    objective_value: Optional[int] = None

    def __hash__(self):
        return hash((frozenset(self.inferred.items()), frozenset(self.factored.items()), self.abduced, self.eq))

    @property
    def true_atoms(self) -> FrozenSet[Atom]:
        return frozenset(self.inferred) | frozenset(self.factored) | self.abduced

    def partition_ok(self) -> bool:
        n = len(self.inferred) + len(self.factored) + len(self.abduced)
        return n == len(self.true_atoms)

    def bodies(self, instance: AbductionInstance) -> Dict[Atom, Tuple[Atom, ...]]:
        """Body atoms of each inference; raises ValueError on a bad instantiation."""
        out = {}
        for head, inf in self.inferred.items():
            body = instance.axiom(inf.axiom_id).instantiate(head, inf.binding)
            if body is None:
                raise ValueError("axiom %s does not apply to %s" % (inf.axiom_id, head))
            out[head] = body
        return out

    def edges(self, instance: AbductionInstance) -> list:
        """Edges pointing away from goals: head->body and factored->target."""
        out = []
        for head, body in sorted(self.bodies(instance).items()):
            for b in body:
                out.append((head, b))
        for src, dst in sorted(self.factored.items()):
            out.append((src, dst))
        return out

    def with_value(self, objective: str, value: int) -> "Solution":
        return Solution(self.inferred, self.factored, self.abduced, self.eq, objective, value)

    def sort_key(self):
        return (
            sorted(a.key for a in self.abduced),
            sorted((a.key, i.axiom_id) for a, i in self.inferred.items()),
            sorted((a.key, b.key) for a, b in self.factored.items()),
            sorted((a.key, b.key) for a, b in self.eq.pairs),
        )
