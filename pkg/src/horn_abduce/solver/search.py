"""Branch-and-bound search for optimal canonical solutions.

The search runs in two layers.  The outer layer walks the true atoms in
discovery order and decides for each one whether it is inferred (and by
which axiom instance) or left for factoring/abduction.  Every complete
labeling then hands its not-inferred atoms to the inner layer, which
decides term equivalence pair by pair.  Canonical factoring turns a
complete equivalence into a solution.

Transitivity of the equivalence is either enforced while branching
(``lazy=False``) or only checked on complete candidates, where each
violated triple is learned as a nogood over terms and kept for the rest
of the search (``lazy=True``).  The lazy mode follows an
optimistic-bound-then-relax loop.
"""

from __future__ import annotations

import collections
import json
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..core import AbductionInstance, Atom, EqRelation, Inference, Solution, Var
from ..grounder import PotentialGraph
from .. import kernels
from .constraints import nogood_violations, unique_violations

OPTIMAL, INFEASIBLE, TIMEOUT = "optimal", "infeasible", "timeout"


@dataclass
class SolveOptions:
    factoring_mode: str = "bwda"  # or "bwdg-oracle"
    lazy: bool = True
    bound: Optional[int] = None  # only look for solutions of at most this cost
    time_limit: Optional[float] = None  # seconds


@dataclass
class SolveResult:
    status: str
    solution: Optional[Solution] = None
    stats: dict = field(default_factory=dict)

    @property
    def cost(self) -> Optional[int]:
        return None if self.solution is None else self.solution.objective_value

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Timeout(Exception):
    pass


def lower_bound_costs(instance: AbductionInstance, graph: PotentialGraph) -> Dict[Atom, int]:
    """Smallest cost each pot atom can receive over any back-chaining path."""
    lb = {g: instance.ic(g) for g in instance.goal}
    changed = True
    while changed:
        changed = False
        for mi in graph.may_infer:
            c = lb.get(mi.head)
            if c is None:
                continue
            ax = instance.axiom(mi.axiom_id)
            for i, b in enumerate(mi.body):
                bc = ax.body_cost(c, i)
                if bc < lb.get(b, math.inf):
                    lb[b] = bc
                    changed = True
    return lb


def solution_key(sol: Solution) -> str:
    from ..ingest import solution_to_dict
    d = solution_to_dict(sol)
    d.pop("objective")
    d.pop("cost")
    return json.dumps(d, sort_keys=True)


def trivial_solution(instance: AbductionInstance) -> Solution:
    return Solution(inferred={}, factored={}, abduced=frozenset(instance.goal))


class _Search:
    def __init__(self, instance, graph, objective, lazy, kernel_mod=None, deadline=None):
        self.instance = instance
        self.graph = graph
        self.objective = objective
        self.code = kernels.OBJECTIVE_CODES[objective]
        self.lazy = lazy
        self.mod = kernel_mod
        self.deadline = deadline
        self.sorts = instance.sort_names
        self.goals = sorted(instance.goal)
        self.goal_bit = {g: 1 << i for i, g in enumerate(self.goals)}
        self.lb_cost = lower_bound_costs(instance, graph)
        self.sig_min: Dict[tuple, int] = {}
        for a in graph.pot:
            s = self._sig(a)
            self.sig_min[s] = min(self.sig_min.get(s, math.inf), self.lb_cost.get(a, math.inf))
        self.learned = set()  # term triples (a, b, c): a~b, b~c, a!~c is forbidden
        self.stats = collections.Counter()
        self.best: Optional[Solution] = None
        self.best_rank = None
        self.limit = math.inf
        self.pruned_min = math.inf
        self.optimistic = math.inf
        self.phase1 = False
        self._ticks = 0

    # -- bookkeeping ---------------------------------------------------------

    def _tick(self):
        self.stats["nodes"] += 1
        self._ticks += 1
        if self.deadline is not None and self._ticks % 128 == 0 and time.monotonic() > self.deadline:
            raise _Timeout()

    def _pruned(self, lb):
        self.stats["pruned"] += 1
        if lb < self.pruned_min:
            self.pruned_min = lb

    def _sig(self, atom):
        return (atom.predicate, atom.arity,
                tuple(t if self.instance.is_sort(t) else None for t in atom.args))

    def offer(self, sol: Solution, cost: int, npairs: int):
        if self.best is not None:
            if cost > self.best.objective_value:
                return
            if cost == self.best.objective_value and npairs > self.best_rank[1]:
                return
        sol = sol.with_value(self.objective, cost)
        rank = (cost, npairs, solution_key(sol))
        if self.best is None or rank < self.best_rank:
            self.best, self.best_rank = sol, rank
            self.stats["incumbents"] += 1

    def run(self, limit):
        self.limit = limit
        self.pruned_min = math.inf
        self.order = list(self.goals)
        self.in_true = set(self.goals)
        self.inferred: Dict[Atom, object] = {}
        self.fai: List[Atom] = []
        self.sig_count = collections.Counter()
        self.lb_a = 0
        self._visit(0)

    # -- outer layer: inference labeling ---------------------------------------

    def _add_fai(self, atom):
        self.fai.append(atom)
        s = self._sig(atom)
        self.sig_count[s] += 1
        if self.sig_count[s] == 1:
            self.lb_a += 1 if self.code == kernels.OBJ_CARD else self.sig_min[s]

    def _remove_fai(self, atom):
        self.fai.pop()
        s = self._sig(atom)
        self.sig_count[s] -= 1
        if self.sig_count[s] == 0:
            del self.sig_count[s]
            self.lb_a -= 1 if self.code == kernels.OBJ_CARD else self.sig_min[s]

    def _reaches(self, src, target):
        stack, seen = [src], set()
        while stack:
            x = stack.pop()
            if x == target:
                return True
            if x in seen:
                continue
            seen.add(x)
            mi = self.inferred.get(x)
            if mi is not None:
                stack.extend(mi.body)
        return False

    def _visit(self, k):
        self._tick()
        if k == len(self.order):
            self._inner()
            return
        atom = self.order[k]

        self._add_fai(atom)
        lb = self.lb_a if self.code != kernels.OBJ_COH else 0
        if lb > self.limit:
            self._pruned(lb)
        else:
            self._visit(k + 1)
        self._remove_fai(atom)

        for mi in self.graph.inferences_for(atom):
            if any(self._reaches(b, atom) for b in mi.body):
                continue
            self.inferred[atom] = mi
            added = [b for b in dict.fromkeys(mi.body) if b not in self.in_true]
            self.order.extend(added)
            self.in_true.update(added)
            self._visit(k + 1)
            del self.order[len(self.order) - len(added):]
            self.in_true.difference_update(added)
            del self.inferred[atom]

    # -- inner layer: term equivalence ----------------------------------------

    def _atom_info(self):
        """Minimum incoming cost and reaching-goal mask of every true atom."""
        parents = collections.defaultdict(list)
        for h, mi in self.inferred.items():
            for i, b in enumerate(mi.body):
                parents[b].append((h, i))
        memo = {}
        ax_of = {h: self.instance.axiom(mi.axiom_id) for h, mi in self.inferred.items()}

        def info(a):
            got = memo.get(a)
            if got is not None:
                return got
            c = self.instance.ic(a) if a in self.goal_bit else math.inf
            m = self.goal_bit.get(a, 0)
            for h, i in parents.get(a, ()):
                hc, hm = info(h)
                c = min(c, ax_of[h].body_cost(hc, i))
                m |= hm
            memo[a] = (c, m)
            return memo[a]

        for a in self.order:
            info(a)
        return memo

    def _linked_terms(self, fai, true_atoms, tindex):
        """Union-find over eligible terms that may need to be equal."""
        ds = list(range(len(tindex)))

        def find(x):
            while ds[x] != x:
                ds[x] = ds[ds[x]]
                x = ds[x]
            return x

        def link(s, t):
            if s == t or self.instance.is_sort(s) or self.instance.is_sort(t):
                return
            a, b = find(tindex[s]), find(tindex[t])
            if a != b:
                ds[max(a, b)] = min(a, b)

        def compatible(a, b, positions):
            for k in positions:
                x, y = a.args[k], b.args[k]
                if x != y and (self.instance.is_sort(x) or self.instance.is_sort(y)):
                    return False
            return True

        groups = collections.defaultdict(list)
        for a in fai:
            groups[(a.predicate, a.arity)].append(a)
        for group in groups.values():
            for i, a in enumerate(group):
                for b in group[i + 1:]:
                    if compatible(a, b, range(a.arity)):
                        for x, y in zip(a.args, b.args):
                            link(x, y)
        for us in self.instance.unique_slots:
            group = [a for a in true_atoms if a.predicate == us.predicate and a.arity == us.arity]
            for i, a in enumerate(group):
                for b in group[i + 1:]:
                    if compatible(a, b, us.key_positions):
                        for k in us.key_positions + us.value_positions:
                            link(a.args[k], b.args[k])
        for ng in self.instance.nogoods:
            slots = collections.defaultdict(list)
            consts = []
            for pat in ng.patterns:
                for k, p in enumerate(pat.args):
                    key = (pat.predicate, pat.arity, k)
                    if isinstance(p, Var):
                        if p.name != "_":
                            slots[p.name].append(key)
                    else:
                        consts.append((p, key))
            for positions in slots.values():
                terms = [a.args[k] for (pred, ar, k) in positions for a in groups.get((pred, ar), ())]
                for t in terms[1:]:
                    link(terms[0], t)
            for c, (pred, ar, k) in consts:
                if c in tindex:
                    for a in groups.get((pred, ar), ()):
                        link(c, a.args[k])
        comps = collections.defaultdict(list)
        for t, i in tindex.items():
            comps[find(i)].append(i)
        return [sorted(c) for c in comps.values() if len(c) > 1]

    def _inner(self):
        self.stats["labelings"] += 1
        fai = sorted(self.fai)
        true_atoms = list(self.order)
        terms = sorted({t for a in true_atoms for t in a.args})
        tindex = {t: i for i, t in enumerate(terms)}
        n = len(terms)
        comps = self._linked_terms(fai, true_atoms, tindex)

        pairs: List[Tuple[int, int]] = []
        for comp in comps:
            for i, x in enumerate(comp):
                for y in comp[i + 1:]:
                    pairs.append((x, y))
        pairs.sort()
        pidx = {p: k for k, p in enumerate(pairs)}

        def pair_of(x, y):
            return pidx[(x, y) if x < y else (y, x)]

        # triangle partners for eager checks
        tri = [[] for _ in pairs]
        if not self.lazy:
            for comp in comps:
                for i, x in enumerate(comp):
                    for j in range(i + 1, len(comp)):
                        y = comp[j]
                        for z in comp:
                            if z != x and z != y:
                                tri[pidx[(x, y)]].append((pair_of(x, z), pair_of(y, z)))
        # learned transitivity nogoods, translated to local pair indices
        local = [[] for _ in pairs]
        self._local = local
        for a, b, c in self.learned:
            ia, ib, ic = tindex.get(a), tindex.get(b), tindex.get(c)
            if None in (ia, ib, ic):
                continue
            try:
                ng = (pair_of(ia, ib), pair_of(ib, ic), pair_of(ia, ic))
            except KeyError:
                continue
            for p in ng:
                local[p].append(ng)

        info = self._atom_info()
        preds_map = {}
        arity = max([a.arity for a in fai] + [1])
        preds, args, costs, masks = [], [], [], []
        for a in fai:
            preds.append(preds_map.setdefault((a.predicate, a.arity), len(preds_map)))
            args.extend(tindex[t] for t in a.args)
            args.extend([-1] * (arity - a.arity))
            c, m = info[a]
            costs.append(c if c != math.inf else 0)
            masks.append(m)
        fixed = [info[a][1] for a in self.inferred]
        big = len(self.goals) > 62
        ctx = dict(
            n=n, terms=terms, tindex=tindex, fai=fai, true_atoms=true_atoms, pairs=pairs, tri=tri,
            preds=kernels.int_array(preds), args=kernels.int_array(args), arity=arity,
            costs=kernels.long_array(costs),
            masks=masks if big else kernels.long_array(masks),
            fixed=fixed if big else kernels.long_array(fixed),
            assign=[None] * len(pairs),
        )
        self._ctx = ctx
        lb = self._closure_cost(ctx, len(pairs), all_undecided=True)
        if lb > self.limit:
            self._pruned(lb)
            return
        self._decide(ctx, 0, lb)

    def _labels(self, ctx, chosen):
        pa = kernels.int_array(ctx["pairs"][k][0] for k in chosen)
        pb = kernels.int_array(ctx["pairs"][k][1] for k in chosen)
        return kernels.int_array(kernels.union_labels(ctx["n"], pa, pb, self.mod))

    def _evaluate(self, ctx, labels):
        return kernels.evaluate(self.code, len(self.goals), ctx["preds"], ctx["args"], ctx["arity"],
                                labels, ctx["costs"], ctx["masks"], ctx["fixed"], self.mod)

    def _closure_cost(self, ctx, k, all_undecided=False):
        assign = ctx["assign"]
        if all_undecided:
            chosen = range(len(assign))
        else:
            chosen = [i for i in range(len(assign)) if i >= k or assign[i]]
        return self._evaluate(ctx, self._labels(ctx, chosen))

    def _consistent(self, ctx, k):
        assign = ctx["assign"]
        if self.lazy:
            for ng in self._local[k]:
                if assign[ng[0]] is True and assign[ng[1]] is True and assign[ng[2]] is False:
                    return False
            return True
        for q, r in ctx["tri"][k]:
            aq, ar = assign[q], assign[r]
            if aq is None or ar is None:
                continue
            if (assign[k] + aq + ar) == 2:
                return False
        return True

    def _decide(self, ctx, k, lb):
        self._tick()
        assign = ctx["assign"]
        if k == len(assign):
            self._leaf(ctx)
            return
        for val in (True, False):
            assign[k] = val
            if not self._consistent(ctx, k):
                continue
            child = lb if val else self._closure_cost(ctx, k + 1)
            if child > self.limit:
                self._pruned(child)
                continue
            self._decide(ctx, k + 1, child)
        assign[k] = None

    def _learn(self, ctx, chosen):
        n = ctx["n"]
        adj = bytearray(n * n)
        for k in chosen:
            x, y = ctx["pairs"][k]
            adj[x * n + y] = adj[y * n + x] = 1
        viols = kernels.transitivity_violations(n, memoryview(adj).cast("b"), self.mod)
        terms = ctx["terms"]
        pidx = {p: k for k, p in enumerate(ctx["pairs"])}
        for a, b, c in viols:
            triple = (terms[a], terms[b], terms[c])
            if triple in self.learned:
                continue
            self.learned.add(triple)
            self.stats["learned_nogoods"] += 1
            ng = (pidx[(min(a, b), max(a, b))], pidx[(min(b, c), max(b, c))], pidx[(a, c)])
            for p in ng:
                self._local[p].append(ng)
        return bool(viols)

    def _leaf(self, ctx):
        self.stats["leaves"] += 1
        assign = ctx["assign"]
        chosen = [k for k, v in enumerate(assign) if v]
        labels = self._labels(ctx, chosen)
        cost = self._evaluate(ctx, labels)
        if self.lazy and self._learn(ctx, chosen):
            self.stats["rejected_candidates"] += 1
            if self.phase1 and cost < self.optimistic:
                # the solver sees this candidate's cost before the check fires
                self.optimistic = cost
                self.limit = min(self.limit, cost)
            return
        if cost > self.limit:
            self._pruned(cost)
            return
        terms, tindex, fai = ctx["terms"], ctx["tindex"], ctx["fai"]
        reps = kernels.cluster_reps(ctx["preds"], ctx["args"], ctx["arity"], labels, self.mod)
        abduced = [fai[i] for i in range(len(fai)) if reps[i] == i]

        def same(x, y):
            if x == y:
                return True
            i, j = tindex.get(x), tindex.get(y)
            return i is not None and j is not None and labels[i] == labels[j]

        if self.instance.has_constraints:
            if nogood_violations(self.instance.nogoods, abduced, same) or \
                    unique_violations(self.instance.unique_slots, ctx["true_atoms"], same):
                self.stats["constraint_rejects"] += 1
                return
        if self.phase1:
            self.optimistic = min(self.optimistic, cost)
        self.limit = min(self.limit, cost)
        if self.best is not None and (cost > self.best.objective_value or
                                      (cost == self.best.objective_value and len(chosen) > self.best_rank[1])):
            return
        classes = collections.defaultdict(list)
        for i, t in enumerate(terms):
            classes[labels[i]].append(t)
        eq = EqRelation.from_classes(c for c in classes.values() if len(c) > 1)
        factored = {fai[i]: fai[reps[i]] for i in range(len(fai)) if reps[i] != i}
        inferred = {a: Inference(mi.axiom_id, mi.binding) for a, mi in self.inferred.items()}
        self.offer(Solution(inferred, factored, frozenset(abduced), eq), cost, len(chosen))


def _satisfies_constraints(instance, sol):
    same = lambda x, y: x == y
    return not (nogood_violations(instance.nogoods, sol.abduced, same) or
                unique_violations(instance.unique_slots, sol.true_atoms, same))


def solve(instance: AbductionInstance, graph: PotentialGraph, objective: str = "wa",
          options: Optional[SolveOptions] = None, kernel_mod=None, **kw) -> SolveResult:
    """Optimal solution under ``objective`` (one of card, coh, wa)."""
    options = options or SolveOptions(**kw)
    if objective not in kernels.OBJECTIVE_CODES:
        raise ValueError("unknown objective %r" % objective)
    started = time.monotonic()
    if options.factoring_mode == "bwdg-oracle":
        from .oracle import brute_force
        cost, sols = brute_force(instance, graph, objective, factoring_mode="bwdg")
        if cost is None:
            return SolveResult(INFEASIBLE, None, {"elapsed": time.monotonic() - started})
        return SolveResult(OPTIMAL, sols[0], {"elapsed": time.monotonic() - started})
    if options.factoring_mode != "bwda":
        raise ValueError("unknown factoring mode %r" % options.factoring_mode)

    deadline = None if options.time_limit is None else started + options.time_limit
    s = _Search(instance, graph, objective, options.lazy, kernel_mod, deadline)
    cap = math.inf if options.bound is None else options.bound
    limit = cap
    triv = trivial_solution(instance)
    if _satisfies_constraints(instance, triv):
        from ..objectives import evaluate
        c = evaluate(objective, instance, triv)
        if c <= cap:
            s.offer(triv, c, 0)
            limit = c

    def finish(status):
        stats = dict(s.stats)
        stats.update(backend=(kernel_mod or kernels.impl).BACKEND, lazy=options.lazy,
                     elapsed=time.monotonic() - started)
        if s.optimistic != math.inf:
            stats["optimistic_bound"] = s.optimistic
        return SolveResult(status, s.best, stats)

    try:
        if not options.lazy:
            s.run(limit)
            return finish(OPTIMAL if s.best is not None else INFEASIBLE)
        s.phase1 = True
        s.run(limit)
        s.phase1 = False
        if s.best is not None and s.best.objective_value <= s.optimistic:
            return finish(OPTIMAL)
        if s.optimistic == math.inf:
            return finish(INFEASIBLE)
        trying = s.optimistic
        while True:
            s.stats["relax_iterations"] += 1
            s.run(trying)
            if s.best is not None and s.best.objective_value <= trying:
                return finish(OPTIMAL)
            # no feasible solution up to the smallest pruned bound: jump there
            if s.pruned_min == math.inf or s.pruned_min > cap:
                return finish(INFEASIBLE)
            trying = s.pruned_min
    except _Timeout:
        return finish(TIMEOUT)
