"""Pure-Python candidate evaluation kernels.

Inputs are flat integer sequences so that the compiled twin in
``_ckernels.pyx`` can take them as typed memoryviews:

* ``preds[i]``: predicate id of atom ``i``; atoms are given in atom order.
* ``args[i*arity + k]``: term index of argument ``k`` or -1 for padding.
* ``labels[t]``: class representative of term ``t``.
"""

OBJ_CARD, OBJ_COH, OBJ_WA = 0, 1, 2

BACKEND = "python"


def union_labels(n, pa, pb):
    """Class labels (smallest member index) for the closure of the given pairs."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in zip(pa, pb):
        ra, rb = find(a), find(b)
        if ra != rb:
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb
    return [find(x) for x in range(n)]


def cluster_reps(preds, args, arity, labels):
    """Index of the first atom with the same predicate and argument labels."""
    first = {}
    reps = []
    for i in range(len(preds)):
        key = (preds[i],) + tuple(-1 if t < 0 else labels[t] for t in args[i * arity:(i + 1) * arity])
        reps.append(first.setdefault(key, i))
    return reps


def evaluate(objective, n_goals, preds, args, arity, labels, costs, masks, fixed_masks):
    """Objective value of the canonical factoring induced by ``labels``.

    ``costs[i]`` is the minimum incoming cost of atom ``i`` and ``masks[i]``
    the bitmask of goals reaching it; ``fixed_masks`` are the goal masks of
    inferred atoms, which do not depend on the equivalence.
    """
    reps = cluster_reps(preds, args, arity, labels)
    n = len(preds)
    if objective == OBJ_CARD:
        return sum(1 for i in range(n) if reps[i] == i)
    if objective == OBJ_WA:
        best = {}
        for i in range(n):
            r = reps[i]
            c = costs[i]
            if r not in best or c < best[r]:
                best[r] = c
        return sum(best.values())
    union = {}
    for i in range(n):
        union[reps[i]] = union.get(reps[i], 0) | masks[i]
    return _incoherent_pairs(n_goals, list(union.values()) + list(fixed_masks))


def _incoherent_pairs(n_goals, sets):
    near = [1 << g for g in range(n_goals)]
    for m in sets:
        g, rest = 0, m
        while rest:
            if rest & 1:
                near[g] |= m
            rest >>= 1
            g += 1
    covered = sum(bin(near[g]).count("1") - 1 for g in range(n_goals)) // 2
    return n_goals * (n_goals - 1) // 2 - covered


def transitivity_violations(n, adj):
    """Triples (a, b, c), a < c, with a~b, b~c and not a~c; ``adj`` is row-major n*n."""
    out = []
    for b in range(n):
        row = adj[b * n:(b + 1) * n]
        nb = [x for x in range(n) if x != b and row[x]]
        for i, a in enumerate(nb):
            for c in nb[i + 1:]:
                if not adj[a * n + c]:
                    out.append((a, b, c))
    return out
