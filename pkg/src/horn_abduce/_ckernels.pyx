# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``_pykernels``; same signatures and results."""

from libc.stdlib cimport malloc, free

OBJ_CARD, OBJ_COH, OBJ_WA = 0, 1, 2

BACKEND = "cython"

# goal masks are packed into 64-bit words; larger goals use the Python path
MAX_GOALS = 62


cdef int _find(int* parent, int x) nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def union_labels(int n, int[:] pa, int[:] pb):
    cdef int* parent = <int*> malloc(max(n, 1) * sizeof(int))
    cdef int i, ra, rb
    try:
        for i in range(n):
            parent[i] = i
        for i in range(pa.shape[0]):
            ra = _find(parent, pa[i])
            rb = _find(parent, pb[i])
            if ra != rb:
                if ra < rb:
                    parent[rb] = ra
                else:
                    parent[ra] = rb
        return [_find(parent, i) for i in range(n)]
    finally:
        free(parent)


cdef void _reps(int[:] preds, int[:] args, int arity, int[:] labels, int* reps) nogil:
    cdef int n = preds.shape[0]
    cdef int i, j, k, ti, tj, same
    for i in range(n):
        reps[i] = i
        for j in range(i):
            if reps[j] != j or preds[j] != preds[i]:
                continue
            same = 1
            for k in range(arity):
                ti = args[i * arity + k]
                tj = args[j * arity + k]
                if ti < 0 or tj < 0:
                    if ti != tj:
                        same = 0
                        break
                elif labels[ti] != labels[tj]:
                    same = 0
                    break
            if same:
                reps[i] = j
                break


def cluster_reps(int[:] preds, int[:] args, int arity, int[:] labels):
    cdef int n = preds.shape[0]
    cdef int* reps = <int*> malloc(max(n, 1) * sizeof(int))
    try:
        _reps(preds, args, arity, labels, reps)
        return [reps[i] for i in range(n)]
    finally:
        free(reps)


cdef long long _popcount(unsigned long long x) nogil:
    cdef long long c = 0
    while x:
        x &= x - 1
        c += 1
    return c


def evaluate(int objective, int n_goals, int[:] preds, int[:] args, int arity, int[:] labels,
             long long[:] costs, long long[:] masks, long long[:] fixed_masks):
    cdef int n = preds.shape[0]
    cdef int i, g, r
    cdef long long total = 0, covered = 0
    cdef unsigned long long m
    cdef int* reps = <int*> malloc(max(n, 1) * sizeof(int))
    cdef long long* acc = NULL
    cdef unsigned long long* near = NULL
    try:
        _reps(preds, args, arity, labels, reps)
        if objective == OBJ_CARD:
            for i in range(n):
                if reps[i] == i:
                    total += 1
            return total
        acc = <long long*> malloc(max(n, 1) * sizeof(long long))
        if objective == OBJ_WA:
            for i in range(n):
                acc[i] = -1
            for i in range(n):
                r = reps[i]
                if acc[r] < 0 or costs[i] < acc[r]:
                    acc[r] = costs[i]
            for i in range(n):
                if reps[i] == i:
                    total += acc[i]
            return total
        if n_goals > MAX_GOALS:
            raise ValueError("too many goals for the compiled coherence kernel")
        for i in range(n):
            acc[i] = 0
        for i in range(n):
            acc[reps[i]] |= masks[i]
        near = <unsigned long long*> malloc(max(n_goals, 1) * sizeof(unsigned long long))
        for g in range(n_goals):
            near[g] = (<unsigned long long> 1) << g
        for i in range(n + fixed_masks.shape[0]):
            if i < n:
                if reps[i] != i:
                    continue
                m = <unsigned long long> acc[i]
            else:
                m = <unsigned long long> fixed_masks[i - n]
            for g in range(n_goals):
                if (m >> g) & 1:
                    near[g] |= m
        for g in range(n_goals):
            covered += _popcount(near[g]) - 1
        return n_goals * (n_goals - 1) // 2 - covered // 2
    finally:
        free(reps)
        if acc != NULL:
            free(acc)
        if near != NULL:
            free(near)


def transitivity_violations(int n, signed char[:] adj):
    cdef int a, b, c
    out = []
    for b in range(n):
        for a in range(n):
            if a == b or not adj[b * n + a]:
                continue
            for c in range(a + 1, n):
                if c != b and adj[b * n + c] and not adj[a * n + c]:
                    out.append((a, b, c))
    return out
