import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horn_abduce import _pykernels, kernels

BACKENDS = kernels.backends()
needs_compiled = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")


def test_backend_selection():
    assert kernels.BACKEND in BACKENDS
    assert BACKENDS["python"] is _pykernels


def test_union_labels_min_root():
    pa, pb = kernels.int_array([3, 1]), kernels.int_array([1, 4])
    for mod in BACKENDS.values():
        assert list(kernels.union_labels(5, pa, pb, mod=mod)) == [0, 1, 2, 1, 1]


def test_transitivity_violations_small():
    # 0~1, 1~2 but not 0~2
    adj = bytearray(9)
    for a, b in ((0, 1), (1, 2)):
        adj[a * 3 + b] = adj[b * 3 + a] = 1
    view = memoryview(adj).cast("b")
    for mod in BACKENDS.values():
        assert [tuple(t) for t in kernels.transitivity_violations(3, view, mod=mod)] == [(0, 1, 2)]


def test_coherence_falls_back_beyond_bitmask_width():
    n_goals = 70
    preds = kernels.int_array([0, 0])
    args = kernels.int_array([0, 1])
    labels = kernels.int_array([0, 0])
    costs = kernels.long_array([1, 1])
    masks = [1, 1 << 69]
    got = kernels.evaluate(kernels.OBJ_COH, n_goals, preds, args, 1, labels, costs, masks, [])
    assert got == n_goals * (n_goals - 1) // 2 - 1


@st.composite
def kernel_inputs(draw):
    n_terms = draw(st.integers(1, 12))
    arity = draw(st.integers(1, 3))
    n_atoms = draw(st.integers(1, 15))
    n_goals = draw(st.integers(1, 8))
    preds = draw(st.lists(st.integers(0, 3), min_size=n_atoms, max_size=n_atoms))
    args = draw(st.lists(st.integers(-1, n_terms - 1), min_size=n_atoms * arity, max_size=n_atoms * arity))
    pairs = draw(st.lists(st.tuples(st.integers(0, n_terms - 1), st.integers(0, n_terms - 1)), max_size=10))
    costs = draw(st.lists(st.integers(1, 500), min_size=n_atoms, max_size=n_atoms))
    masks = draw(st.lists(st.integers(0, (1 << n_goals) - 1), min_size=n_atoms, max_size=n_atoms))
    fixed = draw(st.lists(st.integers(0, (1 << n_goals) - 1), max_size=4))
    return n_terms, arity, n_goals, preds, args, pairs, costs, masks, fixed


@needs_compiled
@settings(max_examples=200, deadline=None)
@given(kernel_inputs())
def test_backends_agree(data):
    n_terms, arity, n_goals, preds, args, pairs, costs, masks, fixed = data
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    pa = kernels.int_array(p for p, _ in pairs)
    pb = kernels.int_array(q for _, q in pairs)
    lp = list(kernels.union_labels(n_terms, pa, pb, mod=py))
    assert lp == list(kernels.union_labels(n_terms, pa, pb, mod=cy))
    labels = kernels.int_array(lp)
    P, A = kernels.int_array(preds), kernels.int_array(args)
    assert list(kernels.cluster_reps(P, A, arity, labels, mod=py)) == \
        list(kernels.cluster_reps(P, A, arity, labels, mod=cy))
    C, M, F = kernels.long_array(costs), kernels.long_array(masks), kernels.long_array(fixed)
    for obj in (kernels.OBJ_CARD, kernels.OBJ_COH, kernels.OBJ_WA):
        assert kernels.evaluate(obj, n_goals, P, A, arity, labels, C, M, F, mod=py) == \
            kernels.evaluate(obj, n_goals, P, A, arity, labels, C, M, F, mod=cy)


@needs_compiled
@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=20))))
def test_transitivity_backends_agree(data):
    n, edges = data
    adj = bytearray(n * n)
    for a, b in edges:
        if a != b:
            adj[a * n + b] = adj[b * n + a] = 1
    view = memoryview(adj).cast("b")
    got = [sorted(tuple(t) for t in kernels.transitivity_violations(n, view, mod=m)) for m in BACKENDS.values()]
    assert got[0] == got[-1]
