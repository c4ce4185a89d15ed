"""Kernel backend selection.

The compiled extension is used when it was built and ``HORN_ABDUCE_PURE``
is unset; otherwise the pure-Python module is used.  Both take the same
flat ``array`` arguments.
"""

import os
from array import array

from . import _pykernels

OBJ_CARD, OBJ_COH, OBJ_WA = 0, 1, 2
OBJECTIVE_CODES = {"card": OBJ_CARD, "coh": OBJ_COH, "wa": OBJ_WA}

_compiled = None
if not os.environ.get("HORN_ABDUCE_PURE"):
    try:
        from . import _ckernels as _compiled
    except ImportError:
        _compiled = None

impl = _compiled if _compiled is not None else _pykernels
BACKEND = impl.BACKEND


def backends():
    """Available kernel modules by name."""
    out = {"python": _pykernels}
    if _compiled is not None:
        out["cython"] = _compiled
    return out


def int_array(values=()):
    return array("i", values)


def long_array(values=()):
    return array("q", values)


def union_labels(n, pa, pb, mod=None):
    return (mod or impl).union_labels(n, pa, pb)


def cluster_reps(preds, args, arity, labels, mod=None):
    return (mod or impl).cluster_reps(preds, args, arity, labels)


def evaluate(objective, n_goals, preds, args, arity, labels, costs, masks, fixed_masks, mod=None):
    mod = mod or impl
    if objective == OBJ_COH and n_goals > getattr(mod, "MAX_GOALS", n_goals):
        mod = _pykernels
    return mod.evaluate(objective, n_goals, preds, args, arity, labels, costs, masks, fixed_masks)


def transitivity_violations(n, adj, mod=None):
    return (mod or impl).transitivity_violations(n, adj)
