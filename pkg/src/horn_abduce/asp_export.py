"""ASP-Core-2 text for the backward (bwdg, bwdai, bwda) and forward (fwda) encodings.

Atoms are reified as ``c(pred,arg1,...)``.  Variables in rules derived
from axioms are renamed to ``V1..Vn`` in head-then-existential order;
Skolem terms keep the original variable name as a string, e.g.
``V2 = s(r9,"Y",V1)``.
"""

from __future__ import annotations

import re
from typing import Dict, Iterable, List, Sequence

from .core import AbductionInstance, AtomPattern, Axiom, Const, DEFAULT_INITIAL_COST, Var

VARIANTS = ("bwdg", "bwdai", "bwda", "fwda")
OBJECTIVES = ("card", "coh", "wa")

VOCABULARY = frozenset({
    "goal", "sortname", "pot", "hu", "uhu", "eq", "true", "infer", "fai", "inferVia", "mayInferVia",
    "inferenceNeeds", "factor", "fa", "factorVia", "factorViaI", "factorI", "factorCluster",
    "factorClusterAbove", "factorOk", "abduce", "below", "reach", "reachFromBoth", "pcost", "cost",
    "numberofbodies",
})


class ExportError(ValueError):
    pass


def _c(pred: str, args: Sequence[str]) -> str:
    return "c(%s)" % ",".join([pred] + list(args))


def _ground_atom(atom) -> str:
    return _c(atom.predicate, [str(t) for t in atom.args])


def emit_facts(instance: AbductionInstance, bodies: bool = True) -> str:
    """goal/1, sortname/1 and (unless ``bodies`` is off) numberofbodies/2 facts."""
    lines = ["goal(%s)." % _ground_atom(a) for a in instance.goal]
    lines += ["sortname(%s)." % s for s in sorted(instance.sort_names)]
    if bodies:
        lines += ["numberofbodies(%s,%d)." % (ax.id, len(ax.body)) for ax in instance.axioms]
    return "\n".join(lines) + "\n" if lines else ""


def _var_names(ax: Axiom) -> Dict[str, str]:
    return {v: "V%d" % (i + 1) for i, v in enumerate(ax.head_vars + ax.existential_vars)}


def _pattern(p: AtomPattern, names: Dict[str, str]) -> str:
    return _c(p.predicate, [names[a.name] if isinstance(a, Var) else str(a) for a in p.args])


def _skolem_assignments(ax: Axiom, names: Dict[str, str]) -> List[str]:
    head_args = [names[v] for v in ax.head_vars]
    return ['%s = s(%s)' % (names[v], ",".join([ax.id, '"%s"' % v] + head_args)) for v in ax.existential_vars]


def _axiom_comment(ax: Axiom) -> str:
    return "%% %s: %s <- %s." % (ax.id, ax.head, ", ".join(str(b) for b in ax.body))


def emit_axiom_rules(instance: AbductionInstance, variant: str = "bwda") -> str:
    _check_variant(variant)
    out = []
    for ax in instance.axioms:
        names = _var_names(ax)
        head = _pattern(ax.head, names)
        sk = _skolem_assignments(ax, names)
        out.append(_axiom_comment(ax))
        if variant == "fwda":
            out.append("infer(%s) :- %s." % (head, ", ".join("true(%s)" % _pattern(b, names) for b in ax.body)))
            for b in ax.body:
                out.append("pot(%s) :- %s." % (_pattern(b, names), ", ".join(["pot(%s)" % head] + sk)))
        else:
            ex = [names[v] for v in ax.existential_vars]
            l_term = "l(%s)" % ",".join(ex) if ex else "l"
            may = "mayInferVia(%s,%s,%s)" % (ax.id, head, l_term)
            out.append("%s :- %s." % (may, ", ".join(["pot(%s)" % head] + sk)))
            for b in ax.body:
                out.append("inferenceNeeds(%s,%s,%s) :- %s." % (head, ax.id, _pattern(b, names), may))
            out.append("numberofbodies(%s,%d)." % (ax.id, len(ax.body)))
    return "\n".join(out) + "\n" if out else ""


def _check_variant(variant):
    if variant not in VARIANTS:
        raise ExportError("unknown encoding %r (expected one of %s)" % (variant, ", ".join(VARIANTS)))


def _hu_rules(arities: Iterable[int]) -> List[str]:
    out = []
    for k in sorted(set(arities)):
        for i in range(k):
            args = ["X" if j == i else "_" for j in range(k)]
            out.append("hu(X) :- pot(%s)." % _c("_", args))
    return out


def _eq_rules() -> List[str]:
    return [
        "uhu(X) :- hu(X), not sortname(X).",
        "{ eq(A,B) : uhu(A), uhu(B), A != B }.",
        "eq(A,A) :- hu(A).",
        ":- eq(A,B), not eq(B,A).",
        ":- eq(A,B), eq(B,C), A != B, B != C, A != C, not eq(A,C).",
    ]


def _pair(k):
    """Two reified atoms of arity ``k`` over predicate P and their eq joins."""
    xs = ["A%d" % (i + 1) for i in range(k)]
    ys = ["B%d" % (i + 1) for i in range(k)]
    eqs = ["eq(%s,%s)" % (x, y) for x, y in zip(xs, ys)]
    return _c("P", xs), _c("P", ys), eqs


def _below_rules() -> List[str]:
    return [
        "below(P,Q) :- inferVia(R,P), inferenceNeeds(P,R,Q).",
        "below(P,Q) :- factorVia(P,Q).",
        "below(A,C) :- below(A,B), below(B,C).",
    ]


def _cluster_rules(arities) -> List[str]:
    out = []
    for k in sorted(set(arities)):
        a1, a2, eqs = _pair(k)
        out.append("factorCluster(%s,%s) :- %s." % (a2, a1, ", ".join(["fa(%s)" % a1, "fa(%s)" % a2] + eqs + ["%s < %s" % (a1, a2)])))
    out += [
        "factorClusterAbove(A) :- factorCluster(A,_).",
        "factorVia(A,B) :- factorCluster(A,B), not factorClusterAbove(B).",
        "factor(P) :- factorVia(P,_).",
        "abduce(P) :- fa(P), not factor(P).",
    ]
    return out


def emit_encoding(variant: str, arities: Iterable[int] = (2,)) -> str:
    """Fixed rules of an encoding; hu and factoring rules are emitted per arity."""
    _check_variant(variant)
    arities = sorted(set(arities))
    if variant == "fwda":
        rules = [
            "pot(X) :- goal(X).",
            "{ fai(X) : pot(X) }.",
            "true(X) :- fai(X).",
            "true(X) :- infer(X).",
            ":- goal(A), not true(A).",
            "fa(X) :- fai(X), not infer(X).",
        ] + _hu_rules(arities) + _eq_rules() + _cluster_rules(arities)
        return "\n".join(rules) + "\n"

    rules = [
        "pot(X) :- goal(X).",
        "pot(P) :- inferenceNeeds(_,_,P).",
        "true(P) :- goal(P).",
        "1 { infer(P) ; fai(P) } 1 :- true(P).",
        "1 { inferVia(R,P) : mayInferVia(R,P,_) } 1 :- infer(P).",
        "true(Q) :- inferVia(R,P), inferenceNeeds(P,R,Q).",
    ] + _hu_rules(arities) + _eq_rules()

    if variant == "bwdg":
        rules += _below_rules()
        rules.append("1 { factor(P) ; abduce(P) } 1 :- fai(P).")
        for k in arities:
            a1, a2, eqs = _pair(k)
            rules.append("factorVia(%s,%s) :- %s." % (a1, a2, ", ".join(
                ["factor(%s)" % a1, "infer(%s)" % a2] + eqs + ["not below(%s,%s)" % (a2, a1)])))
            rules.append("factorVia(%s,%s) :- %s." % (a1, a2, ", ".join(
                ["factor(%s)" % a1, "abduce(%s)" % a2] + eqs)))
        rules += [
            "factorOk(P) :- factorVia(P,_).",
            ":- factor(P), not factorOk(P).",
        ]
    elif variant == "bwdai":
        rules += _below_rules()
        for k in arities:
            a1, a2, eqs = _pair(k)
            rules.append("factorViaI(%s,%s) :- %s." % (a1, a2, ", ".join(
                ["fai(%s)" % a1, "infer(%s)" % a2] + eqs + ["not below(%s,%s)" % (a2, a1)])))
        rules += [
            "factorI(P) :- factorViaI(P,_).",
            "fa(P) :- fai(P), not factorI(P).",
            "factorVia(A,B) :- factorViaI(A,B).",
        ] + _cluster_rules(arities)
    else:
        rules.append("fa(P) :- fai(P).")
        rules += _cluster_rules(arities)
    return "\n".join(rules) + "\n"


def emit_objective(objective: str, variant: str = "bwda") -> str:
    if objective not in OBJECTIVES:
        raise ExportError("unknown objective %r" % objective)
    if variant == "fwda" and objective != "card":
        raise ExportError("the fwda encoding has no proof graph and supports only the card objective")
    if objective == "card":
        rules = [":~ abduce(P). [1@1,P]"]
    elif objective == "coh":
        rules = [
            "reach(P,P) :- goal(P).",
            "reach(Q,From) :- reach(P,From), inferVia(R,P), inferenceNeeds(P,R,Q).",
            "reach(Q,From) :- reach(P,From), factorVia(P,Q).",
            "reachFromBoth(P,Q) :- goal(P), goal(Q), P < Q, reach(N,P), reach(N,Q).",
            ":~ goal(P), goal(Q), P < Q, not reachFromBoth(P,Q). [1@1,P,Q]",
        ]
    else:
        rules = [
            "pcost(P,%d) :- goal(P)." % DEFAULT_INITIAL_COST,
            "pcost(Q,Mc) :- inferVia(R,P), inferenceNeeds(P,R,Q), pcost(P,C), numberofbodies(R,N), "
            "Mc = #max { (C*6/5)/N ; 1 }.",
            "pcost(Q,C) :- factorVia(P,Q), pcost(P,C).",
            "cost(P,C) :- abduce(P), C = #min { Ic : pcost(P,Ic) }.",
            ":~ cost(P,C). [C@1,P]",
        ]
    return "\n".join(rules) + "\n"


def _constraint_terms(patterns, numbering):
    """Reified patterns with fresh variables; repeated variables and constants become eq joins."""
    atoms, joins = [], []
    first: Dict[str, str] = {}
    for p in patterns:
        args = []
        for a in p.args:
            if isinstance(a, Var) and a.name == "_":
                args.append("_")
                continue
            v = numbering()
            args.append(v)
            if isinstance(a, Var):
                if a.name in first:
                    joins.append("eq(%s,%s)" % (first[a.name], v))
                else:
                    first[a.name] = v
            else:
                joins.append("eq(%s,%s)" % (v, a))
        atoms.append(_c(p.predicate, args))
    return atoms, joins


def _counter():
    n = [0]

    def nxt():
        n[0] += 1
        return "V%d" % n[0]
    return nxt


def emit_global_constraints(instance: AbductionInstance) -> str:
    out = []
    for ng in instance.nogoods:
        atoms, joins = _constraint_terms(ng.patterns, _counter())
        out.append(":- %s." % ", ".join(["abduce(%s)" % a for a in atoms] + joins))
    for us in instance.unique_slots:
        nxt = _counter()
        a1 = [nxt() if (k in us.key_positions or k in us.value_positions) else "_" for k in range(us.arity)]
        a2 = [nxt() if (k in us.key_positions or k in us.value_positions) else "_" for k in range(us.arity)]
        keys = ["eq(%s,%s)" % (a1[k], a2[k]) for k in us.key_positions]
        for k in us.value_positions:
            body = ["true(%s)" % _c(us.predicate, a1), "true(%s)" % _c(us.predicate, a2)] + keys
            body += ["%s < %s" % (a1[k], a2[k]), "not eq(%s,%s)" % (a1[k], a2[k])]
            out.append(":- %s." % ", ".join(body))
    return "\n".join(out) + "\n" if out else ""


def instance_arities(instance: AbductionInstance) -> List[int]:
    ar = {a.arity for a in instance.goal}
    for ax in instance.axioms:
        ar.add(ax.head.arity)
        ar.update(b.arity for b in ax.body)
    return sorted(ar)


def emit_program(instance: AbductionInstance, variant: str = "bwda", objective: str = "card",
                 constraints: bool = True) -> str:
    """Complete program: facts, axiom rewriting, encoding, objective and constraints."""
    _check_variant(variant)
    if objective == "wa":
        if any(ax.weights is not None for ax in instance.axioms):
            raise ExportError("the wa module assumes the default body weights; explicit weights are not exported")
        if any(instance.ic(g) != DEFAULT_INITIAL_COST for g in instance.goal):
            raise ExportError("the wa module seeds every goal with cost %d" % DEFAULT_INITIAL_COST)
    parts = [
        ("facts", emit_facts(instance, bodies=False)),
        ("axioms", emit_axiom_rules(instance, variant)),
        ("encoding " + variant, emit_encoding(variant, instance_arities(instance))),
        ("objective " + objective, emit_objective(objective, variant)),
    ]
    if constraints:
        parts.append(("global constraints", emit_global_constraints(instance)))
    out = []
    for title, text in parts:
        if text:
            out.append("%% --- %s\n%s" % (title, text))
    return "\n".join(out)


def _literals(line: str) -> List[str]:
    """Split a rule at top-level separators (``:-``, ``,``, ``;``, ``:``, braces)."""
    out, depth, cur = [], 0, []
    i = 0
    while i < len(line):
        ch = line[i]
        if ch == '"':
            j = line.index('"', i + 1)
            cur.append(line[i:j + 1])
            i = j + 1
            continue
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and ch in ",;:{}[.":
            out.append("".join(cur))
            cur = []
            if ch == "[":
                break  # weak constraint weight tuple
        else:
            cur.append(ch)
        i += 1
    out.append("".join(cur))
    return [x.strip() for x in out if x.strip()]


_PRED = re.compile(r"^(?:not\s+)?(?:\d+\s+)?([a-z][A-Za-z0-9_]*)\s*(?:\(|$)")


def rule_predicates(text: str) -> set:
    """Predicate names used in rule heads and bodies (comments ignored)."""
    preds = set()
    for line in text.splitlines():
        line = line.split("%", 1)[0].replace(":-", ",").replace(":~", ",")
        for lit in _literals(line):
            if re.search(r"!=|<|>|=", re.sub(r'\([^()]*\)|"[^"]*"', "", lit)):
                continue  # comparison or assignment
            m = _PRED.match(lit)
            if m:
                preds.add(m.group(1))
    return preds
