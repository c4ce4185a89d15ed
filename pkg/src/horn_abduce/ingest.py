"""Instance file parser/renderer and Solution JSON (de)serialization.

Instance grammar (one statement per ``.``; ``%`` starts a comment)::

    axiom [<id>] [@w=w1,...,wr]: head <- b1, ..., br.
    goal: a1, ..., am.
    sortname: s1, ..., sk.
    cost: atom = n.
    nogood: a1, ..., ak.
    unique: pred(K1, ..., Kj; V1, ..., Vl).

Variables start with an uppercase letter or ``_``, constants with a
lowercase letter.  Constants of the form ``p<digits>`` are reserved for flat
Skolem constants.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import List, Optional

from .core import (
    AbductionInstance,
    Atom,
    AtomPattern,
    Axiom,
    Const,
    EqRelation,
    FlatSkolem,
    Inference,
    Nogood,
    Skolem,
    Solution,
    Term,
    UniqueSlot,
    Var,
)

FLAT_NAME = re.compile(r"p\d+\Z")

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>%[^\n]*)
  | (?P<arrow><-|:-)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<string>"[^"\n]*")
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<punct>[(),.:;=@/])
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    def __init__(self, msg, line=None, col=None):
        self.msg = msg
        self.line = line
        self.col = col
        where = "" if line is None else "line %d, column %d: " % (line, col)
        super().__init__(where + msg)


class InstanceSyntaxError(ParseError):
    pass


class InstanceSemanticError(ParseError):
    pass


class SolutionFormatError(ValueError):
    pass


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return "%s:%r@%d:%d" % (self.kind, self.text, self.line, self.col)


def _tokenize(text: str) -> List[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise InstanceSyntaxError("unexpected character %r" % text[pos], line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, allow_skolem: bool = False):
        self.toks = _tokenize(text)
        self.i = 0
        self.allow_skolem = allow_skolem

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k=1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, tok=None):
        tok = tok or self.cur
        return InstanceSyntaxError(msg, tok.line, tok.col)

    def accept(self, text) -> Optional[_Tok]:
        if self.cur.text == text and self.cur.kind in ("punct", "arrow", "ident"):
            tok = self.cur
            self.i += 1
            return tok
        return None

    def expect(self, text) -> _Tok:
        tok = self.accept(text)
        if tok is None:
            found = self.cur.text or "end of input"
            raise self.error("expected %r, found %r" % (text, found))
        return tok

    def expect_kind(self, kind, what) -> _Tok:
        if self.cur.kind != kind:
            raise self.error("expected %s, found %r" % (what, self.cur.text or "end of input"))
        tok = self.cur
        self.i += 1
        return tok

    # terms / atoms

    def term(self, allow_vars: bool):
        tok = self.cur
        if tok.kind == "var":
            if not allow_vars:
                raise self.error("variable %s not allowed here" % tok.text)
            self.i += 1
            return Var(tok.text)
        if tok.kind == "ident":
            self.i += 1
            if self.cur.text == "(" and self.cur.kind == "punct":
                if not (self.allow_skolem and tok.text == "s"):
                    raise self.error("function terms are not supported", tok)
                return self.skolem_rest()
            if self.allow_skolem and FLAT_NAME.match(tok.text):
                return FlatSkolem(int(tok.text[1:]))
            return Const(tok.text)
        raise self.error("expected a term, found %r" % (tok.text or "end of input"))

    def skolem_rest(self) -> Skolem:
        self.expect("(")
        axiom_id = self.expect_kind("ident", "axiom id").text
        self.expect(",")
        var = self.expect_kind("string", "quoted variable name").text[1:-1]
        args = []
        while self.accept(","):
            args.append(self.term(allow_vars=False))
        self.expect(")")
        return Skolem(axiom_id, var, args)

    def atom(self, allow_vars: bool):
        tok = self.expect_kind("ident", "predicate")
        args = []
        if self.accept("("):
            args.append(self.term(allow_vars))
            while self.accept(","):
                args.append(self.term(allow_vars))
            self.expect(")")
        if allow_vars:
            return AtomPattern(tok.text, tuple(args)), tok
        return Atom(tok.text, args), tok

    def atom_list(self, allow_vars: bool):
        out = [self.atom(allow_vars)]
        while self.accept(","):
            out.append(self.atom(allow_vars))
        return out

    def fraction(self) -> Fraction:
        num = self.expect_kind("number", "number").text
        if self.accept("/"):
            den = self.expect_kind("number", "number").text
            return Fraction(num) / Fraction(den)
        return Fraction(num)


def parse_atom(text: str) -> Atom:
    """Parse a ground atom in canonical rendering (Skolem terms allowed)."""
    p = _Parser(text, allow_skolem=True)
    atom, _ = p.atom(allow_vars=False)
    if p.cur.kind != "eof":
        raise p.error("trailing input %r" % p.cur.text)
    return atom


def parse_term(text: str) -> Term:
    p = _Parser(text, allow_skolem=True)
    t = p.term(allow_vars=False)
    if p.cur.kind != "eof":
        raise p.error("trailing input %r" % p.cur.text)
    return t


def _check_const_name(name, tok):
    if FLAT_NAME.match(name):
        raise InstanceSemanticError("constant %s is reserved for flat Skolem constants" % name, tok.line, tok.col)


def parse_instance(text: str) -> AbductionInstance:
    p = _Parser(text)
    axioms = []  # (id or None, weights, head, body, tok)
    goals = None
    sort_names = []
    costs = []
    nogoods = []
    uniques = []

    while p.cur.kind != "eof":
        kw = p.expect_kind("ident", "statement keyword")
        if kw.text == "axiom":
            ax_id = None
            weights = None
            if p.cur.kind == "ident":
                ax_id = p.cur.text
                p.i += 1
            if p.accept("@"):
                name = p.expect_kind("ident", "annotation name")
                if name.text != "w":
                    raise p.error("unknown annotation @%s" % name.text, name)
                p.expect("=")
                weights = [p.fraction()]
                while p.accept(","):
                    weights.append(p.fraction())
            p.expect(":")
            head, _ = p.atom(allow_vars=True)
            p.expect_kind("arrow", "'<-'")
            body = [a for a, _ in p.atom_list(allow_vars=True)]
            axioms.append((ax_id, weights, head, body, kw))
        elif kw.text == "goal":
            if goals is not None:
                raise InstanceSemanticError("more than one goal declaration", kw.line, kw.col)
            p.expect(":")
            goals = (p.atom_list(allow_vars=True), kw)
        elif kw.text == "sortname":
            p.expect(":")
            sort_names.append(p.expect_kind("ident", "sort name").text)
            while p.accept(","):
                sort_names.append(p.expect_kind("ident", "sort name").text)
        elif kw.text == "cost":
            p.expect(":")
            atom, tok = p.atom(allow_vars=False)
            p.expect("=")
            num = p.expect_kind("number", "integer cost")
            if "." in num.text:
                raise p.error("cost must be an integer", num)
            costs.append((atom, int(num.text), tok))
        elif kw.text == "nogood":
            p.expect(":")
            nogoods.append(Nogood(tuple(a for a, _ in p.atom_list(allow_vars=True))))
        elif kw.text == "unique":
            p.expect(":")
            pred = p.expect_kind("ident", "predicate")
            p.expect("(")
            keys, values = [], []
            part = keys
            while True:
                tok = p.cur
                if tok.kind not in ("var", "ident"):
                    raise p.error("expected a variable in unique-slot declaration")
                p.i += 1
                part.append(tok.text)
                if p.accept(","):
                    continue
                if part is keys and p.accept(";"):
                    part = values
                    continue
                break
            p.expect(")")
            if not values:
                raise p.error("unique-slot declaration needs ';' between key and value arguments", pred)
            args = keys + values
            key_pos = tuple(i for i, a in enumerate(keys) if a != "_")
            val_pos = tuple(len(keys) + i for i, a in enumerate(values) if a != "_")
            uniques.append(UniqueSlot(pred.text, len(args), key_pos, val_pos))
        else:
            raise InstanceSyntaxError("unknown statement %r" % kw.text, kw.line, kw.col)
        p.expect(".")

    if goals is None:
        raise InstanceSemanticError("missing goal declaration", p.cur.line, p.cur.col)
    sorts = frozenset(sort_names)

    # goal: existential variables become fresh constants
    goal_atoms, goal_tok = goals
    used = {t.name for a, _ in goal_atoms for t in a.args if isinstance(t, Const)}
    for a, tok in goal_atoms:
        for t in a.args:
            if isinstance(t, Const):
                _check_const_name(t.name, tok)
    fresh = {}
    goal = []
    for pat, tok in goal_atoms:
        args = []
        for t in pat.args:
            if isinstance(t, Var):
                if t.name not in fresh:
                    base = t.name.lower().lstrip("_") or "v"
                    if base in sorts:
                        raise InstanceSemanticError(
                            "goal variable %s would denote sort name %s" % (t.name, base), tok.line, tok.col)
                    name, k = base, 1
                    while name in used or name in sorts or FLAT_NAME.match(name):
                        name = "%s_%d" % (base, k)
                        k += 1
                    used.add(name)
                    fresh[t.name] = Const(name)
                args.append(fresh[t.name])
            else:
                args.append(t)
        atom = Atom(pat.predicate, args)
        if atom in goal:
            raise InstanceSemanticError("duplicate goal atom %s" % atom, tok.line, tok.col)
        goal.append(atom)

    built = []
    ids = set()
    for k, (ax_id, weights, head, body, tok) in enumerate(axioms):
        if ax_id is None:
            ax_id = "r%d" % (k + 1)
        if ax_id in ids:
            raise InstanceSemanticError("duplicate axiom id %s" % ax_id, tok.line, tok.col)
        ids.add(ax_id)
        body_vars = {v for b in body for v in b.variables()}
        for v in head.variables():
            if v not in body_vars:
                raise InstanceSemanticError(
                    "head variable %s of axiom %s does not occur in the body" % (v, ax_id), tok.line, tok.col)
        for pat in [head] + body:
            for t in pat.args:
                if isinstance(t, Const):
                    _check_const_name(t.name, tok)
                elif t.name == "_":
                    raise InstanceSemanticError("anonymous variable in axiom %s" % ax_id, tok.line, tok.col)
        if weights is not None:
            if len(weights) != len(body):
                raise InstanceSemanticError(
                    "axiom %s has %d weights for %d body atoms" % (ax_id, len(weights), len(body)), tok.line, tok.col)
            if any(w <= 0 for w in weights):
                raise InstanceSemanticError("weights must be positive", tok.line, tok.col)
            weights = tuple(weights)
        built.append(Axiom(ax_id, head, tuple(body), weights))

    initial = {}
    for atom, c, tok in costs:
        if atom not in goal:
            raise InstanceSemanticError("cost declared for non-goal atom %s" % atom, tok.line, tok.col)
        if c < 1:
            raise InstanceSemanticError("initial cost must be positive", tok.line, tok.col)
        initial[atom] = c

    return AbductionInstance(
        axioms=tuple(built),
        goal=tuple(goal),
        initial_costs=initial,
        sort_names=sorts,
        nogoods=tuple(nogoods),
        unique_slots=tuple(uniques),
    )


def _fmt_fraction(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else "%d/%d" % (f.numerator, f.denominator)


def render_instance(instance: AbductionInstance) -> str:
    lines = []
    for ax in instance.axioms:
        ann = ""
        if ax.weights is not None:
            ann = " @w=" + ",".join(_fmt_fraction(w) for w in ax.weights)
        lines.append("axiom %s%s: %s <- %s." % (ax.id, ann, ax.head, ", ".join(str(b) for b in ax.body)))
    lines.append("goal: %s." % ", ".join(str(a) for a in instance.goal))
    if instance.sort_names:
        lines.append("sortname: %s." % ", ".join(sorted(instance.sort_names)))
    for atom in instance.goal:
        if atom in instance.initial_costs:
            lines.append("cost: %s = %d." % (atom, instance.initial_costs[atom]))
    for ng in instance.nogoods:
        lines.append("nogood: %s." % ", ".join(str(p) for p in ng.patterns))
    for us in instance.unique_slots:
        nkeys = max(us.key_positions, default=-1) + 1
        args = []
        for i in range(us.arity):
            if i in us.key_positions:
                args.append("K%d" % (i + 1))
            elif i in us.value_positions:
                args.append("V%d" % (i + 1))
            else:
                args.append("_")
        # keys are rendered before ';' so key positions must form a prefix
        lines.append("unique: %s(%s; %s)." % (us.predicate, ", ".join(args[:nkeys]) or "_", ", ".join(args[nkeys:])))
    return "\n".join(lines) + "\n"


# -- solutions --------------------------------------------------------------


def solution_to_dict(sol: Solution) -> dict:
    if sol.eq.is_transitive():
        classes = sol.eq.classes()
    else:
        classes = [list(p) for p in sorted(sol.eq.pairs)]
    return {
        "objective": sol.objective,
        "cost": sol.objective_value,
        "abduced": [str(a) for a in sorted(sol.abduced)],
        "inferred": [
            {"atom": str(a), "axiom": inf.axiom_id, "skolem_args": [str(t) for t in inf.binding]}
            for a, inf in sorted(sol.inferred.items())
        ],
        "factored": [{"from": str(a), "to": str(b)} for a, b in sorted(sol.factored.items())],
        "eq_classes": [[str(t) for t in c] for c in classes],
    }


def render_solution(sol: Solution, indent: Optional[int] = 2) -> str:
    return json.dumps(solution_to_dict(sol), indent=indent)


def parse_solution(text: str) -> Solution:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SolutionFormatError("malformed JSON: %s" % e) from None
    if not isinstance(doc, dict):
        raise SolutionFormatError("solution must be a JSON object")
    try:
        abduced = [parse_atom(s) for s in doc.get("abduced", [])]
        inferred = {}
        for item in doc.get("inferred", []):
            atom = parse_atom(item["atom"])
            if atom in inferred:
                raise SolutionFormatError("atom %s inferred twice" % atom)
            inferred[atom] = Inference(item["axiom"], tuple(parse_term(t) for t in item.get("skolem_args", [])))
        factored = {}
        for item in doc.get("factored", []):
            src = parse_atom(item["from"])
            if src in factored:
                raise SolutionFormatError("atom %s factored twice" % src)
            factored[src] = parse_atom(item["to"])
        classes = [[parse_term(t) for t in c] for c in doc.get("eq_classes", [])]
    except ParseError as e:
        raise SolutionFormatError("bad atom or term: %s" % e) from None
    except (KeyError, TypeError) as e:
        raise SolutionFormatError("bad solution structure: %r" % e) from None

    if len(set(abduced)) != len(abduced):
        raise SolutionFormatError("duplicate abduced atom")
    for a in abduced:
        if a in inferred or a in factored:
            raise SolutionFormatError("partition violation: %s is abduced and also %s"
                                      % (a, "inferred" if a in inferred else "factored"))
    for a in factored:
        if a in inferred:
            raise SolutionFormatError("partition violation: %s is factored and inferred" % a)
    seen = set()
    for c in classes:
        for t in c:
            if t in seen:
                raise SolutionFormatError("eq not an equivalence relation: %s occurs in two classes" % t)
            seen.add(t)
    cost = doc.get("cost")
    if cost is not None and not isinstance(cost, int):
        raise SolutionFormatError("cost must be an integer")
    return Solution(
        inferred=inferred,
        factored=factored,
        abduced=frozenset(abduced),
        eq=EqRelation.from_classes(classes),
        objective=doc.get("objective"),
        objective_value=cost,
    )
