"""Labels, multi-indices, edge types and rules.

A node type is a multiset of edge type ids, stored as a sorted tuple.  A rule
maps each edge type id to a frozenset of node types.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as cartesian

from .equation import EquationSpec
from .homogeneity import Homogeneity, ZERO, KAPPA

PLUS, ZERO_CLASS, MINUS = "plus", "zero", "minus"
EDGE_CLASSES = (PLUS, ZERO_CLASS, MINUS)


class RuleError(ValueError):
    pass


class LabelSet:
    """Finite label alphabet with a fixed-point-free involution."""

    def __init__(self, pairs: dict):
        duals = {}
        for a, b in pairs.items():
            if a == b:
                raise RuleError(f"label {a!r} cannot be its own dual")
            for x, y in ((a, b), (b, a)):
                if duals.get(x, y) != y:
                    raise RuleError(f"label {x!r} has two duals")
                duals[x] = y
        self._dual = duals

    def dual(self, label: str) -> str:
        try:
            return self._dual[label]
        except KeyError:
            raise RuleError(f"unknown label {label!r}") from None

    def __contains__(self, label):
        return label in self._dual

    def labels(self):
        return sorted(self._dual)

    def pairs(self):
        """One representative per dual pair, for serialisation."""
        seen, out = set(), {}
        for a in sorted(self._dual):
            if a not in seen:
                out[a] = self._dual[a]
                seen.update((a, self._dual[a]))
        return out

    def __eq__(self, other):
        return isinstance(other, LabelSet) and self._dual == other._dual


def multi_index(counts=None, **kw):
    """Normalised multi-index: sorted tuple of (label, nonzero count)."""
    d = dict(counts or {})
    d.update(kw)
    return tuple(sorted((k, v) for k, v in d.items() if v))


def mi_add(*indices):
    out = {}
    for idx in indices:
        for k, v in idx:
            out[k] = out.get(k, 0) + v
    return multi_index(out)


def mi_neg(idx):
    return tuple((k, -v) for k, v in idx)


def red_star(sigma, labels: LabelSet):
    """Reduce a signed multi-index: -[l] counts as [l*], dual pairs cancel."""
    pos = {}
    for label, count in dict(sigma).items():
        if count >= 0:
            pos[label] = pos.get(label, 0) + count
        else:
            d = labels.dual(label)
            pos[d] = pos.get(d, 0) - count
    for label in list(pos):
        labels.dual(label)
    out = {}
    for label, count in pos.items():
        other = pos.get(labels.dual(label), 0)
        out[label] = count - min(count, other)
    return multi_index(out)


def mi_dual(idx, labels: LabelSet):
    return multi_index({labels.dual(k): v for k, v in idx})


@dataclass(frozen=True)
class EdgeType:
    id: str
    cls: str
    degree: Homogeneity
    index: object
    iota: str | None = None
    jet_weight: Homogeneity = ZERO

    def lower_index(self):
        if self.cls == PLUS:
            return multi_index({self.index[1]: 1})
        if self.cls == MINUS:
            return multi_index({self.index: 1})
        return tuple(self.index)

    def upper_index(self):
        if self.cls != PLUS:
            raise RuleError(f"edge type {self.id!r} has no upper index")
        return self.index[0]

    def generation_degree(self) -> Homogeneity:
        """Degree used by tree generation cutoffs (jets may carry extra weight)."""
        if self.cls == ZERO_CLASS:
            return self.degree + self.jet_weight
        return self.degree


@dataclass
class Alphabet:
    labels: LabelSet
    edges: dict = field(default_factory=dict)

    def __getitem__(self, eid) -> EdgeType:
        try:
            return self.edges[eid]
        except KeyError:
            raise RuleError(f"unknown edge type {eid!r}") from None

    def __contains__(self, eid):
        return eid in self.edges

    def ids(self, cls=None):
        return sorted(e for e, t in self.edges.items() if cls is None or t.cls == cls)

    def degree(self, eid) -> Homogeneity:
        return self[eid].degree

    def iota_image(self):
        return {t.iota for t in self.edges.values() if t.cls == PLUS and t.iota}

    def validate(self):
        for t in self.edges.values():
            if any(ch in t.id for ch in "[],") or not t.id:
                raise RuleError(f"edge id {t.id!r} may not contain brackets or commas")
            if t.cls not in EDGE_CLASSES:
                raise RuleError(f"edge type {t.id!r}: unknown class {t.cls!r}")
            sign_ok = {
                PLUS: t.degree > ZERO,
                MINUS: t.degree < ZERO,
                ZERO_CLASS: t.degree == ZERO,
            }[t.cls]
            if not sign_ok:
                raise RuleError(f"edge type {t.id!r}: degree {t.degree} does not match class {t.cls}")
            if t.cls == PLUS:
                for lab in t.index:
                    self.labels.dual(lab)
            elif t.cls == MINUS:
                self.labels.dual(t.index)
            else:
                for lab, _ in t.index:
                    self.labels.dual(lab)
        images = [t.iota for t in self.edges.values() if t.cls == PLUS and t.iota]
        if len(images) != len(set(images)):
            raise RuleError("iota is not injective on Plus edges")
        for t in self.edges.values():
            if t.iota is None:
                continue
            if t.cls != PLUS:
                raise RuleError(f"only Plus edges carry an iota image ({t.id!r})")
            img = self[t.iota]
            if img.cls != ZERO_CLASS:
                raise RuleError(f"iota({t.id}) = {img.id} is not a Zero edge")
            if tuple(img.index) != t.lower_index():
                raise RuleError(f"index of iota({t.id}) must equal the lower index of {t.id}")
        return self


def node_type(edges) -> tuple:
    return tuple(sorted(edges))


def node_index(nu, alphabet: Alphabet):
    return red_star(mi_add(*(alphabet[e].lower_index() for e in nu)), alphabet.labels)


class Rule:
    def __init__(self, mapping: dict):
        self.map = {e: frozenset(node_type(n) for n in ns) for e, ns in mapping.items()}

    def __getitem__(self, eid):
        return self.map.get(eid, frozenset())

    def items(self):
        return sorted(self.map.items())

    def __eq__(self, other):
        return isinstance(other, Rule) and self.map == other.map

    def __le__(self, other):
        return all(ns <= other[e] for e, ns in self.map.items())

    def as_lists(self):
        return {e: sorted(list(n) for n in ns) for e, ns in sorted(self.map.items())}

    def __repr__(self):
        return f"Rule({self.as_lists()})"


def complete_rule(rule: Rule, alphabet: Alphabet) -> Rule:
    """Add R(e) = {()} for every Zero/Minus edge type."""
    m = dict(rule.map)
    for eid, t in alphabet.edges.items():
        if t.cls != PLUS:
            m[eid] = frozenset({()})
        else:
            m.setdefault(eid, frozenset())
    return Rule(m)


def check_rule(rule: Rule, alphabet: Alphabet, *, check_index=False):
    for eid, ns in rule.map.items():
        t = alphabet[eid]
        if t.cls != PLUS and ns != frozenset({()}):
            raise RuleError(f"R({eid}) must be {{()}} for a {t.cls} edge")
        for nu in ns:
            for e in nu:
                alphabet[e]
            if check_index and t.cls == PLUS:
                got = node_index(nu, alphabet)
                want = multi_index({t.upper_index(): 1})
                if got != want:
                    raise RuleError(f"node type {list(nu)} in R({eid}) has index {got}, expected {want}")


def _plus_submultisets(nu, alphabet):
    plus = [e for e in nu if alphabet[e].cls == PLUS]
    counts = {}
    for e in plus:
        counts[e] = counts.get(e, 0) + 1
    keys = sorted(counts)
    for choice in cartesian(*(range(counts[k] + 1) for k in keys)):
        if any(choice):
            yield dict(zip(keys, choice))


def normalize_rule(rule: Rule, alphabet: Alphabet) -> Rule:
    """Smallest normal rule containing ``rule``: Plus edges may be replaced by their jets."""
    out = {}
    for eid, ns in rule.map.items():
        seen = set(ns)
        todo = list(ns)
        while todo:
            nu = todo.pop()
            for sub in _plus_submultisets(nu, alphabet):
                rest = list(nu)
                repl = []
                for e, k in sub.items():
                    img = alphabet[e].iota
                    if img is None:
                        raise RuleError(f"Plus edge {e!r} has no iota image")
                    for _ in range(k):
                        rest.remove(e)
                        repl.append(img)
                new = node_type(rest + repl)
                if new not in seen:
                    seen.add(new)
                    todo.append(new)
        out[eid] = frozenset(seen)
    return Rule(out)


def is_normal(rule: Rule, alphabet: Alphabet) -> bool:
    return normalize_rule(rule, alphabet) == rule


def is_equation_like(rule: Rule, alphabet: Alphabet):
    """Return (ok, witness); witness is the first offending (edge, node type)."""
    jets = alphabet.iota_image()
    for eid, ns in rule.items():
        for nu in sorted(ns):
            free = [e for e in nu if alphabet[e].cls == ZERO_CLASS and e not in jets]
            if len(free) > 1:
                return False, (eid, nu)
    return True, None


def subcriticality_trace(rule: Rule, alphabet: Alphabet, steps: int):
    """Iterates of reg(k) = |k| + min_nu sum reg - kappa on Plus edges."""
    plus = alphabet.ids(PLUS)
    for k in plus:
        if not rule[k]:
            raise RuleError(f"R({k}) is empty")
    base = {e: ZERO for e in alphabet.ids(ZERO_CLASS)}
    base.update({e: alphabet.degree(e) for e in alphabet.ids(MINUS)})
    reg = dict(base)
    reg.update({k: ZERO for k in plus})
    trace = [dict(reg)]
    for _ in range(steps):
        new = dict(base)
        for k in plus:
            best = min(sum((reg[e] for e in nu), ZERO) for nu in rule[k])
            new[k] = alphabet.degree(k) + best - KAPPA
        reg = new
        trace.append(dict(reg))
    return trace


def is_subcritical(rule: Rule, alphabet: Alphabet, *, floor=-10**6, budget=None):
    """Return a regularity assignment witnessing subcriticality, or None."""
    plus = alphabet.ids(PLUS)
    for k in plus:
        if not rule[k]:
            raise RuleError(f"R({k}) is empty")
    if budget is None:
        budget = 10 * len(alphabet.edges)
    floor = Homogeneity.coerce(floor)
    base = {e: ZERO for e in alphabet.ids(ZERO_CLASS)}
    base.update({e: alphabet.degree(e) for e in alphabet.ids(MINUS)})
    reg = dict(base)
    reg.update({k: ZERO for k in plus})
    for _ in range(budget + 1):
        new = dict(base)
        for k in plus:
            best = min(sum((reg[e] for e in nu), ZERO) for nu in rule[k])
            new[k] = alphabet.degree(k) + best - KAPPA
            if new[k] < floor:
                return None
        if new == reg:
            return reg
        reg = new
    return None


def verify_subcritical(rule: Rule, alphabet: Alphabet, reg: dict) -> bool:
    for k in alphabet.ids(PLUS):
        bound = alphabet.degree(k) + min(sum((reg[e] for e in nu), ZERO) for nu in rule[k])
        if not reg[k] < bound:
            return False
    return True


def marker_id(coefficient: str, n: int) -> str:
    return f"{coefficient}^{n}"


def spde_to_rule(spec: EquationSpec):
    """Build the edge alphabet and the normalised rule of an equation.

    Constant numeric coefficients get no marker edge; function coefficients
    f(u) get markers f^n for each Taylor order n <= taylor_order and tensor
    coefficients a single marker.
    """
    spec.validate()
    pairs = {spec.component: spec.component + "*"}
    for slot in (*spec.kernels, *spec.noises):
        if slot.variable not in pairs and slot.variable not in pairs.values():
            pairs[slot.variable] = slot.variable + "*"
    labels = LabelSet(pairs)
    edges = {}
    for k in spec.kernels:
        edges[k.edge] = EdgeType(k.edge, PLUS, k.degree, (spec.component, k.variable), iota=k.jet)
        edges[k.jet] = EdgeType(k.jet, ZERO_CLASS, ZERO, multi_index({k.variable: 1}),
                                jet_weight=k.jet_weight)
    for n in spec.noises:
        edges[n.edge] = EdgeType(n.edge, MINUS, n.degree, n.variable)
    naive = set()
    for term in spec.terms:
        base = [spec.edge_of(v) for v in term.factors]
        if term.kind == "scalar":
            naive.add(node_type(base))
        elif term.kind == "tensor":
            m = marker_id(term.coefficient, 0)
            edges[m] = EdgeType(m, ZERO_CLASS, ZERO, ())
            naive.add(node_type(base + [m]))
        else:
            arg_edge = spec.edge_of(term.argument or spec.default_argument())
            for n in range(spec.taylor_order + 1):
                m = marker_id(term.coefficient, n)
                edges[m] = EdgeType(m, ZERO_CLASS, ZERO, ())
                naive.add(node_type(base + [arg_edge] * n + [m]))
    alphabet = Alphabet(labels, edges).validate()
    rule = complete_rule(Rule({k.edge: naive for k in spec.kernels}), alphabet)
    return alphabet, normalize_rule(rule, alphabet)
