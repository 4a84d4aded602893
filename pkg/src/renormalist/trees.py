"""Typed rooted trees.

Trees are stored in a canonical layout: nodes are numbered in preorder with
children visited in order of their canonical codes, so two trees are
isomorphic exactly when their ``parent``/``etype`` arrays coincide.  Edge ``i``
(for ``i >= 1``) is the edge from ``parent[i]`` up to node ``i``; the root is
node 0 and carries no edge.

Canonical codes look like ``[I[Xi],I[Xi]]``: a node is the bracketed,
sorted list of its incoming edges, each written as the edge type id followed
by the code of the node above it (omitted when that node is a leaf).
"""

from __future__ import annotations

from collections import Counter
from functools import lru_cache
from itertools import combinations_with_replacement
from math import factorial

from .homogeneity import Homogeneity, ZERO, INFINITY
from .rules import PLUS, ZERO_CLASS, MINUS, Alphabet, Rule, RuleError, node_type


class TreeError(ValueError):
    pass


class GenerationBudgetExceeded(RuntimeError):
    pass


def _branch_code(etype, children):
    return etype + _node_code(children) if children else etype


def _node_code(children):
    return "[" + ",".join(sorted(_branch_code(e, c) for e, c in children)) + "]"


def _sort_nested(children):
    """Sort a nested children list into canonical order, recursively."""
    items = [(e, _sort_nested(c)) for e, c in children]
    items.sort(key=lambda ec: _branch_code(ec[0], ec[1]))
    return tuple(items)


class TypedTree:
    __slots__ = ("parent", "etype", "_code", "_children", "__weakref__")

    def __init__(self, parent, etype):
        self.parent = tuple(parent)
        self.etype = tuple(etype)
        self._code = None
        self._children = None

    @classmethod
    def from_nested(cls, children) -> "TypedTree":
        return _layout(_sort_nested(children))

    @classmethod
    def trivial(cls) -> "TypedTree":
        return cls((-1,), (None,))

    @property
    def n_nodes(self):
        return len(self.parent)

    @property
    def n_edges(self):
        return len(self.parent) - 1

    def edges(self):
        return range(1, len(self.parent))

    def lower(self, e):
        return self.parent[e]

    def upper(self, e):
        return e

    def children(self, n):
        if self._children is None:
            ch = [[] for _ in self.parent]
            for i in range(1, len(self.parent)):
                ch[self.parent[i]].append(i)
            self._children = tuple(tuple(c) for c in ch)
        return self._children[n]

    def nested(self, n=0):
        return tuple((self.etype[c], self.nested(c)) for c in self.children(n))

    @property
    def code(self) -> str:
        if self._code is None:
            self._code = _node_code(self.nested())
        return self._code

    def is_trivial(self):
        return self.n_edges == 0

    def is_planted(self):
        return len(self.children(0)) == 1

    def leaves(self):
        return [n for n in range(self.n_nodes) if not self.children(n) and n != 0]

    def above(self, e):
        """Edges of T_{>=e} (including e)."""
        out, stack = [], [e]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(self.children(x))
        return sorted(out)

    def ancestors(self, n):
        out = []
        while self.parent[n] >= 0:
            n = self.parent[n]
            out.append(n)
        return out

    def is_below(self, e1, e2):
        """True when edge e1 < e2 in the tree order (e2 sits above e1)."""
        return e1 in self.ancestors(e2) or e1 == e2

    def node_type_at(self, n):
        return node_type(self.etype[c] for c in self.children(n))

    def __eq__(self, other):
        return isinstance(other, TypedTree) and self.parent == other.parent and self.etype == other.etype

    def __hash__(self):
        return hash((self.parent, self.etype))

    def __lt__(self, other):
        return self.code < other.code

    def __repr__(self):
        return f"TypedTree({self.code})"

    def __str__(self):
        return self.code


def _layout(nested) -> TypedTree:
    parent, etype = [-1], [None]

    def walk(children, p):
        for e, c in children:
            parent.append(p)
            etype.append(e)
            walk(c, len(parent) - 1)

    walk(nested, 0)
    return TypedTree(parent, etype)


def canonical_code(T: TypedTree) -> bytes:
    return T.code.encode()


def parse_code(text: str) -> TypedTree:
    """Inverse of ``TypedTree.code``; whitespace is ignored and order is free."""
    s = "".join(text.split())
    pos = 0

    def node():
        nonlocal pos
        if s[pos] != "[":
            raise TreeError(f"expected '[' at {pos} in {text!r}")
        pos += 1
        out = []
        if s[pos] == "]":
            pos += 1
            return out
        while True:
            start = pos
            while pos < len(s) and s[pos] not in "[],":
                pos += 1
            name = s[start:pos]
            if not name:
                raise TreeError(f"missing edge type at {pos} in {text!r}")
            sub = node() if pos < len(s) and s[pos] == "[" else []
            out.append((name, sub))
            if s[pos] == ",":
                pos += 1
                continue
            if s[pos] == "]":
                pos += 1
                return out
            raise TreeError(f"unexpected {s[pos]!r} at {pos} in {text!r}")

    try:
        children = node()
    except IndexError:
        raise TreeError(f"truncated tree code {text!r}") from None
    if pos != len(s):
        raise TreeError(f"trailing characters in {text!r}")
    return TypedTree.from_nested(children)


def tree_product(*trees) -> TypedTree:
    children = []
    for T in trees:
        children.extend(T.nested())
    return TypedTree.from_nested(children)


def graft(edge: str, T: TypedTree, alphabet: Alphabet | None = None) -> TypedTree:
    if alphabet is not None and alphabet[edge].cls != PLUS and not T.is_trivial():
        raise TreeError(f"cannot graft a {alphabet[edge].cls} edge {edge!r} onto a non-trivial tree")
    return TypedTree.from_nested([(edge, T.nested())])


def single_edge(edge: str) -> TypedTree:
    return TypedTree.from_nested([(edge, ())])


def subtree_above(T: TypedTree, e: int) -> TypedTree:
    """The planted tree T_{>=e}, re-rooted at the lower end of e."""
    return TypedTree.from_nested([(T.etype[e], T.nested(e))])


def branches(T: TypedTree):
    """Planted factors of T at its root."""
    return [subtree_above(T, c) for c in T.children(0)]


def homogeneity(T: TypedTree, alphabet: Alphabet) -> Homogeneity:
    return sum((alphabet.degree(T.etype[e]) for e in T.edges()), ZERO)


def generation_degree(T: TypedTree, alphabet: Alphabet) -> Homogeneity:
    return sum((alphabet[T.etype[e]].generation_degree() for e in T.edges()), ZERO)


def count_noises(T: TypedTree, alphabet: Alphabet) -> int:
    return sum(1 for e in T.edges() if alphabet[T.etype[e]].cls == MINUS)


def symmetry_factors(T: TypedTree):
    """Return ({node: S_n}, S) with S_n the product of multiplicity factorials."""
    per_node = {}
    total = 1
    for n in range(T.n_nodes):
        mult = Counter(_branch_code(T.etype[c], T.nested(c)) for c in T.children(n))
        s = 1
        for k in mult.values():
            s *= factorial(k)
        per_node[n] = s
        total *= s
    return per_node, total


def symmetry_factor(T: TypedTree) -> int:
    return symmetry_factors(T)[1]


def plane_count(T: TypedTree) -> int:
    per_node, _ = symmetry_factors(T)
    out = 1
    for n in range(T.n_nodes):
        out *= factorial(len(T.children(n)))
    for s in per_node.values():
        out //= s
    return out


def conforms(T: TypedTree, rule: Rule, root_types=None) -> bool:
    """Check every non-root node against the rule, and optionally the root."""
    for e in T.edges():
        if T.node_type_at(e) not in rule[T.etype[e]]:
            return False
    if root_types is not None and T.node_type_at(0) not in root_types:
        return False
    return True


def to_json(T: TypedTree):
    def rec(children):
        return [{"type": e, "children": rec(c)} for e, c in children]

    return {"code": T.code, "children": rec(T.nested())}


def to_dot(T: TypedTree, name="T", node_labels=None):
    lines = [f"digraph {name} {{", "  rankdir=BT;"]
    for n in range(T.n_nodes):
        label = "" if node_labels is None else str(node_labels.get(n, ""))
        shape = "doublecircle" if n == 0 else "circle"
        lines.append(f'  n{n} [shape={shape}, label="{label}"];')
    for e in T.edges():
        lines.append(f'  n{e} -> n{T.parent[e]} [label="{T.etype[e]}"];')
    lines.append("}")
    return "\n".join(lines)


# ---------------------------------------------------------------- generation


def minimal_branch_degrees(rule: Rule, alphabet: Alphabet, max_iter=10_000):
    """Least generation degree of any planted branch, per edge type."""
    m = {}
    for eid, t in alphabet.edges.items():
        m[eid] = t.generation_degree() if t.cls != PLUS else INFINITY
    plus = alphabet.ids(PLUS)
    for _ in range(max_iter):
        changed = False
        for k in plus:
            cands = [sum((m[e] for e in nu), ZERO) for nu in rule[k]]
            best = alphabet.degree(k) + min(cands) if cands else INFINITY
            if best < m[k]:
                m[k] = best
                changed = True
        if not changed:
            return m
    raise GenerationBudgetExceeded("minimal branch degrees do not stabilise; rule is not subcritical")


class TreeGenerator:
    """Enumerate rule-conforming trees below a cutoff on the generation degree."""

    def __init__(self, rule: Rule, alphabet: Alphabet, node_budget=200_000, depth_budget=64):
        self.rule = rule
        self.alphabet = alphabet
        self.mins = minimal_branch_degrees(rule, alphabet)
        self.node_budget = node_budget
        self.depth_budget = depth_budget
        self._made = 0
        self._rhs_memo = {}
        self._branch_memo = {}

    def _charge(self, n):
        self._made += n
        if self._made > self.node_budget:
            raise GenerationBudgetExceeded(
                f"tree generation exceeded the budget of {self.node_budget} nodes"
            )

    def branches(self, edge, budget, depth=0):
        """Planted trees edge(T) of generation degree < budget, with degrees."""
        key = (edge, budget)
        if key in self._branch_memo:
            return self._branch_memo[key]
        t = self.alphabet[edge]
        if t.cls != PLUS:
            d = t.generation_degree()
            out = [(single_edge(edge), d)] if d < budget else []
        elif not self.mins[edge] < budget:
            out = []
        else:
            out = []
            for T, d in self.trees_with_root(self.rule[edge], budget - t.degree, depth + 1):
                out.append((graft(edge, T), d + t.degree))
            out.sort(key=lambda x: x[0].code)
        self._branch_memo[key] = out
        return out

    def trees_with_root(self, root_types, budget, depth=0):
        if depth > self.depth_budget:
            raise GenerationBudgetExceeded("tree generation exceeded the depth budget")
        key = (frozenset(root_types), budget)
        if key in self._rhs_memo:
            return self._rhs_memo[key]
        found = {}
        for nu in sorted(root_types):
            for T, d in self._node_products(nu, budget, depth):
                found.setdefault(T.code, (T, d))
        out = [found[c] for c in sorted(found)]
        self._charge(sum(T.n_nodes for T, _ in out))
        self._rhs_memo[key] = out
        return out

    def _node_products(self, nu, budget, depth):
        counts = Counter(nu)
        slots = sorted(counts)
        floor = {e: self.mins[e] for e in slots}
        total_min = sum((floor[e] * counts[e] for e in slots), ZERO)
        if not total_min < budget:
            return []
        results = []

        def rec(i, chosen, used, rest_min):
            if i == len(slots):
                if used < budget:
                    results.append((tree_product(*[b for b, _ in chosen]), used))
                return
            e = slots[i]
            c = counts[e]
            rest_after = rest_min - floor[e] * c
            # one branch of type e may use at most what the others leave over
            cap = budget - used - rest_after - floor[e] * (c - 1)
            cands = self.branches(e, cap, depth)
            for combo in combinations_with_replacement(range(len(cands)), c):
                deg = sum((cands[j][1] for j in combo), ZERO)
                if not used + deg + rest_after < budget:
                    continue
                rec(i + 1, chosen + [cands[j] for j in combo], used + deg, rest_after)

        rec(0, [], ZERO, total_min)
        return results


def generate_trees(rule: Rule, alphabet: Alphabet, target, gamma, *, node_budget=200_000):
    """Trees with root node type in R(target) (edge target) or equal to target (node type)."""
    gamma = Homogeneity.coerce(gamma)
    gen = TreeGenerator(rule, alphabet, node_budget=node_budget)
    if isinstance(target, str):
        roots = rule[target]
        if alphabet[target].cls != PLUS:
            raise RuleError(f"target edge {target!r} must be a Plus edge")
    else:
        roots = {node_type(target)}
    return [T for T, _ in gen.trees_with_root(roots, gamma)]


def solution_trees(rule: Rule, alphabet: Alphabet, kernel: str, gamma, *, node_budget=200_000):
    """The jet iota(kernel) together with the planted trees kernel(T) below gamma."""
    gamma = Homogeneity.coerce(gamma)
    gen = TreeGenerator(rule, alphabet, node_budget=node_budget)
    out = [T for T, _ in gen.branches(kernel, gamma)]
    jet = alphabet[kernel].iota
    if jet is not None and alphabet[jet].generation_degree() < gamma:
        out.append(single_edge(jet))
    return sorted(out, key=lambda T: T.code)


# ------------------------------------------------------ second homogeneity


def second_homogeneity(T: TypedTree, alphabet: Alphabet, delta0) -> Homogeneity:
    """Precision grading of T; the distinguished branch is always a genuine planted tree.

    Trees built from noise alone get INFINITY.
    """
    delta0 = Homogeneity.coerce(delta0)
    return _second_cached(T, alphabet_key(alphabet), delta0)


_ALPHABETS = {}


def alphabet_key(alphabet: Alphabet):
    key = tuple(sorted((e, t.cls, t.degree, t.iota) for e, t in alphabet.edges.items()))
    _ALPHABETS.setdefault(key, alphabet)
    return key


@lru_cache(maxsize=None)
def _second_cached(T, akey, delta0):
    from .subforests import negative_subtrees, sector_regularity

    alphabet = _ALPHABETS[akey]
    if T.is_trivial():
        return ZERO
    roots = T.children(0)
    if len(roots) == 1:
        e = roots[0]
        t = alphabet[T.etype[e]]
        if T.n_edges == 1 and t.cls == ZERO_CLASS:
            return delta0
        if T.n_edges == 1 and t.cls == MINUS:
            return INFINITY
        if t.cls != PLUS:
            raise TreeError(f"{T.etype[e]!r} edges must be leaves")
        inner = TypedTree.from_nested(T.nested(e))
        inner_norm = _second_cached(inner, akey, delta0)
        if inner_norm.is_infinite() and t.degree + homogeneity(inner, alphabet) < ZERO:
            return INFINITY
        return min(t.degree + inner_norm, delta0)
    # not planted: minimise over a negative tree tau at the root and the planted
    # branches hanging off it
    candidates = [frozenset()]
    for ref in negative_subtrees(T, alphabet):
        if 0 in ref.nodes:
            candidates.append(ref.edges)
    best = INFINITY
    for tau_edges in candidates:
        tau_nodes = {0} | set(tau_edges)
        hanging = [e for e in T.edges() if e not in tau_edges and T.parent[e] in tau_nodes]
        tau_deg = sum((alphabet.degree(T.etype[e]) for e in tau_edges), ZERO)
        alphas, norms = [], []
        for e in hanging:
            G = subtree_above(T, e)
            alphas.append(sector_regularity(G, alphabet))
            norms.append(_second_cached(G, akey, delta0))
        # the distinguished branch must be a genuine planted tree
        value = INFINITY
        for j in range(len(hanging)):
            others = sum((a for i, a in enumerate(alphas) if i != j), ZERO)
            value = min(value, tau_deg + others + norms[j])
        best = min(best, value)
    return best
