"""Negative subtrees and forests, dif, positive cuts and sector regularity.

Subforests are described by edge sets of a host tree.  A negative subtree
T_E is the smallest subtree containing a nonempty set E of noise edges; a
negative forest is a union of pairwise node-disjoint negative subtrees, and
it is determined by its edge set.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from .homogeneity import Homogeneity, ZERO
from .rules import MINUS, PLUS, ZERO_CLASS, Alphabet, mi_add, mi_neg, red_star
from .trees import TypedTree, TreeError, homogeneity, subtree_above


class CutError(ValueError):
    pass


def edge_nodes(T: TypedTree, edges):
    nodes = set()
    for e in edges:
        nodes.add(e)
        nodes.add(T.parent[e])
    return frozenset(nodes)


def components(T: TypedTree, edges):
    """Connected components of an edge set, each as a frozenset of edges."""
    edges = set(edges)
    comps = []
    while edges:
        seed = min(edges)
        comp = {seed}
        stack = [seed]
        edges.discard(seed)
        while stack:
            e = stack.pop()
            nbrs = [c for c in T.children(e) if c in edges]
            low = T.parent[e]
            if low in edges:
                nbrs.append(low)
            nbrs += [c for c in T.children(low) if c in edges]
            for x in nbrs:
                edges.discard(x)
                comp.add(x)
                stack.append(x)
        comps.append(frozenset(comp))
    return tuple(sorted(comps, key=lambda c: min(c)))


@dataclass(frozen=True)
class SubforestRef:
    host: TypedTree
    edges: frozenset

    @property
    def nodes(self):
        return edge_nodes(self.host, self.edges)

    @property
    def parts(self):
        return components(self.host, self.edges)

    def to_json(self):
        return {"host": self.host.code, "parts": [sorted(p) for p in self.parts]}


def span(T: TypedTree, edges) -> frozenset:
    """Edges of the minimal subtree of T containing all given edges."""
    edges = list(edges)
    if not edges:
        return frozenset()
    common = None
    for e in edges:
        low = T.parent[e]
        chain = {low, *T.ancestors(low)}
        common = chain if common is None else common & chain
    top = max(common, key=lambda n: len(T.ancestors(n)))
    out = set()
    for e in edges:
        x = e
        while x != top:
            out.add(x)
            x = T.parent[x]
    return frozenset(out)


def noise_edges(T: TypedTree, alphabet: Alphabet):
    return [e for e in T.edges() if alphabet[T.etype[e]].cls == MINUS]


def extract(T: TypedTree, edges):
    """Connected edge set -> (tree, map host edge -> edge of the extracted tree)."""
    edges = frozenset(edges)
    if not edges:
        return TypedTree.trivial(), {}
    low = min(edge_nodes(T, edges), key=lambda n: len(T.ancestors(n)))

    def rec(n):
        return [(T.etype[c], rec(c)) for c in T.children(n) if c in edges]

    def tagged(n):
        return [((T.etype[c], c), tagged(c)) for c in T.children(n) if c in edges]

    sub = TypedTree.from_nested(rec(low))
    # match host edges to canonical positions by replaying the canonical sort
    mapping = {}

    def code_of(children):
        from .trees import _node_code

        return _node_code([(e[0], strip(c)) for e, c in children])

    def strip(children):
        return tuple((e[0], strip(c)) for e, c in children)

    def assign(tag_children, new_node):
        ordered = sorted(
            tag_children,
            key=lambda ec: (ec[0][0] + (code_of(ec[1]) if ec[1] else "")),
        )
        kids = sub.children(new_node)
        if len(kids) != len(ordered):
            raise TreeError("internal layout mismatch")
        for (etag, c), k in zip(ordered, kids):
            mapping[etag[1]] = k
            assign(c, k)

    assign(tagged(low), 0)
    return sub, mapping


@lru_cache(maxsize=4096)
def _negative_spans(T: TypedTree, noise: tuple):
    spans = {}
    for r in range(1, len(noise) + 1):
        for E in combinations(noise, r):
            s = span(T, E)
            spans.setdefault(s, E)
    return tuple(sorted(spans, key=lambda s: (len(s), sorted(s))))


def negative_subtrees(T: TypedTree, alphabet: Alphabet):
    """All T_E, E a nonempty set of noise edges, as embedded edge sets."""
    noise = tuple(noise_edges(T, alphabet))
    return [SubforestRef(T, s) for s in _negative_spans(T, noise)]


def negative_forests(T: TypedTree, alphabet: Alphabet):
    """All negative forests of T (including the empty one), as edge sets."""
    noise = tuple(noise_edges(T, alphabet))
    return [SubforestRef(T, F) for F in _forest_edge_sets(T, noise)]


@lru_cache(maxsize=4096)
def _forest_edge_sets(T: TypedTree, noise: tuple):
    spans = list(_negative_spans(T, noise))
    nodes = [edge_nodes(T, s) for s in spans]
    found = set()

    def rec(i, used_nodes, acc):
        if i == len(spans):
            found.add(frozenset(acc))
            return
        rec(i + 1, used_nodes, acc)
        if not (nodes[i] & used_nodes):
            rec(i + 1, used_nodes | nodes[i], acc | spans[i])

    rec(0, frozenset(), frozenset())
    return tuple(sorted(found, key=lambda F: (len(F), sorted(F))))


def is_negative_forest(T: TypedTree, alphabet: Alphabet, edges) -> bool:
    return frozenset(edges) in set(_forest_edge_sets(T, tuple(noise_edges(T, alphabet))))


def negative_tree_set(trees, alphabet: Alphabet):
    """Distinct negative subtrees (up to isomorphism) across a family of trees."""
    found = {}
    for T in trees:
        for ref in negative_subtrees(T, alphabet):
            sub, _ = extract(T, ref.edges)
            found.setdefault(sub.code, sub)
    return [found[c] for c in sorted(found)]


def counterterm_trees(trees, alphabet: Alphabet):
    """Negative subtrees of strictly negative degree with an even number of noises."""
    out = []
    for tau in negative_tree_set(trees, alphabet):
        nn = len(noise_edges(tau, alphabet))
        if nn % 2 == 0 and homogeneity(tau, alphabet) < ZERO:
            out.append(tau)
    return out


def dif(T: TypedTree, n: int, alphabet: Alphabet):
    """red_* of (upper index of the edge below n) minus the lower indices above n."""
    above = T.children(n)
    if not above:
        return ()
    acc = []
    if n != 0:
        below = alphabet[T.etype[n]]
        if below.cls == PLUS:
            acc.append(((below.upper_index(), 1),))
    for c in above:
        acc.append(mi_neg(alphabet[T.etype[c]].lower_index()))
    return red_star(mi_add(*acc), alphabet.labels)


# ------------------------------------------------------------ positive cuts


def _cuttable(T: TypedTree, alphabet: Alphabet, e):
    return alphabet[T.etype[e]].cls in (PLUS, ZERO_CLASS)


def is_positive_cut(T: TypedTree, alphabet: Alphabet, E) -> bool:
    E = set(E)
    for e in E:
        if not _cuttable(T, alphabet, e):
            return False
    for e in T.edges():
        if alphabet[T.etype[e]].cls == ZERO_CLASS and e not in E:
            return False
    for a in E:
        for b in E:
            if a != b and T.is_below(a, b):
                return False
    return True


def positive_cuts(T: TypedTree, alphabet: Alphabet):
    """All antichains of Plus/Zero edges that contain every Zero edge."""
    zero = frozenset(e for e in T.edges() if alphabet[T.etype[e]].cls == ZERO_CLASS)

    def rec(n):
        # cut sets restricted to the subtree above node n
        options = [frozenset()]
        for c in T.children(n):
            cls = alphabet[T.etype[c]].cls
            sub = [frozenset({c})] if cls == ZERO_CLASS else []
            if cls != ZERO_CLASS:
                inner = rec(c)
                sub += inner
                if cls == PLUS and not (zero & set(T.above(c))):
                    sub.append(frozenset({c}))
            options = [a | b for a in options for b in sub]
        return options

    return sorted(set(rec(0)), key=lambda E: (len(E), sorted(E)))


def positive_forest(T: TypedTree, E):
    out = set()
    for e in E:
        out.update(T.above(e))
    return frozenset(out)


def cut(T: TypedTree, alphabet: Alphabet, E) -> TypedTree:
    if not is_positive_cut(T, alphabet, E):
        raise CutError(f"{sorted(E)} is not a positive cut of {T.code}")
    E = set(E)

    def rec(n):
        out = []
        for c in T.children(n):
            t = alphabet[T.etype[c]]
            if c in E:
                out.append((t.id if t.cls == ZERO_CLASS else t.iota, ()))
            else:
                out.append((T.etype[c], rec(c)))
        return out

    for e in E:
        t = alphabet[T.etype[e]]
        if t.cls == PLUS and t.iota is None:
            raise CutError(f"edge type {t.id!r} has no jet image")
    return TypedTree.from_nested(rec(0))


def sector_regularity(T: TypedTree, alphabet: Alphabet) -> Homogeneity:
    """min over positive cuts of the degree of the cut tree (dynamic programme)."""

    def best(n):
        total = ZERO
        for c in T.children(n):
            t = alphabet[T.etype[c]]
            if t.cls == ZERO_CLASS:
                continue
            keep = t.degree + best(c)
            if t.cls == PLUS and not any(
                alphabet[T.etype[x]].cls == ZERO_CLASS for x in T.above(c)
            ):
                keep = min(keep, ZERO)
            total = total + keep
        return total

    return best(0)


def planted_subtree(T: TypedTree, e: int) -> TypedTree:
    return subtree_above(T, e)
