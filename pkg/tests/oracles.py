"""Brute-force reference implementations used to cross-check the library.

Everything here works on the raw parent/etype arrays of a TypedTree and
enumerates subsets, orderings or decompositions directly.
"""

from __future__ import annotations

import random
from functools import lru_cache
from itertools import permutations, product

from renormalist.homogeneity import INFINITY, ZERO
from renormalist.rules import MINUS, PLUS, ZERO_CLASS
from renormalist.trees import TypedTree


# ------------------------------------------------------------------ tree families


def all_typed_trees(max_edges, leaf_types, inner_types):
    """Every typed rooted tree with at most ``max_edges`` edges, deduplicated by code.

    Edges with something above them take a type from ``inner_types``; leaf
    edges take any type from ``leaf_types``.
    """

    @lru_cache(maxsize=None)
    def forests(n):
        # multisets of planted branches with n edges in total, as sorted tuples
        if n == 0:
            return {()}
        out = set()
        for first in range(1, n + 1):
            for b in branches(first):
                for rest in forests(n - first):
                    out.add(tuple(sorted((b,) + rest)))
        return out

    @lru_cache(maxsize=None)
    def branches(n):
        out = set()
        for t in leaf_types if n == 1 else ():
            out.add((t, ()))
        if n >= 2:
            for t in inner_types:
                for f in forests(n - 1):
                    out.add((t, f))
        return out

    seen = {}
    for n in range(max_edges + 1):
        for f in forests(n):
            T = TypedTree.from_nested(_unfreeze(f))
            seen.setdefault(T.code, T)
    return [seen[c] for c in sorted(seen)]


def _unfreeze(f):
    return [(t, _unfreeze(c)) for t, c in f]


def random_tree(rng: random.Random, max_edges, leaf_types, inner_types, min_edges=1):
    n = rng.randint(min_edges, max_edges)
    parent = [-1]
    for k in range(1, n + 1):
        parent.append(rng.randrange(k))
    has_child = {p for p in parent[1:]}
    nested = {i: [] for i in range(n + 1)}
    for k in range(n, 0, -1):
        t = rng.choice(inner_types) if k in has_child else rng.choice(leaf_types)
        nested[parent[k]].append((t, nested[k]))
    return TypedTree.from_nested(nested[0])


# ------------------------------------------------------------------ basic geometry


def edge_list(T):
    return list(range(1, len(T.parent)))


def is_above(T, low, high):
    """True if edge ``high`` lies strictly above edge ``low``."""
    x = T.parent[high]
    while x != 0:
        if x == low:
            return True
        x = T.parent[x]
    return False


def root_path_nodes(T, node):
    out = [node]
    while node != 0:
        node = T.parent[node]
        out.append(node)
    return out


def span_edges(T, edges):
    edges = list(edges)
    if not edges:
        return frozenset()
    paths = [root_path_nodes(T, T.parent[e]) for e in edges]
    common = set(paths[0]).intersection(*map(set, paths[1:]))
    lca = next(n for n in paths[0] if n in common)
    out = set()
    for e in edges:
        x = e
        while x != lca:
            out.add(x)
            x = T.parent[x]
    return frozenset(out)


def edge_components(T, edges):
    edges = list(edges)
    parent = {e: e for e in edges}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for a in edges:
        for b in edges:
            if a < b and ({a, T.parent[a]} & {b, T.parent[b]}):
                parent[find(a)] = find(b)
    groups = {}
    for e in edges:
        groups.setdefault(find(e), set()).add(e)
    return [frozenset(g) for g in groups.values()]


def classes(T, alphabet):
    return {e: alphabet[T.etype[e]].cls for e in edge_list(T)}


# ------------------------------------------------------------------ forests and cuts


def negative_forests_oracle(T, alphabet):
    cls = classes(T, alphabet)
    es = edge_list(T)
    out = set()
    for mask in range(1 << len(es)):
        S = [e for i, e in enumerate(es) if mask >> i & 1]
        ok = True
        for comp in edge_components(T, S):
            noise = [e for e in comp if cls[e] == MINUS]
            if not noise or span_edges(T, noise) != comp:
                ok = False
                break
        if ok:
            out.add(frozenset(S))
    return out


def negative_subtrees_oracle(T, alphabet):
    cls = classes(T, alphabet)
    noise = [e for e in edge_list(T) if cls[e] == MINUS]
    out = set()
    for mask in range(1, 1 << len(noise)):
        out.add(span_edges(T, [e for i, e in enumerate(noise) if mask >> i & 1]))
    return out


def positive_cuts_oracle(T, alphabet):
    cls = classes(T, alphabet)
    cand = [e for e in edge_list(T) if cls[e] in (PLUS, ZERO_CLASS)]
    zero = {e for e in edge_list(T) if cls[e] == ZERO_CLASS}
    out = set()
    for mask in range(1 << len(cand)):
        E = {e for i, e in enumerate(cand) if mask >> i & 1}
        if not zero <= E:
            continue
        if any(is_above(T, a, b) for a in E for b in E if a != b):
            continue
        out.add(frozenset(E))
    return out


def upper_closure(T, E):
    return {x for x in edge_list(T) if any(x == e or is_above(T, e, x) for e in E)}


def sector_regularity_oracle(T, alphabet):
    best = None
    for E in positive_cuts_oracle(T, alphabet):
        gone = upper_closure(T, E)
        deg = sum((alphabet.degree(T.etype[x]) for x in edge_list(T) if x not in gone), ZERO)
        best = deg if best is None else min(best, deg)
    return best


# ------------------------------------------------------------------ symmetry


def _kids(T, n):
    return [c for c in edge_list(T) if T.parent[c] == n]


def automorphisms(T):
    """Type-preserving root-preserving automorphisms, by explicit child matching."""

    def match(u, v):
        ku, kv = _kids(T, u), _kids(T, v)
        if len(ku) != len(kv):
            return 0
        total = 0
        for perm in permutations(kv):
            count = 1
            for a, b in zip(ku, perm):
                if T.etype[a] != T.etype[b]:
                    count = 0
                    break
                count *= match(a, b)
                if not count:
                    break
            total += count
        return total

    return match(0, 0)


def isomorphic(T1, T2):
    def match(u, v):
        ku, kv = _kids(T1, u), _kids(T2, v)
        if len(ku) != len(kv):
            return False
        for perm in permutations(kv):
            if all(T1.etype[a] == T2.etype[b] and match(a, b) for a, b in zip(ku, perm)):
                return True
        return False

    return match(0, 0)


def plane_embeddings(T):
    """Number of distinct plane trees obtained by ordering children at every node."""

    def orders(n):
        out = set()
        kids = _kids(T, n)
        sub = {c: orders(c) for c in kids}
        for perm in permutations(kids):
            for choice in product(*(sorted(sub[c]) for c in perm)):
                out.add("(" + ",".join(T.etype[c] + s for c, s in zip(perm, choice)) + ")")
        return out

    return len(orders(0))


# ------------------------------------------------------------------ second homogeneity


def second_homogeneity_oracle(T, alphabet, delta0):
    memo = {}

    def norm(S):
        key = S.code
        if key in memo:
            return memo[key]
        memo[key] = value = _norm(S)
        return value

    def _norm(S):
        cls = classes(S, alphabet)
        roots = _kids(S, 0)
        if not roots:
            return ZERO
        if len(roots) == 1:
            e = roots[0]
            if len(edge_list(S)) == 1 and cls[e] == ZERO_CLASS:
                return delta0
            if len(edge_list(S)) == 1 and cls[e] == MINUS:
                return INFINITY
            inner = _above(S, e)
            k = alphabet.degree(S.etype[e])
            inner_deg = sum((alphabet.degree(inner.etype[x]) for x in edge_list(inner)), ZERO)
            m = norm(inner)
            if m.is_infinite() and k + inner_deg < ZERO:
                return INFINITY
            return min(k + m, delta0)
        best = INFINITY
        taus = [frozenset()] + [
            t for t in negative_subtrees_oracle(S, alphabet) if 0 in {S.parent[x] for x in t}
        ]
        for tau in taus:
            tau_nodes = {0} | set(tau)
            hanging = [x for x in edge_list(S) if x not in tau and S.parent[x] in tau_nodes]
            base = sum((alphabet.degree(S.etype[x]) for x in tau), ZERO)
            G = [_planted(S, x) for x in hanging]
            alphas = [sector_regularity_oracle(g, alphabet) for g in G]
            for j, g in enumerate(G):
                rest = sum((a for i, a in enumerate(alphas) if i != j), ZERO)
                best = min(best, base + rest + norm(g))
        return best

    return norm(T)


def _above(T, e):
    def rec(n):
        return [(T.etype[c], rec(c)) for c in _kids(T, n)]

    return TypedTree.from_nested(rec(e))


def _planted(T, e):
    return TypedTree.from_nested([(T.etype[e], _above(T, e).nested())])


# ------------------------------------------------------------------ potential depth


def longest_chain_oracle(T, hat, alphabet):
    """Length of the longest hat = F_m << ... << F_0 = T over all negative forests."""
    hat = frozenset(hat)
    full = frozenset(edge_list(T))
    forests = [F for F in negative_forests_oracle(T, alphabet) if hat <= F]
    hat_parts = set(edge_components(T, hat))

    def prec(F1, F2):
        if not F1 < F2:
            return False
        parts2 = edge_components(T, F2)
        for A in edge_components(T, F1):
            B = next(b for b in parts2 if A <= b)
            if A == B and B not in hat_parts:
                return False
        return True

    @lru_cache(maxsize=None)
    def longest_from(F):
        if F == full:
            return 0
        best = None
        for G in forests:
            if prec(F, G):
                sub = longest_from(G)
                if sub is not None and (best is None or sub + 1 > best):
                    best = sub + 1
        return best

    if hat == full:
        return 0
    return longest_from(hat)
