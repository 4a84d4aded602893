"""Coloured negative trees and the renormalisation group with scalar characters.

A character assigns a scalar (a ``Fraction`` or a ``Poly``) to every
coloured tree (T, F) where T is a negative tree and F one of its negative
forests.  Coloured trees are keyed by a canonical code in which coloured
edges carry a ``!`` suffix.  The value on a forest is the product over its
connected components.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .polynomial import Poly
from .rules import Alphabet
from .subforests import components, extract, negative_forests, noise_edges, span
from .trees import TypedTree

MARK = "!"
ONE = Fraction(1)
ZERO_S = Fraction(0)


class GroupError(ValueError):
    pass


def coloured_code(T: TypedTree, F) -> str:
    F = frozenset(F)

    def rec(n):
        return [(T.etype[c] + (MARK if c in F else ""), rec(c)) for c in T.children(n)]

    return TypedTree.from_nested(rec(0)).code


def all_edges(T: TypedTree):
    return frozenset(T.edges())


def is_negative_tree(T: TypedTree, alphabet: Alphabet) -> bool:
    noise = noise_edges(T, alphabet)
    return bool(noise) and span(T, noise) == all_edges(T)


@dataclass(frozen=True)
class ColoredTree:
    """A tree with an integer nesting depth on each edge (index 0 unused)."""

    tree: TypedTree
    depth: tuple

    @classmethod
    def uncoloured(cls, T):
        return cls(T, (0,) * T.n_nodes)

    def level(self, n=1) -> frozenset:
        return frozenset(e for e in self.tree.edges() if self.depth[e] >= n)

    def node_depth(self, v):
        inc = [self.depth[c] for c in self.tree.children(v)]
        if v != 0:
            inc.append(self.depth[v])
        return max(inc, default=0)

    def max_depth(self):
        return max(self.depth[1:], default=0)

    def is_admissible(self, alphabet):
        forests = {ref.edges for ref in negative_forests(self.tree, alphabet)}
        return all(self.level(n) in forests for n in range(1, self.max_depth() + 1))

    def code(self):
        return coloured_code(self.tree, self.level(1))


def color_union(ct: ColoredTree, F) -> ColoredTree:
    """Colour the forest F one level deeper; the current coloured region must lie in F."""
    F = frozenset(F)
    if not ct.level(1) <= F:
        raise GroupError("the coloured forest is not contained in F")
    depth = list(ct.depth)
    for e in F:
        depth[e] += 1
    return ColoredTree(ct.tree, tuple(depth))


def precedes(T: TypedTree, hat, F1, F2) -> bool:
    """F1 << F2 relative to the coloured tree (T, hat)."""
    F1, F2 = frozenset(F1), frozenset(F2)
    if not (F1 < F2):
        return False
    hat_parts = set(components(T, hat))
    parts2 = components(T, F2)
    for A in components(T, F1):
        B = next(b for b in parts2 if A <= b)
        if A == B and B not in hat_parts:
            return False
    return True


def maximal_chain(T: TypedTree, hat, alphabet: Alphabet):
    """A longest chain hat = F0 << F1 << ... << T of negative forests containing hat."""
    hat = frozenset(hat)
    full = all_edges(T)
    if hat == full:
        return [hat]
    forests = [ref.edges for ref in negative_forests(T, alphabet) if hat <= ref.edges]
    forests.sort(key=len)
    best = {}
    prev = {}
    for F in forests:
        if F == hat:
            best[F] = 0
            continue
        cands = [(best[G] + 1, G) for G in forests if G in best and precedes(T, hat, G, F)]
        if cands:
            best[F], prev[F] = max(cands, key=lambda c: (c[0], -len(c[1]), sorted(c[1])))
    if full not in best:
        raise GroupError(f"{T.code} is not a negative tree")
    chain = [full]
    while chain[-1] != hat:
        chain.append(prev[chain[-1]])
    return chain[::-1]


def potential_depth(T: TypedTree, hat, alphabet: Alphabet) -> int:
    return len(maximal_chain(T, hat, alphabet)) - 1


def deepest_colouring(T: TypedTree, alphabet: Alphabet) -> ColoredTree:
    """Colour T along a longest chain of negative forests, innermost forest deepest."""
    ct = ColoredTree.uncoloured(T)
    for F in maximal_chain(T, (), alphabet)[1:]:
        ct = color_union(ct, F)
    return ct


@lru_cache(maxsize=100_000)
def _component_key(T: TypedTree, comp: frozenset, hat: frozenset):
    sub, mapping = extract(T, comp)
    inner = frozenset(mapping[e] for e in hat & comp)
    return sub, inner, coloured_code(sub, inner)


class Character:
    """Sparse scalar character; unstored partially coloured keys default to 0."""

    def __init__(self, values=None, name="g"):
        self.values = dict(values or {})
        self.name = name

    def value(self, T: TypedTree, hat):
        hat = frozenset(hat)
        if hat == all_edges(T):
            return ONE
        return self.values.get(coloured_code(T, hat), ZERO_S)

    def on_forest(self, T: TypedTree, F, hat):
        """Value on the forest F of T coloured by hat (a subforest of F)."""
        out = ONE
        for comp in components(T, F):
            sub, inner, key = _component_key(T, comp, frozenset(hat))
            if inner == all_edges(sub):
                continue
            out = out * self.values.get(key, ZERO_S)
            if not out:
                return out
        return out

    def __eq__(self, other):
        if not isinstance(other, Character):
            return NotImplemented
        keys = set(self.values) | set(other.values)
        return all(self.values.get(k, ZERO_S) == other.values.get(k, ZERO_S) for k in keys)

    def to_json(self):
        return [[k, str(v)] for k, v in sorted(self.values.items()) if v]


class Universe:
    """All coloured trees (T, F) over a family of negative trees closed under components.

    For each key the expansion terms (F, component keys of (F, hat)) are
    computed once, so products of characters reduce to dictionary lookups.
    """

    def __init__(self, trees, alphabet: Alphabet):
        self.alphabet = alphabet
        found = {}
        todo = list(trees)
        while todo:
            T = todo.pop()
            if T.code in found:
                continue
            if not is_negative_tree(T, alphabet):
                raise GroupError(f"{T.code} is not spanned by its noise edges")
            found[T.code] = T
            for ref in negative_forests(T, alphabet):
                for comp in components(T, ref.edges):
                    sub, _ = extract(T, comp)
                    if sub.code not in found:
                        todo.append(sub)
        self.trees = [found[c] for c in sorted(found)]
        self.keys = {}
        for T in self.trees:
            for ref in negative_forests(T, alphabet):
                self.keys.setdefault(coloured_code(T, ref.edges), (T, ref.edges))
        self._terms = {}
        self._inner = {}

    def forests(self, T):
        return [ref.edges for ref in negative_forests(T, self.alphabet)]

    def items(self):
        return sorted(self.keys.items())

    def partial_keys(self):
        return [k for k, (T, hat) in self.items() if hat != all_edges(T)]

    def terms(self, key):
        """[(key of (T, F) or None when F = T, F, [keys of the components of (F, hat)])]."""
        if key not in self._terms:
            T, hat = self.keys[key]
            full = all_edges(T)
            out = []
            for F in self.forests(T):
                if not hat <= F:
                    continue
                parts = []
                for comp in components(T, F):
                    sub, inner, ck = _component_key(T, comp, hat)
                    if inner != all_edges(sub):
                        parts.append(ck)
                left = None if F == full else coloured_code(T, F)
                out.append((left, F, tuple(parts)))
            self._terms[key] = out
        return self._terms[key]


    def inner_terms(self, key):
        """Terms with hat << F << T, the ones entering the inverse recursion."""
        if key not in self._inner:
            T, hat = self.keys[key]
            full = all_edges(T)
            self._inner[key] = [
                (left, parts)
                for left, F, parts in self.terms(key)
                if left is not None
                and F != hat
                and precedes(T, hat, hat, F)
                and precedes(T, hat, F, full)
            ]
        return self._inner[key]


def unit() -> Character:
    return Character({}, name="e")


def _product(g: Character, parts):
    out = ONE
    for k in parts:
        out = out * g.values.get(k, ZERO_S)
        if not out:
            break
    return out


def star(f: Character, g: Character, universe: Universe) -> Character:
    out = {}
    for key in universe.partial_keys():
        total = ZERO_S
        for left, _F, parts in universe.terms(key):
            lv = ONE if left is None else f.values.get(left, ZERO_S)
            if not lv:
                continue
            total = total + lv * _product(g, parts)
        if total:
            out[key] = total
    return Character(out, name=f"{f.name}*{g.name}")


def inverse(g: Character, universe: Universe) -> Character:
    memo = {}

    def A(key):
        if key in memo:
            return memo[key]
        total = -g.values.get(key, ZERO_S)
        for left, parts in universe.inner_terms(key):
            a = A(left)
            if a:
                total = total - a * _product(g, parts)
        memo[key] = total
        return total

    out = {}
    for key in universe.partial_keys():
        v = A(key)
        if v:
            out[key] = v
    return Character(out, name=f"inv({g.name})")


def random_character(universe: Universe, rng: random.Random, name="g", span_=5) -> Character:
    out = {}
    for key, (T, hat) in universe.items():
        if hat == all_edges(T):
            continue
        out[key] = Fraction(rng.randint(-span_, span_), rng.randint(1, 4))
    return Character(out, name=name)


def constants_character(values: dict, name="g") -> Character:
    """Character with g(tau) = values[tau] on uncoloured trees and 0 on partial colourings."""
    out = {}
    for T, v in values.items():
        out[coloured_code(T, ())] = Poly.coerce(v)
    return Character(out, name=name)
