"""Power-counting conditions on labelled kernel multigraphs.

A graph has a distinguished vertex ``star``, a set of distinguished
vertices (test-function points, always containing ``star``), and directed
edges carrying a singularity degree ``a`` and a recentring flag ``r``.
Parallel edges between the same ordered pair are merged by adding labels.
The three families of inequalities are checked over every vertex subset.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

from .homogeneity import Homogeneity, ZERO

MAX_VERTICES = 16


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    tail: str
    head: str
    a: Homogeneity
    r: int = 0


@dataclass(frozen=True)
class LabelledGraph:
    vertices: tuple
    star: str
    distinguished: frozenset
    edges: tuple
    scaling_norm: Homogeneity
    name: str = ""

    @classmethod
    def build(cls, vertices, star, distinguished, edges, scaling_norm, name=""):
        es = []
        for e in edges:
            if isinstance(e, Edge):
                es.append(e)
            else:
                tail, head, a, *rest = e
                es.append(Edge(tail, head, Homogeneity.coerce(a), int(rest[0]) if rest else 0))
        g = cls(
            tuple(vertices),
            star,
            frozenset(distinguished) | {star},
            tuple(es),
            Homogeneity.coerce(scaling_norm),
            name,
        )
        return g.validate()

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        try:
            edges = [(e["from"], e["to"], str(e["a"]), int(e.get("r", 0))) for e in data["edges"]]
            return cls.build(
                data["vertices"],
                data["star"],
                data.get("distinguished", []),
                edges,
                str(data["scaling_norm"]),
                data.get("name", ""),
            )
        except KeyError as exc:
            raise GraphError(f"missing field {exc}") from exc

    def to_json(self):
        return {
            "name": self.name,
            "scaling_norm": str(self.scaling_norm),
            "star": self.star,
            "distinguished": sorted(self.distinguished - {self.star}),
            "vertices": list(self.vertices),
            "edges": [{"from": e.tail, "to": e.head, "a": str(e.a), "r": e.r} for e in self.edges],
        }

    def validate(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise GraphError("duplicate vertex names")
        if len(vs) > MAX_VERTICES:
            raise GraphError(f"{len(vs)} vertices exceed the exhaustive-search limit {MAX_VERTICES}")
        if self.star not in vs or not self.distinguished <= vs:
            raise GraphError("distinguished vertices must be vertices")
        recentred = {}
        for e in self.edges:
            if e.tail not in vs or e.head not in vs:
                raise GraphError(f"edge {e.tail}->{e.head} uses an unknown vertex")
            if e.tail == e.head:
                raise GraphError(f"self-loop at {e.tail}")
            if e.a < ZERO:
                raise GraphError(f"edge {e.tail}->{e.head} has negative degree {e.a}")
            if e.r not in (0, 1):
                raise GraphError(f"edge {e.tail}->{e.head}: r must be 0 or 1")
            if e.r:
                if self.star in (e.tail, e.head) or {e.tail, e.head} <= self.distinguished:
                    raise GraphError(
                        f"edge {e.tail}->{e.head} touches the base point or joins test points and must have r = 0"
                    )
                pair = frozenset((e.tail, e.head))
                if pair in recentred:
                    raise GraphError(f"more than one recentred edge between {e.tail} and {e.head}")
                recentred[pair] = e
        return self

    def merged(self):
        """{(tail, head): (sum of a, sum of r)} over ordered pairs carrying at least one edge."""
        out = {}
        for e in self.edges:
            a, r = out.get((e.tail, e.head), (ZERO, 0))
            out[(e.tail, e.head)] = (a + e.a, r + e.r)
        return out


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    condition: int | None = None
    subset: tuple = ()
    lhs: Homogeneity | None = None
    rhs: Homogeneity | None = None

    @property
    def slack(self):
        """Margin by which the failing inequality misses (<= 0 on a violation)."""
        if self.lhs is None:
            return None
        return (self.rhs - self.lhs) if self.condition in (1, 2) else (self.lhs - self.rhs)

    def to_json(self):
        if self.passed:
            return {"passed": True}
        return {
            "passed": False,
            "condition": self.condition,
            "subset": list(self.subset),
            "lhs": str(self.lhs),
            "rhs": str(self.rhs),
            "slack": str(self.slack),
        }


def _subsets(items, min_size):
    items = sorted(items)
    for k in range(min_size, len(items) + 1):
        for c in combinations(items, k):
            yield frozenset(c)


def _classify(hat, S):
    """Split merged edges by their relation to S: internal, outgoing, incoming."""
    internal, out_, in_ = [], [], []
    for (t, h), lab in hat.items():
        ti, hi = t in S, h in S
        if ti and hi:
            internal.append(lab)
        elif ti:
            out_.append(lab)
        elif hi:
            in_.append(lab)
    return internal, out_, in_


def condition_values(G: LabelledGraph, S, which: int):
    """(lhs, rhs) of inequality family ``which`` on the vertex subset S."""
    hat = G.merged()
    internal, out_, in_ = _classify(hat, set(S))
    s = G.scaling_norm
    n = len(S)
    if which == 1:
        return sum((a for a, _ in internal), ZERO), s * (n - 1)
    if which == 2:
        lhs = sum((a for a, _ in internal), ZERO)
        lhs = lhs + sum((a + (r - 1) for a, r in out_ if r > 0), ZERO)
        lhs = lhs - sum((Homogeneity(r) for _, r in in_ if r > 0), ZERO)
        return lhs, s * (n - 1)
    if which == 3:
        lhs = sum((a for a, _ in internal), ZERO)
        lhs = lhs + sum((a for a, _ in out_), ZERO)
        lhs = lhs + sum((a for a, r in in_ if r == 0), ZERO)
        lhs = lhs + sum((Homogeneity(r) for _, r in out_ if r > 0), ZERO)
        lhs = lhs - sum((Homogeneity(r - 1) for _, r in in_ if r > 0), ZERO)
        return lhs, s * n
    raise ValueError(which)


def check_assumptions(G: LabelledGraph) -> CheckResult:
    """Exhaustive check; returns the first violation in (family, size, name) order."""
    V = set(G.vertices)
    inner = V - {G.star}
    free = V - G.distinguished
    families = (
        (1, _subsets(inner, 2), lambda lhs, rhs: lhs < rhs),
        (2, (S | {G.star} for S in _subsets(inner, 1)), lambda lhs, rhs: lhs < rhs),
        (3, _subsets(free, 1), lambda lhs, rhs: lhs > rhs),
    )
    for which, subsets, ok in families:
        for S in subsets:
            lhs, rhs = condition_values(G, S, which)
            if not ok(lhs, rhs):
                return CheckResult(False, which, tuple(sorted(S)), lhs, rhs)
    return CheckResult(True)


def bound_exponent(G: LabelledGraph) -> Homogeneity:
    """|s| * |V minus distinguished| - sum of edge degrees."""
    free = len(set(G.vertices) - G.distinguished)
    return G.scaling_norm * free - sum((e.a for e in G.edges), ZERO)
