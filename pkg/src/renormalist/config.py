"""TOML configuration: an equation (or an explicit rule table) plus run settings.

Schema (``schema_version = 1``)::

    schema_version = 1
    name = "phi43"

    [equation]                     # equation mode
    component = "u"
    taylor_order = 2
    noise_multilinearity = 1
    [[equation.kernels]]           # edge, variable, degree, jet, jet_weight
    [[equation.noises]]            # edge, variable, degree
    [[equation.terms]]             # coefficient, kind, factors, argument

    [labels]                       # rule-table mode: label = "dual"
    [[edge_types]]                 # id, class, degree, upper/lower | label | index, iota, jet_weight
    [rule]                         # edge id = [[edge ids of a node type], ...]

    [cutoffs]                      # rhs, solution, delta0, target, node_budget
    [renormalisation]              # contractions = [{tensor, partner, result}]
    [renormalisation.constants]    # "tree code" = "sympy expression"
    [counterterms]                 # equation, eps_grid, n, strict

Degrees are strings such as ``"-5/2-kappa"``; kappa stays symbolic.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import tomli
import tomli_w

from .equation import EquationError, EquationSpec, KernelSlot, NoiseSlot, Term
from .homogeneity import Homogeneity, ZERO
from .rules import (
    EDGE_CLASSES,
    MINUS,
    PLUS,
    Alphabet,
    EdgeType,
    LabelSet,
    Rule,
    RuleError,
    complete_rule,
    multi_index,
    normalize_rule,
    spde_to_rule,
)

SCHEMA_VERSION = 1
DATA_DIR = Path(__file__).parent / "data"
FIXTURES = ("gpam", "phi43", "phi34")


class ConfigError(ValueError):
    """Bad configuration; ``path`` names the offending key, ``line`` its source line."""

    def __init__(self, message, path="", line=None):
        self.path = path
        self.line = line
        where = path + (f" (line {line})" if line else "")
        super().__init__(f"{where}: {message}" if where else message)


class ConfigParseError(ConfigError):
    pass


@dataclass(frozen=True)
class Cutoffs:
    rhs: Homogeneity = Homogeneity(0, 1)
    solution: Homogeneity = Homogeneity(1)
    delta0: Homogeneity = Homogeneity(1)
    target: str | None = None
    node_budget: int = 200_000


@dataclass(frozen=True)
class RenormSettings:
    constants: tuple = ()  # ((tree code, expression), ...) sorted by code
    contractions: tuple = ()  # ((tensor, partner, result), ...)

    def values(self):
        return dict(self.constants)

    def contraction_map(self):
        return {(t, p): r for t, p, r in self.contractions}


@dataclass(frozen=True)
class CountertermSettings:
    equation: str | None = None
    eps_grid: tuple = ()
    n: int = 4
    strict: bool = False


@dataclass
class Config:
    name: str
    alphabet: Alphabet
    rule: Rule
    spec: EquationSpec | None = None
    cutoffs: Cutoffs = field(default_factory=Cutoffs)
    renorm: RenormSettings = field(default_factory=RenormSettings)
    counterterms: CountertermSettings = field(default_factory=CountertermSettings)
    schema_version: int = SCHEMA_VERSION

    @property
    def target(self) -> str:
        if self.cutoffs.target:
            return self.cutoffs.target
        if self.spec is not None:
            return self.spec.kernels[0].edge
        plus = self.alphabet.ids(PLUS)
        if not plus:
            raise ConfigError("no kernel edge type to generate trees for", "cutoffs.target")
        return plus[0]


# ------------------------------------------------------------------ eps grids

_POW = re.compile(r"^\s*2\^(-?\d+)\s*$")
_RANGE = re.compile(r"^\s*2\^(-?\d+)\s*\.\.\s*(?:2\^)?(-?\d+)\s*$")


def parse_eps(item) -> float:
    if isinstance(item, (int, float)):
        return float(item)
    m = _POW.match(str(item))
    if m:
        return 2.0 ** int(m.group(1))
    return float(item)


def parse_eps_grid(spec) -> tuple:
    """``"2^-3..2^-8"``, ``"0.1,0.05"`` or a list of such items, returned as floats."""
    items = spec if isinstance(spec, (list, tuple)) else [spec]
    out = []
    for item in items:
        for part in str(item).split(",") if isinstance(item, str) else [item]:
            m = _RANGE.match(str(part))
            if m:
                a, b = int(m.group(1)), int(m.group(2))
                step = 1 if b >= a else -1
                out.extend(2.0**k for k in range(a, b + step, step))
            else:
                try:
                    out.append(parse_eps(part))
                except ValueError as exc:
                    raise ConfigError(f"bad eps value {part!r}", "counterterms.eps_grid") from exc
    for e in out:
        if not 0 < e <= 1:
            raise ConfigError(f"eps = {e} is outside (0, 1]", "counterterms.eps_grid")
    return tuple(out)


def _eps_text(e: float) -> str:
    k = round(-math.log2(e))
    return f"2^-{k}" if 2.0**-k == e else repr(e)


# ------------------------------------------------------------------ loading


class _Reader:
    """Typed field access with key paths and best-effort source lines in errors."""

    def __init__(self, text: str):
        self.lines = text.splitlines()

    def line_of(self, path):
        parts = [p for p in path if isinstance(p, str)]
        if not parts:
            return None
        key = parts[-1]
        header = None
        nth = 0
        if len(path) >= 2:
            tables = [p for p in path[:-1] if isinstance(p, str)]
            header = ".".join(tables)
            nth = next((p for p in reversed(path[:-1]) if isinstance(p, int)), 0)
        start, seen = 0, -1
        if header:
            pat = re.compile(r"^\s*\[\[?\s*" + re.escape(header) + r"\s*\]\]?\s*$")
            for i, ln in enumerate(self.lines):
                if pat.match(ln):
                    seen += 1
                    if seen == nth:
                        start = i
                        break
        key_pat = re.compile(r'^\s*"?' + re.escape(key) + r'"?\s*=')
        for i in range(start, len(self.lines)):
            if key_pat.match(self.lines[i]):
                return i + 1
        return start + 1 if header and seen >= 0 else None

    def fail(self, path, message):
        text = ".".join(str(p) if isinstance(p, str) else f"[{p}]" for p in path).replace(".[", "[")
        raise ConfigError(message, text, self.line_of(path))

    def get(self, table, key, path, kind=str, default=...):
        if key not in table:
            if default is ...:
                self.fail(path + (key,), "missing required key")
            return default
        value = table[key]
        if kind is str and not isinstance(value, str):
            self.fail(path + (key,), f"expected a string, got {type(value).__name__}")
        if kind is int and (not isinstance(value, int) or isinstance(value, bool)):
            self.fail(path + (key,), f"expected an integer, got {type(value).__name__}")
        if kind is list and not isinstance(value, list):
            self.fail(path + (key,), f"expected an array, got {type(value).__name__}")
        if kind is dict and not isinstance(value, dict):
            self.fail(path + (key,), f"expected a table, got {type(value).__name__}")
        if kind is bool and not isinstance(value, bool):
            self.fail(path + (key,), f"expected a boolean, got {type(value).__name__}")
        return value

    def degree(self, table, key, path, default=...):
        raw = self.get(table, key, path, default=default)
        if isinstance(raw, Homogeneity):
            return raw
        try:
            return Homogeneity.parse(str(raw))
        except ValueError as exc:
            self.fail(path + (key,), str(exc))


def _load_equation(r: _Reader, eq: dict):
    p = ("equation",)
    kernels = []
    for i, k in enumerate(r.get(eq, "kernels", p, list)):
        q = p + ("kernels", i)
        kernels.append(
            KernelSlot(
                r.get(k, "edge", q),
                r.get(k, "variable", q),
                r.degree(k, "degree", q),
                r.get(k, "jet", q),
                r.degree(k, "jet_weight", q, default=ZERO),
            )
        )
    noises = []
    for i, n in enumerate(r.get(eq, "noises", p, list, default=[])):
        q = p + ("noises", i)
        noises.append(NoiseSlot(r.get(n, "edge", q), r.get(n, "variable", q), r.degree(n, "degree", q)))
    terms = []
    for i, t in enumerate(r.get(eq, "terms", p, list)):
        q = p + ("terms", i)
        factors = r.get(t, "factors", q, list)
        if not all(isinstance(f, str) for f in factors):
            r.fail(q + ("factors",), "factors must be strings")
        terms.append(
            Term(
                str(r.get(t, "coefficient", q, object)),
                r.get(t, "kind", q, default="scalar"),
                tuple(factors),
                r.get(t, "argument", q, default=None),
            )
        )
    spec = EquationSpec(
        r.get(eq, "component", p),
        tuple(kernels),
        tuple(noises),
        tuple(terms),
        taylor_order=r.get(eq, "taylor_order", p, int, default=2),
        noise_multilinearity=r.get(eq, "noise_multilinearity", p, int, default=1),
        name=r.get(eq, "name", p, default=""),
    )
    return spec


def _load_rule_table(r: _Reader, doc: dict):
    labels_raw = r.get(doc, "labels", (), dict)
    try:
        labels = LabelSet({str(a): str(b) for a, b in labels_raw.items()})
    except RuleError as exc:
        r.fail(("labels",), str(exc))
    edges = {}
    for i, e in enumerate(r.get(doc, "edge_types", (), list)):
        q = ("edge_types", i)
        eid = r.get(e, "id", q)
        cls = r.get(e, "class", q)
        if cls not in EDGE_CLASSES:
            r.fail(q + ("class",), f"class must be one of {', '.join(EDGE_CLASSES)}")
        if cls == PLUS:
            index = (r.get(e, "upper", q), r.get(e, "lower", q))
        elif cls == MINUS:
            index = r.get(e, "label", q)
        else:
            raw = r.get(e, "index", q, dict, default={})
            index = multi_index({str(k): int(v) for k, v in raw.items()})
        if eid in edges:
            r.fail(q + ("id",), f"duplicate edge type {eid!r}")
        edges[eid] = EdgeType(
            eid,
            cls,
            r.degree(e, "degree", q),
            index,
            iota=r.get(e, "iota", q, default=None),
            jet_weight=r.degree(e, "jet_weight", q, default=ZERO),
        )
    try:
        alphabet = Alphabet(labels, edges).validate()
    except RuleError as exc:
        r.fail(("edge_types",), str(exc))
    table = r.get(doc, "rule", (), dict)
    mapping = {}
    for eid, nus in table.items():
        if eid not in edges:
            r.fail(("rule", eid), f"unknown edge type {eid!r}")
        if not isinstance(nus, list) or not all(isinstance(nu, list) for nu in nus):
            r.fail(("rule", eid), "expected an array of node types (arrays of edge ids)")
        for nu in nus:
            for x in nu:
                if x not in edges:
                    r.fail(("rule", eid), f"unknown edge type {x!r} in a node type")
        mapping[eid] = [tuple(nu) for nu in nus]
    try:
        rule = complete_rule(Rule(mapping), alphabet)
        if r.get(doc, "normalize", (), bool, default=True):
            rule = normalize_rule(rule, alphabet)
    except RuleError as exc:
        r.fail(("rule",), str(exc))
    return alphabet, rule


def loads(text: str, name: str = "") -> Config:
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigParseError(str(exc), line=line) from exc
    r = _Reader(text)
    version = r.get(doc, "schema_version", (), int)
    if version != SCHEMA_VERSION:
        r.fail(("schema_version",), f"unsupported schema version {version} (expected {SCHEMA_VERSION})")
    known = {"schema_version", "name", "equation", "labels", "edge_types", "rule", "normalize",
             "cutoffs", "renormalisation", "counterterms"}
    for key in doc:
        if key not in known:
            r.fail((key,), "unknown top-level key")
    cfg_name = r.get(doc, "name", (), default=name)
    has_eq = "equation" in doc
    has_rule = "rule" in doc or "edge_types" in doc
    if has_eq == has_rule:
        raise ConfigError("give exactly one of [equation] or an explicit rule table ([labels], [[edge_types]], [rule])")
    spec = None
    if has_eq:
        spec = _load_equation(r, r.get(doc, "equation", (), dict))
        if not spec.name:
            spec = EquationSpec(spec.component, spec.kernels, spec.noises, spec.terms,
                                spec.taylor_order, spec.noise_multilinearity, name=cfg_name)
        try:
            alphabet, rule = spde_to_rule(spec)
        except (EquationError, RuleError) as exc:
            r.fail(("equation",), str(exc))
    else:
        alphabet, rule = _load_rule_table(r, doc)

    c = r.get(doc, "cutoffs", (), dict, default={})
    p = ("cutoffs",)
    cutoffs = Cutoffs(
        rhs=r.degree(c, "rhs", p, default=Cutoffs.rhs),
        solution=r.degree(c, "solution", p, default=Cutoffs.solution),
        delta0=r.degree(c, "delta0", p, default=Cutoffs.delta0),
        target=r.get(c, "target", p, default=None),
        node_budget=r.get(c, "node_budget", p, int, default=200_000),
    )
    if cutoffs.target is not None and (cutoffs.target not in alphabet or alphabet[cutoffs.target].cls != PLUS):
        r.fail(p + ("target",), f"{cutoffs.target!r} is not a kernel edge type")

    rn = r.get(doc, "renormalisation", (), dict, default={})
    p = ("renormalisation",)
    consts = r.get(rn, "constants", p, dict, default={})
    for k, v in consts.items():
        if not isinstance(v, str):
            r.fail(p + ("constants", k), "constant values must be strings")
    contractions = []
    for i, item in enumerate(r.get(rn, "contractions", p, list, default=[])):
        q = p + ("contractions", i)
        contractions.append((r.get(item, "tensor", q), r.get(item, "partner", q), r.get(item, "result", q)))
    renorm = RenormSettings(tuple(sorted(consts.items())), tuple(contractions))

    ct = r.get(doc, "counterterms", (), dict, default={})
    p = ("counterterms",)
    grid = ct.get("eps_grid", ())
    counterterms = CountertermSettings(
        equation=r.get(ct, "equation", p, default=None),
        eps_grid=parse_eps_grid(grid) if grid else (),
        n=r.get(ct, "n", p, int, default=4),
        strict=r.get(ct, "strict", p, bool, default=False),
    )
    return Config(cfg_name, alphabet, rule, spec, cutoffs, renorm, counterterms, version)


def load(path) -> Config:
    path = Path(path)
    return loads(path.read_text(encoding="utf-8"), name=path.stem)


def fixture_path(name: str) -> Path:
    return DATA_DIR / f"{name}.toml"


def resolve(arg: str) -> Config:
    """A path to a TOML file or the name of a bundled fixture."""
    p = Path(arg)
    if p.exists():
        return load(p)
    if fixture_path(arg).exists():
        return load(fixture_path(arg))
    raise FileNotFoundError(f"no such config file or bundled fixture: {arg}")


# ------------------------------------------------------------------ serialising


def to_dict(cfg: Config) -> dict:
    doc = {"schema_version": cfg.schema_version, "name": cfg.name}
    if cfg.spec is not None:
        s = cfg.spec
        eq = {"component": s.component, "taylor_order": s.taylor_order,
              "noise_multilinearity": s.noise_multilinearity}
        if s.name and s.name != cfg.name:
            eq["name"] = s.name
        eq["kernels"] = []
        for k in s.kernels:
            row = {"edge": k.edge, "variable": k.variable, "degree": str(k.degree), "jet": k.jet}
            if k.jet_weight != ZERO:
                row["jet_weight"] = str(k.jet_weight)
            eq["kernels"].append(row)
        eq["noises"] = [{"edge": n.edge, "variable": n.variable, "degree": str(n.degree)} for n in s.noises]
        eq["terms"] = []
        for t in s.terms:
            row = {"coefficient": t.coefficient, "kind": t.kind, "factors": list(t.factors)}
            if t.argument:
                row["argument"] = t.argument
            eq["terms"].append(row)
        doc["equation"] = eq
    else:
        doc["labels"] = cfg.alphabet.labels.pairs()
        rows = []
        for eid in sorted(cfg.alphabet.edges):
            t = cfg.alphabet.edges[eid]
            row = {"id": t.id, "class": t.cls, "degree": str(t.degree)}
            if t.cls == PLUS:
                row["upper"], row["lower"] = t.index
            elif t.cls == MINUS:
                row["label"] = t.index
            elif t.index:
                row["index"] = {k: v for k, v in t.index}
            if t.iota:
                row["iota"] = t.iota
            if t.jet_weight != ZERO:
                row["jet_weight"] = str(t.jet_weight)
            rows.append(row)
        doc["edge_types"] = rows
        doc["rule"] = {e: [list(nu) for nu in sorted(ns)] for e, ns in cfg.rule.items()
                       if cfg.alphabet[e].cls == PLUS}
    c = cfg.cutoffs
    cut = {"rhs": str(c.rhs), "solution": str(c.solution), "delta0": str(c.delta0)}
    if c.target:
        cut["target"] = c.target
    if c.node_budget != 200_000:
        cut["node_budget"] = c.node_budget
    doc["cutoffs"] = cut
    if cfg.renorm.constants or cfg.renorm.contractions:
        rn = {}
        if cfg.renorm.contractions:
            rn["contractions"] = [{"tensor": t, "partner": p, "result": r} for t, p, r in cfg.renorm.contractions]
        rn["constants"] = dict(cfg.renorm.constants)
        doc["renormalisation"] = rn
    ct = cfg.counterterms
    if ct.equation or ct.eps_grid:
        out = {}
        if ct.equation:
            out["equation"] = ct.equation
        if ct.eps_grid:
            out["eps_grid"] = [_eps_text(e) for e in ct.eps_grid]
        out["n"] = ct.n
        if ct.strict:
            out["strict"] = True
        doc["counterterms"] = out
    return doc


def dumps(cfg: Config) -> str:
    return tomli_w.dumps(to_dict(cfg))


def same_config(a: Config, b: Config) -> bool:
    return (
        a.name == b.name
        and a.spec == b.spec
        and a.alphabet == b.alphabet
        and a.rule == b.rule
        and a.cutoffs == b.cutoffs
        and a.renorm == b.renorm
        and a.counterterms == b.counterterms
    )
