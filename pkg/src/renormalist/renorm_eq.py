"""Counterterms of a renormalised equation for a constants character.

For a negative tree tau the local nonlinearity D_tau F is the product, over
every node with something above it, of the partial derivative of F in the
indeterminates carried by the edges above that node, divided by the tree
symmetry factor.  The renormalised right-hand side is
F + sum_tau <D_tau F, g(tau)>.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from .equation import EquationError, EquationSpec
from .rules import PLUS, ZERO_CLASS, spde_to_rule
from .trees import TypedTree, parse_code, symmetry_factors

__all__ = [
    "EquationSpec",
    "RenormError",
    "nonlinearity",
    "formal_derivative",
    "counterterm_for_tree",
    "RenormalizedEquation",
    "renormalized_equation",
]


class RenormError(ValueError):
    pass


def _symbols(spec: EquationSpec):
    return {v: sp.Symbol(v) for v in spec.variables()}


def nonlinearity(spec: EquationSpec) -> sp.Expr:
    """F as a sympy expression; tensor coefficients become commuting symbols."""
    spec.validate()
    sym = _symbols(spec)
    total = sp.Integer(0)
    for t in spec.terms:
        prod = sp.Mul(*[sym[v] for v in t.factors])
        if t.kind == "scalar":
            coeff = sp.Rational(t.scalar_value())
        elif t.kind == "function":
            coeff = sp.Function(t.coefficient)(sym[t.argument or spec.default_argument()])
        else:
            coeff = sp.Symbol(t.coefficient)
        total += coeff * prod
    return total


def formal_derivative(F: sp.Expr, sigma: dict, spec: EquationSpec) -> sp.Expr:
    """Iterated partial derivative of F; sigma maps indeterminate names to orders."""
    sym = _symbols(spec)
    noise = {n.variable for n in spec.noises}
    out = F
    for v, k in sorted(sigma.items()):
        if v not in sym:
            raise EquationError(f"unknown indeterminate {v!r}")
        if k < 0:
            raise EquationError(f"negative derivative order for {v!r}")
        if v in noise and k > spec.noise_multilinearity:
            return sp.Integer(0)
        if k:
            out = sp.diff(out, sym[v], k)
    return out


def _node_sigma(T: TypedTree, n: int, spec: EquationSpec):
    sigma = {}
    for c in T.children(n):
        v = spec.variable_of(T.etype[c])
        sigma[v] = sigma.get(v, 0) + 1
    return sigma


def tree_factor(T: TypedTree, spec: EquationSpec, alphabet=None) -> sp.Expr:
    """D_tau F: product of node derivatives of F divided by the symmetry factor."""
    if alphabet is not None:
        for e in T.edges():
            if alphabet[T.etype[e]].cls == ZERO_CLASS:
                raise RenormError(f"{T.code} carries a jet or coefficient edge")
    F = nonlinearity(spec)
    per_node, S = symmetry_factors(T)
    out = sp.Integer(1)
    for n in range(T.n_nodes):
        if not T.children(n):
            continue
        try:
            sigma = _node_sigma(T, n, spec)
        except EquationError as exc:
            raise RenormError(f"{T.code}: {exc}") from exc
        out *= formal_derivative(F, sigma, spec)
        if out == 0:
            return sp.Integer(0)
    return sp.expand(out / S)


def apply_contractions(expr: sp.Expr, contractions: dict) -> sp.Expr:
    """Replace products tensor*partner by the declared scalar, monomial by monomial."""
    expr = sp.expand(expr)
    if not contractions:
        return expr
    out = sp.Integer(0)
    for term in sp.Add.make_args(expr):
        powers = term.as_powers_dict()
        for (tensor, partner), result in sorted(contractions.items()):
            a, b = sp.Symbol(tensor), sp.Symbol(partner)
            k = min(powers.get(a, 0), powers.get(b, 0))
            if k:
                term = term / (a * b) ** k * sp.Symbol(result) ** k
                powers = term.as_powers_dict()
        out += term
    return sp.expand(out)


def counterterm_for_tree(T: TypedTree, spec: EquationSpec, value, contractions=None, alphabet=None):
    """<D_tau F, g(tau)> for one tree, with value = g(tau) as a sympy expression."""
    value = sp.sympify(value)
    if value == 0:
        return sp.Integer(0)
    return apply_contractions(tree_factor(T, spec, alphabet) * value, contractions or {})


def pretty(expr: sp.Expr) -> str:
    """Text form with f'(u) style names for derivatives of coefficient functions."""
    reps = {}
    for d in expr.atoms(sp.Derivative):
        order = sum(k for _, k in d.variable_count)
        name = d.expr.func.__name__ + "'" * order
        reps[d] = sp.Function(name)(*d.expr.args)
    return sp.sstr(expr.xreplace(reps), order="lex") if reps else sp.sstr(expr, order="lex")


def _sorted_terms(expr):
    return sorted(sp.Add.make_args(sp.expand(expr)), key=sp.default_sort_key) if expr != 0 else []


@dataclass
class RenormalizedEquation:
    base: sp.Expr
    counterterms: list = field(default_factory=list)
    zero_trees: list = field(default_factory=list)

    @property
    def total(self) -> sp.Expr:
        return sp.expand(self.base + sum((c for _, c in self.counterterms), sp.Integer(0)))

    @property
    def correction(self) -> sp.Expr:
        return sp.expand(sum((c for _, c in self.counterterms), sp.Integer(0)))

    def terms(self):
        return _sorted_terms(self.total)

    def __str__(self):
        return pretty(self.total)

    def to_json(self):
        return {
            "equation": pretty(self.total),
            "terms": [pretty(t) for t in self.terms()],
            "counterterms": [{"tree": code, "term": pretty(c)} for code, c in self.counterterms],
            "vanishing": list(self.zero_trees),
        }


def _values_by_code(values):
    from .group import MARK, Character

    if isinstance(values, Character):
        out = {}
        for key, v in values.values.items():
            if MARK not in key:
                out[key] = sp.sympify(str(v))
        return out
    out = {}
    for k, v in values.items():
        code = k.code if isinstance(k, TypedTree) else parse_code(k).code
        out[code] = sp.sympify(v)
    return out


def renormalized_equation(spec: EquationSpec, values, contractions=None, negatives=None):
    """F + sum_tau <D_tau F, g(tau)> for a constants character.

    ``values`` maps tree codes (or trees) to expressions, or is a Character
    whose uncoloured entries are read.  If ``negatives`` is given, every
    tree with a nonzero value must belong to it.
    """
    alphabet, _ = spde_to_rule(spec)
    allowed = None if negatives is None else {T.code for T in negatives}
    eq = RenormalizedEquation(nonlinearity(spec))
    for code, value in sorted(_values_by_code(values).items()):
        if value == 0:
            continue
        if allowed is not None and code not in allowed:
            raise RenormError(f"{code} is not a counterterm tree of this equation")
        T = parse_code(code)
        for e in T.edges():
            if T.etype[e] not in alphabet.edges:
                raise RenormError(f"{code}: edge type {T.etype[e]!r} is not in the equation")
        kids = T.children(0)
        if len(kids) == 1 and alphabet[T.etype[kids[0]]].cls == PLUS:
            raise RenormError(f"{code} is planted by a kernel and cannot index a counterterm")
        term = counterterm_for_tree(T, spec, value, contractions, alphabet)
        if term == 0:
            eq.zero_trees.append(code)
        else:
            eq.counterterms.append((code, term))
    return eq
