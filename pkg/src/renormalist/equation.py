"""Declarative description of a single-component polynomial SPDE right-hand side."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .homogeneity import Homogeneity, ZERO

TERM_KINDS = ("scalar", "function", "tensor")


class EquationError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSlot:
    """A kernel edge type together with the indeterminate it feeds (u, Du, ...)."""

    edge: str
    variable: str
    degree: Homogeneity
    jet: str
    jet_weight: Homogeneity = ZERO


@dataclass(frozen=True)
class NoiseSlot:
    edge: str
    variable: str
    degree: Homogeneity


@dataclass(frozen=True)
class Term:
    """coefficient * product of factors.

    ``kind`` says how the coefficient is read: a rational number (scalar),
    a smooth function of ``argument`` (function) or a constant tensor
    contracted against the factors (tensor).
    """

    coefficient: str
    kind: str
    factors: tuple
    argument: str | None = None

    def scalar_value(self) -> Fraction:
        return Fraction(self.coefficient)


@dataclass(frozen=True)
class EquationSpec:
    component: str
    kernels: tuple
    noises: tuple
    terms: tuple
    taylor_order: int = 2
    noise_multilinearity: int = 1
    name: str = ""
    extra: dict = field(default_factory=dict, compare=False, hash=False)

    def variables(self):
        return [k.variable for k in self.kernels] + [n.variable for n in self.noises]

    def edge_of(self, variable: str) -> str:
        for slot in (*self.kernels, *self.noises):
            if slot.variable == variable:
                return slot.edge
        raise EquationError(f"unknown indeterminate {variable!r}")

    def variable_of(self, edge: str) -> str:
        for slot in (*self.kernels, *self.noises):
            if slot.edge == edge:
                return slot.variable
        raise EquationError(f"edge type {edge!r} is not a slot of the equation")

    def default_argument(self) -> str:
        return self.kernels[0].variable

    def validate(self):
        if not self.kernels:
            raise EquationError("an equation needs at least one kernel slot")
        names = self.variables()
        if len(set(names)) != len(names):
            raise EquationError("indeterminate names must be distinct")
        noise_vars = {n.variable for n in self.noises}
        for t in self.terms:
            if t.kind not in TERM_KINDS:
                raise EquationError(f"unknown term kind {t.kind!r}")
            for v in t.factors:
                if v not in names:
                    raise EquationError(
                        f"term {t.coefficient}: factor {v!r} is not a declared indeterminate "
                        "(only polynomial nonlinearities are supported)"
                    )
            for v in noise_vars:
                if t.factors.count(v) > self.noise_multilinearity:
                    raise EquationError(
                        f"noise {v!r} enters term {t.coefficient} with power "
                        f"{t.factors.count(v)} > {self.noise_multilinearity}"
                    )
            if t.kind == "scalar":
                try:
                    t.scalar_value()
                except (ValueError, ZeroDivisionError) as exc:
                    raise EquationError(f"bad scalar coefficient {t.coefficient!r}") from exc
            if t.kind == "function":
                arg = t.argument or self.default_argument()
                if arg not in [k.variable for k in self.kernels]:
                    raise EquationError(f"function argument {arg!r} is not a kernel slot")
        return self
