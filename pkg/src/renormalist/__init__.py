"""Decorated trees, renormalisation characters and counterterms for subcritical SPDEs."""

from .homogeneity import Homogeneity
from .equation import EquationSpec, KernelSlot, NoiseSlot, Term
from .rules import spde_to_rule
from .trees import TypedTree, parse_code, generate_trees, solution_trees
from .subforests import counterterm_trees
from .renorm_eq import renormalized_equation

__version__ = "0.1.0"

__all__ = [
    "Homogeneity",
    "EquationSpec",
    "KernelSlot",
    "NoiseSlot",
    "Term",
    "spde_to_rule",
    "TypedTree",
    "parse_code",
    "generate_trees",
    "solution_trees",
    "counterterm_trees",
    "renormalized_equation",
]
