"""PDL_SL syntax, parsing, printing and lambda-template reduction."""

from .catalog import Catalog, default_catalog, load_catalog
from .parser import Definition, parse_definitions, parse_formula, parse_program
from .printer import print_action, print_atom, print_formula, print_program
from .reduce import beta_reduce, check_acyclic, substitute
from .syntax import (
    ARROWS, DIRECTIONS, FALSE, And, Apply, At, Atomic, Box, Cfg, Diamond, Dir,
    Direction, Implies, Intersect, Lambda, Move, Not, Or, Prop, Seq, Skip, Sort,
    Star, Top, Touch, Trill, Union, Var, as_implication, atoms_of, conjunction,
    expand_moves, free_vars, is_formula, union_of,
)

__all__ = [
    "ARROWS", "DIRECTIONS", "FALSE", "And", "Apply", "At", "Atomic", "Box", "Catalog",
    "Cfg", "Definition", "Diamond", "Dir", "Direction", "Implies", "Intersect",
    "Lambda", "Move", "Not", "Or", "Prop", "Seq", "Skip", "Sort", "Star", "Top",
    "Touch", "Trill", "Union", "Var", "as_implication", "atoms_of", "beta_reduce",
    "check_acyclic", "conjunction", "default_catalog", "expand_moves", "free_vars",
    "is_formula", "load_catalog", "parse_definitions", "parse_formula",
    "parse_program", "print_action", "print_atom", "print_formula", "print_program",
    "substitute", "union_of",
]
