"""Abstract syntax for PDL_SL formulas, action programs and lambda templates.

All nodes are frozen dataclasses, so structural equality and hashing come for
free.  Ground constants (articulators, places, configurations) are plain
strings; directions are :class:`Direction` members, which compare equal to
their string names.  Any term position may instead hold a :class:`Var`.

Only the five primitive formula forms are ever stored.  ``Or``, ``Implies``,
``Diamond`` and ``FALSE`` are construction helpers that expand immediately.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator, Union as _U


def _node(cls):
    """Frozen dataclass whose hash is computed once; trees are used heavily as dict keys."""
    cls = dataclass(frozen=True)(cls)
    field_hash = cls.__hash__

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = field_hash(self)
            object.__setattr__(self, "_hash", h)
        return h

    cls.__hash__ = __hash__
    return cls


class Direction(str, enum.Enum):
    """Eight compass directions in the image plane, annotator's viewpoint."""

    E = "E"
    NE = "NE"
    N = "N"
    NW = "NW"
    W = "W"
    SW = "SW"
    S = "S"
    SE = "SE"

    def __str__(self) -> str:
        return self.value

    @property
    def opposite(self) -> Direction:
        i = _DIRECTION_ORDER.index(self)
        return _DIRECTION_ORDER[(i + 4) % 8]

    @property
    def angle(self) -> float:
        """Center of the sector in degrees, counter-clockwise from E."""
        return 45.0 * _DIRECTION_ORDER.index(self)

    @classmethod
    def from_vector(cls, dx: float, dy: float) -> Direction | None:
        """Sector of an image-plane vector (y axis pointing down); None for zero."""
        if dx == 0 and dy == 0:
            return None
        angle = math.degrees(math.atan2(-dy, dx)) % 360.0
        return _DIRECTION_ORDER[int(math.floor((angle + 22.5) / 45.0)) % 8]


_DIRECTION_ORDER = (
    Direction.E, Direction.NE, Direction.N, Direction.NW,
    Direction.W, Direction.SW, Direction.S, Direction.SE,
)
DIRECTIONS: tuple[Direction, ...] = _DIRECTION_ORDER

# Arrow glyphs used in the notation; the two-headed squiggle is trill.
ARROWS = {
    "←": Direction.W, "→": Direction.E, "↑": Direction.N, "↓": Direction.S,
    "↗": Direction.NE, "↘": Direction.SE, "↙": Direction.SW, "↖": Direction.NW,
}
TRILL_ARROW = "↔"


class Sort(str, enum.Enum):
    CONFIG = "Config"
    ARTICULATOR = "Articulator"
    DIRECTION = "Direction"
    PLACE = "Place"
    POSTURE = "Posture"

    def __str__(self) -> str:
        return self.value


@_node
class Var:
    name: str
    sort: Sort

    def __str__(self) -> str:
        return self.name


Term = _U[str, Direction, Var]


def _term_key(t: Term) -> str:
    return t.name if isinstance(t, Var) else str(t)


def _same_term(a: Term, b: Term) -> bool:
    if isinstance(a, Var) or isinstance(b, Var):
        return a == b
    return str(a) == str(b)


# -- atomic propositions ------------------------------------------------------


@_node
class Dir:
    """``b1`` lies in direction ``d`` relative to ``b2``."""

    b1: Term
    d: Term
    b2: Term

    def __post_init__(self):
        if isinstance(self.d, str) and not isinstance(self.d, (Direction, Var)):
            object.__setattr__(self, "d", Direction(self.d))
        if _same_term(self.b1, self.b2):
            raise ValueError(f"dir atom needs two distinct articulators, got {self.b1}")

    @property
    def articulators(self) -> tuple[Term, ...]:
        return (self.b1, self.b2)


@_node
class Cfg:
    b: Term
    c: Term

    @property
    def articulators(self) -> tuple[Term, ...]:
        return (self.b,)


@_node
class At:
    b: Term
    p: Term

    @property
    def articulators(self) -> tuple[Term, ...]:
        return (self.b,)


@_node
class Touch:
    """Symmetric contact; arguments are stored sorted by id."""

    b1: Term
    b2: Term

    def __post_init__(self):
        if _same_term(self.b1, self.b2):
            raise ValueError(f"touch atom needs two distinct articulators, got {self.b1}")
        if _term_key(self.b2) < _term_key(self.b1):
            a, b = self.b1, self.b2
            object.__setattr__(self, "b1", b)
            object.__setattr__(self, "b2", a)

    @property
    def articulators(self) -> tuple[Term, ...]:
        return (self.b1, self.b2)


AtomProp = _U[Dir, Cfg, At, Touch]


# -- atomic actions -----------------------------------------------------------


@_node
class Move:
    b: Term
    d: Term

    def __post_init__(self):
        if isinstance(self.d, str) and not isinstance(self.d, (Direction, Var)):
            object.__setattr__(self, "d", Direction(self.d))


@_node
class Trill:
    b: Term


@_node
class Skip:
    pass


AtomAction = _U[Move, Trill, Skip]


# -- programs -----------------------------------------------------------------


@_node
class Atomic:
    action: AtomAction


@_node
class Intersect:
    left: "Program"
    right: "Program"


@_node
class Union:
    left: "Program"
    right: "Program"


@_node
class Seq:
    left: "Program"
    right: "Program"


@_node
class Star:
    arg: "Program"


Program = _U[Atomic, Intersect, Union, Seq, Star]


# -- formulas and templates ---------------------------------------------------


@_node
class Top:
    pass


@_node
class Prop:
    atom: AtomProp


@_node
class Not:
    arg: "Expr"


@_node
class And:
    left: "Expr"
    right: "Expr"


@_node
class Box:
    program: Program
    body: "Expr"


@_node
class Lambda:
    params: tuple[Var, ...]
    body: "Expr"

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        names = [p.name for p in self.params]
        if not names:
            raise ValueError("lambda needs at least one parameter")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate lambda parameter in {names}")


@_node
class Apply:
    """Application of a named definition to terms or formula arguments."""

    callee: str
    args: tuple["Arg", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


Formula = _U[Top, Prop, Not, And, Box]
# A template expression may additionally contain posture variables in formula
# position, lambdas and applications.
Expr = _U[Top, Prop, Not, And, Box, Var, Lambda, Apply]
Arg = _U[str, Direction, Var, Expr]

FORMULA_NODES = (Top, Prop, Not, And, Box)
ATOM_TYPES = (Dir, Cfg, At, Touch)
PROGRAM_NODES = (Atomic, Intersect, Union, Seq, Star)


def Or(a: Expr, b: Expr) -> Not:
    return Not(And(Not(a), Not(b)))


def Implies(a: Expr, b: Expr) -> Not:
    return Not(And(a, Not(b)))


def Diamond(program: Program, body: Expr) -> Not:
    return Not(Box(program, Not(body)))


FALSE = Not(Top())


def conjunction(parts) -> Expr:
    """Right-nested conjunction; Top for an empty sequence."""
    parts = list(parts)
    if not parts:
        return Top()
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def union_of(programs) -> Program:
    programs = list(programs)
    if not programs:
        raise ValueError("empty union")
    out = programs[-1]
    for p in reversed(programs[:-1]):
        out = Union(p, out)
    return out


def expand_moves(b: Term, dirs=DIRECTIONS) -> Program:
    """Program matching any single movement of ``b``: all directed moves, then trill."""
    wanted = {Direction(str(d)) for d in dirs}
    if not wanted:
        raise ValueError("expand_moves needs at least one direction")
    moves = [Atomic(Move(b, d)) for d in DIRECTIONS if d in wanted]
    return union_of(moves + [Atomic(Trill(b))])


def as_implication(e: Expr) -> tuple[Expr, Expr] | None:
    """Split ``!(a & !b)`` into ``(a, b)``; None if ``e`` is not of that shape."""
    if isinstance(e, Not) and isinstance(e.arg, And) and isinstance(e.arg.right, Not):
        return e.arg.left, e.arg.right.arg
    return None


# -- traversal helpers --------------------------------------------------------


def atom_terms(atom) -> tuple[Term, ...]:
    if isinstance(atom, Dir):
        return (atom.b1, atom.d, atom.b2)
    if isinstance(atom, Cfg):
        return (atom.b, atom.c)
    if isinstance(atom, At):
        return (atom.b, atom.p)
    if isinstance(atom, Touch):
        return (atom.b1, atom.b2)
    if isinstance(atom, Move):
        return (atom.b, atom.d)
    if isinstance(atom, Trill):
        return (atom.b,)
    return ()


def iter_programs(p: Program) -> Iterator[Program]:
    yield p
    if isinstance(p, (Intersect, Union, Seq)):
        yield from iter_programs(p.left)
        yield from iter_programs(p.right)
    elif isinstance(p, Star):
        yield from iter_programs(p.arg)


def iter_nodes(e) -> Iterator:
    """Pre-order walk over formula/template nodes (programs not descended)."""
    yield e
    if isinstance(e, Not):
        yield from iter_nodes(e.arg)
    elif isinstance(e, And):
        yield from iter_nodes(e.left)
        yield from iter_nodes(e.right)
    elif isinstance(e, Box):
        yield from iter_nodes(e.body)
    elif isinstance(e, Lambda):
        yield from iter_nodes(e.body)
    elif isinstance(e, Apply):
        for a in e.args:
            if not isinstance(a, (str, Var)):
                yield from iter_nodes(a)


def free_vars(e) -> frozenset[Var]:
    """Free variables of an expression, program, atom or term."""
    if isinstance(e, Var):
        return frozenset([e])
    if isinstance(e, str) or e is None:
        return frozenset()
    if isinstance(e, (Top, Skip)):
        return frozenset()
    if isinstance(e, Prop):
        return free_vars(e.atom)
    if isinstance(e, ATOM_TYPES) or isinstance(e, (Move, Trill)):
        return frozenset(t for t in atom_terms(e) if isinstance(t, Var))
    if isinstance(e, Atomic):
        return free_vars(e.action)
    if isinstance(e, (Intersect, Union, Seq, And)):
        return free_vars(e.left) | free_vars(e.right)
    if isinstance(e, (Star,)):
        return free_vars(e.arg)
    if isinstance(e, Not):
        return free_vars(e.arg)
    if isinstance(e, Box):
        return free_vars(e.program) | free_vars(e.body)
    if isinstance(e, Lambda):
        bound = {p.name for p in e.params}
        return frozenset(v for v in free_vars(e.body) if v.name not in bound)
    if isinstance(e, Apply):
        out: frozenset[Var] = frozenset()
        for a in e.args:
            out |= free_vars(a)
        return out
    raise TypeError(f"not a syntax node: {e!r}")


def is_formula(e) -> bool:
    """True iff ``e`` is a ground PDL_SL formula (no vars, lambdas or applications)."""
    for node in iter_nodes(e):
        if not isinstance(node, FORMULA_NODES):
            return False
        if isinstance(node, Prop) and free_vars(node):
            return False
        if isinstance(node, Box) and free_vars(node.program):
            return False
    return True


def atoms_of(e) -> set:
    """All atomic propositions occurring in a formula."""
    return {n.atom for n in iter_nodes(e) if isinstance(n, Prop)}


def programs_of(e) -> list[Program]:
    return [n.program for n in iter_nodes(e) if isinstance(n, Box)]
