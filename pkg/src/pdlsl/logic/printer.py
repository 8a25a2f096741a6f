"""Canonical text rendering; output parses back to the same tree."""

from __future__ import annotations

from .syntax import (
    And, Apply, At, Atomic, Box, Cfg, Dir, Intersect, Lambda, Move, Not, Prop,
    Seq, Skip, Star, Top, Touch, Trill, Union, Var, as_implication,
)

# formula binding levels
_EXPR, _CONJ, _UNARY = 0, 1, 2
# program binding levels
_PUNION, _PINTER, _PSEQ, _PPOST = 0, 1, 2, 3


def _term(t) -> str:
    return t.name if isinstance(t, Var) else str(t)


def print_atom(atom) -> str:
    if isinstance(atom, Dir):
        return f"dir({_term(atom.b1)},{_term(atom.d)},{_term(atom.b2)})"
    if isinstance(atom, Cfg):
        return f"cfg({_term(atom.b)},{_term(atom.c)})"
    if isinstance(atom, At):
        return f"at({_term(atom.b)},{_term(atom.p)})"
    if isinstance(atom, Touch):
        return f"touch({_term(atom.b1)},{_term(atom.b2)})"
    raise TypeError(f"not an atom: {atom!r}")


def print_action(action) -> str:
    if isinstance(action, Move):
        return f"move({_term(action.b)},{_term(action.d)})"
    if isinstance(action, Trill):
        return f"trill({_term(action.b)})"
    if isinstance(action, Skip):
        return "skip"
    raise TypeError(f"not an action: {action!r}")


def print_program(p, level: int = _PUNION) -> str:
    if isinstance(p, Atomic):
        return print_action(p.action)
    if isinstance(p, Star):
        return print_program(p.arg, _PPOST) + "*"
    if isinstance(p, Union):
        text, own = f"{print_program(p.left, _PINTER)} + {print_program(p.right, _PUNION)}", _PUNION
    elif isinstance(p, Intersect):
        text, own = f"{print_program(p.left, _PSEQ)} & {print_program(p.right, _PINTER)}", _PINTER
    elif isinstance(p, Seq):
        text, own = f"{print_program(p.left, _PPOST)};{print_program(p.right, _PSEQ)}", _PSEQ
    else:
        raise TypeError(f"not a program: {p!r}")
    return f"({text})" if own < level else text


def _arg(a) -> str:
    if isinstance(a, Var):
        return a.name
    if isinstance(a, str):
        return str(a)
    return print_formula(a)


def print_formula(e, level: int = _EXPR) -> str:
    """Render a formula or template expression in the ASCII syntax."""
    if isinstance(e, Top):
        return "true"
    if isinstance(e, Prop):
        return print_atom(e.atom)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Not):
        imp = as_implication(e)
        if imp is None:
            return "!" + print_formula(e.arg, _UNARY)
        text = f"{print_formula(imp[0], _CONJ)} -> {print_formula(imp[1], _EXPR)}"
        return f"({text})" if level > _EXPR else text
    if isinstance(e, Box):
        return f"[{print_program(e.program)}] {print_formula(e.body, _UNARY)}"
    if isinstance(e, Lambda):
        params = ", ".join(f"{p.name}:{p.sort.value}" for p in e.params)
        return f"\\{params} . ( {print_formula(e.body)} )"
    if isinstance(e, Apply):
        if not e.args:
            return e.callee
        return f"{e.callee}({', '.join(_arg(a) for a in e.args)})"
    if isinstance(e, And):
        text = f"{print_formula(e.left, _UNARY)} & {print_formula(e.right, _CONJ)}"
        return f"({text})" if level > _CONJ else text
    raise TypeError(f"not a formula: {e!r}")
