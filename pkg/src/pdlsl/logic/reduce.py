"""Capture-avoiding substitution and beta reduction of definition applications."""

from __future__ import annotations

import re
from typing import Mapping

from ..errors import ReductionError
from .syntax import (
    And, Apply, At, Atomic, Box, Cfg, Dir, Lambda, Move, Not, Prop, Sort, Star,
    Top, Touch, Trill, Var, free_vars,
)


def _fresh(name: str, avoid: set[str]) -> str:
    base = re.sub(r"\d+$", "", name) or name
    k = 1
    while f"{base}{k}" in avoid:
        k += 1
    return f"{base}{k}"


def _term(t, mapping):
    if isinstance(t, Var) and t.name in mapping:
        value = mapping[t.name]
        if not isinstance(value, (str, Var)):
            raise ReductionError(f"variable {t.name!r} in term position bound to a formula")
        return value
    return t


def _subst_atom(atom, mapping):
    if isinstance(atom, Dir):
        return Dir(_term(atom.b1, mapping), _term(atom.d, mapping), _term(atom.b2, mapping))
    if isinstance(atom, Cfg):
        return Cfg(_term(atom.b, mapping), _term(atom.c, mapping))
    if isinstance(atom, At):
        return At(_term(atom.b, mapping), _term(atom.p, mapping))
    if isinstance(atom, Touch):
        return Touch(_term(atom.b1, mapping), _term(atom.b2, mapping))
    raise TypeError(atom)


def subst_program(p, mapping):
    if isinstance(p, Atomic):
        a = p.action
        if isinstance(a, Move):
            return Atomic(Move(_term(a.b, mapping), _term(a.d, mapping)))
        if isinstance(a, Trill):
            return Atomic(Trill(_term(a.b, mapping)))
        return p
    if isinstance(p, Star):
        return Star(subst_program(p.arg, mapping))
    return type(p)(subst_program(p.left, mapping), subst_program(p.right, mapping))


def substitute(e, mapping: Mapping[str, object]):
    """Simultaneously replace free variables by name, renaming binders as needed.

    Raises ValueError when a substitution produces an ill-formed atom such as
    ``touch(RH,RH)``.
    """
    if not mapping:
        return e
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, (str, Top)):
        return e
    if isinstance(e, Prop):
        return Prop(_subst_atom(e.atom, mapping))
    if isinstance(e, Not):
        return Not(substitute(e.arg, mapping))
    if isinstance(e, And):
        return And(substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Box):
        return Box(subst_program(e.program, mapping), substitute(e.body, mapping))
    if isinstance(e, Apply):
        return Apply(e.callee, tuple(substitute(a, mapping) for a in e.args))
    if isinstance(e, Lambda):
        bound = {p.name for p in e.params}
        inner = {k: v for k, v in mapping.items() if k not in bound}
        body_free = {v.name for v in free_vars(e.body)}
        inner = {k: v for k, v in inner.items() if k in body_free}
        if not inner:
            return e
        incoming = set()
        for value in inner.values():
            if not isinstance(value, str):
                incoming |= {v.name for v in free_vars(value)}
        avoid = body_free | incoming | set(inner) | bound
        params = []
        renames = {}
        for p in e.params:
            if p.name in incoming:
                fresh = Var(_fresh(p.name, avoid), p.sort)
                avoid.add(fresh.name)
                renames[p.name] = fresh
                params.append(fresh)
            else:
                params.append(p)
        body = substitute(e.body, renames) if renames else e.body
        return Lambda(tuple(params), substitute(body, inner))
    raise TypeError(f"not a syntax node: {e!r}")


class _Reducer:
    def __init__(self, defs: Mapping[str, object], catalog=None):
        self.defs = defs
        self.catalog = catalog
        self.memo: dict[str, object] = {}
        self.active: list[str] = []

    def definition(self, name: str):
        if name in self.memo:
            return self.memo[name]
        if name not in self.defs:
            raise ReductionError(f"unknown definition {name!r}")
        if name in self.active:
            cycle = " -> ".join(self.active[self.active.index(name):] + [name])
            raise ReductionError(f"cyclic definitions: {cycle}")
        self.active.append(name)
        try:
            value = self.reduce(self.defs[name])
        finally:
            self.active.pop()
        self.memo[name] = value
        return value

    def check_sort(self, callee: str, param: Var, arg):
        where = f"argument {param.name!r} of {callee!r}"
        if param.sort is Sort.POSTURE:
            if isinstance(arg, str) or (isinstance(arg, Var) and arg.sort is not Sort.POSTURE):
                raise ReductionError(f"{where} must be a posture formula")
            return
        if isinstance(arg, Var):
            if arg.sort is not param.sort:
                raise ReductionError(f"{where} has sort {param.sort}, got {arg.sort}")
        elif isinstance(arg, str):
            if self.catalog is not None and not self.catalog.has(param.sort, arg):
                raise ReductionError(f"{where} has sort {param.sort}, {arg!r} is not one")
        else:
            raise ReductionError(f"{where} has sort {param.sort}, got a formula")

    def reduce(self, e):
        if isinstance(e, Apply):
            value = self.definition(e.callee)
            args = tuple(a if isinstance(a, (str, Var)) else self.reduce(a) for a in e.args)
            params = value.params if isinstance(value, Lambda) else ()
            if len(params) != len(args):
                raise ReductionError(
                    f"{e.callee!r} expects {len(params)} argument(s), got {len(args)}")
            if not params:
                return value
            for p, a in zip(params, args):
                self.check_sort(e.callee, p, a)
            try:
                return substitute(value.body, {p.name: a for p, a in zip(params, args)})
            except ValueError as exc:
                raise ReductionError(f"applying {e.callee!r}: {exc}") from None
        if isinstance(e, Lambda):
            return Lambda(e.params, self.reduce(e.body))
        if isinstance(e, Not):
            return Not(self.reduce(e.arg))
        if isinstance(e, And):
            return And(self.reduce(e.left), self.reduce(e.right))
        if isinstance(e, Box):
            return Box(e.program, self.reduce(e.body))
        return e


def beta_reduce(e, defs: Mapping[str, object] | None = None, catalog=None):
    """Inline every application of a named definition.

    ``defs`` maps names to (unreduced) values.  The result contains no
    :class:`Apply` node; free variables may remain.
    """
    return _Reducer(defs or {}, catalog).reduce(e)


def check_acyclic(defs: Mapping[str, object]) -> None:
    reducer = _Reducer(defs)
    for name in defs:
        reducer.definition(name)
