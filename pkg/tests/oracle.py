"""Reference semantics and random generators used by the tests.

The oracle walks programs path by path and combines truth values as the
numbers 0, 0.5 and 1 (min for conjunction, 1 - x for negation).  It shares
nothing with the matrix-based checker beyond the AST classes.
"""

from __future__ import annotations

import random

from pdlsl.logic.catalog import Catalog
from pdlsl.logic.syntax import (
    DIRECTIONS, And, Apply, At, Atomic, Box, Cfg, Dir, Intersect, Lambda, Move,
    Not, Prop, Seq, Skip, Sort, Star, Top, Touch, Trill, Union, Var,
)
from pdlsl.model import Edge, Lts, StateNode

SMALL = Catalog(
    articulators=("RH", "LH"),
    places=("HEAD", "TORSE"),
    configs=("L_FORM", "FIST_FORM"),
    directions=tuple(DIRECTIONS),
)

TRUE, UNKNOWN, FALSE = 1.0, 0.5, 0.0


# -- oracle -------------------------------------------------------------------


def reach(m: Lts, p, s: int, _memo=None) -> set[int]:
    """States reachable from ``s`` by running ``p``, found by exploring paths."""
    memo = {} if _memo is None else _memo
    key = (id(p), s)
    if key not in memo:
        memo[key] = _reach(m, p, s, memo)
    return memo[key]


def _reach(m: Lts, p, s: int, memo) -> set[int]:
    def reach_(q, t):
        return reach(m, q, t, memo)

    if isinstance(p, Atomic):
        out = set()
        for e in m.edges:
            if e.src == s and (isinstance(p.action, Skip) or p.action in e.actions):
                out.add(e.dst)
        return out
    if isinstance(p, Union):
        return reach_(p.left, s) | reach_(p.right, s)
    if isinstance(p, Intersect):
        return reach_(p.left, s) & reach_(p.right, s)
    if isinstance(p, Seq):
        out = set()
        for t in reach_(p.left, s):
            out |= reach_(p.right, t)
        return out
    if isinstance(p, Star):
        seen = {s}
        frontier = {s}
        for _ in range(len(m.states) + 1):
            nxt = set()
            for t in frontier:
                nxt |= reach_(p.arg, t)
            frontier = nxt - seen
            if not frontier:
                break
            seen |= frontier
        return seen
    raise TypeError(p)


def values(m: Lts, f, _memo=None) -> list[float]:
    """Truth value of ``f`` at every state, as 0, 0.5 or 1."""
    memo = {} if _memo is None else _memo
    n = len(m.states)
    if isinstance(f, Top):
        return [TRUE] * n
    if isinstance(f, Prop):
        out = []
        for st in m.states:
            out.append(TRUE if f.atom in st.props_true else FALSE if f.atom in st.props_false
                       else UNKNOWN)
        return out
    if isinstance(f, Not):
        return [1.0 - v for v in values(m, f.arg, memo)]
    if isinstance(f, And):
        return [min(a, b) for a, b in zip(values(m, f.left, memo), values(m, f.right, memo))]
    if isinstance(f, Box):
        body = values(m, f.body, memo)
        return [min([body[t] for t in reach(m, f.program, s, memo)], default=TRUE)
                for s in range(n)]
    raise TypeError(f)


def value(m: Lts, f, s: int) -> float:
    return values(m, f)[s]


def verdict_name(v: float) -> str:
    return {TRUE: "true", FALSE: "false", UNKNOWN: "unknown"}[v]


# -- random models ------------------------------------------------------------


def random_model(rng: random.Random, catalog: Catalog = SMALL, max_states: int = 8,
                 p_unknown: float = 0.2) -> Lts:
    """A chain of states, each consecutive pair joined by an edge, plus some trill self-loops."""
    n = rng.randint(1, max_states)
    universe = catalog.universe()
    states = []
    for i in range(n):
        t, f, u = set(), set(), set()
        for a in universe:
            r = rng.random()
            (u if r < p_unknown else t if r < p_unknown + (1 - p_unknown) / 2 else f).add(a)
        states.append(StateNode(i, (10 * i, 10 * i + 5), frozenset(t), frozenset(f), frozenset(u)))
    actions = [Move(b, d) for b in catalog.articulators for d in ("N", "E", "S", "W")]
    trills = [Trill(b) for b in catalog.articulators]
    edges = []
    for i in range(n - 1):
        k = rng.randint(1, 3)
        edges.append(Edge(i, i + 1, frozenset(rng.sample(actions + trills, k))))
    for i in range(n):
        if rng.random() < 0.3:
            edges.append(Edge(i, i, frozenset(rng.sample(trills, rng.randint(1, len(trills))))))
    edges.sort(key=lambda e: (e.src, e.dst))
    return Lts(tuple(states), tuple(edges), universe, {"catalog": catalog.to_dict()})


# -- random syntax ------------------------------------------------------------


def random_atom(rng: random.Random, catalog: Catalog = SMALL, terms: dict | None = None):
    terms = terms or {}

    def pick(sort, pool):
        options = list(pool) + list(terms.get(sort, ()))
        return rng.choice(options)

    arts = catalog.articulators
    while True:
        kind = rng.randrange(4)
        try:
            if kind == 0:
                return Dir(pick(Sort.ARTICULATOR, arts), pick(Sort.DIRECTION, catalog.directions),
                           pick(Sort.ARTICULATOR, arts))
            if kind == 1:
                return Cfg(pick(Sort.ARTICULATOR, arts), pick(Sort.CONFIG, catalog.configs))
            if kind == 2:
                return At(pick(Sort.ARTICULATOR, arts), pick(Sort.PLACE, catalog.places))
            return Touch(pick(Sort.ARTICULATOR, arts), pick(Sort.ARTICULATOR, arts))
        except ValueError:
            continue  # same articulator twice


def random_action(rng: random.Random, catalog: Catalog = SMALL, terms: dict | None = None):
    terms = terms or {}
    arts = list(catalog.articulators) + list(terms.get(Sort.ARTICULATOR, ()))
    dirs = list(catalog.directions) + list(terms.get(Sort.DIRECTION, ()))
    r = rng.random()
    if r < 0.1:
        return Skip()
    if r < 0.35:
        return Trill(rng.choice(arts))
    return Move(rng.choice(arts), rng.choice(dirs))


def random_program(rng: random.Random, depth: int, catalog: Catalog = SMALL, terms=None):
    if depth <= 0 or rng.random() < 0.35:
        return Atomic(random_action(rng, catalog, terms))
    k = rng.randrange(4)
    if k == 3:
        return Star(random_program(rng, depth - 1, catalog, terms))
    left = random_program(rng, depth - 1, catalog, terms)
    right = random_program(rng, depth - 1, catalog, terms)
    return (Union, Intersect, Seq)[k](left, right)


def random_formula(rng: random.Random, depth: int, catalog: Catalog = SMALL, terms=None,
                   formula_vars=()):
    """Ground formula when ``terms`` and ``formula_vars`` are empty."""
    if depth <= 0 or rng.random() < 0.25:
        if formula_vars and rng.random() < 0.3:
            return rng.choice(formula_vars)
        return Top() if rng.random() < 0.08 else Prop(random_atom(rng, catalog, terms))
    k = rng.randrange(3)
    if k == 0:
        return Not(random_formula(rng, depth - 1, catalog, terms, formula_vars))
    if k == 1:
        return And(random_formula(rng, depth - 1, catalog, terms, formula_vars),
                   random_formula(rng, depth - 1, catalog, terms, formula_vars))
    return Box(random_program(rng, min(depth - 1, 3), catalog, terms),
               random_formula(rng, depth - 1, catalog, terms, formula_vars))


_SORT_POOL = (Sort.ARTICULATOR, Sort.CONFIG, Sort.DIRECTION, Sort.PLACE, Sort.POSTURE)


def random_expression(rng: random.Random, depth: int, catalog: Catalog = SMALL):
    """Ground formula, lambda template or application, for printer/parser roundtrips."""
    r = rng.random()
    if r < 0.5:
        return random_formula(rng, depth, catalog)
    if r < 0.85:
        names = rng.sample(["x", "y", "z", "c", "d", "p"], rng.randint(1, 3))
        params = tuple(Var(n, rng.choice(_SORT_POOL)) for n in names)
        terms: dict = {}
        for v in params:
            terms.setdefault(v.sort, []).append(v)
        fvars = tuple(terms.pop(Sort.POSTURE, ()))
        body = random_formula(rng, max(depth - 1, 0), catalog, terms, fvars)
        return Lambda(params, body)
    args = []
    for _ in range(rng.randint(0, 3)):
        args.append(rng.choice([*catalog.articulators, *catalog.configs,
                                random_formula(rng, max(min(depth - 2, 2), 0), catalog)]))
    body = Apply(rng.choice(["opposition", "tap", "buoy", "foo"]), tuple(args))
    if rng.random() < 0.5:
        return And(Prop(random_atom(rng, catalog)), body)
    return body


def depth_of(e) -> int:
    if isinstance(e, (Top, Prop, Var)):
        return 0
    if isinstance(e, Not):
        return 1 + depth_of(e.arg)
    if isinstance(e, And):
        return 1 + max(depth_of(e.left), depth_of(e.right))
    if isinstance(e, Box):
        return 1 + max(program_depth(e.program), depth_of(e.body))
    if isinstance(e, Lambda):
        return 1 + depth_of(e.body)
    if isinstance(e, Apply):
        return 1 + max([depth_of(a) for a in e.args if not isinstance(a, str)], default=0)
    raise TypeError(e)


def program_depth(p) -> int:
    if isinstance(p, Atomic):
        return 0
    if isinstance(p, Star):
        return 1 + program_depth(p.arg)
    return 1 + max(program_depth(p.left), program_depth(p.right))
