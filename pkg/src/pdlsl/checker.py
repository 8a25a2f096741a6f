"""Three-valued PDL_SL model checking over a finite LTS.

Program denotations are boolean adjacency matrices; formula denotations are
pairs of boolean vectors ``(is_true, is_false)`` over states, with unknown
being neither.  ``Not`` swaps the pair and ``And`` follows strong Kleene, so
an unknown atom can never make a formula true.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from .errors import CheckError
from .logic.printer import print_formula
from .logic.reduce import beta_reduce, substitute
from .logic.syntax import (
    And, Atomic, Box, Intersect, Lambda, Move, Not, Prop, Seq, Skip, Sort, Star,
    Top, Trill, Union, Var, conjunction, free_vars, is_formula, iter_nodes,
    iter_programs,
)
from .model import Lts

WILDCARD = "*"


class Verdict(str, enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    def __str__(self) -> str:
        return self.value


class Mode(str, enum.Enum):
    STRICT = "strict"
    OPTIMISTIC = "optimistic"


@dataclass(frozen=True)
class Relation:
    pairs: frozenset[tuple[int, int]]

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> Relation:
        rows, cols = np.nonzero(m)
        return cls(frozenset(zip(rows.tolist(), cols.tolist())))

    def __contains__(self, pair) -> bool:
        return pair in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class Posture:
    """Instantiation of a posture variable: the true atoms of one articulator in one state."""

    state: int
    articulator: str
    atoms: frozenset

    def formula(self):
        return conjunction(sorted((Prop(a) for a in self.atoms), key=print_formula))

    def __str__(self) -> str:
        return print_formula(self.formula())


def _compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # float32 goes through BLAS; path counts stay exact well past any model size
    return (a.astype(np.float32) @ b.astype(np.float32)) > 0


class ModelChecker:
    """Evaluates programs and formulas on one LTS, memoizing within this instance only."""

    def __init__(self, lts: Lts):
        self.lts = lts
        self.n = len(lts.states)
        self._rel: dict = {}
        self._val: dict = {}
        self._atom_true: dict = {}
        self._atom_false: dict = {}
        self._labels: list[tuple[int, int, frozenset]] = [(e.src, e.dst, e.actions) for e in lts.edges]

    # -- programs -------------------------------------------------------------

    def matrix(self, p) -> np.ndarray:
        if p in self._rel:
            return self._rel[p]
        n = self.n
        if isinstance(p, Atomic):
            m = np.zeros((n, n), dtype=bool)
            a = p.action
            if free_vars(a):
                raise CheckError("program contains unbound variables")
            for src, dst, acts in self._labels:
                if isinstance(a, Skip) or a in acts:
                    m[src, dst] = True
        elif isinstance(p, Union):
            m = self.matrix(p.left) | self.matrix(p.right)
        elif isinstance(p, Intersect):
            m = self.matrix(p.left) & self.matrix(p.right)
        elif isinstance(p, Seq):
            m = _compose(self.matrix(p.left), self.matrix(p.right))
        elif isinstance(p, Star):
            m = np.eye(n, dtype=bool) | self.matrix(p.arg)
            while True:
                nxt = m | _compose(m, m)
                if np.array_equal(nxt, m):
                    break
                m = nxt
        else:
            raise TypeError(f"not a program: {p!r}")
        m.setflags(write=False)
        self._rel[p] = m
        return m

    def relation(self, p) -> Relation:
        return Relation.from_matrix(self.matrix(p))

    def successors(self, p, s: int) -> list[int]:
        return np.flatnonzero(self.matrix(p)[s]).tolist()

    # -- formulas -------------------------------------------------------------

    def _atom(self, atom):
        if atom not in self.lts.universe:
            raise CheckError(f"atom {atom} is outside the catalog universe")
        if atom not in self._atom_true:
            states = self.lts.states
            self._atom_true[atom] = np.array([atom in s.props_true for s in states], dtype=bool)
            self._atom_false[atom] = np.array([atom in s.props_false for s in states], dtype=bool)
        return self._atom_true[atom], self._atom_false[atom]

    def values(self, f) -> tuple[np.ndarray, np.ndarray]:
        """``(is_true, is_false)`` vectors of a ground formula."""
        cached = self._val.get(f)
        if cached is not None:
            return cached
        n = self.n
        if isinstance(f, Top):
            out = (np.ones(n, dtype=bool), np.zeros(n, dtype=bool))
        elif isinstance(f, Prop):
            if free_vars(f):
                raise CheckError("formula contains unbound variables")
            out = self._atom(f.atom)
        elif isinstance(f, Not):
            t, fl = self.values(f.arg)
            out = (fl, t)
        elif isinstance(f, And):
            t1, f1 = self.values(f.left)
            t2, f2 = self.values(f.right)
            out = (t1 & t2, f1 | f2)
        elif isinstance(f, Box):
            r = self.matrix(f.program)
            t, fl = self.values(f.body)
            out = (~(r & ~t[None, :]).any(axis=1), (r & fl[None, :]).any(axis=1))
        else:
            raise CheckError(f"not a ground formula node: {type(f).__name__}")
        self._val[f] = out
        return out

    def verdict(self, f, s: int) -> Verdict:
        t, fl = self.values(f)
        return Verdict.TRUE if t[s] else Verdict.FALSE if fl[s] else Verdict.UNKNOWN

    def check(self, f) -> dict[int, Verdict]:
        t, fl = self.values(f)
        return {s.id: (Verdict.TRUE if t[i] else Verdict.FALSE if fl[i] else Verdict.UNKNOWN)
                for i, s in enumerate(self.lts.states)}

    # -- templates ------------------------------------------------------------

    def postures(self, excluded: set[str]) -> list[Posture]:
        """Distinct nonempty per-articulator postures over all states.

        Atoms mentioning an articulator in ``excluded`` are dropped, and no
        posture is built for such an articulator.
        """
        seen = set()
        out = []
        arts = self.lts.metadata.get("catalog", {}).get("articulators")
        for s in self.lts.states:
            by_art: dict[str, set] = {}
            for atom in s.props_true:
                mentioned = {str(b) for b in atom.articulators}
                if mentioned & excluded:
                    continue
                for b in mentioned:
                    by_art.setdefault(b, set()).add(atom)
            order = arts or sorted(by_art)
            for b in order:
                atoms = frozenset(by_art.get(b, ()))
                if b in excluded or not atoms or atoms in seen:
                    continue
                seen.add(atoms)
                out.append(Posture(s.id, b, atoms))
        return out


def _moving_vars(e) -> set[str]:
    """Names of articulator variables occurring inside some modality's program."""
    names = set()
    for node in iter_nodes(e):
        if isinstance(node, Box):
            for p in iter_programs(node.program):
                if isinstance(p, Atomic) and isinstance(p.action, (Move, Trill)):
                    if isinstance(p.action.b, Var):
                        names.add(p.action.b.name)
    return names


def open_body(e) -> tuple[object, list[Var]]:
    """Strip top-level lambdas; return the body and its free variables in binder order."""
    params: list[Var] = []
    while isinstance(e, Lambda):
        params.extend(e.params)
        e = e.body
    order = {p.name: k for k, p in enumerate(params)}
    fv = sorted(free_vars(e), key=lambda v: (order.get(v.name, len(order)), v.name))
    return e, fv


def instances(mc: ModelChecker, body, variables: list[Var], catalog) -> Iterator[tuple[dict, object]]:
    """Enumerate ``(binding, ground formula)`` pairs over the variables' domains."""
    plain = [v for v in variables if v.sort is not Sort.POSTURE]
    posture_vars = [v for v in variables if v.sort is Sort.POSTURE]
    domains = []
    for v in plain:
        dom = catalog.domain(v.sort)
        if not dom:
            raise CheckError(f"variable {v.name!r} of sort {v.sort} has an empty domain")
        domains.append(dom)
    moving = _moving_vars(body)
    posture_cache: dict[frozenset, list] = {}
    for values in itertools.product(*domains):
        binding = {v.name: val for v, val in zip(plain, values)}
        if posture_vars:
            excluded = frozenset(str(binding[n]) for n in moving if n in binding)
            if excluded not in posture_cache:
                posture_cache[excluded] = mc.postures(set(excluded))
            pdom = posture_cache[excluded]
            if not pdom:
                continue
            combos = itertools.product(pdom, repeat=len(posture_vars))
        else:
            combos = [()]
        for pvals in combos:
            full = dict(binding)
            mapping = dict(binding)
            for v, p in zip(posture_vars, pvals):
                full[v.name] = p
                mapping[v.name] = p.formula()
            try:
                ground = substitute(body, mapping)
            except ValueError:
                continue  # e.g. touch(RH,RH)
            yield {v.name: full[v.name] for v in variables}, ground


def _collapse_unknown(rows: list[tuple], variables, domain_sizes) -> list[tuple]:
    """Fold Unknown rows that cover a variable's whole domain into one wildcard row."""
    for v in variables:
        size = domain_sizes.get(v.name)
        if not size:
            continue
        groups: dict[tuple, list[int]] = {}
        for k, (binding, verdict, _) in enumerate(rows):
            if verdict is Verdict.UNKNOWN:
                rest = tuple((n, str(x)) for n, x in binding.items() if n != v.name)
                groups.setdefault(rest, []).append(k)
        drop = set()
        replaced = {}
        for idxs in groups.values():
            if len({str(rows[k][0][v.name]) for k in idxs}) == size:
                binding = {**rows[idxs[0]][0], v.name: WILDCARD}
                # keep one ground instance so callers can still trace witnesses
                replaced[idxs[0]] = (binding, Verdict.UNKNOWN, rows[idxs[0]][2])
                drop.update(idxs[1:])
        rows = [replaced.get(k, r) for k, r in enumerate(rows) if k not in drop]
    return rows


def template_results(mc: ModelChecker, e, catalog, mode: Mode | str = Mode.OPTIMISTIC):
    """Per state index, the accepted ``(binding, verdict, ground formula)`` rows.

    A wildcard row produced by the optimistic fold carries the ground formula
    of the first binding it replaced.
    """
    mode = Mode(mode)
    body, variables = open_body(e)
    per_state: dict[int, list] = {i: [] for i in range(mc.n)}
    for binding, ground in instances(mc, body, variables, catalog):
        t, fl = mc.values(ground)
        for i in np.flatnonzero(t).tolist():
            per_state[i].append((binding, Verdict.TRUE, ground))
        if mode is Mode.OPTIMISTIC:
            for i in np.flatnonzero(~t & ~fl).tolist():
                per_state[i].append((binding, Verdict.UNKNOWN, ground))
    if mode is Mode.OPTIMISTIC:
        sizes = {v.name: len(catalog.domain(v.sort)) for v in variables
                 if v.sort is not Sort.POSTURE}
        for i, rows in per_state.items():
            rows.sort(key=lambda r: r[1] is not Verdict.TRUE)
            per_state[i] = _collapse_unknown(rows, variables, sizes)
    return per_state


def denote_program(m: Lts, a) -> Relation:
    return ModelChecker(m).relation(a)


def check(m: Lts, f) -> dict[int, Verdict]:
    """Verdict of a ground formula at every state."""
    if not is_formula(f):
        raise CheckError("check needs a ground formula; use check_template for templates")
    return ModelChecker(m).check(f)


def check_template(m: Lts, e, defs: Mapping | None = None, mode: Mode | str = Mode.OPTIMISTIC,
                   catalog=None) -> list[tuple[int, dict, Verdict]]:
    """Enumerate variable bindings of a template and report satisfying ones per state.

    Strict mode keeps True verdicts only; optimistic mode also reports Unknown
    ones, folding a variable whose every value is Unknown into ``*``.
    """
    from .logic.catalog import Catalog

    if catalog is None:
        data = m.metadata.get("catalog")
        if data is None:
            raise CheckError("no catalog available to enumerate bindings")
        catalog = Catalog.from_dict(data)
    e = beta_reduce(e, defs or {}, catalog)
    mc = ModelChecker(m)
    results = template_results(mc, e, catalog, mode)
    out = []
    for i in range(mc.n):
        for binding, verdict, _ in results[i]:
            out.append((m.states[i].id, binding, verdict))
    return out
