"""Recursive-descent parser for the ASCII PDL_SL syntax.

Formula precedence, tightest first: ``!`` and modalities ``[a]``/``<a>``,
then ``&``, ``|``, ``->``.  Program precedence, tightest first: postfix ``*``,
``;``, ``&`` (intersection), ``+`` (union).  All binary operators associate to
the right; for the associative ones this only fixes the stored tree shape,
``->`` is right-associative in meaning as well.

Lambdas are written ``\\x:Config, s:Articulator . ( body )`` and the body must
be parenthesized.  ``moves(b)`` is expanded on the spot into the union of all
catalog moves of ``b`` plus ``trill(b)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from ..errors import ParseError
from .catalog import Catalog, default_catalog
from .syntax import (
    FALSE, Apply, And, At, Atomic, Box, Cfg, Diamond, Dir, Direction, Implies,
    Intersect, Lambda, Move, Not, Or, Prop, Seq, Skip, Sort, Star, Top, Touch,
    Trill, Union, Var, expand_moves,
)

FORMULA_KEYWORDS = {"true", "false", "dir", "cfg", "at", "touch"}
PROGRAM_KEYWORDS = {"skip", "move", "trill", "moves"}
RESERVED = FORMULA_KEYWORDS | PROGRAM_KEYWORDS | {"let"}
SORT_NAMES = {s.value: s for s in Sort}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|[()\[\]<>,.:!&|+;*\\=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "op" or "eof"
    text: str
    line: int
    column: int


def tokenize(text: str, line: int = 1, column: int = 1) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, column)
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line += 1
            column = 1
        else:
            if kind in ("ident", "op"):
                tokens.append(Token(kind, value, line, column))
            column += len(value)
        pos = m.end()
    tokens.append(Token("eof", "", line, column))
    return tokens


def _params_of(value) -> tuple[Var, ...]:
    return value.params if isinstance(value, Lambda) else ()


class _Parser:
    def __init__(self, tokens: list[Token], catalog: Catalog, defs: Mapping | None,
                 scope: Mapping[str, Var] | None):
        self.tokens = tokens
        self.i = 0
        self.catalog = catalog
        self.defs = defs
        self.scopes: list[dict[str, Var]] = [dict(scope or {})]

    # -- token helpers --------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column)

    def at(self, text: str) -> bool:
        return self.tok.kind != "eof" and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str, opener: Token | None = None) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            msg = f"expected {text!r}, found {found!r}"
            if opener is not None:
                msg += f" (unbalanced {opener.text!r} opened at {opener.line}:{opener.column})"
            raise self.error(msg)
        tok = self.tok
        self.i += 1
        return tok

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            found = self.tok.text or "end of input"
            raise self.error(f"expected identifier, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def lookup(self, name: str) -> Var | None:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    # -- formulas -------------------------------------------------------------

    def parse_top(self):
        e = self.expr()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return e

    def expr(self):
        left = self.disj()
        if self.accept("->"):
            return Implies(left, self.expr())
        return left

    def disj(self):
        left = self.conj()
        if self.accept("|"):
            return Or(left, self.disj())
        return left

    def conj(self):
        left = self.unary()
        if self.accept("&"):
            return And(left, self.conj())
        return left

    def unary(self):
        tok = self.tok
        if self.accept("!"):
            return Not(self.unary())
        if self.accept("["):
            prog = self.program()
            self.expect("]", tok)
            return Box(prog, self.unary())
        if self.accept("<"):
            prog = self.program()
            self.expect(">", tok)
            return Diamond(prog, self.unary())
        return self.primary()

    def primary(self):
        tok = self.tok
        if self.accept("("):
            e = self.expr()
            self.expect(")", tok)
            return e
        if self.accept("\\"):
            return self.lambda_rest(tok)
        if tok.kind != "ident":
            found = tok.text or "end of input"
            raise self.error(f"expected a formula, found {found!r}")
        name = tok.text
        if name == "true":
            self.i += 1
            return Top()
        if name == "false":
            self.i += 1
            return FALSE
        if name in ("dir", "cfg", "at", "touch"):
            return Prop(self.atom())
        if name in PROGRAM_KEYWORDS:
            raise self.error(f"{name!r} is a program and must appear inside [...] or <...>")
        self.i += 1
        if self.at("("):
            return self.application(tok)
        var = self.lookup(name)
        if var is not None:
            if var.sort is not Sort.POSTURE:
                raise self.error(f"variable {name!r} of sort {var.sort} used as a formula", tok)
            return var
        sorts = self.catalog.sorts_of(name)
        if sorts:
            raise self.error(f"constant {name!r} of sort {sorts[0]} used as a formula", tok)
        if self.defs is not None and name not in self.defs:
            raise self.error(f"unknown symbol {name!r}", tok)
        return self.check_application(Apply(name, ()), tok)

    def lambda_rest(self, start: Token):
        params = []
        scope = {}
        while True:
            ptok = self.ident()
            if ptok.text in RESERVED:
                raise self.error(f"{ptok.text!r} is reserved", ptok)
            if not self.accept(":"):
                raise self.error(f"lambda parameter {ptok.text!r} needs a sort annotation")
            stok = self.ident()
            sort = SORT_NAMES.get(stok.text)
            if sort is None:
                raise self.error(f"unknown sort {stok.text!r}", stok)
            if ptok.text in scope:
                raise self.error(f"duplicate parameter {ptok.text!r}", ptok)
            var = Var(ptok.text, sort)
            scope[ptok.text] = var
            params.append(var)
            if not self.accept(","):
                break
        self.expect(".")
        open_tok = self.expect("(")
        self.scopes.append(scope)
        try:
            body = self.expr()
        finally:
            self.scopes.pop()
        self.expect(")", open_tok)
        return Lambda(tuple(params), body)

    def application(self, callee: Token):
        name = callee.text
        if self.defs is not None and name not in self.defs:
            raise self.error(f"unknown symbol {name!r}", callee)
        open_tok = self.expect("(")
        args = []
        if not self.at(")"):
            while True:
                args.append(self.argument())
                if not self.accept(","):
                    break
        self.expect(")", open_tok)
        return self.check_application(Apply(name, tuple(args)), callee)

    def argument(self):
        tok = self.tok
        if tok.kind == "ident" and self.peek().text in (",", ")") and tok.text not in RESERVED:
            self.i += 1
            var = self.lookup(tok.text)
            if var is not None:
                return var
            if self.catalog.sorts_of(tok.text):
                return tok.text
            if self.defs is None or tok.text in self.defs:
                return self.check_application(Apply(tok.text, ()), tok)
            raise self.error(f"unknown symbol {tok.text!r}", tok)
        return self.expr()

    def check_application(self, app: Apply, tok: Token) -> Apply:
        if self.defs is None or app.callee not in self.defs:
            return app
        params = _params_of(self.defs[app.callee])
        if len(params) != len(app.args):
            raise self.error(
                f"{app.callee!r} expects {len(params)} argument(s), got {len(app.args)}", tok)
        fixed = []
        for param, arg in zip(params, app.args):
            fixed.append(self.check_arg_sort(app.callee, param, arg, tok))
        return Apply(app.callee, tuple(fixed))

    def check_arg_sort(self, callee: str, param: Var, arg, tok: Token):
        where = f"argument {param.name!r} of {callee!r}"
        if param.sort is Sort.POSTURE:
            if isinstance(arg, str):
                raise self.error(f"{where} must be a posture formula, got constant {arg!r}", tok)
            if isinstance(arg, Var) and arg.sort is not Sort.POSTURE:
                raise self.error(f"{where} has sort Posture, got {arg.sort} variable", tok)
            return arg
        if isinstance(arg, Var):
            if arg.sort is not param.sort:
                raise self.error(f"{where} has sort {param.sort}, got {arg.sort} variable", tok)
            return arg
        if isinstance(arg, str):
            if not self.catalog.has(param.sort, arg):
                raise self.error(f"{where} has sort {param.sort}, {arg!r} is not one", tok)
            return Direction(arg) if param.sort is Sort.DIRECTION else arg
        raise self.error(f"{where} has sort {param.sort}, got a formula", tok)

    # -- atoms and terms ------------------------------------------------------

    def term(self, sort: Sort):
        tok = self.ident()
        var = self.lookup(tok.text)
        if var is not None:
            if var.sort is not sort:
                raise self.error(
                    f"variable {tok.text!r} has sort {var.sort}, expected {sort}", tok)
            return var
        if self.catalog.has(sort, tok.text):
            return Direction(tok.text) if sort is Sort.DIRECTION else tok.text
        other = self.catalog.sorts_of(tok.text)
        if other:
            raise self.error(f"{tok.text!r} has sort {other[0]}, expected {sort}", tok)
        raise self.error(f"unknown symbol {tok.text!r}", tok)

    def terms(self, name_tok: Token, sorts: tuple[Sort, ...]) -> list:
        open_tok = self.expect("(")
        out = []
        for k, sort in enumerate(sorts):
            if k:
                if self.at(")"):
                    raise self.error(f"{name_tok.text} takes {len(sorts)} arguments", name_tok)
                self.expect(",")
            out.append(self.term(sort))
        if self.at(","):
            raise self.error(f"{name_tok.text} takes {len(sorts)} arguments", name_tok)
        self.expect(")", open_tok)
        return out

    def atom(self):
        tok = self.ident()
        A, D, P, C = Sort.ARTICULATOR, Sort.DIRECTION, Sort.PLACE, Sort.CONFIG
        try:
            if tok.text == "dir":
                return Dir(*self.terms(tok, (A, D, A)))
            if tok.text == "cfg":
                return Cfg(*self.terms(tok, (A, C)))
            if tok.text == "at":
                return At(*self.terms(tok, (A, P)))
            return Touch(*self.terms(tok, (A, A)))
        except ValueError as exc:
            raise self.error(str(exc), tok) from None

    # -- programs -------------------------------------------------------------

    def program(self):
        left = self.prog_inter()
        if self.accept("+"):
            return Union(left, self.program())
        return left

    def prog_inter(self):
        left = self.prog_seq()
        if self.accept("&"):
            return Intersect(left, self.prog_inter())
        return left

    def prog_seq(self):
        left = self.prog_post()
        if self.accept(";"):
            return Seq(left, self.prog_seq())
        return left

    def prog_post(self):
        p = self.prog_atom()
        while self.accept("*"):
            p = Star(p)
        return p

    def prog_atom(self):
        tok = self.tok
        if self.accept("("):
            p = self.program()
            self.expect(")", tok)
            return p
        if tok.kind != "ident":
            found = tok.text or "end of input"
            raise self.error(f"expected a program, found {found!r}")
        A, D = Sort.ARTICULATOR, Sort.DIRECTION
        self.i += 1
        if tok.text == "skip":
            return Atomic(Skip())
        if tok.text == "move":
            return Atomic(Move(*self.terms(tok, (A, D))))
        if tok.text == "trill":
            return Atomic(Trill(*self.terms(tok, (A,))))
        if tok.text == "moves":
            (b,) = self.terms(tok, (A,))
            return expand_moves(b, self.catalog.directions)
        raise self.error(f"unknown action {tok.text!r}", tok)


def parse_formula(text: str, catalog: Catalog | None = None, defs: Mapping | None = None,
                  scope: Mapping[str, Var] | None = None, *, line: int = 1, column: int = 1):
    """Parse formula or template text.

    ``defs`` maps already known definition names to their values; when given,
    applications are checked for arity and argument sorts and unknown callees
    are rejected.  ``scope`` pre-binds free variables.
    """
    catalog = catalog or default_catalog()
    tokens = tokenize(text, line, column)
    return _Parser(tokens, catalog, defs, scope).parse_top()


def parse_program(text: str, catalog: Catalog | None = None,
                  scope: Mapping[str, Var] | None = None):
    catalog = catalog or default_catalog()
    parser = _Parser(tokenize(text), catalog, None, scope)
    p = parser.program()
    if parser.tok.kind != "eof":
        raise parser.error(f"unexpected {parser.tok.text!r}")
    return p


@dataclass(frozen=True)
class Definition:
    name: str
    value: object
    helper: bool = False
    line: int = 0


def parse_definitions(text: str, catalog: Catalog | None = None,
                      known: Mapping | None = None) -> list[Definition]:
    """Parse a formula database: one ``[let] name = expr`` per line.

    ``let`` marks a helper definition that is not itself annotated.  Later
    definitions may use earlier ones (and anything in ``known``).
    """
    catalog = catalog or default_catalog()
    env = dict(known or {})
    out: list[Definition] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        tokens = tokenize(raw, lineno)
        if tokens[0].kind == "eof":
            continue
        k = 0
        helper = False
        if tokens[0].text == "let":
            helper = True
            k = 1
        name_tok = tokens[k]
        if name_tok.kind != "ident" or name_tok.text in RESERVED:
            raise ParseError("expected a definition name", name_tok.line, name_tok.column)
        eq_tok = tokens[k + 1]
        if eq_tok.text != "=":
            raise ParseError("expected '=' after definition name", eq_tok.line, eq_tok.column)
        name = name_tok.text
        if name in seen:
            raise ParseError(f"duplicate definition {name!r}", name_tok.line, name_tok.column)
        if catalog.sorts_of(name):
            raise ParseError(f"definition {name!r} shadows a catalog constant",
                             name_tok.line, name_tok.column)
        body_tokens = tokens[k + 2:]
        value = _Parser(body_tokens, catalog, env, None).parse_top()
        seen.add(name)
        env[name] = value
        out.append(Definition(name, value, helper, lineno))
    return out
