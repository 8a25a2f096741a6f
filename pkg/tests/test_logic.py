import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracle import SMALL, random_expression, random_formula, random_program

from pdlsl.errors import ParseError, ReductionError
from pdlsl.logic import catalog as catalog_mod
from pdlsl.logic.catalog import Catalog, default_catalog, load_catalog
from pdlsl.logic.parser import parse_definitions, parse_formula, parse_program
from pdlsl.logic.printer import print_formula, print_program
from pdlsl.logic.reduce import beta_reduce, check_acyclic, substitute
from pdlsl.logic.syntax import (
    DIRECTIONS, And, Apply, At, Atomic, Box, Cfg, Diamond, Dir, Direction, Implies,
    Lambda, Move, Not, Or, Prop, Seq, Skip, Sort, Star, Top, Touch, Trill, Union, Var,
    as_implication, expand_moves, free_vars,
)

CAT = default_catalog()
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def p(text, **kw):
    return parse_formula(text, CAT, **kw)


# -- syntax -------------------------------------------------------------------


def test_direction_from_vector_uses_image_coordinates():
    assert Direction.from_vector(1, 0) is Direction.E
    assert Direction.from_vector(0, -1) is Direction.N  # y grows downwards
    assert Direction.from_vector(-1, 1) is Direction.SW
    assert Direction.from_vector(0, 0) is None
    assert [d.opposite for d in DIRECTIONS[:4]] == list(DIRECTIONS[4:])


@given(st.sampled_from(CAT.articulators), st.sampled_from(CAT.articulators))
def test_touch_is_canonical(a, b):
    if a == b:
        with pytest.raises(ValueError):
            Touch(a, b)
    else:
        assert Touch(a, b) == Touch(b, a)
        assert hash(Touch(a, b)) == hash(Touch(b, a))


def test_dir_rejects_same_articulator():
    with pytest.raises(ValueError):
        Dir("RH", "W", "RH")


def test_derived_connectives_expand():
    a, b = Prop(Touch("RH", "LH")), Prop(Cfg("RH", "L_FORM"))
    assert Or(a, b) == Not(And(Not(a), Not(b)))
    assert Implies(a, b) == Not(And(a, Not(b)))
    assert as_implication(Implies(a, b)) == (a, b)
    assert as_implication(Not(a)) is None
    prog = Atomic(Skip())
    assert Diamond(prog, a) == Not(Box(prog, Not(a)))


def test_expand_moves_order():
    u = expand_moves("RH")
    parts = []
    while isinstance(u, Union):
        parts.append(u.left.action)
        u = u.right
    parts.append(u.action)
    assert parts == [Move("RH", d) for d in DIRECTIONS] + [Trill("RH")]


# -- parser / printer ---------------------------------------------------------


def test_opposition_shape():
    f = p("dir(RH,W,LH) & cfg(RH,L_FORM) & cfg(LH,L_FORM)")
    assert f == And(Prop(Dir("RH", "W", "LH")),
                    And(Prop(Cfg("RH", "L_FORM")), Prop(Cfg("LH", "L_FORM"))))


def test_precedence_and_associativity():
    a, b, c = (Prop(Touch("RH", "LH")), Prop(At("RH", "HEAD")), Prop(At("LH", "HEAD")))
    assert p("touch(RH,LH) -> at(RH,HEAD) -> at(LH,HEAD)") == Implies(a, Implies(b, c))
    assert p("touch(RH,LH) | at(RH,HEAD) & at(LH,HEAD)") == Or(a, And(b, c))
    assert p("!touch(RH,LH) & at(RH,HEAD)") == And(Not(a), b)
    assert p("[skip] touch(RH,LH) & at(RH,HEAD)") == And(Box(Atomic(Skip()), a), b)
    assert p("<skip> touch(RH,LH)") == Diamond(Atomic(Skip()), a)
    assert p("true") == Top()
    assert p("false") == Not(Top())


def test_program_precedence():
    m = Atomic(Move("RH", "N"))
    t = Atomic(Trill("LH"))
    s = Atomic(Skip())
    assert parse_program("move(RH,N) + trill(LH);skip*", CAT) == Union(m, Seq(t, Star(s)))
    assert parse_program("(move(RH,N) + trill(LH))*", CAT) == Star(Union(m, t))
    assert parse_program("moves(RH)", CAT) == expand_moves("RH")


def test_unicode_arrows_are_not_required_but_ascii_directions_are_checked():
    with pytest.raises(ParseError) as err:
        p("dir(RH,UP,LH)")
    assert err.value.line == 1 and err.value.column > 1


@pytest.mark.parametrize("text, fragment", [
    ("touch(RH,", "expected"),
    ("touch(RH,LH", "')'"),
    ("cfg(RH,NOPE)", "NOPE"),
    ("cfg(L_FORM,RH)", "L_FORM"),
    ("touch(RH,RH)", "distinct"),
    ("[move(RH,N)", "]"),
    (r"\x:Config . ( touch(x,RH) )", "x"),
    ("touch(RH,LH) junk", "junk"),
])
def test_parse_errors_have_locations(text, fragment):
    with pytest.raises(ParseError) as err:
        p(text)
    assert fragment in str(err.value)
    assert err.value.line >= 1 and err.value.column >= 1


def test_error_location_on_later_line():
    with pytest.raises(ParseError) as err:
        parse_definitions("a = touch(RH,LH)\nb = touch(RH,\n", CAT)
    assert err.value.line == 2


def test_print_known_forms():
    assert print_formula(p("[skip*] true")) == "[skip*] true"
    f = p(r"\s:Articulator . ( !touch(s,LH) -> [moves(s)] touch(s,LH) )")
    assert print_formula(f).startswith(r"\s:Articulator . ( !touch(LH,s) -> [move(s,E) + ")
    assert print_program(Seq(Star(Atomic(Skip())), Atomic(Trill("RH")))) == "skip*;trill(RH)"


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_roundtrip_random_expressions(seed):
    e = random_expression(random.Random(seed), 6)
    assert parse_formula(print_formula(e), SMALL) == e


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_print_is_idempotent(seed):
    e = random_expression(random.Random(seed), 5)
    once = print_formula(e)
    assert print_formula(parse_formula(once, SMALL)) == once


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_program_roundtrip(seed):
    prog = random_program(random.Random(seed), 4)
    assert parse_program(print_program(prog), SMALL) == prog


# -- definitions and reduction ------------------------------------------------


SHIPPED = """
let hands_config = \\c:Config . ( cfg(RH,c) & cfg(LH,c) )
opposition = \\c:Config . ( dir(RH,W,LH) & hands_config(c) )
"""


def test_definitions_and_helpers():
    defs = parse_definitions(SHIPPED, CAT)
    assert [(d.name, d.helper) for d in defs] == [("hands_config", True), ("opposition", False)]


def test_definition_errors():
    with pytest.raises(ParseError, match="duplicate"):
        parse_definitions("a = true\na = true", CAT)
    with pytest.raises(ParseError, match="RH"):
        parse_definitions("RH = true", CAT)
    with pytest.raises(ParseError, match="argument"):
        parse_definitions(SHIPPED + "x = opposition(L_FORM, FIST_FORM)", CAT)
    with pytest.raises(ParseError, match="Config"):
        parse_definitions(SHIPPED + "x = opposition(RH)", CAT)


def test_reduction_inlines_helpers():
    env = {d.name: d.value for d in parse_definitions(SHIPPED, CAT)}
    screen = beta_reduce(Apply("opposition", ("L_FORM",)), env, CAT)
    assert screen == p("dir(RH,W,LH) & cfg(RH,L_FORM) & cfg(LH,L_FORM)")
    template = beta_reduce(env["opposition"], env, CAT)
    assert isinstance(template, Lambda) and free_vars(template.body) == {Var("c", Sort.CONFIG)}


def test_reduction_errors():
    with pytest.raises(ReductionError):
        beta_reduce(Apply("nope", ()), {}, CAT)
    loop = {"a": Apply("b", ()), "b": Apply("a", ())}
    with pytest.raises(ReductionError, match="cycl"):
        check_acyclic(loop)


def test_substitution_avoids_capture():
    x, y = Var("x", Sort.POSTURE), Var("y", Sort.POSTURE)
    inner = Lambda((y,), And(x, y))
    out = substitute(inner, {"x": y})
    assert isinstance(out, Lambda)
    (fresh,) = out.params
    assert fresh.name != "y"
    assert out.body == And(y, fresh)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_ground_formulas_are_fixed_by_reduction(seed):
    f = random_formula(random.Random(seed), 4, SMALL)
    assert beta_reduce(f, {}, SMALL) == f


# -- catalog ------------------------------------------------------------------


def test_default_catalog_contents():
    assert CAT.articulators == ("RH", "LH", "HEAD")
    assert set(CAT.directions) == set(DIRECTIONS)
    assert {"L_FORM", "FIST_FORM"} <= set(CAT.configs)
    assert Catalog.from_dict(CAT.to_dict()) == CAT
    # dir over ordered pairs, touch over unordered ones
    n_art = len(CAT.articulators)
    dirs = sum(isinstance(a, Dir) for a in CAT.universe())
    touches = sum(isinstance(a, Touch) for a in CAT.universe())
    assert dirs == n_art * (n_art - 1) * 8 and touches == n_art * (n_art - 1) // 2


def test_load_catalog_formats(tmp_path):
    txt = tmp_path / "c.txt"
    txt.write_text("articulators = A, B\nplaces = P\nconfigs = C  # comment\n")
    cat = load_catalog(txt)
    assert cat.articulators == ("A", "B") and cat.configs == ("C",)
    js = tmp_path / "c.json"
    js.write_text('{"articulators": ["A", "B"], "places": [], "configs": []}')
    assert load_catalog(js).articulators == ("A", "B")
    assert catalog_mod.Catalog.from_dict(cat.to_dict()).digest() == cat.digest()
