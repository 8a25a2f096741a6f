import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixtures import MODELING_CATALOG, modeling_lts, single_state_lts
from oracle import SMALL, random_formula, random_model, random_program, reach, values

from pdlsl.errors import CheckError
from pdlsl.logic.catalog import default_catalog
from pdlsl.logic.parser import parse_formula, parse_program
from pdlsl.logic.syntax import At, Cfg, Dir, Not, Sort, Touch, Var
from pdlsl.checker import (
    WILDCARD, Mode, ModelChecker, Verdict, check, check_template, denote_program,
    open_body,
)

CAT = default_catalog()
seeds = st.integers(min_value=0, max_value=2**32 - 1)
NUM = {Verdict.TRUE: 1.0, Verdict.FALSE: 0.0, Verdict.UNKNOWN: 0.5}


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_programs_agree_with_path_search(seed):
    rng = random.Random(seed)
    m = random_model(rng)
    prog = random_program(rng, 4)
    rel = denote_program(m, prog)
    want = {(s, t) for s in range(len(m)) for t in reach(m, prog, s)}
    assert set(rel.pairs) == want


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_formulas_agree_with_oracle(seed):
    rng = random.Random(seed)
    m = random_model(rng)
    f = random_formula(rng, 5)
    got = [NUM[v] for _, v in sorted(check(m, f).items())]
    assert got == values(m, f)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_double_negation(seed):
    rng = random.Random(seed)
    m = random_model(rng)
    f = random_formula(rng, 4)
    assert check(m, Not(Not(f))) == check(m, f)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_true_and_false_never_overlap(seed):
    rng = random.Random(seed)
    mc = ModelChecker(random_model(rng))
    t, f = mc.values(random_formula(rng, 5))
    assert not (t & f).any()


def test_modeling_fixture_verdicts():
    m = modeling_lts()

    def v(text, s):
        return check(m, parse_formula(text, MODELING_CATALOG))[s]

    assert v("dir(RH,NE,LH)", 0) is Verdict.TRUE
    assert v("cfg(RH,L_CONFIG)", 0) is Verdict.FALSE
    assert v("cfg(RH,KEY_CONFIG)", 0) is Verdict.UNKNOWN
    assert v("<move(LH,NE)> dir(RH,W,LH)", 0) is Verdict.TRUE
    assert v("[trill(RH)] at(RH,R_SIDEOFBODY)", 1) is Verdict.TRUE
    assert v("<move(LH,NE)> true", 1) is Verdict.FALSE
    assert v("[move(LH,SW);move(LH,NE)] cfg(RH,OPENPALM_CONFIG)", 1) is Verdict.TRUE
    assert v("<(moves(LH))*> at(RH,R_SIDEOFHEAD)", 0) is Verdict.TRUE
    assert v("[skip] false", 3) is Verdict.TRUE  # no successors


def test_skip_is_any_edge():
    m = modeling_lts()
    assert denote_program(m, parse_program("skip", MODELING_CATALOG)).pairs == {
        (0, 1), (1, 1), (1, 2), (2, 3)}
    star = denote_program(m, parse_program("skip*", MODELING_CATALOG))
    assert (0, 0) in star and (0, 3) in star and (3, 0) not in star


def test_check_rejects_templates():
    with pytest.raises(CheckError):
        check(modeling_lts(), parse_formula(r"\c:Config . ( cfg(RH,c) )", MODELING_CATALOG))


def test_open_body_orders_free_variables_by_binder():
    e = parse_formula(r"\c:Config . ( \b:Articulator . ( cfg(b,c) ) )", CAT)
    _, fv = open_body(e)
    assert fv == [Var("c", Sort.CONFIG), Var("b", Sort.ARTICULATOR)]


def test_template_bindings_strict():
    m = single_state_lts({Cfg("RH", "L_FORM"), Cfg("LH", "L_FORM"), Dir("RH", "W", "LH")}, CAT)
    tmpl = parse_formula(r"\c:Config . ( dir(RH,W,LH) & cfg(RH,c) & cfg(LH,c) )", CAT)
    rows = check_template(m, tmpl, mode="strict")
    assert rows == [(0, {"c": "L_FORM"}, Verdict.TRUE)]


def test_optimistic_folds_all_unknown_into_wildcard():
    m = single_state_lts({Dir("RH", "W", "LH")}, CAT, false_rest=False)
    tmpl = parse_formula(r"\c:Config . ( dir(RH,W,LH) & cfg(RH,c) & cfg(LH,c) )", CAT)
    assert check_template(m, tmpl, mode="strict") == []
    assert check_template(m, tmpl, mode="optimistic") == [(0, {"c": WILDCARD}, Verdict.UNKNOWN)]


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_strict_results_are_a_subset_of_optimistic(seed):
    rng = random.Random(seed)
    m = random_model(rng, SMALL)
    tmpl = parse_formula(r"\c:Config . ( \b:Articulator . ( cfg(b,c) & [moves(b)] at(b,HEAD) ) )",
                         SMALL)
    strict = check_template(m, tmpl, mode=Mode.STRICT, catalog=SMALL)
    optimistic = check_template(m, tmpl, mode=Mode.OPTIMISTIC, catalog=SMALL)
    assert all(v is Verdict.TRUE for _, _, v in strict)
    trues = [r for r in optimistic if r[2] is Verdict.TRUE]
    assert sorted(map(repr, strict)) == sorted(map(repr, trues))


def test_posture_domain_excludes_moving_articulator():
    atoms = {At("RH", "TORSE"), At("LH", "HEAD"), Touch("RH", "LH")}
    m = single_state_lts(atoms, SMALL)
    mc = ModelChecker(m)
    names = {str(p) for p in mc.postures(set())}
    assert names == {"at(RH,TORSE) & touch(LH,RH)", "at(LH,HEAD) & touch(LH,RH)"}
    only_lh = mc.postures({"RH"})
    assert [(p.articulator, p.atoms) for p in only_lh] == [("LH", frozenset({At("LH", "HEAD")}))]


def test_relation_matrix_is_boolean():
    mc = ModelChecker(modeling_lts())
    mat = mc.matrix(parse_program("(move(LH,NE) + move(LH,SW))*", MODELING_CATALOG))
    assert mat.dtype == np.bool_ and mat.shape == (4, 4)
    assert mat[0, 3] and mat.diagonal().all()
