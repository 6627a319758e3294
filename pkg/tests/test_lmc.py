from fractions import Fraction

import pytest

from pcfl.corpus import load_program
from pcfl.lmc import (
    arg_label,
    arg_universe_for,
    bool_label,
    build_fragment,
    enabled_labels,
    enumerate_values,
    fragment_to_json,
    num_label,
    program_state,
    reachable,
    row,
    successors,
    type_label,
    value_state,
)
from pcfl.parser import parse_term, parse_type
from pcfl.types.errors import PcflTypeError, ResourceLimitError
from pcfl.types.lmc import EVAL, FST, HD, NIL, SND, TL
from pcfl.types.syntax import BOOL, FALSE, INT, TRUE, NumLit


def t(text):
    return parse_term(text)


def test_enumerate_ground_values():
    assert enumerate_values(BOOL, 2) == (TRUE, FALSE)
    assert enumerate_values(INT, 2) == (NumLit(0), NumLit(1), NumLit(2))


def test_enumerate_functions():
    values = enumerate_values(parse_type("bool -> bool"), 2)
    assert set(values) == {t(r"\x:bool. x"), t(r"\x:bool. true"), t(r"\x:bool. false")}

    bigger = enumerate_values(parse_type("bool -> bool"), 4)
    assert set(values) < set(bigger)
    assert t(r"\x:bool. true (+) false") in bigger


def test_arg_universe():
    assert arg_universe_for(parse_type("bool -> bool -> bool"), 2) == (TRUE, FALSE)
    assert arg_universe_for(BOOL, 2) == ()
    universe = arg_universe_for(parse_type("int -> bool -> bool"), 1)
    assert set(universe) == {NumLit(0), NumLit(1), TRUE, FALSE}


def test_enabled_labels():
    assert enabled_labels(program_state(TRUE, BOOL), ()) == [EVAL, type_label(BOOL)]
    assert enabled_labels(value_state(TRUE, BOOL), ()) == [type_label(BOOL), bool_label(True)]
    assert enabled_labels(value_state(NumLit(3), INT), ()) == [type_label(INT), num_label(3)]

    pair = value_state(t("(1, true)"), parse_type("int * bool"))
    assert enabled_labels(pair, ()) == [type_label(pair.type), FST, SND]

    cons = value_state(t("1 :: nil[int]"), parse_type("[int]"))
    assert enabled_labels(cons, ()) == [type_label(cons.type), HD, TL]
    assert NIL in enabled_labels(value_state(t("nil[int]"), parse_type("[int]")), ())

    fun = value_state(load_program("not"), parse_type("bool -> bool"))
    assert enabled_labels(fun, (TRUE, NumLit(0), FALSE)) == [type_label(fun.type), arg_label(FALSE), arg_label(TRUE)]


def test_eval_row():
    targets, deficit = row(program_state(load_program("gen"), BOOL), EVAL, 8)
    assert targets == {value_state(TRUE, BOOL): Fraction(1, 2), value_state(FALSE, BOOL): Fraction(1, 2)}
    assert deficit == 0

    assert row(program_state(load_program("omega"), BOOL), EVAL, 8) == ({}, 0)

    targets, deficit = row(program_state(load_program("geometric"), INT), EVAL, 8)
    assert deficit == 1 - sum(targets.values()) > 0


def test_deterministic_rows():
    sigma = parse_type("bool -> bool")
    fun = value_state(load_program("not"), sigma)
    targets, _ = row(fun, arg_label(TRUE), 8)
    assert targets == {program_state(t("if true then false else true"), BOOL): 1}

    pair = value_state(t("(1, 2 (+) 3)"), parse_type("int * int"))
    assert row(pair, SND, 8)[0] == {program_state(t("2 (+) 3"), INT): 1}

    cons = value_state(t("1 :: nil[int]"), parse_type("[int]"))
    assert row(cons, TL, 8)[0] == {program_state(t("nil[int]"), parse_type("[int]")): 1}

    state = value_state(TRUE, BOOL)
    assert row(state, bool_label(True), 8)[0] == {state: 1}
    assert row(state, bool_label(False), 8) == ({}, 0)
    assert row(state, type_label(INT), 8) == ({}, 0)
    assert row(program_state(TRUE, BOOL), bool_label(True), 8) == ({}, 0)


def test_fix_unfolds_on_arg():
    sigma = parse_type("int -> int")
    fix = value_state(t("fix f:int -> int. \\x:int. x"), sigma)
    targets, _ = row(fix, arg_label(NumLit(1)), 8)
    (target,) = targets
    assert target.type == INT
    assert target.term == program_state(t(r"(\x:int. x) 1"), INT).term


def test_successors_respects_universe():
    fun = value_state(load_program("not"), parse_type("bool -> bool"))
    assert successors(fun, arg_label(TRUE), 8, arg_universe=[FALSE]) == {}
    assert len(successors(fun, arg_label(TRUE), 8, arg_universe=[TRUE])) == 1


def test_build_fragment():
    root = program_state(load_program("gen"), BOOL)
    fragment = build_fragment([root], 8, (), 6)
    assert fragment.states == (root, value_state(TRUE, BOOL), value_state(FALSE, BOOL))
    assert fragment.roots == (root,)
    assert not fragment.frontier
    assert reachable(fragment, [value_state(TRUE, BOOL)]) == {value_state(TRUE, BOOL)}


def test_build_fragment_frontier():
    sigma = parse_type("bool -> bool -> bool")
    root = program_state(load_program("exp_fst"), sigma)
    fragment = build_fragment([root], 16, arg_universe_for(sigma, 2), 2)
    assert fragment.frontier
    assert all(fragment.labels(s) == () for s in fragment.frontier)
    assert all(fragment.labels(s) for s in fragment.states if s not in fragment.frontier)


def test_build_fragment_errors():
    with pytest.raises(PcflTypeError):
        build_fragment([program_state(TRUE, INT)], 8, (), 2)
    with pytest.raises(PcflTypeError, match="not a value"):
        build_fragment([program_state(TRUE, BOOL)], 8, [t("true (+) false")], 2)
    with pytest.raises(ResourceLimitError):
        build_fragment([program_state(load_program("gen"), BOOL)], 8, (), 6, state_cap=1)


def test_fragment_to_json():
    root = program_state(load_program("gen"), BOOL)
    out = fragment_to_json(build_fragment([root], 8, (), 6))
    assert out["roots"] == ["s0"]
    assert [s["id"] for s in out["states"]] == ["s0", "s1", "s2"]
    first = {"id": "s0", "kind": "program", "term": "true (+) false", "type": "bool", "frontier": False}
    assert out["states"][0] == first
    assert {"from": "s0", "label": "eval", "to": {"s1": "1/2", "s2": "1/2"}} in out["edges"]
    assert out["tool"]["name"] == "pcfl"
