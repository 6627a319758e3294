import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcfl.base import (
    alpha_eq,
    canonical,
    check_context,
    closed_type,
    fill,
    free_vars,
    infer,
    is_closed,
    subst,
    term_size,
)
from pcfl.corpus import load_program, program_names, program_type
from pcfl.lmc import enumerate_values
from pcfl.parser import parse_term, parse_type
from pcfl.types.errors import PcflTypeError
from pcfl.types.syntax import BOOL, INT, TRUE, ArrowType, Hole, Lam, ListType, ProdType, Var


def t(text):
    return parse_term(text)


def test_free_vars():
    assert free_vars(t(r"\x:bool. x")) == frozenset()
    assert free_vars(t(r"\x:bool. y")) == {"y"}
    assert free_vars(t("case l of { nil -> n | h::tl -> h + k }")) == {"l", "n", "k"}
    assert is_closed(t("(fix f:int -> int. f) 0"))


def test_subst_avoids_capture():
    body = t(r"\y:int. x + y")
    out = subst(body, Var("y"), "x")
    assert free_vars(out) == {"y"}
    assert out.binder != "y"
    assert alpha_eq(out, t(r"\z:int. y + z"))


def test_subst_respects_shadowing():
    body = t(r"\x:int. x")
    assert subst(body, t("1"), "x") == body


def test_subst_in_case_branches():
    body = t("case l of { nil -> x | h::tl -> x + h }")
    out = subst(body, t("h"), "x")
    assert free_vars(out) == {"l", "h"}
    assert out.head != "h"


def test_canonical_names():
    assert canonical(t(r"\a:bool. \b:bool. a")) == t(r"\x:bool. \y:bool. x")
    # free names are skipped
    assert canonical(t(r"\a:bool. x")) == t(r"\y:bool. x")
    assert alpha_eq(t(r"\a:int. a + 1"), t(r"\b:int. b + 1"))
    assert not alpha_eq(t(r"\a:int. \b:int. a"), t(r"\a:int. \b:int. b"))


def test_term_size():
    assert term_size(t("1")) == 1
    assert term_size(t(r"\x:bool. x")) == 2
    assert term_size(t("1 + 2")) == 3


@pytest.mark.parametrize(
    "text, expected",
    [
        ("true (+) false", "bool"),
        (r"\x:int. x + 1", "int -> int"),
        ("(1, true)", "int * bool"),
        ("1 :: nil[int]", "[int]"),
        ("fix f:int -> int. f", "int -> int"),
        ("case 1 :: nil[int] of { nil -> false | h::tl -> h <= 2 }", "bool"),
        ("fst (1, true)", "int"),
        ("if true then 1 else 2", "int"),
        (r"(\x:bool. x) true", "bool"),
    ],
)
def test_infer(text, expected):
    assert infer({}, t(text)) == parse_type(expected)


@pytest.mark.parametrize(
    "text",
    [
        "x",
        "true (+) 1",
        "if 1 then 1 else 1",
        "true + 1",
        "fix f:int. f",
        "fst 1",
        "1 :: nil[bool]",
        "case 1 of { nil -> 1 | h::t -> h }",
        "case nil[int] of { nil -> 1 | h::h -> h }",
        "1 true",
        r"(\x:int. x) true",
        "[.]",
    ],
)
def test_infer_rejects(text):
    with pytest.raises(PcflTypeError):
        infer({}, t(text))


def test_infer_open_term():
    gamma = {"x": BOOL, "f": ArrowType(BOOL, INT)}
    assert infer(gamma, t("f x")) == INT


def test_closed_type_checks_expected():
    assert closed_type(t("1")) == INT
    with pytest.raises(PcflTypeError, match="expected bool"):
        closed_type(t("1"), BOOL)


def test_check_context():
    context = t(r"(\x:int -> int * bool. true) (\z:int. [.])")
    assert check_context({}, context, {}, ProdType(INT, BOOL)) == BOOL
    assert check_context({}, t("[.] + 1"), {}, INT) == INT


def test_check_context_discharges_delta():
    context = t(r"\x:bool. [.]")
    assert check_context({}, context, {"x": BOOL}, INT) == ArrowType(BOOL, INT)
    with pytest.raises(PcflTypeError):
        check_context({}, context, {"x": INT}, INT)


def test_check_context_rejects_clash_and_hole_count():
    with pytest.raises(PcflTypeError, match="clash"):
        check_context({"x": BOOL}, Hole(), {"x": BOOL}, BOOL)
    with pytest.raises(PcflTypeError, match="exactly one hole"):
        check_context({}, t("([.], [.])"), {}, BOOL)


def test_fill():
    assert fill(t("[.] + 1"), t("2")) == t("2 + 1")
    # plain grafting: the context binder captures x
    assert fill(t(r"\x:int. [.]"), Var("x")) == t(r"\x:int. x")


LIST_VALUES = enumerate_values(ListType(INT), 4)
FUNCTION_VALUES = enumerate_values(ArrowType(BOOL, BOOL), 4)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(LIST_VALUES), st.sampled_from(FUNCTION_VALUES))
def test_substitution_preserves_types(value, fun):
    gamma = {"l": ListType(INT), "f": ArrowType(BOOL, BOOL)}
    body = t("case l of { nil -> f true | h::tl -> h <= 1 }")
    before = infer(gamma, body)
    after = infer({}, subst(subst(body, value, "l"), fun, "f"))
    assert before == after == BOOL


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(FUNCTION_VALUES))
def test_canonical_is_idempotent(fun):
    assert canonical(canonical(fun)) == canonical(fun)
    assert infer({}, canonical(fun)) == infer({}, fun)


def test_values_are_closed_and_typed():
    for value in LIST_VALUES:
        assert is_closed(value)
        assert infer({}, value) == ListType(INT)
    assert TRUE in enumerate_values(BOOL, 1)


WEAKENING_TYPES = [BOOL, INT, ArrowType(INT, BOOL), ListType(BOOL)]


@pytest.mark.parametrize("name", program_names())
@pytest.mark.parametrize("extra", WEAKENING_TYPES)
def test_weakening_programs(name, extra):
    term = load_program(name)
    assert infer({"unused": extra}, term) == infer({}, term) == program_type(name)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([f for f in FUNCTION_VALUES if isinstance(f, Lam)]), st.sampled_from(WEAKENING_TYPES))
def test_weakening_open_bodies(fun, extra):
    gamma = {fun.binder: fun.annot}
    assert infer({**gamma, "unused": extra}, fun.body) == infer(gamma, fun.body) == BOOL
