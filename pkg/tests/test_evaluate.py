from fractions import Fraction

import pytest

from pcfl.base import type_of
from pcfl.corpus import load_program, program_names, program_type
from pcfl.evaluate import (
    StepOutcome,
    certain_divergence,
    dist_to_json,
    eval_big,
    eval_small,
    eval_stable,
    eval_with_deficit,
    is_value,
    mass,
    mass_interval,
    step,
)
from pcfl.parser import parse_term, pretty
from pcfl.types.syntax import FALSE, TRUE, NumLit
from pcfl.types.testing import Interval


def t(text):
    return parse_term(text)


def by_text(dist):
    return {pretty(v): p for v, p in dist.items()}


def test_omega_has_empty_semantics():
    assert eval_big(load_program("omega"), 64) == {}


def test_identity():
    assert by_text(eval_big(load_program("id"), 4)) == {r"\x:bool. x": 1}


def test_half_converges():
    assert by_text(eval_big(load_program("half"), 8)) == {r"\x:bool. x": Fraction(1, 2)}


@pytest.mark.parametrize("n", range(11))
def test_geometric(n):
    dist = eval_big(load_program("geometric"), 40)
    assert dist[NumLit(n)] == Fraction(1, 2 ** (n + 1))


def test_fix_choice_is_almost_sure():
    dist = eval_big(load_program("fix_choice"), 40)
    assert set(dist) == {NumLit(0)}
    assert mass(dist) >= 1 - Fraction(1, 2**10)


def test_fuel_is_monotone():
    term = load_program("geometric")
    masses = [mass(eval_big(term, fuel)) for fuel in (0, 4, 8, 16, 32)]
    assert masses[0] == 0
    assert masses == sorted(masses)


def test_deep_fuel():
    dist = eval_big(load_program("geometric"), 600)
    assert dist[NumLit(0)] == Fraction(1, 2)
    assert mass(dist) > 1 - Fraction(1, 2**40)


@pytest.mark.parametrize("name", program_names())
def test_results_are_typed_with_dyadic_weights(name):
    sigma = program_type(name)
    for value, p in eval_big(load_program(name), 32).items():
        assert is_value(value)
        assert type_of(value) == sigma
        assert p.denominator & (p.denominator - 1) == 0


@pytest.mark.parametrize(
    "text, expected",
    [
        ("1 + 2", {"3": 1}),
        ("2 <= 1", {"false": 1}),
        ("3 == 3", {"true": 1}),
        ("if true (+) false then 1 else 2", {"1": Fraction(1, 2), "2": Fraction(1, 2)}),
        ("snd (1, 2 (+) 3)", {"2": Fraction(1, 2), "3": Fraction(1, 2)}),
        ("case nil[int] of { nil -> 0 | h::t -> h }", {"0": 1}),
        ("case 5 :: nil[int] of { nil -> 0 | h::t -> h }", {"5": 1}),
        (r"(\x:int. x + x) (1 (+) 2)", {"2": Fraction(1, 2), "4": Fraction(1, 2)}),
    ],
)
def test_eval_rules(text, expected):
    assert by_text(eval_big(t(text), 16)) == expected
    assert by_text(eval_small(t(text), 64)) == expected


def test_lists_and_pairs_are_lazy():
    term = t("(1 :: (fix f:int -> [int]. f) 0, (fix f:int -> int. f) 0)")
    assert is_value(term)
    assert mass(eval_big(term, 1)) == 1


def test_strict_case():
    assert eval_big(load_program("case_strict"), 32) == {}
    assert eval_with_deficit(load_program("case_strict"), 32) == ({}, 0)


def test_step():
    assert step(TRUE) == StepOutcome.Value
    assert step(t("true (+) false")) == [TRUE, FALSE]
    assert step(t("if true then 1 else 2")) == [NumLit(1)]
    assert step(t("fst 1")) == StepOutcome.Stuck
    assert step(t("(1 + 2) + 3")) == [t("3 + 3")]


def test_certain_divergence():
    assert certain_divergence(load_program("omega"), 8) == 1
    assert certain_divergence(load_program("half"), 8) == Fraction(1, 2)
    assert certain_divergence(load_program("geometric"), 8) == 0


def test_deficit():
    dist, deficit = eval_with_deficit(load_program("omega"), 4)
    assert (dist, deficit) == ({}, 0)

    dist, deficit = eval_with_deficit(load_program("geometric"), 8)
    assert deficit == 1 - mass(dist) > 0


def test_deficit_never_grows():
    term = load_program("fix_choice")
    deficits = [eval_with_deficit(term, fuel)[1] for fuel in (2, 4, 8, 16, 32)]
    assert deficits == sorted(deficits, reverse=True)


def test_eval_stable():
    dist, deficit, fuel = eval_stable(load_program("half"), 1)
    assert deficit == 0
    assert mass(dist) == Fraction(1, 2)
    assert fuel <= 8

    _, deficit, fuel = eval_stable(load_program("geometric"), 8, limit=32)
    assert deficit > 0
    assert fuel == 32


def test_mass_interval():
    assert mass_interval(load_program("gen"), 4) == Interval.point(Fraction(1))
    interval = mass_interval(load_program("geometric"), 8)
    assert interval.lo < interval.hi == 1


@pytest.mark.parametrize("name", program_names())
def test_big_and_small_step_agree(name):
    term = load_program(name)
    dist, deficit, _ = eval_stable(term, 8)
    if deficit:
        pytest.skip(f"{name} does not stabilise")
    assert eval_small(term, 1 << 12) == dist


def test_dist_to_json():
    out = dist_to_json(eval_big(load_program("gen"), 4))
    assert out == {
        "mass": "1",
        "support": [{"value": "false", "prob": "1/2"}, {"value": "true", "prob": "1/2"}],
    }
