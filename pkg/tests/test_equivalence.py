from fractions import Fraction

import pytest

from pcfl.corpus import load_program, program_type
from pcfl.equivalence import (
    bisim_classes,
    blocks_of,
    check_equiv,
    close,
    closures,
    equivalence_closure,
    is_bisimulation,
    is_simulation,
    open_check,
    sim_directions,
    sim_preorder,
    verdict_to_json,
)
from pcfl.lmc import build_fragment, program_state
from pcfl.parser import parse_term, parse_type
from pcfl.types.errors import PcflTypeError, ResourceLimitError
from pcfl.types.lmc import EVAL
from pcfl.types.misc import Config, VerdictKind
from pcfl.types.syntax import BOOL, INT, TRUE
from pcfl.types.testing import Interval

GROUND = ["true (+) false", "false (+) true", "true", r"(\x:bool. x) true", "if true then false else true", "false"]


def t(text):
    return parse_term(text)


@pytest.fixture
def ground_fragment():
    roots = [program_state(t(text), BOOL) for text in GROUND]
    return build_fragment(roots, 16, (), 6), roots


def test_beta_value_pairs_share_a_block(ground_fragment):
    fragment, roots = ground_fragment
    partition = bisim_classes(fragment)
    assert partition[roots[2]] == partition[roots[3]]
    assert partition[roots[0]] == partition[roots[1]]
    assert partition[roots[4]] == partition[roots[5]]
    assert partition[roots[0]] != partition[roots[2]] != partition[roots[4]]


def test_partition_is_a_fixpoint(ground_fragment):
    fragment, _ = ground_fragment
    partition = bisim_classes(fragment)
    pairs = [(s, u) for block in blocks_of(partition) for s in block for u in block]
    assert is_bisimulation(fragment, pairs)
    assert blocks_of(equivalence_closure(fragment.states, pairs)) == blocks_of(partition)
    assert not is_bisimulation(fragment, [(fragment.roots[0], fragment.roots[2])])


def test_mutual_similarity_is_bisimilarity(ground_fragment):
    fragment, _ = ground_fragment
    assert not fragment.frontier
    partition = bisim_classes(fragment)
    relation = sim_preorder(fragment)
    mutual = {(s, u) for s, u in relation if (u, s) in relation}
    same = {(s, u) for s in fragment.states for u in fragment.states if partition[s] == partition[u]}
    assert mutual == same
    assert is_simulation(fragment, relation)


def test_simulation_is_not_symmetric():
    roots = [program_state(t("true (+) (fix f:int -> bool. f) 0"), BOOL), program_state(TRUE, BOOL)]
    fragment = build_fragment(roots, 16, (), 4)
    relation = sim_preorder(fragment)
    assert (roots[0], roots[1]) in relation
    assert (roots[1], roots[0]) not in relation
    assert not is_simulation(fragment, [(roots[1], roots[0])])


LOOP = r"(fix f:int -> int. (\y:int. y) (+) f) 0"
DELAYED_LOOP = r"(fix f:int -> int. (\y:int. y) (+) (\y:int. f y)) 0"


def test_overlapping_intervals_share_a_block():
    roots = [program_state(t(LOOP), INT), program_state(t(DELAYED_LOOP), INT)]
    fragment = build_fragment(roots, 32, (), 4)
    assert fragment.row_deficit(roots[0], EVAL) > 0
    partition = bisim_classes(fragment)
    assert partition[roots[0]] == partition[roots[1]]
    assert is_bisimulation(fragment, [(roots[0], roots[1])])

    assert check_equiv(t(LOOP), t(DELAYED_LOOP), INT).kind == VerdictKind.Equivalent


def test_disjoint_intervals_separate():
    roots = [program_state(t(LOOP), INT), program_state(t("0 (+) 1"), INT)]
    fragment = build_fragment(roots, 32, (), 4)
    assert bisim_classes(fragment)[roots[0]] != bisim_classes(fragment)[roots[1]]
    assert not is_bisimulation(fragment, [(roots[0], roots[1])])


def test_relation_checkers_reject_type_mismatch():
    roots = [program_state(TRUE, BOOL), program_state(t("1"), INT)]
    fragment = build_fragment(roots, 8, (), 4)
    assert not is_bisimulation(fragment, [tuple(roots)])
    assert not is_simulation(fragment, [tuple(roots)])


@pytest.mark.parametrize("left, right", [("exp_fst", "exp_snd"), ("exp", "rnd")])
def test_encryption_equivalences(left, right):
    verdict = check_equiv(load_program(left), load_program(right), program_type(left), Config())
    assert verdict.kind == VerdictKind.Equivalent
    assert verdict.equivalent
    assert verdict.witness is None
    assert verdict.arg_universe == (TRUE, t("false"))


def test_separating_pair_has_a_witness():
    sigma = program_type("m54")
    verdict = check_equiv(load_program("m54"), load_program("n54"), sigma, Config())
    assert verdict.kind == VerdictKind.NotEquivalent
    assert verdict.witness is not None
    assert verdict.p_left.disjoint(verdict.p_right)

    out = verdict_to_json(verdict)
    assert out["verdict"] == "not_equivalent"
    assert out["config"] == Config().as_dict()
    assert out["arg_universe"] == ["true", "false"]


def test_separating_pair_is_not_similar_either_way():
    sigma = program_type("m54")
    assert sim_directions(load_program("m54"), load_program("n54"), sigma) == (False, False)


def test_identity_against_negation():
    sigma = parse_type("bool -> bool")
    verdict = check_equiv(load_program("id"), load_program("not"), sigma)
    assert verdict.kind == VerdictKind.NotEquivalent
    assert {verdict.p_left, verdict.p_right} == {Interval.point(Fraction(0)), Interval.point(Fraction(1))}


def test_check_equiv_rejects_wrong_type():
    with pytest.raises(PcflTypeError):
        check_equiv(load_program("id"), load_program("gen"), parse_type("bool -> bool"))


def test_config_validation():
    with pytest.raises(ValueError, match="fuel"):
        check_equiv(TRUE, TRUE, BOOL, Config(fuel=0))


def test_closures():
    gamma = {"y": INT, "x": BOOL}
    found = list(closures(gamma, 1, 100))
    assert len(found) == 4
    assert found[0] == {"x": TRUE, "y": t("0")}
    with pytest.raises(ResourceLimitError):
        list(closures(gamma, 1, 3))
    assert close(t("if x then y else 0"), found[0]) == t("if true then 0 else 0")


def test_open_check():
    gamma = {"x": BOOL}
    same = open_check(gamma, t("if x then true else false"), t("x"), BOOL)
    assert same.kind == VerdictKind.Equivalent

    differ = open_check(gamma, t("x"), t("true"), BOOL)
    assert differ.kind == VerdictKind.NotEquivalent
    assert differ.closure == {"x": t("false")}
    assert verdict_to_json(differ)["closure"] == {"x": "false"}

    with pytest.raises(PcflTypeError):
        open_check(gamma, t("x"), t("1"), BOOL)
