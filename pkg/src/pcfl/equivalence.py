import logging
from fractions import Fraction
from itertools import product
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import networkx as nx

from .base import closed_type, infer, subst
from .flow import lift_check
from .lmc import arg_universe_for, build_fragment, enumerate_values, program_state
from .parser import pretty, pretty_test, pretty_type
from .testing import distinguish
from .types.errors import PcflTypeError, ResourceLimitError
from .types.lmc import LmcFragment, LmcState
from .types.misc import Config, Verdict, VerdictKind
from .types.syntax import Term, Type, TypingContext
from .types.testing import Interval

_logger = logging.getLogger(__name__)

Partition = Dict[LmcState, int]
Relation = Set[Tuple[LmcState, LmcState]]

UNKNOWN_STATE = "unknown"
"""Where deficit mass goes: related only to itself"""


def _with_unknown(fragment: LmcFragment, state: LmcState, label) -> Dict[Any, Fraction]:
    row: Dict[Any, Fraction] = dict(fragment.row(state, label))
    missing = fragment.row_deficit(state, label)
    if missing:
        row[UNKNOWN_STATE] = missing

    return row


################
# Bisimulation #
################

Moves = Dict[Any, Tuple[Dict[int, Fraction], Fraction]]


def _moves(fragment: LmcFragment, state: LmcState, partition: Partition) -> Moves:
    moves: Moves = {}
    for label in fragment.labels(state):
        row = fragment.row(state, label)
        missing = fragment.row_deficit(state, label)
        if not row and not missing:
            continue
        weights: Dict[int, Fraction] = {}
        for target, p in row.items():
            weights[partition[target]] = weights.get(partition[target], Fraction(0)) + p
        moves[label] = (weights, missing)

    return moves


def _signature(moves: Moves):
    return frozenset((label, frozenset(weights.items()), missing) for label, (weights, missing) in moves.items())


def _separated(left: Moves, right: Moves) -> bool:
    """
    Whether some label sends the two states into some block with disjoint probability intervals.
    A row moving `w` into a block with `d` missing mass spans `[w, w + d]`.
    """
    empty: Tuple[Dict[int, Fraction], Fraction] = ({}, Fraction(0))
    for label in left.keys() | right.keys():
        left_weights, left_missing = left.get(label, empty)
        right_weights, right_missing = right.get(label, empty)
        for block in left_weights.keys() | right_weights.keys():
            lo, hi = left_weights.get(block, Fraction(0)), right_weights.get(block, Fraction(0))
            if Interval(lo, lo + left_missing).disjoint(Interval(hi, hi + right_missing)):
                return True

    return False


def _renumber(fragment: LmcFragment, keys: Dict[LmcState, Any]) -> Partition:
    ids: Dict[Any, int] = {}
    for state in fragment.states:
        ids.setdefault(keys[state], len(ids))

    return {state: ids[keys[state]] for state in fragment.states}


def _split(fragment: LmcFragment, partition: Partition) -> Partition:
    # Overlap is not transitive: a state joins the first group of its block whose members it overlaps with all.
    groups: Dict[int, List[Tuple[Any, List[Moves]]]] = {}
    seen: Dict[Tuple[int, Any], Any] = {}
    keys: Dict[LmcState, Any] = {}

    for state in fragment.states:
        if state in fragment.frontier:
            keys[state] = ("frontier", state)
            continue

        block = partition[state]
        moves = _moves(fragment, state, partition)
        signature = (block, _signature(moves))
        if signature in seen:
            keys[state] = seen[signature]
            continue

        candidates = groups.setdefault(block, [])
        for key, members in candidates:
            if not any(_separated(moves, other) for other in members):
                members.append(moves)
                break
        else:
            key = (block, len(candidates))
            candidates.append((key, [moves]))

        keys[state] = seen[signature] = key

    return _renumber(fragment, keys)


def bisim_classes(fragment: LmcFragment) -> Partition:
    """
    Coarsest partition of the fragment found by refinement, in which no two states of one block move
    into some block with disjoint probability intervals under the same label. Exact rows compare by
    equality, so deficit-free fragments get ordinary probabilistic bisimilarity. Frontier states stay alone.

    Block ids are numbered in the order the fragment lists its states.
    """
    partition = _renumber(
        fragment, {s: ("frontier", s) if s in fragment.frontier else "expanded" for s in fragment.states}
    )
    blocks = len(set(partition.values()))

    while True:
        partition = _split(fragment, partition)
        count = len(set(partition.values()))
        if count == blocks:
            break
        blocks = count

    _logger.debug("bisim_classes: %d states in %d blocks", len(fragment.states), blocks)

    return partition


def blocks_of(partition: Partition) -> List[FrozenSet[LmcState]]:
    out: Dict[int, Set[LmcState]] = {}
    for state, block in partition.items():
        out.setdefault(block, set()).add(state)

    return [frozenset(out[b]) for b in sorted(out)]


def equivalence_closure(states: Iterable[LmcState], relation: Iterable[Tuple[LmcState, LmcState]]) -> Partition:
    graph = nx.Graph()
    graph.add_nodes_from(states)
    graph.add_edges_from(relation)

    partition = {}
    for block, component in enumerate(nx.connected_components(graph)):
        for state in component:
            partition[state] = block

    return partition


def is_bisimulation(fragment: LmcFragment, relation: Iterable[Tuple[LmcState, LmcState]]) -> bool:
    """
    Whether the equivalence closure of `relation` is a bisimulation on the fragment: related states
    share their type, and no two of them move into a class with disjoint probability intervals.
    """
    partition = equivalence_closure(fragment.states, relation)
    index = {s: i for i, s in enumerate(fragment.states)}

    for block in blocks_of(partition):
        members = sorted(block, key=index.get)
        if len(members) == 1:
            continue
        if any(s in fragment.frontier for s in members) or len({s.type for s in members}) > 1:
            return False
        moves = [_moves(fragment, s, partition) for s in members]
        for i, left in enumerate(moves):
            if any(_separated(left, right) for right in moves[i + 1 :]):
                return False

    return True


##############
# Simulation #
##############


def _dominated(fragment: LmcFragment, s: LmcState, t: LmcState, relation: Relation) -> bool:
    for label in fragment.labels(s):
        left = _with_unknown(fragment, s, label)
        if not left:
            continue
        right = _with_unknown(fragment, t, label)
        pairs = [(a, b) for a in left for b in right if (a, b) in relation or a == b == UNKNOWN_STATE]
        if not lift_check(left, right, pairs):
            return False

    return True


def sim_preorder(fragment: LmcFragment) -> Relation:
    """
    Greatest simulation on the fragment: pairs are removed until every row of the left state is
    dominated by the same row of the right state through the relation itself.
    Frontier states are only related to themselves.
    """
    relation: Relation = {
        (s, t)
        for s in fragment.states
        for t in fragment.states
        if s.type == t.type and (s == t or (s not in fragment.frontier and t not in fragment.frontier))
    }

    index = {s: i for i, s in enumerate(fragment.states)}
    changed = True
    while changed:
        changed = False
        for s, t in sorted(relation, key=lambda st: (index[st[0]], index[st[1]])):
            if s != t and not _dominated(fragment, s, t, relation):
                relation.discard((s, t))
                changed = True

    return relation


def is_simulation(fragment: LmcFragment, relation: Iterable[Tuple[LmcState, LmcState]]) -> bool:
    relation = set(relation)
    reflexive = relation | {(x, x) for x in fragment.states}
    for s, t in relation:
        if s.type != t.type:
            return False
        if s == t:
            continue
        if s in fragment.frontier or t in fragment.frontier:
            return False
        if not _dominated(fragment, s, t, reflexive):
            return False

    return True


###########
# Verdict #
###########


def _joint_fragment(left: Term, right: Term, sigma: Type, cfg: Config) -> Tuple[LmcFragment, LmcState, LmcState]:
    closed_type(left, sigma, "left term")
    closed_type(right, sigma, "right term")

    universe = arg_universe_for(sigma, cfg.arg_size)
    s, r = program_state(left, sigma), program_state(right, sigma)
    fragment = build_fragment([s, r], cfg.fuel, universe, cfg.depth, cfg.state_cap)

    return fragment, s, r


def sim_directions(left: Term, right: Term, sigma: Type, cfg: Config = Config()) -> Tuple[bool, bool]:
    """Whether `right` simulates `left`, and whether `left` simulates `right`, within the bounded fragment."""
    fragment, s, r = _joint_fragment(left, right, sigma, cfg.validate())
    relation = sim_preorder(fragment)

    return (s, r) in relation, (r, s) in relation


def check_equiv(left: Term, right: Term, sigma: Type, cfg: Config = Config()) -> Verdict:
    """
    Bounded equivalence of two closed terms of type `sigma`.

    When bisimulation refinement separates the roots, a distinguishing test is searched from
    `cfg.test_depth` up to the fragment depth. Only `NotEquivalent` is a definite answer.
    """
    cfg = cfg.validate()
    fragment, s, r = _joint_fragment(left, right, sigma, cfg)
    partition = bisim_classes(fragment)
    universe = fragment.arg_universe

    if partition[s] == partition[r]:
        return Verdict(VerdictKind.Equivalent, cfg, universe)

    _logger.info("check_equiv: roots separated by refinement, searching a test")
    found = distinguish(
        fragment, s, r, max(cfg.depth, cfg.test_depth), partition, min_depth=cfg.test_depth, cap=cfg.state_cap
    )
    if found is None:
        return Verdict(VerdictKind.Unresolved, cfg, universe)

    witness, p_left, p_right = found
    return Verdict(VerdictKind.NotEquivalent, cfg, universe, witness, p_left, p_right)


def closures(gamma: TypingContext, arg_size: int, cap: int) -> Iterable[Dict[str, Term]]:
    """Γ-closures drawn from the enumerated values of each variable's type, variables in name order."""
    names = sorted(gamma)
    choices = [enumerate_values(gamma[name], arg_size) for name in names]

    total = 1
    for values in choices:
        total *= len(values)
    if total > cap:
        raise ResourceLimitError(f"open_check: {total} closures exceed the cap of {cap}")

    for values in product(*choices):
        yield dict(zip(names, values))


def close(term: Term, closure: Dict[str, Term]) -> Term:
    for name, value in closure.items():
        term = subst(term, value, name)

    return term


def open_check(gamma: TypingContext, left: Term, right: Term, sigma: Type, cfg: Config = Config()) -> Verdict:
    """Checks the open terms under every bounded Γ-closure, stopping at the first separating one."""
    cfg = cfg.validate()
    for term, what in ((left, "left term"), (right, "right term")):
        ty = infer(gamma, term)
        if ty != sigma:
            raise PcflTypeError(f"open_check: {what} has type {pretty_type(ty)}, expected {pretty_type(sigma)}")

    unresolved: Optional[Verdict] = None
    last: Optional[Verdict] = None
    for closure in closures(gamma, cfg.arg_size, cfg.state_cap):
        verdict = check_equiv(close(left, closure), close(right, closure), sigma, cfg)._replace(closure=closure)
        if verdict.kind == VerdictKind.NotEquivalent:
            return verdict
        if verdict.kind == VerdictKind.Unresolved and unresolved is None:
            unresolved = verdict
        last = verdict

    if unresolved is not None:
        return unresolved

    return Verdict(VerdictKind.Equivalent, cfg, last.arg_universe if last else ())


def verdict_to_json(verdict: Verdict) -> Dict[str, Any]:
    out: Dict[str, Any] = {"verdict": verdict.kind.value}

    if verdict.witness is not None:
        out["witness_test"] = pretty_test(verdict.witness)
        out["p_left"] = verdict.p_left.to_json()
        out["p_right"] = verdict.p_right.to_json()
    if verdict.closure is not None:
        out["closure"] = {name: pretty(value) for name, value in verdict.closure.items()}

    out["config"] = verdict.config.as_dict()
    out["arg_universe"] = [pretty(w) for w in verdict.arg_universe]

    return out


#####################
#      Exports      #
#####################

__all__ = [
    "Partition",
    "Relation",
    "bisim_classes",
    "blocks_of",
    "check_equiv",
    "close",
    "closures",
    "equivalence_closure",
    "is_bisimulation",
    "is_simulation",
    "open_check",
    "sim_directions",
    "sim_preorder",
    "verdict_to_json",
]
