import logging
from fractions import Fraction
from itertools import count
from typing import Dict, Iterator, List, Mapping, NamedTuple, Optional, Tuple

from .base import fill, type_of
from .evaluate import mass_interval
from .lmc import build_fragment, label_sort_key, program_state
from .types.errors import ResourceLimitError
from .types.lmc import Label, LabelKind, LmcFragment, LmcState
from .types.syntax import (
    BOOL,
    FALSE,
    INT,
    TRUE,
    App,
    ArrowType,
    BinOp,
    BoolType,
    CaseList,
    Context,
    Fix,
    Fst,
    Hole,
    If,
    IntType,
    Lam,
    ListType,
    Nil,
    NumLit,
    Op,
    ProdType,
    Snd,
    Term,
    Type,
    Var,
)
from .types.testing import OMEGA, ONE, UNKNOWN, Conj, Interval, Omega, Prefix, Test

_logger = logging.getLogger(__name__)

SEARCH_CANDIDATE_CAP = 100000


def prefix_depth(test: Test) -> int:
    """Prefix nesting of a test."""
    if isinstance(test, Omega):
        return 0
    if isinstance(test, Prefix):
        return 1 + prefix_depth(test.rest)

    return max(prefix_depth(t) for t in test.tests)


def labels_of(test: Test) -> Iterator[Label]:
    if isinstance(test, Prefix):
        yield test.label
        yield from labels_of(test.rest)
    elif isinstance(test, Conj):
        for t in test.tests:
            yield from labels_of(t)


def _product(intervals: List[Interval]) -> Interval:
    lo, hi = Fraction(1), Fraction(1)
    for i in intervals:
        lo *= i.lo
        hi *= i.hi

    return Interval(lo, hi)


def success_prob(fragment: LmcFragment, state: LmcState, test: Test) -> Interval:
    """
    Success probability of `test` at `state`, as an interval.

    The lower bound follows the fragment rows, the upper bound adds every row's deficit.
    Prefixed tests at frontier states are unknown, [0, 1].
    """
    memo: Dict[Tuple[LmcState, Test], Interval] = {}

    def go(s: LmcState, t: Test) -> Interval:
        key = (s, t)
        if key in memo:
            return memo[key]

        if isinstance(t, Omega):
            result = ONE
        elif isinstance(t, Conj):
            result = _product([go(s, u) for u in t.tests])
        elif s in fragment.frontier:
            result = UNKNOWN
        else:
            lo, hi = Fraction(0), fragment.row_deficit(s, t.label)
            for target, p in fragment.row(s, t.label).items():
                sub = go(target, t.rest)
                lo += p * sub.lo
                hi += p * sub.hi
            result = Interval(lo, hi)

        memo[key] = result
        return result

    return go(state, test)


##########
# Search #
##########

Vector = Tuple[Interval, ...]


class _Candidate(NamedTuple):
    test: Test
    vector: Vector


def search_alphabet(fragment: LmcFragment) -> List[Label]:
    """Labels defined somewhere in the fragment, type labels left out."""
    labels = {label for labels in fragment.enabled.values() for label in labels if label.kind != LabelKind.Type}

    return sorted(labels, key=label_sort_key)


def _levels(
    fragment: LmcFragment, left: LmcState, right: LmcState, cap: int
) -> Iterator[Tuple[int, Optional[Tuple[Test, Interval, Interval]]]]:
    """
    Breadth-first enumeration of tests by prefix nesting, one level per step.

    Tests are identified with their interval vector over all fragment states: a test whose vector was
    already seen is dropped, and so is one that fails everywhere. Conjunctions are binary, over prefix
    tests, and at least one conjunct is new at the level.
    """
    states = fragment.states
    index = {s: i for i, s in enumerate(states)}
    li, ri = index[left], index[right]
    alphabet = search_alphabet(fragment)
    seen = set()
    candidates = 0

    def admit(test: Test, vector: Vector) -> Optional[_Candidate]:
        nonlocal candidates
        candidates += 1
        if candidates > cap:
            raise ResourceLimitError(f"find_distinguishing_test: more than {cap} candidate tests")
        if vector in seen or all(i.hi == 0 for i in vector):
            return None
        seen.add(vector)
        return _Candidate(test, vector)

    def prefix(label: Label, rest: _Candidate) -> Vector:
        out = []
        for s in states:
            if s in fragment.frontier:
                out.append(UNKNOWN)
                continue
            lo, hi = Fraction(0), fragment.row_deficit(s, label)
            for target, p in fragment.row(s, label).items():
                sub = rest.vector[index[target]]
                lo += p * sub.lo
                hi += p * sub.hi
            out.append(Interval(lo, hi))
        return tuple(out)

    omega = admit(OMEGA, tuple(ONE for _ in states))
    previous: List[_Candidate] = [omega]
    prefixes: List[_Candidate] = []

    for depth in count(1):
        fresh: List[_Candidate] = []
        for rest in previous:
            for label in alphabet:
                found = admit(Prefix(label, rest.test), prefix(label, rest))
                if found is not None:
                    fresh.append(found)
                    if found.vector[li].disjoint(found.vector[ri]):
                        yield depth, (found.test, found.vector[li], found.vector[ri])
                        return

        known = len(prefixes)
        prefixes.extend(fresh)
        level = list(fresh)
        for j in range(known, len(prefixes)):
            for i in range(j + 1):
                a, b = prefixes[i], prefixes[j]
                vector = tuple(Interval(x.lo * y.lo, x.hi * y.hi) for x, y in zip(a.vector, b.vector))
                found = admit(Conj((a.test, b.test)), vector)
                if found is not None:
                    level.append(found)
                    if vector[li].disjoint(vector[ri]):
                        yield depth, (found.test, vector[li], vector[ri])
                        return

        _logger.debug("search: depth %d, %d new tests, %d candidates", depth, len(level), candidates)
        yield depth, None
        if not level:
            return
        previous = level


def find_distinguishing_test(
    fragment: LmcFragment,
    left: LmcState,
    right: LmcState,
    max_depth: int,
    partition: Optional[Mapping[LmcState, int]] = None,
    min_depth: int = 1,
    cap: int = SEARCH_CANDIDATE_CAP,
) -> Optional[Test]:
    """
    The first test, in breadth-first order up to `max_depth`, whose success intervals at the two states
    are disjoint.

    :param partition: Bisimulation classes of the fragment; states in one class are never separated.
    :param min_depth: Depth at which an unsuccessful search starts being reported as escalating.
    """
    found = distinguish(fragment, left, right, max_depth, partition, min_depth, cap)

    return found[0] if found is not None else None


def distinguish(
    fragment: LmcFragment,
    left: LmcState,
    right: LmcState,
    max_depth: int,
    partition: Optional[Mapping[LmcState, int]] = None,
    min_depth: int = 1,
    cap: int = SEARCH_CANDIDATE_CAP,
) -> Optional[Tuple[Test, Interval, Interval]]:
    """Like `find_distinguishing_test`, also returning both intervals."""
    if left == right:
        return None
    if partition is not None and partition[left] == partition[right]:
        return None
    if left.type != right.type:
        raise ValueError("find_distinguishing_test: states must have the same type")

    for depth, found in _levels(fragment, left, right, cap):
        if found is not None:
            return found
        if depth >= max_depth:
            break
        if depth >= min_depth:
            _logger.info("search: no witness at depth %d, trying depth %d", depth, depth + 1)

    return None


#############
# Compiling #
#############


def omega_term(ty: Type, name: str = "f") -> Term:
    """(fix f:int→τ. f) 0, divergent at any type."""
    return App(Fix(name, ArrowType(INT, ty), Var(name)), NumLit(0))


class _Compiler:
    def __init__(self):
        self.names = count()

    def fresh(self, base: str) -> str:
        return f"{base}{next(self.names)}"

    def diverge(self, sigma: Type) -> Context:
        return App(Lam(self.fresh("d"), sigma, omega_term(BOOL, self.fresh("f"))), Hole())

    def thunked(self, sigma: Type, body: Term, x: str) -> Context:
        return App(Lam(x, ArrowType(INT, sigma), body), Lam(self.fresh("z"), INT, Hole()))

    def sequence(self, terms: List[Term]) -> Term:
        if not terms:
            return TRUE

        return App(Lam(self.fresh("y"), BOOL, self.sequence(terms[1:])), terms[0])

    def compile(self, test: Test, sigma: Type) -> Tuple[Context, Context]:
        if isinstance(test, Omega):
            ctx = self.thunked(sigma, TRUE, self.fresh("x"))
            return ctx, ctx

        if isinstance(test, Conj):
            # every conjunct receives its own copy: x 0 re-runs the program once per conjunct
            x = self.fresh("x")
            parts = [self.compile(t, sigma) for t in test.tests]
            copy = App(Var(x), NumLit(0))
            program = self.thunked(sigma, self.sequence([fill(c, copy) for c, _ in parts]), x)
            value = self.thunked(sigma, self.sequence([fill(d, copy) for _, d in parts]), x)
            return program, value

        label, rest = test.label, test.rest

        if label.kind == LabelKind.Eval:
            x = self.fresh("x")
            _, then = self.compile(rest, sigma)
            return App(Lam(x, sigma, fill(then, Var(x))), Hole()), self.diverge(sigma)

        if label.kind == LabelKind.Type:
            if label.payload == sigma:
                return self.compile(rest, sigma)
            return self.diverge(sigma), self.diverge(sigma)

        return self.diverge(sigma), self.value_context(label, rest, sigma)

    def value_context(self, label: Label, rest: Test, sigma: Type) -> Context:
        kind = label.kind

        if kind == LabelKind.Arg and isinstance(sigma, ArrowType) and type_of(label.payload) == sigma.domain:
            then, _ = self.compile(rest, sigma.codomain)
            return fill(then, App(Hole(), label.payload))

        if isinstance(sigma, ProdType) and kind in (LabelKind.Fst, LabelKind.Snd):
            if kind == LabelKind.Fst:
                then, _ = self.compile(rest, sigma.left)
                return fill(then, Fst(Hole()))
            then, _ = self.compile(rest, sigma.right)
            return fill(then, Snd(Hole()))

        if isinstance(sigma, ListType) and kind in (LabelKind.Hd, LabelKind.Tl, LabelKind.Nil):
            h, t = self.fresh("h"), self.fresh("t")
            if kind == LabelKind.Hd:
                then, _ = self.compile(rest, sigma.element)
                return fill(then, CaseList(Hole(), omega_term(sigma.element, self.fresh("f")), h, t, Var(h)))
            if kind == LabelKind.Tl:
                then, _ = self.compile(rest, sigma)
                return fill(then, CaseList(Hole(), omega_term(sigma, self.fresh("f")), h, t, Var(t)))
            _, then = self.compile(rest, sigma)
            return CaseList(Hole(), fill(then, Nil(sigma.element)), h, t, omega_term(BOOL, self.fresh("f")))

        if isinstance(sigma, IntType) and kind == LabelKind.Num:
            _, then = self.compile(rest, sigma)
            k = NumLit(label.payload)
            return If(BinOp(Op.EQ, Hole(), k), fill(then, k), omega_term(BOOL, self.fresh("f")))

        if isinstance(sigma, BoolType) and kind == LabelKind.Bool:
            _, then = self.compile(rest, sigma)
            taken = fill(then, TRUE if label.payload else FALSE)
            stuck = omega_term(BOOL, self.fresh("f"))
            return If(Hole(), taken, stuck) if label.payload else If(Hole(), stuck, taken)

        return self.diverge(sigma)


def compile_test(test: Test, sigma: Type) -> Tuple[Context, Context]:
    """
    Contexts of type bool with a hole of type `sigma` whose success mass is the success probability of
    `test`: the first for program states, the second for value states.
    Labels that do not fit the type compile to a diverging context.
    """
    return _Compiler().compile(test, sigma)


##########
# Bridge #
##########


class BridgeResult(NamedTuple):
    pr: Interval
    ctx_mass: Interval

    @property
    def agree(self) -> bool:
        return self.pr.overlaps(self.ctx_mass)


def bridge_check(term: Term, sigma: Type, test: Test, fuel: int, ctx_fuel: Optional[int] = None) -> BridgeResult:
    """
    Compares the success probability of `test` at (`term`, `sigma`) with the termination mass of the
    compiled program context filled with `term`.

    :param ctx_fuel: Fuel for the filled context, twice `fuel` by default.
    """
    universe = [label.payload for label in labels_of(test) if label.kind == LabelKind.Arg]
    root = program_state(term, sigma)
    fragment = build_fragment([root], fuel, universe, prefix_depth(test) + 1)

    pr = success_prob(fragment, root, test)
    program, _ = compile_test(test, sigma)
    ctx_mass = mass_interval(fill(program, term), ctx_fuel or 2 * fuel)

    return BridgeResult(pr, ctx_mass)


#####################
#      Exports      #
#####################

__all__ = [
    "BridgeResult",
    "bridge_check",
    "compile_test",
    "distinguish",
    "find_distinguishing_test",
    "labels_of",
    "omega_term",
    "prefix_depth",
    "search_alphabet",
    "success_prob",
]
