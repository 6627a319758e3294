import logging
from collections import defaultdict, deque
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Dict, Generator, Hashable, Iterable, List, Tuple, TypeVar, Union

from .base import canonical, subst
from .parser import pretty
from .types.syntax import (
    App,
    BinOp,
    BoolLit,
    CaseList,
    Choice,
    Cons,
    Fix,
    Fst,
    If,
    Lam,
    Nil,
    NumLit,
    Op,
    Pair,
    Snd,
    Term,
)
from .types.testing import Interval

_logger = logging.getLogger(__name__)

ValueDist = Dict[Term, Fraction]

HALF = Fraction(1, 2)

DIVERGENCE_SEARCH_CAP = 2048
"""Reduction-graph size up to which a pending term may be proved divergent"""

STABLE_FUEL_LIMIT = 1 << 8
"""Fuel at which `eval_stable` stops doubling"""


class StepOutcome(str, Enum):
    Value = "value"
    Stuck = "stuck"


T = TypeVar("T", bound=Hashable)


def is_value(term: Term) -> bool:
    """Values: n, b, nil, λx.M, fix x.M, M::N and ⟨M,N⟩, lists and pairs being lazy."""
    return isinstance(term, (NumLit, BoolLit, Nil, Lam, Fix, Cons, Pair))


def mass(dist: Dict[Any, Fraction]) -> Fraction:
    return sum(dist.values(), Fraction(0))


def _accumulate(acc: Dict[Term, Fraction], dist: Iterable[Tuple[Term, Fraction]], weight: Fraction):
    for value, p in dist:
        acc[value] += weight * p


def _operate(op: Op, left: Term, right: Term) -> Term:
    if op == Op.ADD:
        return NumLit(left.n + right.n)
    if op == Op.LEQ:
        return BoolLit(left.n <= right.n)

    return BoolLit(left.n == right.n)


############
# Big step #
############

Derivation = Generator[Tuple[Term, int], Tuple[Tuple[Term, Fraction], ...], Tuple[Tuple[Term, Fraction], ...]]

_derived: Dict[Tuple[Term, int], Tuple[Tuple[Term, Fraction], ...]] = {}
_DERIVED_SIZE = 1 << 16


def eval_big(term: Term, fuel: int) -> ValueDist:
    """
    Fuel-bounded big-step evaluation. Fuel counts derivation depth: at fuel 0 the only derivable
    distribution is the empty one, every premise is evaluated with one unit less.

    Premises are evaluated on an explicit stack, so any fuel is accepted.

    :param term: Closed, well-typed term.
    :param fuel: Derivation depth.
    :return: Subdistribution over α-canonical values, a lower bound of the semantics.
    """
    return dict(_run_big(canonical(term), fuel))


def _run_big(term: Term, fuel: int) -> Tuple[Tuple[Term, Fraction], ...]:
    if (term, fuel) in _derived:
        return _derived[term, fuel]
    if len(_derived) > _DERIVED_SIZE:
        _derived.clear()

    stack: List[Tuple[Tuple[Term, int], Derivation]] = [((term, fuel), _derive(term, fuel))]
    result = None
    while stack:
        key, frame = stack[-1]
        try:
            premise = frame.send(result)
        except StopIteration as done:
            stack.pop()
            result = _derived[key] = done.value
            continue

        if premise in _derived:
            result = _derived[premise]
        else:
            stack.append((premise, _derive(*premise)))
            result = None

    return result


def _derive(term: Term, fuel: int) -> Derivation:
    """One derivation step: yields each premise as `(term, fuel)` and receives its distribution."""
    if fuel <= 0:
        return ()

    if is_value(term):
        return ((canonical(term), Fraction(1)),)

    below = fuel - 1
    acc: Dict[Term, Fraction] = defaultdict(Fraction)

    if isinstance(term, App):
        functions = yield term.fun, below
        if not functions:
            return ()
        args = yield term.arg, below
        for fun, p in functions:
            for arg, q in args:
                if isinstance(fun, Lam):
                    body = subst(fun.body, arg, fun.binder)
                elif isinstance(fun, Fix):
                    body = App(subst(fun.body, fun, fun.binder), arg)
                else:
                    continue
                _accumulate(acc, (yield body, below), p * q)

    elif isinstance(term, Choice):
        _accumulate(acc, (yield term.left, below), HALF)
        _accumulate(acc, (yield term.right, below), HALF)

    elif isinstance(term, If):
        for cond, p in (yield term.cond, below):
            if isinstance(cond, BoolLit):
                _accumulate(acc, (yield (term.then if cond.b else term.orelse), below), p)

    elif isinstance(term, BinOp):
        lefts = yield term.left, below
        rights = (yield term.right, below) if lefts else ()
        for left, p in lefts:
            for right, q in rights:
                if isinstance(left, NumLit) and isinstance(right, NumLit):
                    acc[_operate(term.op, left, right)] += p * q

    elif isinstance(term, (Fst, Snd)):
        for pair, p in (yield term.term, below):
            if isinstance(pair, Pair):
                component = pair.left if isinstance(term, Fst) else pair.right
                _accumulate(acc, (yield component, below), p)

    elif isinstance(term, CaseList):
        for scrutinee, p in (yield term.scrutinee, below):
            if isinstance(scrutinee, Nil):
                _accumulate(acc, (yield term.nil_branch, below), p)
            elif isinstance(scrutinee, Cons):
                # head and tail are evaluated before the branch is entered
                heads = yield scrutinee.head, below
                tails = (yield scrutinee.tail, below) if heads else ()
                for head, q in heads:
                    for tail, r in tails:
                        branch = subst(subst(term.cons_branch, head, term.head), tail, term.tail)
                        _accumulate(acc, (yield branch, below), p * q * r)

    return tuple((value, p) for value, p in acc.items() if p)


##############
# Small step #
##############


def step(term: Term) -> Union[List[Term], StepOutcome]:
    """
    One reduction step at the unique redex of `term` in evaluation position.

    :return: The reducts (two for a choice), or `StepOutcome.Value` / `StepOutcome.Stuck`.
    """
    if is_value(term):
        return StepOutcome.Value

    def inside(sub: Term, rebuild: Callable[[Term], Term]) -> Union[List[Term], StepOutcome]:
        out = step(sub)
        if isinstance(out, StepOutcome):
            return StepOutcome.Stuck
        return [rebuild(r) for r in out]

    if isinstance(term, App):
        fun, arg = term.fun, term.arg
        if not is_value(fun):
            return inside(fun, lambda r: App(r, arg))
        if not is_value(arg):
            return inside(arg, lambda r: App(fun, r))
        if isinstance(fun, Lam):
            return [subst(fun.body, arg, fun.binder)]
        if isinstance(fun, Fix):
            return [App(subst(fun.body, fun, fun.binder), arg)]
        return StepOutcome.Stuck

    if isinstance(term, Choice):
        return [term.left, term.right]

    if isinstance(term, If):
        cond = term.cond
        if not is_value(cond):
            return inside(cond, lambda r: If(r, term.then, term.orelse))
        if isinstance(cond, BoolLit):
            return [term.then if cond.b else term.orelse]
        return StepOutcome.Stuck

    if isinstance(term, BinOp):
        left, right = term.left, term.right
        if not is_value(left):
            return inside(left, lambda r: BinOp(term.op, r, right))
        if not is_value(right):
            return inside(right, lambda r: BinOp(term.op, left, r))
        if isinstance(left, NumLit) and isinstance(right, NumLit):
            return [_operate(term.op, left, right)]
        return StepOutcome.Stuck

    if isinstance(term, (Fst, Snd)):
        pair = term.term
        if not is_value(pair):
            return inside(pair, lambda r: type(term)(r))
        if isinstance(pair, Pair):
            return [pair.left if isinstance(term, Fst) else pair.right]
        return StepOutcome.Stuck

    if isinstance(term, CaseList):
        scrutinee = term.scrutinee

        def rebuild(r: Term) -> Term:
            return CaseList(r, term.nil_branch, term.head, term.tail, term.cons_branch)

        if not is_value(scrutinee):
            return inside(scrutinee, rebuild)
        if isinstance(scrutinee, Nil):
            return [term.nil_branch]
        if isinstance(scrutinee, Cons):
            head, tail = scrutinee.head, scrutinee.tail
            if not is_value(head):
                return inside(head, lambda r: rebuild(Cons(r, tail)))
            if not is_value(tail):
                return inside(tail, lambda r: rebuild(Cons(head, r)))
            return [subst(subst(term.cons_branch, head, term.head), tail, term.tail)]
        return StepOutcome.Stuck

    return StepOutcome.Stuck


def run_small(
    start: T,
    fuel: int,
    step_fn: Callable[[T], Union[List[T], StepOutcome]],
    value_fn: Callable[[T], bool],
    canon_fn: Callable[[T], T],
) -> Tuple[Dict[T, Fraction], Dict[T, Fraction]]:
    """
    Iterates a probabilistic one-step relation `fuel` times from `start`.

    :return: The values reached and the terms still pending, each with their probability.
    """
    values: Dict[T, Fraction] = defaultdict(Fraction)
    pending: Dict[T, Fraction] = {canon_fn(start): Fraction(1)}

    for _ in range(fuel):
        following: Dict[T, Fraction] = defaultdict(Fraction)
        for term, p in pending.items():
            if value_fn(term):
                values[term] += p
                continue
            out = step_fn(term)
            if isinstance(out, StepOutcome):
                continue
            share = p / len(out)
            for reduct in out:
                following[canon_fn(reduct)] += share
        pending = following
        if not pending:
            break

    for term, p in list(pending.items()):
        if value_fn(term):
            values[term] += p
            del pending[term]

    return dict(values), dict(pending)


def is_divergent(
    start: T,
    step_fn: Callable[[T], Union[List[T], StepOutcome]],
    value_fn: Callable[[T], bool],
    canon_fn: Callable[[T], T],
    cap: int = DIVERGENCE_SEARCH_CAP,
) -> bool:
    """
    True when the whole reduction graph of `start` is explored within `cap` terms and holds no value.
    False means "not proved", not "converges".
    """
    seen = {canon_fn(start)}
    queue = deque(seen)

    while queue:
        term = queue.popleft()
        if value_fn(term):
            return False
        out = step_fn(term)
        if isinstance(out, StepOutcome):
            continue
        for reduct in out:
            reduct = canon_fn(reduct)
            if reduct not in seen:
                if len(seen) >= cap:
                    return False
                seen.add(reduct)
                queue.append(reduct)

    return True


def eval_small(term: Term, fuel: int) -> ValueDist:
    """Small-step evaluation: fuel bounds the number of reduction steps along every path."""
    values, _ = _run_small(canonical(term), fuel)

    return dict(values)


@lru_cache(maxsize=1 << 12)
def _run_small(term: Term, fuel: int):
    return run_small(term, fuel, step, is_value, canonical)


@lru_cache(maxsize=1 << 14)
def _is_divergent(term: Term) -> bool:
    return is_divergent(term, step, is_value, canonical)


def certain_divergence(term: Term, fuel: int) -> Fraction:
    """Probability of reaching, within `fuel` steps, a term whose reduction graph provably holds no value."""
    _, pending = _run_small(canonical(term), fuel)

    return sum((p for t, p in pending.items() if _is_divergent(t)), Fraction(0))


def eval_with_deficit(term: Term, fuel: int) -> Tuple[ValueDist, Fraction]:
    """
    Big-step lower bound plus the mass that is neither converged nor provably divergent.

    :return: (distribution, deficit) with mass(distribution) + deficit ≤ 1.
    """
    dist = eval_big(term, fuel)
    deficit = 1 - mass(dist) - certain_divergence(term, fuel)

    return dist, max(deficit, Fraction(0))


def eval_stable(term: Term, fuel: int, limit: int = STABLE_FUEL_LIMIT) -> Tuple[ValueDist, Fraction, int]:
    """Doubles fuel until the deficit vanishes or `limit` is passed; returns the last fuel used too."""
    fuel = max(fuel, 1)
    while True:
        dist, deficit = eval_with_deficit(term, fuel)
        if deficit == 0 or fuel * 2 > limit:
            _logger.debug("eval_stable: fuel %d, deficit %s", fuel, deficit)
            return dist, deficit, fuel
        fuel *= 2


def mass_interval(term: Term, fuel: int) -> Interval:
    dist, deficit = eval_with_deficit(term, fuel)
    lo = mass(dist)

    return Interval(lo, lo + deficit)


def dist_to_json(dist: ValueDist, printer: Callable[[Any], str] = pretty) -> Dict[str, Any]:
    support = sorted(((printer(v), p) for v, p in dist.items()), key=lambda vp: (-vp[1], vp[0]))

    return {
        "mass": str(mass(dist)),
        "support": [{"value": v, "prob": str(p)} for v, p in support],
    }


#####################
#      Exports      #
#####################

__all__ = [
    "StepOutcome",
    "ValueDist",
    "certain_divergence",
    "dist_to_json",
    "eval_big",
    "eval_small",
    "eval_stable",
    "eval_with_deficit",
    "is_value",
    "mass",
    "mass_interval",
    "step",
]
