import logging
from collections import deque
from fractions import Fraction
from functools import lru_cache
from importlib.metadata import PackageNotFoundError, version
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .base import canonical, subst, subtypes, term_size, type_of
from .evaluate import eval_with_deficit, is_value
from .parser import pretty, pretty_label, pretty_type
from .types.errors import PcflTypeError, ResourceLimitError
from .types.lmc import (
    EVAL,
    FST,
    HD,
    NIL,
    SND,
    TL,
    Label,
    LabelKind,
    LmcFragment,
    LmcState,
    Row,
    StateKind,
)
from .types.syntax import (
    FALSE,
    TRUE,
    App,
    ArrowType,
    BoolLit,
    BoolType,
    Choice,
    Cons,
    Fix,
    IntType,
    Lam,
    ListType,
    Nil,
    NumLit,
    Pair,
    ProdType,
    Term,
    Type,
    Var,
)

_logger = logging.getLogger(__name__)

LABEL_ORDER = {kind: i for i, kind in enumerate(LabelKind)}


def program_state(term: Term, ty: Type) -> LmcState:
    return LmcState(StateKind.Program, canonical(term), ty)


def value_state(term: Term, ty: Type) -> LmcState:
    return LmcState(StateKind.ValueHat, canonical(term), ty)


def type_label(ty: Type) -> Label:
    return Label(LabelKind.Type, ty)


def arg_label(value: Term) -> Label:
    return Label(LabelKind.Arg, canonical(value))


def num_label(k: int) -> Label:
    return Label(LabelKind.Num, k)


def bool_label(b: bool) -> Label:
    return Label(LabelKind.Bool, b)


def label_sort_key(label: Label) -> Tuple[int, int, str]:
    payload = label.payload
    size = term_size(payload) if label.kind == LabelKind.Arg else 0

    return LABEL_ORDER[label.kind], size, pretty_label(label)


########
# Rows #
########


def enabled_labels(state: LmcState, arg_universe: Iterable[Term]) -> List[Label]:
    """The labels whose rows are defined at `state`, in label order."""
    labels = [type_label(state.type)]
    if state.kind == StateKind.Program:
        labels.append(EVAL)
        return sorted(labels, key=label_sort_key)

    term, ty = state.term, state.type
    if isinstance(ty, ArrowType):
        labels.extend(arg_label(w) for w in arg_universe if type_of(w) == ty.domain)
    elif isinstance(term, Pair):
        labels.extend((FST, SND))
    elif isinstance(term, NumLit):
        labels.append(num_label(term.n))
    elif isinstance(term, BoolLit):
        labels.append(bool_label(term.b))
    elif isinstance(term, Nil):
        labels.append(NIL)
    elif isinstance(term, Cons):
        labels.extend((HD, TL))

    return sorted(labels, key=label_sort_key)


def row(state: LmcState, label: Label, fuel: int) -> Tuple[Row, Fraction]:
    """
    One row of the transition matrix together with its deficit, the mass an evaluation could still
    contribute beyond the fuel bound. Undefined rows are empty with no deficit.
    """
    term, ty = state.term, state.type

    if label.kind == LabelKind.Type:
        return ({state: Fraction(1)} if label.payload == ty else {}), Fraction(0)

    if state.kind == StateKind.Program:
        if label != EVAL:
            return {}, Fraction(0)
        dist, deficit = eval_with_deficit(term, fuel)
        return {value_state(v, ty): p for v, p in dist.items()}, deficit

    if label.kind == LabelKind.Arg and isinstance(ty, ArrowType):
        arg = label.payload
        if type_of(arg) != ty.domain:
            return {}, Fraction(0)
        if isinstance(term, Lam):
            return {program_state(subst(term.body, arg, term.binder), ty.codomain): Fraction(1)}, Fraction(0)
        if isinstance(term, Fix):
            unfolded = App(subst(term.body, term, term.binder), arg)
            return {program_state(unfolded, ty.codomain): Fraction(1)}, Fraction(0)

    elif isinstance(ty, ProdType) and isinstance(term, Pair):
        if label == FST:
            return {program_state(term.left, ty.left): Fraction(1)}, Fraction(0)
        if label == SND:
            return {program_state(term.right, ty.right): Fraction(1)}, Fraction(0)

    elif isinstance(ty, ListType):
        if isinstance(term, Nil) and label == NIL:
            return {state: Fraction(1)}, Fraction(0)
        if isinstance(term, Cons):
            if label == HD:
                return {program_state(term.head, ty.element): Fraction(1)}, Fraction(0)
            if label == TL:
                return {program_state(term.tail, ty): Fraction(1)}, Fraction(0)

    elif isinstance(term, NumLit) and label == num_label(term.n):
        return {state: Fraction(1)}, Fraction(0)

    elif isinstance(term, BoolLit) and label == bool_label(term.b):
        return {state: Fraction(1)}, Fraction(0)

    return {}, Fraction(0)


def successors(
    state: LmcState, label: Label, fuel: int, arg_universe: Optional[Iterable[Term]] = None
) -> Dict[LmcState, Fraction]:
    """
    The row of `state` under `label`: Eval rows come from the fuel-bounded big-step semantics,
    every other defined row is deterministic. With an `arg_universe`, arguments outside it have no row.
    """
    if label.kind == LabelKind.Arg and arg_universe is not None:
        if canonical(label.payload) not in {canonical(w) for w in arg_universe}:
            return {}

    return row(state, label, fuel)[0]


###################
# Argument values #
###################


def enumerate_values(ty: Type, size_bound: int) -> Tuple[Term, ...]:
    """
    Closed values of type `ty` with at most `size_bound` syntax nodes, α-canonical and in a
    deterministic order. Integer literals range over 0..size_bound.
    """
    found = sorted(_enumerate(ty, (), size_bound, True), key=term_size)

    return tuple(dict.fromkeys(canonical(t) for t in found if is_value(t)))


@lru_cache(maxsize=1 << 12)
def _enumerate(ty: Type, scope: Tuple[Tuple[str, Type], ...], size: int, values_only: bool) -> Tuple[Term, ...]:
    """Terms of type `ty` over `scope`: variables, literals, constructors, abstractions and choices."""
    if size <= 0:
        return ()

    out: List[Term] = [Var(name) for name, t in scope if t == ty and not _shadowed(scope, name)]

    if isinstance(ty, BoolType):
        out.extend((TRUE, FALSE))
    elif isinstance(ty, IntType):
        out.extend(NumLit(n) for n in range(size + 1))
    elif isinstance(ty, ListType):
        out.append(Nil(ty.element))
        for head_size in range(1, size - 1):
            for head in _enumerate(ty.element, scope, head_size, False):
                if term_size(head) != head_size:
                    continue
                for tail in _enumerate(ty, scope, size - 1 - head_size, False):
                    out.append(Cons(head, tail))
    elif isinstance(ty, ProdType):
        for left_size in range(1, size - 1):
            for left in _enumerate(ty.left, scope, left_size, False):
                if term_size(left) != left_size:
                    continue
                for right in _enumerate(ty.right, scope, size - 1 - left_size, False):
                    out.append(Pair(left, right))
    elif isinstance(ty, ArrowType):
        binder = f"a{len(scope)}"
        inner = scope + ((binder, ty.domain),)
        for body in _enumerate(ty.codomain, inner, size - 1, False):
            out.append(Lam(binder, ty.domain, body))
        if size >= 3:
            rec = f"f{len(scope)}"
            for lam in _enumerate(ty, scope + ((rec, ty),), size - 1, True):
                if isinstance(lam, Lam):
                    out.append(Fix(rec, ty, lam))

    if not values_only and size >= 3:
        bodies = [t for t in out if term_size(t) <= size - 2]
        for i, left in enumerate(bodies):
            for right in bodies[i + 1 :]:
                if term_size(left) + term_size(right) + 1 <= size:
                    out.append(Choice(left, right))

    return tuple(t for t in out if term_size(t) <= size)


def _shadowed(scope: Tuple[Tuple[str, Type], ...], name: str) -> bool:
    return [n for n, _ in scope].count(name) > 1


def arg_universe_for(ty: Type, arg_size: int) -> Tuple[Term, ...]:
    """Argument values for every arrow domain reachable inside `ty`."""
    domains = dict.fromkeys(t.domain for t in subtypes(ty) if isinstance(t, ArrowType))
    universe: List[Term] = []
    for domain in domains:
        universe.extend(enumerate_values(domain, arg_size))

    return tuple(dict.fromkeys(universe))


#############
# Fragments #
#############


def build_fragment(
    roots: Sequence[LmcState],
    fuel: int,
    arg_universe: Iterable[Term],
    depth: int,
    state_cap: int = 100000,
) -> LmcFragment:
    """
    Breadth-first exploration of the chain from `roots`.

    :param roots: Typed program or value states.
    :param fuel: Fuel for every Eval row.
    :param arg_universe: Closed values used as `arg` labels.
    :param depth: States at this many label steps from a root are kept unexpanded, in the frontier.
    :param state_cap: Raise `ResourceLimitError` past this many states.
    """
    universe = tuple(dict.fromkeys(canonical(w) for w in arg_universe))
    for w in universe:
        if not is_value(w):
            raise PcflTypeError(f"build_fragment: argument {pretty(w)} is not a value")
        type_of(w)

    roots = tuple(dict.fromkeys(LmcState(s.kind, canonical(s.term), s.type) for s in roots))
    for s in roots:
        if type_of(s.term) != s.type:
            raise PcflTypeError(f"build_fragment: root {pretty(s.term)} does not have type {pretty_type(s.type)}")

    distance: Dict[LmcState, int] = {s: 0 for s in roots}
    queue = deque(roots)
    enabled: Dict[LmcState, Tuple[Label, ...]] = {}
    transitions: Dict[Tuple[LmcState, Label], Row] = {}
    deficit: Dict[Tuple[LmcState, Label], Fraction] = {}
    frontier = set()

    while queue:
        state = queue.popleft()
        if distance[state] >= depth:
            frontier.add(state)
            continue

        labels = tuple(enabled_labels(state, universe))
        enabled[state] = labels
        for label in labels:
            targets, missing = row(state, label, fuel)
            transitions[(state, label)] = targets
            deficit[(state, label)] = missing
            for target in targets:
                if target not in distance:
                    if len(distance) >= state_cap:
                        raise ResourceLimitError(f"build_fragment: more than {state_cap} states")
                    distance[target] = distance[state] + 1
                    queue.append(target)

    _logger.debug("build_fragment: %d states, %d frontier, depth %d", len(distance), len(frontier), depth)

    return LmcFragment(
        states=tuple(distance),
        roots=roots,
        enabled=enabled,
        transitions=transitions,
        deficit=deficit,
        frontier=frozenset(frontier),
        fuel=fuel,
        depth=depth,
        arg_universe=universe,
    )


def reachable(fragment: LmcFragment, sources: Iterable[LmcState]) -> FrozenSet[LmcState]:
    seen = set(sources)
    queue = deque(seen)
    while queue:
        state = queue.popleft()
        for label in fragment.labels(state):
            for target in fragment.row(state, label):
                if target not in seen:
                    seen.add(target)
                    queue.append(target)

    return frozenset(seen)


def fragment_to_json(fragment: LmcFragment) -> Dict[str, Any]:
    ids = fragment.state_ids()

    try:
        tool_version = version("pcfl")
    except PackageNotFoundError:
        tool_version = "unknown"

    edges = []
    for state in fragment.states:
        for label in fragment.labels(state):
            targets = fragment.row(state, label)
            entry: Dict[str, Any] = {
                "from": ids[state],
                "label": pretty_label(label),
                "to": {ids[t]: str(p) for t, p in targets.items()},
            }
            missing = fragment.row_deficit(state, label)
            if missing:
                entry["deficit"] = str(missing)
            edges.append(entry)

    return {
        "states": [
            {
                "id": ids[s],
                "kind": s.kind.value,
                "term": pretty(s.term),
                "type": pretty_type(s.type),
                "frontier": s in fragment.frontier,
            }
            for s in fragment.states
        ],
        "roots": [ids[s] for s in fragment.roots],
        "edges": edges,
        "fuel": fragment.fuel,
        "depth": fragment.depth,
        "arg_universe": [pretty(w) for w in fragment.arg_universe],
        "tool": {"name": "pcfl", "version": tool_version},
    }


#####################
#      Exports      #
#####################

__all__ = [
    "arg_label",
    "arg_universe_for",
    "bool_label",
    "build_fragment",
    "enabled_labels",
    "enumerate_values",
    "fragment_to_json",
    "label_sort_key",
    "num_label",
    "program_state",
    "reachable",
    "row",
    "successors",
    "type_label",
    "value_state",
]
