from enum import Enum
from fractions import Fraction
from typing import Any, Dict, FrozenSet, NamedTuple, Tuple

from .syntax import Term, Type


class StateKind(str, Enum):
    Program = "program"
    """A typed closed program (M, σ)"""

    ValueHat = "value"
    """A distinguished value (V̂, σ), distinct from the program (V, σ)"""


class LmcState(NamedTuple):
    kind: StateKind
    term: Term
    """α-canonical representative"""
    type: Type


class LabelKind(str, Enum):
    Eval = "eval"
    Type = "ty"
    Arg = "arg"
    Fst = "fst"
    Snd = "snd"
    Hd = "hd"
    Tl = "tl"
    Nil = "nil"
    Num = "num"
    Bool = "bool"


class Label(NamedTuple):
    kind: LabelKind
    payload: Any = None
    """Type for `ty`, closed value for `arg`, natural for `num`, bool for `bool`, otherwise None"""


EVAL = Label(LabelKind.Eval)
FST = Label(LabelKind.Fst)
SND = Label(LabelKind.Snd)
HD = Label(LabelKind.Hd)
TL = Label(LabelKind.Tl)
NIL = Label(LabelKind.Nil)

Row = Dict[LmcState, Fraction]


class LmcFragment(NamedTuple):
    states: Tuple[LmcState, ...]
    """Every explored state, in breadth-first discovery order"""
    roots: Tuple[LmcState, ...]
    enabled: Dict[LmcState, Tuple[Label, ...]]
    """Labels whose rows are defined, per expanded state"""
    transitions: Dict[Tuple[LmcState, Label], Row]
    deficit: Dict[Tuple[LmcState, Label], Fraction]
    frontier: FrozenSet[LmcState]
    """States discovered at the depth bound and left unexpanded"""
    fuel: int
    depth: int
    arg_universe: Tuple[Term, ...]

    def labels(self, state: LmcState) -> Tuple[Label, ...]:
        return self.enabled.get(state, ())

    def row(self, state: LmcState, label: Label) -> Row:
        return self.transitions.get((state, label), {})

    def row_deficit(self, state: LmcState, label: Label) -> Fraction:
        return self.deficit.get((state, label), Fraction(0))

    def state_ids(self) -> Dict[LmcState, str]:
        return {s: f"s{i}" for i, s in enumerate(self.states)}
