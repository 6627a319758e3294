from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Union

#########
# Types #
#########


@dataclass(frozen=True)
class BoolType:
    pass


@dataclass(frozen=True)
class IntType:
    pass


@dataclass(frozen=True)
class ArrowType:
    domain: Type
    codomain: Type


@dataclass(frozen=True)
class ProdType:
    left: Type
    right: Type


@dataclass(frozen=True)
class ListType:
    element: Type


Type = Union[BoolType, IntType, ArrowType, ProdType, ListType]

BOOL = BoolType()
INT = IntType()

TypingContext = Dict[str, Type]
"""Finite partial map from variable names to types (Γ, Δ)"""


#########
# Terms #
#########


class Op(str, Enum):
    ADD = "+"
    LEQ = "<="
    EQ = "=="


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class NumLit:
    n: int


@dataclass(frozen=True)
class BoolLit:
    b: bool


@dataclass(frozen=True)
class Nil:
    annot: Type
    """Element type of the empty list"""


@dataclass(frozen=True)
class Pair:
    left: Term
    right: Term


@dataclass(frozen=True)
class Cons:
    head: Term
    tail: Term


@dataclass(frozen=True)
class Lam:
    binder: str
    annot: Type
    body: Term


@dataclass(frozen=True)
class Fix:
    binder: str
    annot: Type
    """Type of the recursive binder, always an arrow"""
    body: Term


@dataclass(frozen=True)
class Choice:
    left: Term
    right: Term


@dataclass(frozen=True)
class If:
    cond: Term
    then: Term
    orelse: Term


@dataclass(frozen=True)
class BinOp:
    op: Op
    left: Term
    right: Term


@dataclass(frozen=True)
class Fst:
    term: Term


@dataclass(frozen=True)
class Snd:
    term: Term


@dataclass(frozen=True)
class CaseList:
    scrutinee: Term
    nil_branch: Term
    head: str
    tail: str
    cons_branch: Term


@dataclass(frozen=True)
class App:
    fun: Term
    arg: Term


@dataclass(frozen=True)
class Hole:
    """The unique hole of a context"""


Term = Union[Var, NumLit, BoolLit, Nil, Pair, Cons, Lam, Fix, Choice, If, BinOp, Fst, Snd, CaseList, App, Hole]
Context = Term
"""A term containing exactly one `Hole`"""

TERM_CLASSES = (Var, NumLit, BoolLit, Nil, Pair, Cons, Lam, Fix, Choice, If, BinOp, Fst, Snd, CaseList, App, Hole)

TRUE = BoolLit(True)
FALSE = BoolLit(False)
