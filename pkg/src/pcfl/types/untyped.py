from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class UVar:
    name: str


@dataclass(frozen=True)
class ULam:
    binder: str
    body: UntypedTerm


@dataclass(frozen=True)
class UApp:
    fun: UntypedTerm
    arg: UntypedTerm


@dataclass(frozen=True)
class UChoice:
    left: UntypedTerm
    right: UntypedTerm


UntypedTerm = Union[UVar, ULam, UApp, UChoice]
