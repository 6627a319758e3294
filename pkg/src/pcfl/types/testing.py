from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Tuple, Union

from .lmc import Label


@dataclass(frozen=True)
class Omega:
    """ω, the test that always succeeds"""


@dataclass(frozen=True)
class Prefix:
    label: Label
    rest: Test


@dataclass(frozen=True)
class Conj:
    tests: Tuple[Test, ...]
    """Independent copies, at least two"""


Test = Union[Omega, Prefix, Conj]

OMEGA = Omega()


class Interval(NamedTuple):
    lo: Fraction
    hi: Fraction

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def disjoint(self, other: Interval) -> bool:
        return self.lo > other.hi or other.lo > self.hi

    def overlaps(self, other: Interval) -> bool:
        return not self.disjoint(other)

    def to_json(self):
        if self.exact:
            return str(self.lo)

        return [str(self.lo), str(self.hi)]

    def __str__(self) -> str:
        if self.exact:
            return str(self.lo)

        return f"[{self.lo}, {self.hi}]"

    @classmethod
    def point(cls, value: Fraction) -> Interval:
        return cls(value, value)


ONE = Interval(Fraction(1), Fraction(1))
ZERO = Interval(Fraction(0), Fraction(0))
UNKNOWN = Interval(Fraction(0), Fraction(1))
