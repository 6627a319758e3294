from enum import Enum
from typing import Any, Dict, NamedTuple, Optional, Tuple

from .syntax import Term
from .testing import Interval, Test


class Config(NamedTuple):
    fuel: int = 32
    """Derivation depth granted to every big-step evaluation"""
    arg_size: int = 2
    """AST size bound of the values used as `arg` labels"""
    depth: int = 6
    """Label steps explored from the roots of a fragment"""
    test_depth: int = 4
    """Prefix nesting at which the distinguishing-test search starts"""
    state_cap: int = 100000
    """Maximum number of fragment states, also bounds the number of search candidates"""

    def validate(self):
        for name, value in self._asdict().items():
            if not isinstance(value, int) or value <= 0:
                raise ValueError(f"Config: '{name}' must be a positive integer, got {value!r}")

        return self

    def as_dict(self) -> Dict[str, int]:
        return dict(self._asdict())


class VerdictKind(str, Enum):
    Equivalent = "equivalent_up_to_bound"
    NotEquivalent = "not_equivalent"
    Unresolved = "unresolved"
    """The bounded partition separates the roots but no sound witness was found"""


class Verdict(NamedTuple):
    kind: VerdictKind
    config: Config
    arg_universe: Tuple[Term, ...] = ()
    witness: Optional[Test] = None
    p_left: Optional[Interval] = None
    p_right: Optional[Interval] = None
    closure: Optional[Dict[str, Term]] = None
    """Γ-closure under which an open pair was separated"""

    @property
    def equivalent(self) -> bool:
        return self.kind == VerdictKind.Equivalent


class SpotCheckRow(NamedTuple):
    context: Term
    mass_left: Optional[Interval] = None
    mass_right: Optional[Interval] = None
    leq: Optional[bool] = None
    """mass_left ≤ mass_right is not refuted"""
    dist_left: Optional[Dict[str, str]] = None
    dist_right: Optional[Dict[str, str]] = None
    error: Optional[str] = None

    def to_json(self, context_text: str) -> Dict[str, Any]:
        if self.error is not None:
            return {"context": context_text, "error": self.error}

        return {
            "context": context_text,
            "mass_left": self.mass_left.to_json(),
            "mass_right": self.mass_right.to_json(),
            "leq": self.leq,
            "dist_left": self.dist_left,
            "dist_right": self.dist_right,
        }
