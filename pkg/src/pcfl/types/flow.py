from fractions import Fraction
from itertools import combinations
from typing import Any, Dict, FrozenSet, List, NamedTuple, Tuple

Subset = FrozenSet[int]


def nonempty_subsets(n: int) -> List[Subset]:
    """Nonempty subsets of {1..n}, by size then lexicographically"""
    return [frozenset(c) for k in range(1, n + 1) for c in combinations(range(1, n + 1), k)]


def subset_key(subset: Subset) -> str:
    return ",".join(str(i) for i in sorted(subset))


def parse_subset_key(key: str) -> Subset:
    return frozenset(int(i) for i in key.split(",") if i.strip())


class ProbAssignment(NamedTuple):
    p: Tuple[Fraction, ...]
    """p_1 .. p_n, stored 0-based"""
    r: Dict[Subset, Fraction]
    """r_I for nonempty I ⊆ {1..n}; missing subsets count as 0"""

    @property
    def n(self) -> int:
        return len(self.p)

    def p_of(self, i: int) -> Fraction:
        return self.p[i - 1]

    def r_of(self, subset: Subset) -> Fraction:
        return self.r.get(subset, Fraction(0))

    def violated_by(self, subset: Subset) -> bool:
        demand = sum((self.p_of(i) for i in subset), Fraction(0))
        supply = sum((w for j, w in self.r.items() if j & subset), Fraction(0))

        return demand > supply

    def to_json(self) -> Dict[str, Any]:
        entries = sorted(self.r.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))

        return {"p": [str(x) for x in self.p], "r": {subset_key(i): str(w) for i, w in entries}}

    @classmethod
    def from_json(cls, obj: Dict[str, Any]):
        p = tuple(Fraction(x) for x in obj["p"])
        r = {parse_subset_key(k): Fraction(v) for k, v in obj.get("r", {}).items()}

        for subset in r:
            if not subset or not subset <= set(range(1, len(p) + 1)):
                raise ValueError(
                    f"ProbAssignment: subset {subset_key(subset)!r} is not a nonempty subset of 1..{len(p)}"
                )

        for x in (*p, *r.values()):
            if not 0 <= x <= 1:
                raise ValueError(f"ProbAssignment: entry {x} is outside [0, 1]")

        return cls(p=p, r=r)


class Disentangling(NamedTuple):
    s: Dict[Tuple[int, Subset], Fraction]
    """s_{k,I} for k ∈ I; missing entries count as 0"""

    def s_of(self, k: int, subset: Subset) -> Fraction:
        return self.s.get((k, subset), Fraction(0))

    def to_json(self) -> Dict[str, Any]:
        entries = sorted(self.s.items(), key=lambda kv: (kv[0][0], len(kv[0][1]), sorted(kv[0][1])))

        return {"s": {f"{k}|{subset_key(i)}": str(w) for (k, i), w in entries if w}}


class InvalidAssignment(NamedTuple):
    cut: Subset
    """A set I whose demand exceeds the supply of the sets meeting it"""

    def to_json(self) -> Dict[str, Any]:
        return {"invalid_cut": sorted(self.cut)}
