import json
import logging
from fractions import Fraction
from functools import lru_cache
from importlib.resources import files
from typing import Any, Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from .base import check_context, closed_type, fill
from .equivalence import check_equiv
from .evaluate import eval_small, eval_stable, eval_with_deficit, mass
from .lmc import build_fragment, enumerate_values, program_state
from .parser import parse_term, parse_test, parse_type, pretty, pretty_type
from .testing import compile_test, labels_of, prefix_depth, success_prob
from .types.errors import PcflError
from .types.lmc import EVAL, FST, HD, NIL, SND, TL, Label, LabelKind
from .types.misc import Config, SpotCheckRow
from .types.syntax import ArrowType, BoolType, Context, IntType, ListType, ProdType, Term, Type
from .types.testing import OMEGA, Conj, Interval, Prefix, Test

_logger = logging.getLogger(__name__)

PROGRAMS = files("pcfl") / "programs"

GROUND_TYPES = (BoolType, IntType)


@lru_cache(maxsize=None)
def load_manifest() -> Dict[str, Any]:
    return json.loads((PROGRAMS / "manifest.json").read_text(encoding="utf-8"))


def program_names() -> List[str]:
    return list(load_manifest()["programs"])


@lru_cache(maxsize=None)
def load_program(name: str) -> Term:
    """Parses a shipped program by name, `exp_fst` for `exp_fst.pcfl`."""
    resource = PROGRAMS / f"{name}.pcfl"
    if not resource.is_file():
        raise FileNotFoundError(f"load_program: no program named {name!r}")

    return parse_term(resource.read_text(encoding="utf-8"))


def program_type(name: str) -> Type:
    return parse_type(load_manifest()["programs"][name])


def _dist_text(dist: Dict[Term, Fraction]) -> Dict[str, str]:
    return {pretty(v): str(p) for v, p in sorted(dist.items(), key=lambda vp: pretty(vp[0]))}


##############
# Spot check #
##############


def ctx_spot_check(
    left: Term, right: Term, sigma: Type, contexts: Sequence[Context], fuel: int
) -> List[SpotCheckRow]:
    """
    Fills every context with both terms and compares convergence masses.

    A context must have type (∅;σ) → γ with γ ground; otherwise its row carries the error.
    `leq` holds unless the left mass is certainly above the right one.
    """
    rows = []
    for context in contexts:
        try:
            ground = check_context({}, context, {}, sigma)
            if not isinstance(ground, GROUND_TYPES):
                raise PcflError(f"ctx_spot_check: context has type {pretty_type(ground)}, which is not ground")
        except PcflError as e:
            rows.append(SpotCheckRow(context, error=str(e)))
            continue

        dist_left, deficit_left = eval_with_deficit(fill(context, left), fuel)
        dist_right, deficit_right = eval_with_deficit(fill(context, right), fuel)
        mass_left = Interval(mass(dist_left), mass(dist_left) + deficit_left)
        mass_right = Interval(mass(dist_right), mass(dist_right) + deficit_right)

        rows.append(
            SpotCheckRow(
                context,
                mass_left=mass_left,
                mass_right=mass_right,
                leq=mass_left.lo <= mass_right.hi,
                dist_left=_dist_text(dist_left),
                dist_right=_dist_text(dist_right),
            )
        )

    return rows


def _random_test(rng: np.random.Generator, sigma: Type, depth: int, arg_size: int, program: bool) -> Test:
    """A test that follows the shape of `sigma`: eval at programs, a fitting observation at values."""
    if depth <= 0 or rng.random() < 0.15:
        return OMEGA

    if program:
        return Prefix(EVAL, _random_test(rng, sigma, depth - 1, arg_size, False))

    if depth >= 2 and rng.random() < 0.25:
        return Conj(tuple(_random_test(rng, sigma, depth - 1, arg_size, False) for _ in range(2)))

    if isinstance(sigma, ArrowType):
        values = enumerate_values(sigma.domain, arg_size)
        if not values:
            return OMEGA
        arg = values[int(rng.integers(len(values)))]
        return Prefix(Label(LabelKind.Arg, arg), _random_test(rng, sigma.codomain, depth - 1, arg_size, True))

    if isinstance(sigma, ProdType):
        if rng.random() < 0.5:
            return Prefix(FST, _random_test(rng, sigma.left, depth - 1, arg_size, True))
        return Prefix(SND, _random_test(rng, sigma.right, depth - 1, arg_size, True))

    if isinstance(sigma, ListType):
        pick = int(rng.integers(3))
        if pick == 0:
            return Prefix(HD, _random_test(rng, sigma.element, depth - 1, arg_size, True))
        if pick == 1:
            return Prefix(TL, _random_test(rng, sigma, depth - 1, arg_size, True))
        return Prefix(NIL, _random_test(rng, sigma, depth - 1, arg_size, False))

    if isinstance(sigma, IntType):
        k = int(rng.integers(arg_size + 1))
        return Prefix(Label(LabelKind.Num, k), _random_test(rng, sigma, depth - 1, arg_size, False))

    b = bool(rng.integers(2))
    return Prefix(Label(LabelKind.Bool, b), _random_test(rng, sigma, depth - 1, arg_size, False))


def sample_contexts(
    sigma: Type, count: int, seed: int = 0, arg_size: int = 2, max_depth: int = 6
) -> List[Context]:
    """
    Program contexts compiled from random tests along `sigma`, deduplicated, the always-succeeding
    context first. Deterministic for a given seed.
    """
    rng = np.random.default_rng(seed)
    always, _ = compile_test(OMEGA, sigma)
    contexts = {pretty(always): always}

    for _ in range(count * 20):
        if len(contexts) >= count:
            break
        test = _random_test(rng, sigma, max_depth, arg_size, True)
        context, _ = compile_test(test, sigma)
        contexts.setdefault(pretty(context), context)

    return list(contexts.values())


############
# Manifest #
############


class CorpusResult(NamedTuple):
    kind: str
    name: str
    ok: bool
    detail: Dict[str, Any]

    def to_json(self) -> Dict[str, Any]:
        return {"kind": self.kind, "name": self.name, "ok": self.ok, **self.detail}


def _check_eval(entry: Dict[str, Any]) -> CorpusResult:
    name = entry["program"]
    term = load_program(name)
    closed_type(term, program_type(name), name)

    dist, deficit, fuel = eval_stable(term, entry["fuel"])
    found = {pretty(v): p for v, p in dist.items()}
    ok = True
    if "mass" in entry:
        ok &= mass(dist) == Fraction(entry["mass"])
    for value, p in entry.get("probabilities", {}).items():
        ok &= found.get(value, Fraction(0)) == Fraction(p)

    # big-step and small-step agree once the big-step result is stable
    agree = deficit != 0 or eval_small(term, 1 << 12) == dist
    detail = {"mass": str(mass(dist)), "deficit": str(deficit), "fuel": fuel, "small_step_agrees": agree}

    return CorpusResult("eval", name, ok and agree, detail)


def _check_equiv(entry: Dict[str, Any], cfg: Config) -> CorpusResult:
    left, right = entry["left"], entry["right"]
    verdict = check_equiv(load_program(left), load_program(right), program_type(left), cfg)
    detail = {"verdict": verdict.kind.value, "expected": entry["verdict"]}

    return CorpusResult("equiv", f"{left} {right}", verdict.kind.value == entry["verdict"], detail)


def _check_witness(entry: Dict[str, Any], cfg: Config) -> CorpusResult:
    left, right = entry["left"], entry["right"]
    sigma = program_type(left)
    test = parse_test(entry["test"])
    universe = [label.payload for label in labels_of(test) if label.kind == LabelKind.Arg]
    roots = [program_state(load_program(left), sigma), program_state(load_program(right), sigma)]
    fragment = build_fragment(roots, cfg.fuel, universe, prefix_depth(test) + 1, cfg.state_cap)

    p_left = success_prob(fragment, roots[0], test)
    p_right = success_prob(fragment, roots[1], test)
    expected = Interval.point(Fraction(entry["p_left"])), Interval.point(Fraction(entry["p_right"]))
    ok = (p_left, p_right) == expected

    return CorpusResult("witness", f"{left} {right}", ok, {"p_left": p_left.to_json(), "p_right": p_right.to_json()})


def _check_spots(entry: Dict[str, Any], cfg: Config) -> CorpusResult:
    left, right = entry["left"], entry["right"]
    sigma = program_type(left)
    if "contexts" in entry:
        contexts = [parse_term(text) for text in entry["contexts"]]
    else:
        contexts = sample_contexts(sigma, entry["samples"], entry.get("seed", 0), cfg.arg_size)

    rows = ctx_spot_check(load_program(left), load_program(right), sigma, contexts, cfg.fuel)
    ok = all(row.error is None for row in rows)

    for row, expected in zip(rows, entry.get("expected", [])):
        ok &= row.mass_left == Interval.point(Fraction(expected["mass_left"]))
        ok &= row.mass_right == Interval.point(Fraction(expected["mass_right"]))
        ok &= row.dist_left == expected["dist_left"] and row.dist_right == expected["dist_right"]
    if "leq" in entry:
        ok &= all(row.leq == entry["leq"] for row in rows if row.error is None)

    detail = {"contexts": len(rows), "rows": [row.to_json(pretty(row.context)) for row in rows]}

    return CorpusResult("spot_check", f"{left} {right}", ok, detail)


def run_manifest(cfg: Config = Config(), kinds: Optional[Sequence[str]] = None) -> List[CorpusResult]:
    """Runs every manifest entry, or only those of the given kinds."""
    manifest = load_manifest()
    cfg = cfg.validate()
    checks = {
        "eval": _check_eval,
        "equiv": lambda e: _check_equiv(e, cfg),
        "witness": lambda e: _check_witness(e, cfg),
        "spot_check": lambda e: _check_spots(e, cfg),
    }

    results = []
    for kind, check in checks.items():
        if kinds is not None and kind not in kinds:
            continue
        for entry in manifest.get(kind, []):
            result = check(entry)
            _logger.info("corpus: %s %s %s", kind, result.name, "ok" if result.ok else "FAILED")
            results.append(result)

    return results


#####################
#      Exports      #
#####################

__all__ = [
    "CorpusResult",
    "ctx_spot_check",
    "load_manifest",
    "load_program",
    "program_names",
    "program_type",
    "run_manifest",
    "sample_contexts",
]
