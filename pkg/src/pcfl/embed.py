import logging
from fractions import Fraction
from functools import lru_cache
from itertools import count
from typing import Dict, FrozenSet, List, NamedTuple, Set, Union

from .base import fresh_name
from .evaluate import STABLE_FUEL_LIMIT, StepOutcome, eval_stable, is_divergent, mass, run_small
from .types.syntax import (
    App,
    BinOp,
    BoolLit,
    CaseList,
    Choice,
    Cons,
    Fix,
    Fst,
    Hole,
    If,
    Lam,
    Nil,
    NumLit,
    Op,
    Pair,
    Snd,
    Term,
    Var,
)
from .types.testing import Interval
from .types.untyped import UApp, UChoice, ULam, UntypedTerm, UVar

_logger = logging.getLogger(__name__)

UntypedDist = Dict[UntypedTerm, Fraction]

UNTYPED_FUEL_LIMIT = 1 << 14


def _lam(*binders_and_body) -> UntypedTerm:
    *binders, body = binders_and_body
    for binder in reversed(binders):
        body = ULam(binder, body)

    return body


def _app(fun: UntypedTerm, *args: UntypedTerm) -> UntypedTerm:
    for arg in args:
        fun = UApp(fun, arg)

    return fun


def _v(name: str) -> UVar:
    return UVar(name)


@lru_cache(maxsize=1 << 16)
def u_free_vars(term: UntypedTerm) -> FrozenSet[str]:
    if isinstance(term, UVar):
        return frozenset((term.name,))
    if isinstance(term, ULam):
        return u_free_vars(term.body) - {term.binder}
    if isinstance(term, UApp):
        return u_free_vars(term.fun) | u_free_vars(term.arg)

    return u_free_vars(term.left) | u_free_vars(term.right)


def u_subst(body: UntypedTerm, replacement: UntypedTerm, var: str) -> UntypedTerm:
    """Capture-avoiding body[replacement/var]."""
    if isinstance(body, UVar):
        return replacement if body.name == var else body
    if isinstance(body, UApp):
        return UApp(u_subst(body.fun, replacement, var), u_subst(body.arg, replacement, var))
    if isinstance(body, UChoice):
        return UChoice(u_subst(body.left, replacement, var), u_subst(body.right, replacement, var))

    if body.binder == var or var not in u_free_vars(body.body):
        return body
    if body.binder in u_free_vars(replacement):
        renamed = fresh_name(body.binder, set(u_free_vars(replacement) | u_free_vars(body.body) | {var}))
        return ULam(renamed, u_subst(u_subst(body.body, UVar(renamed), body.binder), replacement, var))

    return ULam(body.binder, u_subst(body.body, replacement, var))


@lru_cache(maxsize=1 << 16)
def u_canonical(term: UntypedTerm) -> UntypedTerm:
    """Renames binders by depth to x0, x1, …, skipping free names."""
    free = u_free_vars(term)

    def name_at(depth: int) -> str:
        name = f"x{depth}"
        while name in free:
            name += "'"
        return name

    def go(t: UntypedTerm, env: Dict[str, str], depth: int) -> UntypedTerm:
        if isinstance(t, UVar):
            return UVar(env.get(t.name, t.name))
        if isinstance(t, ULam):
            name = name_at(depth)
            return ULam(name, go(t.body, {**env, t.binder: name}, depth + 1))
        if isinstance(t, UApp):
            return UApp(go(t.fun, env, depth), go(t.arg, env, depth))
        return UChoice(go(t.left, env, depth), go(t.right, env, depth))

    return go(term, {}, 0)


def is_uvalue(term: UntypedTerm) -> bool:
    return isinstance(term, ULam)


###############
# Scott terms #
###############

STAR = _lam("x", _v("x"))
"""⋆, the unit thunk argument"""

TRUE_U = _lam("x", "y", _v("x"))
FALSE_U = _lam("x", "y", _v("y"))
ZERO_U = _lam("s", "z", _v("z"))

_NFIX = _lam("x", "y", _app(_v("y"), _lam("z", _app(_v("x"), _v("x"), _v("y"), _v("z")))))

M_FIX = UApp(_NFIX, _NFIX)
"""Call-by-value fixpoint combinator: M_FIX F ⇒ F (λz. M_FIX F z)"""

SUCC_U = _lam("n", "s", "z", _app(_v("s"), _v("n")))


def _scott_recursion(name: str, step: UntypedTerm) -> UntypedTerm:
    return UApp(M_FIX, ULam(name, step))


PLUS_U = _scott_recursion(
    "p",
    _lam(
        "m",
        "n",
        _app(
            _v("m"),
            _lam("m1", "d", UApp(SUCC_U, _app(_v("p"), _v("m1"), _v("n")))),
            _lam("d", _v("n")),
            STAR,
        ),
    ),
)

LEQ_U = _scott_recursion(
    "le",
    _lam(
        "m",
        "n",
        _app(
            _v("m"),
            _lam(
                "m1",
                "d",
                _app(_v("n"), _lam("n1", "e", _app(_v("le"), _v("m1"), _v("n1"))), _lam("e", FALSE_U), STAR),
            ),
            _lam("d", TRUE_U),
            STAR,
        ),
    ),
)

EQ_U = _scott_recursion(
    "eq",
    _lam(
        "m",
        "n",
        _app(
            _v("m"),
            _lam(
                "m1",
                "d",
                _app(_v("n"), _lam("n1", "e", _app(_v("eq"), _v("m1"), _v("n1"))), _lam("e", FALSE_U), STAR),
            ),
            _lam("d", _app(_v("n"), _lam("n1", "e", FALSE_U), _lam("e", TRUE_U), STAR)),
            STAR,
        ),
    ),
)

OPERATORS = {Op.ADD: PLUS_U, Op.LEQ: LEQ_U, Op.EQ: EQ_U}


def numeral(n: int) -> UntypedTerm:
    term = ZERO_U
    for _ in range(n):
        term = _lam("s", "z", UApp(_v("s"), term))

    return term


#############
# Embedding #
#############


def embed(term: Term) -> UntypedTerm:
    """
    Translates a PCFL⊕ term into untyped Λ⊕ with Scott encodings, dropping type annotations.

    Binders introduced by the translation avoid the free variables of the term.
    """
    names = count()

    def fresh(base: str, avoid: Set[str]) -> str:
        while True:
            name = f"{base}{next(names)}"
            if name not in avoid:
                return name

    def thunk(body: UntypedTerm) -> UntypedTerm:
        return ULam(fresh("d", set(u_free_vars(body))), body)

    def go(t: Term) -> UntypedTerm:
        if isinstance(t, Var):
            return UVar(t.name)
        if isinstance(t, NumLit):
            return numeral(t.n)
        if isinstance(t, BoolLit):
            return TRUE_U if t.b else FALSE_U
        if isinstance(t, Lam):
            return ULam(t.binder, go(t.body))
        if isinstance(t, Choice):
            return UChoice(go(t.left), go(t.right))
        if isinstance(t, App):
            return UApp(go(t.fun), go(t.arg))

        if isinstance(t, Nil):
            x, y = fresh("x", set()), fresh("y", set())
            return _lam(x, y, UApp(_v(x), STAR))

        if isinstance(t, Cons):
            head, tail = go(t.head), go(t.tail)
            avoid = set(u_free_vars(head) | u_free_vars(tail))
            x, y = fresh("x", avoid), fresh("y", avoid)
            return _lam(x, y, _app(_v(y), head, tail))

        if isinstance(t, Pair):
            left, right = thunk(go(t.left)), thunk(go(t.right))
            x = fresh("x", set(u_free_vars(left) | u_free_vars(right)))
            return ULam(x, _app(_v(x), left, right))

        if isinstance(t, Fix):
            body = ULam(t.binder, go(t.body))
            y = fresh("y", set(u_free_vars(body)))
            return ULam(y, _app(M_FIX, body, _v(y)))

        if isinstance(t, If):
            return _app(go(t.cond), thunk(go(t.then)), thunk(go(t.orelse)), STAR)

        if isinstance(t, (Fst, Snd)):
            x, y = fresh("x", set()), fresh("y", set())
            select = _lam(x, y, _v(x) if isinstance(t, Fst) else _v(y))
            return _app(go(t.term), select, STAR)

        if isinstance(t, CaseList):
            cons_branch = _lam(t.head, t.tail, go(t.cons_branch))
            return _app(go(t.scrutinee), thunk(go(t.nil_branch)), cons_branch)

        if isinstance(t, BinOp):
            return _app(OPERATORS[t.op], go(t.left), go(t.right))

        if isinstance(t, Hole):
            raise ValueError("embed: contexts cannot be embedded")

        raise TypeError(f"embed: not a term: {t!r}")

    return go(term)


##############
# Evaluation #
##############


def ustep(term: UntypedTerm) -> Union[List[UntypedTerm], StepOutcome]:
    """Weak call-by-value step: function, then argument, then β. Choices split."""
    if isinstance(term, ULam):
        return StepOutcome.Value
    if isinstance(term, UVar):
        return StepOutcome.Stuck
    if isinstance(term, UChoice):
        return [term.left, term.right]

    fun, arg = term.fun, term.arg
    if not is_uvalue(fun):
        out = ustep(fun)
        if isinstance(out, StepOutcome):
            return StepOutcome.Stuck
        return [UApp(r, arg) for r in out]
    if not is_uvalue(arg):
        out = ustep(arg)
        if isinstance(out, StepOutcome):
            return StepOutcome.Stuck
        return [UApp(fun, r) for r in out]

    return [u_subst(fun.body, arg, fun.binder)]


@lru_cache(maxsize=1 << 10)
def _run(term: UntypedTerm, fuel: int):
    return run_small(term, fuel, ustep, is_uvalue, u_canonical)


def eval_untyped(term: UntypedTerm, fuel: int) -> UntypedDist:
    """Values reached within `fuel` reduction steps along every path, up to α."""
    values, _ = _run(u_canonical(term), fuel)

    return dict(values)


def untyped_mass_interval(term: UntypedTerm, fuel: int) -> Interval:
    """Converged mass, widened by the pending mass not proved divergent."""
    values, pending = _run(u_canonical(term), fuel)
    lo = mass(values)
    open_mass = sum(
        (p for t, p in pending.items() if not is_divergent(t, ustep, is_uvalue, u_canonical)),
        Fraction(0),
    )

    return Interval(lo, lo + open_mass)


class MassComparison(NamedTuple):
    src: Interval
    tgt: Interval
    fuel: int
    """Untyped step fuel reached"""

    @property
    def agree(self) -> bool:
        return self.src.overlaps(self.tgt)


def mass_preservation(term: Term, fuel: int, limit: int = UNTYPED_FUEL_LIMIT) -> MassComparison:
    """
    Convergence mass of `term` against the mass of its embedding, each evaluated with growing fuel
    until exact or out of budget.
    """
    dist, deficit, _ = eval_stable(term, fuel, STABLE_FUEL_LIMIT)
    src = Interval(mass(dist), mass(dist) + deficit)

    untyped = embed(term)
    steps = max(fuel, 1)
    while True:
        tgt = untyped_mass_interval(untyped, steps)
        if tgt.exact or steps * 2 > limit:
            break
        steps *= 2

    _logger.debug("mass_preservation: source %s, target %s at %d steps", src, tgt, steps)

    return MassComparison(src, tgt, steps)


def embed_dist(dist: Dict[Term, Fraction]) -> UntypedDist:
    """Pointwise image of a value distribution under the embedding, up to α."""
    out: UntypedDist = {}
    for value, p in dist.items():
        key = u_canonical(embed(value))
        out[key] = out.get(key, Fraction(0)) + p

    return out


#####################
#      Exports      #
#####################

__all__ = [
    "EQ_U",
    "FALSE_U",
    "LEQ_U",
    "MassComparison",
    "M_FIX",
    "PLUS_U",
    "STAR",
    "TRUE_U",
    "UntypedDist",
    "embed",
    "embed_dist",
    "eval_untyped",
    "is_uvalue",
    "mass_preservation",
    "numeral",
    "u_canonical",
    "u_free_vars",
    "u_subst",
    "untyped_mass_interval",
    "ustep",
]
