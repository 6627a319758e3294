from dataclasses import fields, replace
from functools import lru_cache
from itertools import count
from typing import Callable, FrozenSet, Iterator, List, Mapping, Optional, Set

from .parser import pretty_type
from .types.errors import PcflTypeError
from .types.syntax import (
    BOOL,
    INT,
    TERM_CLASSES,
    App,
    ArrowType,
    BinOp,
    BoolLit,
    CaseList,
    Choice,
    Cons,
    Context,
    Fix,
    Fst,
    Hole,
    If,
    Lam,
    ListType,
    Nil,
    NumLit,
    Op,
    Pair,
    ProdType,
    Snd,
    Term,
    Type,
    TypingContext,
    Var,
)

CANONICAL_NAMES = ("x", "y", "z", "u", "v", "w")


def children(term: Term) -> Iterator[Term]:
    for f in fields(term):
        value = getattr(term, f.name)
        if isinstance(value, TERM_CLASSES):
            yield value


def map_children(term: Term, fn: Callable[[Term], Term]) -> Term:
    """Rebuilds `term` with `fn` applied to every immediate subterm, binders untouched."""
    changes = {}
    for f in fields(term):
        value = getattr(term, f.name)
        if isinstance(value, TERM_CLASSES):
            changes[f.name] = fn(value)

    return replace(term, **changes) if changes else term


@lru_cache(maxsize=1 << 16)
def free_vars(term: Term) -> FrozenSet[str]:
    if isinstance(term, Var):
        return frozenset((term.name,))
    if isinstance(term, (Lam, Fix)):
        return free_vars(term.body) - {term.binder}
    if isinstance(term, CaseList):
        return (
            free_vars(term.scrutinee)
            | free_vars(term.nil_branch)
            | (free_vars(term.cons_branch) - {term.head, term.tail})
        )

    result: FrozenSet[str] = frozenset()
    for child in children(term):
        result |= free_vars(child)

    return result


def is_closed(term: Term) -> bool:
    return not free_vars(term)


def fresh_name(base: str, avoid: Set[str]) -> str:
    base = base.rstrip("0123456789'") or "x"
    if base not in avoid:
        return base

    i = 1
    while f"{base}{i}" in avoid:
        i += 1

    return f"{base}{i}"


def subst(body: Term, replacement: Term, var: str) -> Term:
    """
    Capture-avoiding substitution of `replacement` for the free occurrences of `var` in `body`.
    Bound variables that would capture a free variable of `replacement` are renamed.
    """
    return _subst(body, replacement, var, free_vars(replacement))


def _subst(term: Term, repl: Term, var: str, repl_fv: FrozenSet[str]) -> Term:
    if var not in free_vars(term):
        return term

    if isinstance(term, Var):
        return repl

    if isinstance(term, (Lam, Fix)):
        binder, body = term.binder, term.body
        if binder in repl_fv:
            new = fresh_name(binder, set(repl_fv | free_vars(body) | {var}))
            body = _subst(body, Var(new), binder, frozenset((new,)))
            binder = new

        return replace(term, binder=binder, body=_subst(body, repl, var, repl_fv))

    if isinstance(term, CaseList):
        scrutinee = _subst(term.scrutinee, repl, var, repl_fv)
        nil_branch = _subst(term.nil_branch, repl, var, repl_fv)
        head, tail, branch = term.head, term.tail, term.cons_branch
        if var not in (head, tail):
            avoid = set(repl_fv | free_vars(branch) | {var, head, tail})
            if head in repl_fv:
                new = fresh_name(head, avoid)
                avoid.add(new)
                branch = _subst(branch, Var(new), head, frozenset((new,)))
                head = new
            if tail in repl_fv:
                new = fresh_name(tail, avoid)
                branch = _subst(branch, Var(new), tail, frozenset((new,)))
                tail = new
            branch = _subst(branch, repl, var, repl_fv)

        return CaseList(scrutinee, nil_branch, head, tail, branch)

    return map_children(term, lambda child: _subst(child, repl, var, repl_fv))


@lru_cache(maxsize=1 << 16)
def canonical(term: Term) -> Term:
    """
    The α-canonical representative of `term`: binders are renamed by binding depth, skipping names
    free in `term`. Two terms are α-equivalent iff their canonical forms are equal.
    """
    taken = free_vars(term)
    names: List[str] = []
    counter = count()

    def name_at(depth: int) -> str:
        while len(names) <= depth:
            i = next(counter)
            base, suffix = divmod(i, len(CANONICAL_NAMES))
            candidate = CANONICAL_NAMES[suffix] + (str(base) if base else "")
            if candidate not in taken:
                names.append(candidate)

        return names[depth]

    def go(t: Term, env: Mapping[str, str], depth: int) -> Term:
        if isinstance(t, Var):
            return Var(env.get(t.name, t.name))
        if isinstance(t, (Lam, Fix)):
            new = name_at(depth)
            return replace(t, binder=new, body=go(t.body, {**env, t.binder: new}, depth + 1))
        if isinstance(t, CaseList):
            head, tail = name_at(depth), name_at(depth + 1)
            return CaseList(
                go(t.scrutinee, env, depth),
                go(t.nil_branch, env, depth),
                head,
                tail,
                go(t.cons_branch, {**env, t.head: head, t.tail: tail}, depth + 2),
            )

        return map_children(t, lambda child: go(child, env, depth))

    return go(term, {}, 0)


def alpha_eq(a: Term, b: Term) -> bool:
    return canonical(a) == canonical(b)


@lru_cache(maxsize=1 << 16)
def term_size(term: Term) -> int:
    return 1 + sum(term_size(child) for child in children(term))


def hole_count(term: Term) -> int:
    if isinstance(term, Hole):
        return 1

    return sum(hole_count(child) for child in children(term))


def subtypes(ty: Type) -> Iterator[Type]:
    yield ty
    if isinstance(ty, ArrowType):
        yield from subtypes(ty.domain)
        yield from subtypes(ty.codomain)
    elif isinstance(ty, ProdType):
        yield from subtypes(ty.left)
        yield from subtypes(ty.right)
    elif isinstance(ty, ListType):
        yield from subtypes(ty.element)


##########
# Typing #
##########


def infer(gamma: TypingContext, term: Term) -> Type:
    """
    Syntax-directed type assignment.

    :param gamma: Typing context, variable name to type.
    :param term: Term to type. Must not contain a hole, use `check_context` for contexts.
    :return: The unique type of `term` under `gamma`.
    """
    if isinstance(term, Var):
        if term.name not in gamma:
            raise PcflTypeError(f"infer: unbound variable {term.name}")
        return gamma[term.name]

    if isinstance(term, NumLit):
        if term.n < 0:
            raise PcflTypeError(f"infer: {term.n} is not a natural number")
        return INT

    if isinstance(term, BoolLit):
        return BOOL

    if isinstance(term, Nil):
        return ListType(term.annot)

    if isinstance(term, Hole):
        raise PcflTypeError("infer: unexpected hole, contexts are typed with check_context")

    return _infer_step(gamma, term, lambda g, t: infer(g, t))


def _infer_step(gamma: TypingContext, term: Term, sub: Callable[[TypingContext, Term], Type]) -> Type:
    """Typing rules for the compound terms, typing subterms through `sub`."""
    if isinstance(term, Pair):
        return ProdType(sub(gamma, term.left), sub(gamma, term.right))

    if isinstance(term, Cons):
        head = sub(gamma, term.head)
        tail = sub(gamma, term.tail)
        if tail != ListType(head):
            raise PcflTypeError(f"infer: cons of {pretty_type(head)} onto {pretty_type(tail)}")
        return tail

    if isinstance(term, Lam):
        return ArrowType(term.annot, sub({**gamma, term.binder: term.annot}, term.body))

    if isinstance(term, Fix):
        if not isinstance(term.annot, ArrowType):
            raise PcflTypeError(f"infer: fix at non-function type {pretty_type(term.annot)}, needs to be a function")
        body = sub({**gamma, term.binder: term.annot}, term.body)
        if body != term.annot:
            raise PcflTypeError(f"infer: fix body has type {pretty_type(body)}, expected {pretty_type(term.annot)}")
        return term.annot

    if isinstance(term, Choice):
        left = sub(gamma, term.left)
        right = sub(gamma, term.right)
        if left != right:
            raise PcflTypeError(f"infer: choice between {pretty_type(left)} and {pretty_type(right)}")
        return left

    if isinstance(term, If):
        if sub(gamma, term.cond) != BOOL:
            raise PcflTypeError("infer: if condition is not a bool")
        then = sub(gamma, term.then)
        orelse = sub(gamma, term.orelse)
        if then != orelse:
            raise PcflTypeError(f"infer: if branches have types {pretty_type(then)} and {pretty_type(orelse)}")
        return then

    if isinstance(term, BinOp):
        if sub(gamma, term.left) != INT or sub(gamma, term.right) != INT:
            raise PcflTypeError(f"infer: operands of {term.op.value} must be int")
        return INT if term.op == Op.ADD else BOOL

    if isinstance(term, (Fst, Snd)):
        pair = sub(gamma, term.term)
        if not isinstance(pair, ProdType):
            raise PcflTypeError(f"infer: projection from non-product {pretty_type(pair)}")
        return pair.left if isinstance(term, Fst) else pair.right

    if isinstance(term, CaseList):
        scrutinee = sub(gamma, term.scrutinee)
        if not isinstance(scrutinee, ListType):
            raise PcflTypeError(f"infer: case on non-list {pretty_type(scrutinee)}")
        if term.head == term.tail:
            raise PcflTypeError(f"infer: case pattern binds {term.head} twice")
        nil_branch = sub(gamma, term.nil_branch)
        cons_branch = sub({**gamma, term.head: scrutinee.element, term.tail: scrutinee}, term.cons_branch)
        if nil_branch != cons_branch:
            raise PcflTypeError(
                f"infer: case branches have types {pretty_type(nil_branch)} and {pretty_type(cons_branch)}"
            )
        return nil_branch

    if isinstance(term, App):
        fun = sub(gamma, term.fun)
        if not isinstance(fun, ArrowType):
            raise PcflTypeError(f"infer: applying a term of non-arrow type {pretty_type(fun)}")
        arg = sub(gamma, term.arg)
        if arg != fun.domain:
            raise PcflTypeError(f"infer: argument has type {pretty_type(arg)}, expected {pretty_type(fun.domain)}")
        return fun.codomain

    raise PcflTypeError(f"infer: unknown term {term!r}")


def check_context(gamma: TypingContext, context: Context, delta: TypingContext, sigma: Type) -> Type:
    """
    Types a one-hole context: returns τ such that Γ ⊢ C(Δ;σ): τ.

    Binders on the path to the hole that are named in Δ discharge that entry and must carry its type;
    any other binder extends Γ. At the hole, Γ and Δ must have disjoint domains and the hole has type σ.
    """
    if hole_count(context) != 1:
        raise PcflTypeError(f"check_context: a context needs exactly one hole, found {hole_count(context)}")

    def bind(g: TypingContext, d: TypingContext, name: str, ty: Type):
        if name in d:
            if d[name] != ty:
                raise PcflTypeError(
                    f"check_context: binder {name} has type {pretty_type(ty)}, the hole expects {pretty_type(d[name])}"
                )
            return g, {k: v for k, v in d.items() if k != name}

        return {**g, name: ty}, d

    def go(g: TypingContext, d: TypingContext, c: Term) -> Type:
        if isinstance(c, Hole):
            clash = sorted(set(g) & set(d))
            if clash:
                raise PcflTypeError(f"check_context: hole-context clash on {', '.join(clash)}")
            return sigma

        if hole_count(c) == 0:
            return infer(g, c)

        if isinstance(c, (Lam, Fix)) and hole_count(c.body):
            if isinstance(c, Fix) and not isinstance(c.annot, ArrowType):
                raise PcflTypeError(f"check_context: fix at non-function type {pretty_type(c.annot)}")
            g2, d2 = bind(g, d, c.binder, c.annot)
            body = go(g2, d2, c.body)
            if isinstance(c, Lam):
                return ArrowType(c.annot, body)
            if body != c.annot:
                raise PcflTypeError(
                    f"check_context: fix body has type {pretty_type(body)}, expected {pretty_type(c.annot)}"
                )
            return c.annot

        if isinstance(c, CaseList) and hole_count(c.cons_branch):
            scrutinee = infer(g, c.scrutinee)
            if not isinstance(scrutinee, ListType):
                raise PcflTypeError(f"check_context: case on non-list {pretty_type(scrutinee)}")
            g2, d2 = bind(g, d, c.head, scrutinee.element)
            g2, d2 = bind(g2, d2, c.tail, scrutinee)
            branch = go(g2, d2, c.cons_branch)
            if infer(g, c.nil_branch) != branch:
                raise PcflTypeError("check_context: case branches disagree")
            return branch

        def sub(g2: TypingContext, t: Term) -> Type:
            return go(g2, d, t) if hole_count(t) else infer(g2, t)

        return _infer_step(g, c, sub)

    return go(dict(gamma), dict(delta), context)


def fill(context: Context, term: Term) -> Term:
    """Replaces the hole by `term`. Plain grafting: binders of the context may capture free variables of `term`."""
    if isinstance(context, Hole):
        return term

    return map_children(context, lambda child: fill(child, term) if hole_count(child) else child)


@lru_cache(maxsize=1 << 14)
def type_of(term: Term) -> Type:
    return infer({}, term)


def closed_type(term: Term, expected: Optional[Type] = None, what: str = "term") -> Type:
    """Types a closed term, optionally checking it against `expected`."""
    ty = type_of(term)
    if expected is not None and ty != expected:
        raise PcflTypeError(f"{what}: has type {pretty_type(ty)}, expected {pretty_type(expected)}")

    return ty


#####################
#      Exports      #
#####################

__all__ = [
    "alpha_eq",
    "canonical",
    "check_context",
    "closed_type",
    "fill",
    "free_vars",
    "fresh_name",
    "hole_count",
    "infer",
    "is_closed",
    "subst",
    "subtypes",
    "term_size",
    "type_of",
]
