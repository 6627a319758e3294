import re
from typing import List, NamedTuple, Optional, Union

from .types.errors import PcflSyntaxError
from .types.lmc import EVAL, FST, HD, NIL, SND, TL, Label, LabelKind
from .types.syntax import (
    BOOL,
    FALSE,
    INT,
    TRUE,
    App,
    ArrowType,
    BinOp,
    BoolLit,
    BoolType,
    CaseList,
    Choice,
    Cons,
    Fix,
    Fst,
    Hole,
    If,
    IntType,
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
    Var,
)
from .types.testing import OMEGA, Conj, Omega, Prefix, Test
from .types.untyped import UApp, UChoice, ULam, UntypedTerm, UVar

KEYWORDS = {"true", "false", "nil", "fix", "if", "then", "else", "case", "of", "fst", "snd", "bool", "int"}

TOKEN_RE = re.compile(
    r"""
    (?P<space>[ \t\r]+)
  | (?P<newline>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<hole>\[\s*[.·]\s*\])
  | (?P<choice>\(\+\)|⊕)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>->|<=|==|::|[\\λ().,:\[\]{}|<>+*])
    """,
    re.VERBOSE,
)

BINDER_STARTS = {"\\", "λ", "fix", "if", "case"}
ATOM_STARTS = {"num", "ident", "hole"}


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0

    while pos < len(text):
        m = TOKEN_RE.match(text, pos)
        if m is None:
            raise PcflSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)

        kind = m.lastgroup
        if kind == "newline":
            line, line_start = line + 1, m.end()
        elif kind not in ("space", "comment"):
            word = m.group()
            if kind == "ident" and word in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, word, line, pos - line_start + 1))
        pos = m.end()

    tokens.append(Token("eof", "", line, pos - line_start + 1))

    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, reason: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)

        return PcflSyntaxError(f"{reason}, found {found}", tok.line, tok.column)

    def at(self, *texts: str) -> bool:
        return self.tok.kind != "eof" and self.tok.text in texts

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True

        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        tok = self.tok
        self.pos += 1

        return tok

    def ident(self) -> str:
        if self.tok.kind != "ident":
            raise self.error("expected an identifier")
        name = self.tok.text
        self.pos += 1

        return name

    def end(self):
        if self.tok.kind != "eof":
            raise self.error("unexpected trailing input")

    #########
    # Types #
    #########

    def type(self) -> Type:
        left = self.prod_type()
        if self.accept("->"):
            return ArrowType(left, self.type())

        return left

    def prod_type(self) -> Type:
        ty = self.atom_type()
        while self.accept("*"):
            ty = ProdType(ty, self.atom_type())

        return ty

    def atom_type(self) -> Type:
        if self.accept("bool"):
            return BOOL
        if self.accept("int"):
            return INT
        if self.accept("["):
            ty = self.type()
            self.expect("]")
            return ListType(ty)
        if self.accept("("):
            ty = self.type()
            self.expect(")")
            return ty

        raise self.error("expected a type")

    #########
    # Terms #
    #########

    def term(self) -> Term:
        if self.at(*BINDER_STARTS):
            return self.binder_form()

        return self.choice()

    def operand(self, level) -> Term:
        if self.at(*BINDER_STARTS):
            return self.binder_form()

        return level()

    def binder_form(self) -> Term:
        if self.accept("\\") or self.accept("λ"):
            name = self.ident()
            self.expect(":")
            annot = self.type()
            self.expect(".")
            return Lam(name, annot, self.term())

        if self.accept("fix"):
            name = self.ident()
            self.expect(":")
            annot = self.type()
            self.expect(".")
            return Fix(name, annot, self.term())

        if self.accept("if"):
            cond = self.term()
            self.expect("then")
            then = self.term()
            self.expect("else")
            return If(cond, then, self.term())

        self.expect("case")
        scrutinee = self.term()
        self.expect("of")
        self.expect("{")
        self.expect("nil")
        self.expect("->")
        nil_branch = self.term()
        self.expect("|")
        head = self.ident()
        self.expect("::")
        tail = self.ident()
        self.expect("->")
        cons_branch = self.term()
        self.expect("}")

        return CaseList(scrutinee, nil_branch, head, tail, cons_branch)

    def choice(self) -> Term:
        term = self.comparison()
        while self.tok.kind == "choice":
            self.pos += 1
            term = Choice(term, self.operand(self.comparison))

        return term

    def comparison(self) -> Term:
        term = self.cons()
        if self.at("<=", "=="):
            op = Op(self.tok.text)
            self.pos += 1
            term = BinOp(op, term, self.operand(self.cons))
            if self.at("<=", "=="):
                raise self.error("comparisons do not associate")

        return term

    def cons(self) -> Term:
        head = self.add()
        if self.accept("::"):
            return Cons(head, self.operand(self.cons))

        return head

    def add(self) -> Term:
        term = self.application()
        while self.accept("+"):
            term = BinOp(Op.ADD, term, self.operand(self.application))

        return term

    def starts_atom(self) -> bool:
        return self.tok.kind in ATOM_STARTS or self.at("(", "true", "false", "nil", "fst", "snd")

    def application(self) -> Term:
        term = self.unary()
        while True:
            if self.starts_atom():
                term = App(term, self.unary())
            elif self.at(*BINDER_STARTS):
                return App(term, self.binder_form())
            else:
                return term

    def unary(self) -> Term:
        if self.accept("fst"):
            return Fst(self.operand(self.unary))
        if self.accept("snd"):
            return Snd(self.operand(self.unary))

        return self.atom()

    def atom(self) -> Term:
        tok = self.tok
        if tok.kind == "num":
            self.pos += 1
            return NumLit(int(tok.text))
        if tok.kind == "hole":
            self.pos += 1
            return Hole()
        if tok.kind == "ident":
            self.pos += 1
            return Var(tok.text)
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return FALSE
        if self.accept("nil"):
            self.expect("[")
            annot = self.type()
            self.expect("]")
            return Nil(annot)
        if self.accept("("):
            first = self.term()
            if self.accept(","):
                second = self.term()
                self.expect(")")
                return Pair(first, second)
            self.expect(")")
            return first

        raise self.error("expected a term")

    ###########
    # Untyped #
    ###########

    def untyped(self) -> UntypedTerm:
        if self.accept("\\") or self.accept("λ"):
            name = self.ident()
            self.expect(".")
            return ULam(name, self.untyped())

        term = self.untyped_app()
        while self.tok.kind == "choice":
            self.pos += 1
            right = self.untyped() if self.at("\\", "λ") else self.untyped_app()
            term = UChoice(term, right)

        return term

    def untyped_app(self) -> UntypedTerm:
        term = self.untyped_atom()
        while self.tok.kind == "ident" or self.at("(", "\\", "λ"):
            if self.at("\\", "λ"):
                return UApp(term, self.untyped())
            term = UApp(term, self.untyped_atom())

        return term

    def untyped_atom(self) -> UntypedTerm:
        if self.tok.kind == "ident":
            name = self.tok.text
            self.pos += 1
            return UVar(name)
        if self.accept("("):
            term = self.untyped()
            self.expect(")")
            return term

        raise self.error("expected an untyped term")

    #########
    # Tests #
    #########

    def test(self) -> Test:
        if self.tok.kind == "ident" and self.tok.text == "w":
            self.pos += 1
            return OMEGA

        if self.accept("<"):
            tests = [self.test()]
            while self.accept(","):
                tests.append(self.test())
            self.expect(">")
            if len(tests) < 2:
                raise self.error("a conjunction needs at least two tests")
            return Conj(tuple(tests))

        label = self.label()
        self.expect(".")

        return Prefix(label, self.test())

    def label(self) -> Label:
        tok = self.tok
        word = tok.text
        self.pos += 1
        simple = {"eval": EVAL, "fst": FST, "snd": SND, "hd": HD, "tl": TL, "nil": NIL}
        if word in simple:
            return simple[word]

        if word in ("arg", "num", "bool", "ty"):
            self.expect("(")
            if word == "arg":
                payload = self.term()
                label = Label(LabelKind.Arg, payload)
            elif word == "num":
                if self.tok.kind != "num":
                    raise self.error("expected a natural number")
                label = Label(LabelKind.Num, int(self.tok.text))
                self.pos += 1
            elif word == "bool":
                if not self.at("true", "false"):
                    raise self.error("expected true or false")
                label = Label(LabelKind.Bool, self.tok.text == "true")
                self.pos += 1
            else:
                label = Label(LabelKind.Type, self.type())
            self.expect(")")
            return label

        raise self.error("expected a test", tok)


def parse_type(text: str) -> Type:
    p = _Parser(text)
    ty = p.type()
    p.end()

    return ty


def parse_term(text: str) -> Term:
    """
    Parses a term or a context (a term with `[.]` holes).

    :param text: Source text in the surface grammar, `#` starts a comment.
    :return: The abstract syntax tree.
    """
    p = _Parser(text)
    term = p.term()
    p.end()

    return term


def parse_test(text: str) -> Test:
    p = _Parser(text)
    test = p.test()
    p.end()

    return test


def parse_untyped(text: str) -> UntypedTerm:
    p = _Parser(text)
    term = p.untyped()
    p.end()

    return term


def parse(text: str, kind: str = "term") -> Union[Term, Type, Test, UntypedTerm]:
    """
    :param kind: One of "term", "type", "test", "untyped".
    """
    parsers = {"term": parse_term, "type": parse_type, "test": parse_test, "untyped": parse_untyped}
    if kind not in parsers:
        raise ValueError(f"parse: unknown kind {kind!r}")

    return parsers[kind](text)


def parse_typing_context(text: str) -> dict:
    """Parses `x:bool, f:int -> int` into a typing context."""
    p = _Parser(text)
    gamma = {}
    while p.tok.kind != "eof":
        name = p.ident()
        if name in gamma:
            raise p.error(f"variable {name} bound twice")
        p.expect(":")
        gamma[name] = p.type()
        if not p.accept(","):
            break
    p.end()

    return gamma


############
# Printing #
############


def pretty_type(ty: Type, level: int = 0) -> str:
    if isinstance(ty, BoolType):
        return "bool"
    if isinstance(ty, IntType):
        return "int"
    if isinstance(ty, ListType):
        return f"[{pretty_type(ty.element)}]"
    if isinstance(ty, ProdType):
        text = f"{pretty_type(ty.left, 1)} * {pretty_type(ty.right, 2)}"
        return f"({text})" if level > 1 else text

    text = f"{pretty_type(ty.domain, 1)} -> {pretty_type(ty.codomain, 0)}"

    return f"({text})" if level > 0 else text


# precedence levels, loosest first
BINDER, CHOICE, COMPARE, CONS, ADD, APP, UNARY, ATOM = range(8)


def pretty(term: Term, level: int = BINDER) -> str:
    """Prints a term or context so that `parse_term` reads it back."""

    def wrap(text: str, own: int) -> str:
        return f"({text})" if own < level else text

    if isinstance(term, Var):
        return term.name
    if isinstance(term, NumLit):
        return str(term.n)
    if isinstance(term, BoolLit):
        return "true" if term.b else "false"
    if isinstance(term, Nil):
        return f"nil[{pretty_type(term.annot)}]"
    if isinstance(term, Hole):
        return "[.]"
    if isinstance(term, Pair):
        return f"({pretty(term.left)}, {pretty(term.right)})"
    if isinstance(term, Lam):
        return wrap(f"\\{term.binder}:{pretty_type(term.annot)}. {pretty(term.body)}", BINDER)
    if isinstance(term, Fix):
        return wrap(f"fix {term.binder}:{pretty_type(term.annot)}. {pretty(term.body)}", BINDER)
    if isinstance(term, If):
        return wrap(f"if {pretty(term.cond)} then {pretty(term.then)} else {pretty(term.orelse)}", BINDER)
    if isinstance(term, CaseList):
        text = (
            f"case {pretty(term.scrutinee)} of {{ nil -> {pretty(term.nil_branch)} "
            f"| {term.head}::{term.tail} -> {pretty(term.cons_branch)} }}"
        )
        return wrap(text, BINDER)
    if isinstance(term, Choice):
        return wrap(f"{pretty(term.left, CHOICE)} (+) {pretty(term.right, COMPARE)}", CHOICE)
    if isinstance(term, BinOp):
        if term.op == Op.ADD:
            return wrap(f"{pretty(term.left, ADD)} + {pretty(term.right, APP)}", ADD)
        return wrap(f"{pretty(term.left, CONS)} {term.op.value} {pretty(term.right, CONS)}", COMPARE)
    if isinstance(term, Cons):
        return wrap(f"{pretty(term.head, ADD)} :: {pretty(term.tail, CONS)}", CONS)
    if isinstance(term, App):
        return wrap(f"{pretty(term.fun, APP)} {pretty(term.arg, UNARY)}", APP)
    if isinstance(term, Fst):
        return wrap(f"fst {pretty(term.term, UNARY)}", UNARY)
    if isinstance(term, Snd):
        return wrap(f"snd {pretty(term.term, UNARY)}", UNARY)

    raise TypeError(f"pretty: not a term: {term!r}")


def pretty_label(label: Label) -> str:
    if label.kind == LabelKind.Arg:
        return f"arg({pretty(label.payload)})"
    if label.kind == LabelKind.Num:
        return f"num({label.payload})"
    if label.kind == LabelKind.Bool:
        return f"bool({'true' if label.payload else 'false'})"
    if label.kind == LabelKind.Type:
        return f"ty({pretty_type(label.payload)})"

    return label.kind.value


def pretty_test(test: Test) -> str:
    if isinstance(test, Omega):
        return "w"
    if isinstance(test, Prefix):
        return f"{pretty_label(test.label)}.{pretty_test(test.rest)}"

    return "<" + ", ".join(pretty_test(t) for t in test.tests) + ">"


# untyped levels
U_LAM, U_CHOICE, U_APP, U_ATOM = range(4)


def pretty_untyped(term: UntypedTerm, level: int = U_LAM) -> str:
    """Prints `\\x. M`, juxtaposition and `(+)`."""
    if isinstance(term, UVar):
        return term.name
    if isinstance(term, ULam):
        text, own = f"\\{term.binder}. {pretty_untyped(term.body)}", U_LAM
    elif isinstance(term, UChoice):
        text, own = f"{pretty_untyped(term.left, U_CHOICE)} (+) {pretty_untyped(term.right, U_APP)}", U_CHOICE
    else:
        text, own = f"{pretty_untyped(term.fun, U_APP)} {pretty_untyped(term.arg, U_ATOM)}", U_APP

    return f"({text})" if own < level else text


#####################
#      Exports      #
#####################

__all__ = [
    "parse",
    "parse_term",
    "parse_test",
    "parse_type",
    "parse_typing_context",
    "parse_untyped",
    "pretty",
    "pretty_label",
    "pretty_test",
    "pretty_type",
    "pretty_untyped",
    "tokenize",
]
