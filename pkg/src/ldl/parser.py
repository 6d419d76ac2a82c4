"""Lexer and recursive-descent parser for ``.ldl`` specification files.

Grammar (loosest binding first)::

    file     ::= decl*                      -- at least one "let"; the last is the root
    decl     ::= "network" IDENT ":" "Vec" INT "->" "Vec" INT
               | "let" IDENT ":" type "=" expr
    type     ::= simple ["->" type]
    simple   ::= "Real" | "Bool" | "Vec" INT | "Index" INT | "(" type ")"
    expr     ::= binder | implies
    binder   ::= ("lam" | "forall" | "exists") "(" IDENT ":" type ")" "." expr
               | "let" "(" IDENT ":" type ")" "=" expr "in" expr
    implies  ::= or ["=>" implies]
    or       ::= and {"or" and}
    and      ::= cmp {"and" cmp}
    cmp      ::= sum [("==" | "!=" | "<=" | ">=" | "<" | ">") sum]
    sum      ::= prod {("+" | "-") prod}
    prod     ::= unary {"*" unary}
    unary    ::= ("-" | "not") unary | lookup
    lookup   ::= app {"!" app}
    app      ::= atom {atom}
    atom     ::= IDENT | INT | REAL | "True" | "False" | "(" expr ")"
               | "(" OP ")" | "[" [expr {"," expr}] "]" | binder

Binder forms extend as far right as possible.  A binder used as an
argument of an application must be parenthesised.  ``a - b`` is sugar for
``a + (-b)``.  Integer literals are Index constants and reals need a ``.``
or an exponent.  A ``-`` glued to a digit, in a position where no operand
just ended, is part of a negative real literal.  ``--`` starts a comment.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import ast as A


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(where + message)


class UndeclaredName(ParseError):
    def __init__(self, name: str, line: int = 0, col: int = 0):
        self.name = name
        super().__init__(f"undeclared name '{name}' (no binder, definition or network)", line, col)


KEYWORDS = {
    "network", "let", "in", "lam", "forall", "exists", "True", "False",
    "and", "or", "not", "Real", "Bool", "Vec", "Index",
}
SYMBOLS = [
    "=>", "->", "==", "!=", "<=", ">=", "<", ">", "!", "+", "-", "*",
    "(", ")", "[", "]", ",", ".", ":", "=",
]

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+|\n)
  | (?P<comment>--[^\n]*)
  | (?P<real>-?(?:\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+))
  | (?P<int>-?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>"""
    + "|".join(re.escape(s) for s in SYMBOLS)
    + r""")
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str  # ident, kw, int, real, sym, eof
    text: str
    line: int
    col: int


def _ends_operand(tok: Optional[Token]) -> bool:
    if tok is None:
        return False
    if tok.kind in ("ident", "int", "real"):
        return True
    if tok.kind == "kw":
        return tok.text in ("True", "False")
    return tok.text in (")", "]")


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        value = m.group()
        col = pos - line_start + 1
        if kind in ("real", "int") and value.startswith("-") and _ends_operand(
            tokens[-1] if tokens else None
        ):
            # binary minus: emit the operator alone and re-lex the digits
            tokens.append(Token("sym", "-", line, col))
            pos += 1
            continue
        pos = m.end()
        if kind == "ws":
            if value == "\n":
                line += 1
                line_start = pos
            continue
        if kind == "comment":
            continue
        if kind == "ident" and value in KEYWORDS:
            kind = "kw"
        tokens.append(Token(kind, value, line, col))
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


@dataclass
class Definition:
    name: str
    type: A.LdlType
    expr: A.Expr
    line: int = 0


@dataclass
class SpecFile:
    """A parsed specification: network declarations plus ordered definitions.

    A definition may refer to earlier ones; those references are bound
    variables whose indices point past the definition's own binders.
    """

    networks: Dict[str, Tuple[int, int]] = field(default_factory=dict)
    definitions: List[Definition] = field(default_factory=list)

    def definition(self, name: str) -> Definition:
        for d in self.definitions:
            if d.name == name:
                return d
        raise KeyError(name)

    @property
    def root(self) -> Definition:
        if not self.definitions:
            raise ValueError("specification has no definitions")
        return self.definitions[-1]

    def as_expr(self, name: Optional[str] = None) -> A.Expr:
        """Close definition ``name`` (default: the last) over earlier definitions."""
        names = [d.name for d in self.definitions]
        k = names.index(name) if name is not None else len(names) - 1
        e = self.definitions[k].expr
        for d in reversed(self.definitions[:k]):
            e = A.Let(d.name, d.type, d.expr, e)
        return e

    def type_of(self, name: Optional[str] = None) -> A.LdlType:
        return self.definition(name).type if name else self.root.type


_BINDER_KW = ("lam", "forall", "exists", "let")
_CMP = {"==": A.Op.EQ, "!=": A.Op.NEQ, "<=": A.Op.LEQ, ">=": A.Op.GEQ, "<": A.Op.LT, ">": A.Op.GT}
_SECTIONS = {
    "and": A.Op.AND, "or": A.Op.OR, "not": A.Op.NOT, "=>": A.Op.IMPLIES,
    "+": A.Op.ADD, "-": A.Op.NEG, "*": A.Op.MUL, "!": A.Op.LOOKUP,
    **_CMP,
}


class _Parser:
    def __init__(self, tokens: List[Token], networks: Dict[str, Tuple[int, int]]):
        self.toks = tokens
        self.i = 0
        self.networks = networks
        self.scope: List[str] = []

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "kw") and t.text == text

    def error(self, msg: str, tok: Optional[Token] = None) -> ParseError:
        t = tok or self.tok
        return ParseError(msg, t.line, t.col)

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected '{text}', found '{found}'")
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            found = self.tok.text or "end of input"
            raise self.error(f"expected an identifier, found '{found}'")
        return self.advance()

    def nat(self) -> int:
        if self.tok.kind != "int" or self.tok.text.startswith("-"):
            raise self.error("expected a natural number")
        n = int(self.advance().text)
        if n < 1:
            raise self.error("size must be at least 1", self.peek(-1))
        return n

    # types

    def type_(self) -> A.LdlType:
        start = self.tok
        dom = self.simple_type()
        if self.at("->"):
            self.advance()
            cod = self.type_()
            if not dom.is_simple:
                raise self.error("function domains must be simple types", start)
            return A.Fun(dom, cod)
        return dom

    def simple_type(self) -> A.LdlType:
        if self.at("Real"):
            self.advance()
            return A.Real
        if self.at("Bool"):
            self.advance()
            return A.Bool
        if self.at("Vec"):
            self.advance()
            return A.Vec(self.nat())
        if self.at("Index"):
            self.advance()
            return A.Index(self.nat())
        if self.at("("):
            self.advance()
            t = self.type_()
            self.expect(")")
            return t
        raise self.error(f"expected a type, found '{self.tok.text or 'end of input'}'")

    # expressions

    def expr(self) -> A.Expr:
        if self.tok.kind == "kw" and self.tok.text in _BINDER_KW:
            return self.binder()
        return self.implies()

    def binder(self) -> A.Expr:
        kw = self.advance()
        loc = (kw.line, kw.col)
        self.expect("(")
        name = self.ident().text
        self.expect(":")
        annot = self.type_()
        self.expect(")")
        if kw.text == "let":
            self.expect("=")
            bound = self.expr()
            self.expect("in")
            body = self.scoped(name)
            return A.Let(name, annot, bound, body, loc)
        self.expect(".")
        body = self.scoped(name)
        cls = {"lam": A.Lam, "forall": A.Forall, "exists": A.Exists}[kw.text]
        return cls(name, annot, body, loc)

    def scoped(self, name: str) -> A.Expr:
        self.scope.append(name)
        try:
            return self.expr()
        finally:
            self.scope.pop()

    def _binary(self, op: A.Op, lhs: A.Expr, rhs: A.Expr, tok: Token) -> A.Expr:
        loc = (tok.line, tok.col)
        return A.App(A.App(A.Builtin(op, loc), lhs, loc), rhs, loc)

    def implies(self) -> A.Expr:
        lhs = self.disjunction()
        if self.at("=>"):
            tok = self.advance()
            rhs = self.operand(self.implies)
            return self._binary(A.Op.IMPLIES, lhs, rhs, tok)
        return lhs

    def operand(self, parse) -> A.Expr:
        # a binder may end an infix chain: ``a and forall (x : Real) . b``
        if self.tok.kind == "kw" and self.tok.text in _BINDER_KW:
            return self.binder()
        return parse()

    def disjunction(self) -> A.Expr:
        lhs = self.conjunction()
        while self.at("or"):
            tok = self.advance()
            lhs = self._binary(A.Op.OR, lhs, self.operand(self.conjunction), tok)
        return lhs

    def conjunction(self) -> A.Expr:
        lhs = self.comparison()
        while self.at("and"):
            tok = self.advance()
            lhs = self._binary(A.Op.AND, lhs, self.operand(self.comparison), tok)
        return lhs

    def comparison(self) -> A.Expr:
        lhs = self.sum()
        if self.tok.kind == "sym" and self.tok.text in _CMP:
            tok = self.advance()
            rhs = self.operand(self.sum)
            if self.tok.kind == "sym" and self.tok.text in _CMP:
                raise self.error("comparisons do not chain; add parentheses")
            return self._binary(_CMP[tok.text], lhs, rhs, tok)
        return lhs

    def sum(self) -> A.Expr:
        lhs = self.product()
        while self.at("+") or self.at("-"):
            tok = self.advance()
            rhs = self.operand(self.product)
            if tok.text == "-":
                rhs = A.App(A.Builtin(A.Op.NEG, (tok.line, tok.col)), rhs, (tok.line, tok.col))
            lhs = self._binary(A.Op.ADD, lhs, rhs, tok)
        return lhs

    def product(self) -> A.Expr:
        lhs = self.unary()
        while self.at("*"):
            tok = self.advance()
            lhs = self._binary(A.Op.MUL, lhs, self.operand(self.unary), tok)
        return lhs

    def unary(self) -> A.Expr:
        if self.at("-") or self.at("not"):
            tok = self.advance()
            op = A.Op.NEG if tok.text == "-" else A.Op.NOT
            loc = (tok.line, tok.col)
            return A.App(A.Builtin(op, loc), self.operand(self.unary), loc)
        return self.lookup()

    def lookup(self) -> A.Expr:
        lhs = self.application()
        while self.at("!"):
            tok = self.advance()
            lhs = self._binary(A.Op.LOOKUP, lhs, self.operand(self.application), tok)
        return lhs

    def starts_atom(self) -> bool:
        t = self.tok
        if t.kind in ("ident", "int", "real"):
            return True
        if t.kind == "kw":
            return t.text in ("True", "False")
        return t.text in ("(", "[")

    def application(self) -> A.Expr:
        head = self.atom()
        while self.starts_atom():
            tok = self.tok
            head = A.App(head, self.atom(), (tok.line, tok.col))
        return head

    def atom(self) -> A.Expr:
        t = self.tok
        loc = (t.line, t.col)
        if t.kind == "ident":
            self.advance()
            return self.resolve(t)
        if t.kind == "int":
            self.advance()
            value = int(t.text)
            if value < 0:
                raise self.error("index literals are naturals; write a real like -1.0", t)
            return A.IndexConst(value, loc)
        if t.kind == "real":
            self.advance()
            value = float(t.text)
            if not math.isfinite(value):
                raise self.error(f"real literal {t.text} is out of range", t)
            return A.RealConst(value, loc)
        if self.at("True") or self.at("False"):
            self.advance()
            return A.BoolConst(t.text == "True", loc)
        if t.kind == "kw" and t.text in _BINDER_KW:
            return self.binder()
        if self.at("["):
            self.advance()
            elems = []
            if not self.at("]"):
                elems.append(self.expr())
                while self.at(","):
                    self.advance()
                    elems.append(self.expr())
            self.expect("]")
            if not elems:
                raise self.error("empty vector literal", t)
            return A.VecLit(tuple(elems), loc)
        if self.at("("):
            nxt = self.peek()
            if nxt.text in _SECTIONS and nxt.kind in ("sym", "kw") and self.peek(2).text == ")":
                self.i += 3
                return A.Builtin(_SECTIONS[nxt.text], loc)
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        raise self.error(f"unexpected '{t.text or 'end of input'}'")

    def resolve(self, t: Token) -> A.Expr:
        loc = (t.line, t.col)
        for depth, name in enumerate(reversed(self.scope)):
            if name == t.text:
                return A.BoundVar(name, depth, loc)
        if t.text in self.networks:
            return A.NetworkVar(t.text, loc)
        raise UndeclaredName(t.text, t.line, t.col)

    # top level

    def spec_file(self) -> SpecFile:
        spec = SpecFile(networks=self.networks)
        while self.tok.kind != "eof":
            if self.at("network"):
                self.advance()
                name_tok = self.ident()
                self.expect(":")
                t = self.type_()
                if not (isinstance(t, A.Fun) and isinstance(t.domain, A.Vec) and isinstance(t.codomain, A.Vec)):
                    raise self.error(f"network '{name_tok.text}' must have type Vec m -> Vec n", name_tok)
                if name_tok.text in self.networks:
                    raise self.error(f"network '{name_tok.text}' declared twice", name_tok)
                self.networks[name_tok.text] = (t.domain.n, t.codomain.n)
            elif self.at("let") and self.peek().kind == "ident":
                self.advance()
                name_tok = self.ident()
                name = name_tok.text
                if name in self.scope:
                    raise self.error(f"definition '{name}' defined twice", name_tok)
                self.expect(":")
                t = self.type_()
                self.expect("=")
                e = self.expr()
                spec.definitions.append(Definition(name, t, e, name_tok.line))
                self.scope.append(name)
            else:
                raise self.error(
                    f"expected 'network' or 'let' declaration, found '{self.tok.text or 'end of input'}'"
                )
        if not spec.definitions:
            raise self.error("expected at least one 'let' definition (the root property), found end of input")
        return spec


def parse(text: str) -> SpecFile:
    """Parse a whole specification file."""
    return _Parser(tokenize(text), {}).spec_file()


def parse_expr(text: str, networks=None, scope=()) -> A.Expr:
    """Parse a single expression.

    ``networks`` maps network names to (inputs, outputs); ``scope`` lists the
    names of enclosing binders, innermost last.
    """
    p = _Parser(tokenize(text), dict(networks or {}))
    p.scope = list(scope)
    e = p.expr()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected '{p.tok.text}' after expression")
    return e


def parse_type(text: str) -> A.LdlType:
    p = _Parser(tokenize(text), {})
    t = p.type_()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected '{p.tok.text}' after type")
    return t


def print_spec(spec: SpecFile) -> str:
    """Render a specification file in canonical layout."""
    from .pretty import _Printer

    lines = [f"network {name} : Vec {m} -> Vec {n}" for name, (m, n) in spec.networks.items()]
    printer = _Printer(set(spec.networks))
    scope: tuple = ()
    for d in spec.definitions:
        if lines:
            lines.append("")
        body = printer.wrap(d.expr, scope, 0)
        lines.append(f"let {d.name} : {d.type} =")
        lines.append(f"  {body}")
        scope = scope + (d.name,)
    return "\n".join(lines) + "\n"
