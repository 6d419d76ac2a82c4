"""Abstract syntax of LDL expressions and types.

Binders keep their surface names for printing and error messages, but every
variable reference also carries a de Bruijn index (0 = innermost binder), so
alpha-equivalence and substitution never depend on names.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Optional, Tuple, Union

Loc = Optional[Tuple[int, int]]


# ---------------------------------------------------------------------------
# Types


class LdlType:
    __slots__ = ()

    @property
    def is_simple(self) -> bool:
        return not isinstance(self, Fun)


@dataclass(frozen=True)
class RealType(LdlType):
    def __str__(self):
        return "Real"


@dataclass(frozen=True)
class BoolType(LdlType):
    def __str__(self):
        return "Bool"


@dataclass(frozen=True)
class Vec(LdlType):
    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"Vec size must be a natural >= 1, got {self.n!r}")

    def __str__(self):
        return f"Vec {self.n}"


@dataclass(frozen=True)
class Index(LdlType):
    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"Index size must be a natural >= 1, got {self.n!r}")

    def __str__(self):
        return f"Index {self.n}"


@dataclass(frozen=True)
class Fun(LdlType):
    domain: LdlType
    codomain: LdlType

    def __post_init__(self):
        if isinstance(self.domain, Fun):
            raise ValueError("function domains must be simple types")

    def __str__(self):
        return f"{self.domain} -> {self.codomain}"


Real = RealType()
Bool = BoolType()


def fun(*types: LdlType) -> LdlType:
    """``fun(a, b, c)`` is ``a -> b -> c``."""
    result = types[-1]
    for t in reversed(types[:-1]):
        result = Fun(t, result)
    return result


def uncurry(t: LdlType) -> Tuple[Tuple[LdlType, ...], LdlType]:
    params = []
    while isinstance(t, Fun):
        params.append(t.domain)
        t = t.codomain
    return tuple(params), t


# ---------------------------------------------------------------------------
# Expressions


class Op(enum.Enum):
    AND = "and"
    OR = "or"
    NOT = "not"
    IMPLIES = "=>"
    ADD = "+"
    NEG = "-"
    MUL = "*"
    EQ = "=="
    NEQ = "!="
    LEQ = "<="
    GEQ = ">="
    LT = "<"
    GT = ">"
    LOOKUP = "!"


COMPARISONS = frozenset({Op.EQ, Op.NEQ, Op.LEQ, Op.GEQ, Op.LT, Op.GT})
CONNECTIVES = frozenset({Op.AND, Op.OR, Op.NOT, Op.IMPLIES})


class Expr:
    __slots__ = ()


def _loc():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BoundVar(Expr):
    name: str
    index: int
    loc: Loc = _loc()


@dataclass(frozen=True)
class NetworkVar(Expr):
    name: str
    loc: Loc = _loc()


@dataclass(frozen=True)
class RealConst(Expr):
    value: float
    loc: Loc = _loc()


@dataclass(frozen=True)
class IndexConst(Expr):
    value: int
    loc: Loc = _loc()


@dataclass(frozen=True)
class BoolConst(Expr):
    truth: bool
    loc: Loc = _loc()


@dataclass(frozen=True)
class App(Expr):
    fn: Expr
    arg: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class Lam(Expr):
    binder: str
    annot: LdlType
    body: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class Let(Expr):
    binder: str
    annot: LdlType
    bound: Expr
    body: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class Builtin(Expr):
    op: Op
    loc: Loc = _loc()


@dataclass(frozen=True)
class VecLit(Expr):
    elements: Tuple[Expr, ...]
    loc: Loc = _loc()


@dataclass(frozen=True)
class Forall(Expr):
    binder: str
    annot: LdlType
    body: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class Exists(Expr):
    binder: str
    annot: LdlType
    body: Expr
    loc: Loc = _loc()


Quantifier = Union[Forall, Exists]
Binder = Union[Lam, Forall, Exists]

TOP = BoolConst(True)
BOTTOM = BoolConst(False)


# Contexts.  Networks map name -> (inputs, outputs); the bound context is a
# tuple of (name, type) pairs with the innermost binding LAST, so de Bruijn
# index i refers to ctx[-1 - i].
NetworkTypeCtx = dict
BoundTypeCtx = Tuple[Tuple[str, LdlType], ...]


# ---------------------------------------------------------------------------
# Construction helpers


def app(fn: Expr, *args: Expr) -> Expr:
    for a in args:
        fn = App(fn, a)
    return fn


def binop(op: Op, a: Expr, b: Expr) -> Expr:
    return App(App(Builtin(op), a), b)


def unop(op: Op, a: Expr) -> Expr:
    return App(Builtin(op), a)


def conj(*args: Expr) -> Expr:
    """Left-nested conjunction of one or more formulas."""
    result = args[0]
    for a in args[1:]:
        result = binop(Op.AND, result, a)
    return result


def disj(*args: Expr) -> Expr:
    result = args[0]
    for a in args[1:]:
        result = binop(Op.OR, result, a)
    return result


def spine(e: Expr) -> Tuple[Expr, list]:
    """Split ``f a1 ... an`` into ``(f, [a1, ..., an])``."""
    args = []
    while isinstance(e, App):
        args.append(e.arg)
        e = e.fn
    args.reverse()
    return e, args


def as_binop(e: Expr) -> Optional[Tuple[Op, Expr, Expr]]:
    if isinstance(e, App) and isinstance(e.fn, App) and isinstance(e.fn.fn, Builtin):
        return e.fn.fn.op, e.fn.arg, e.arg
    return None


def as_unop(e: Expr) -> Optional[Tuple[Op, Expr]]:
    if isinstance(e, App) and isinstance(e.fn, Builtin):
        return e.fn.op, e.arg
    return None


def chain_operands(e: Expr, op: Op) -> list:
    """Operands of a maximal run of binary ``op`` applications, left to right."""
    b = as_binop(e)
    if b is None or b[0] is not op:
        return [e]
    return chain_operands(b[1], op) + chain_operands(b[2], op)


# ---------------------------------------------------------------------------
# Traversal


def children(e: Expr) -> Iterator[Expr]:
    if isinstance(e, App):
        yield e.fn
        yield e.arg
    elif isinstance(e, (Lam, Forall, Exists)):
        yield e.body
    elif isinstance(e, Let):
        yield e.bound
        yield e.body
    elif isinstance(e, VecLit):
        yield from e.elements


def subterms(e: Expr) -> Iterator[Expr]:
    yield e
    for c in children(e):
        yield from subterms(c)


def size(e: Expr) -> int:
    return sum(1 for _ in subterms(e))


def free_quantified_vars(e: Expr) -> set:
    """Names bound by Forall/Exists at type Real or Vec n anywhere in ``e``."""
    return {
        t.binder
        for t in subterms(e)
        if isinstance(t, (Forall, Exists)) and isinstance(t.annot, (RealType, Vec))
    }


def network_names(e: Expr) -> set:
    return {t.name for t in subterms(e) if isinstance(t, NetworkVar)}


def map_vars(e: Expr, fn, depth: int = 0) -> Expr:
    """Rebuild ``e`` replacing each BoundVar v (seen under ``d`` binders) by fn(v, d)."""
    if isinstance(e, BoundVar):
        return fn(e, depth)
    if isinstance(e, App):
        f = map_vars(e.fn, fn, depth)
        a = map_vars(e.arg, fn, depth)
        if f is e.fn and a is e.arg:
            return e
        return App(f, a, e.loc)
    if isinstance(e, (Lam, Forall, Exists)):
        body = map_vars(e.body, fn, depth + 1)
        if body is e.body:
            return e
        return type(e)(e.binder, e.annot, body, e.loc)
    if isinstance(e, Let):
        bound = map_vars(e.bound, fn, depth)
        body = map_vars(e.body, fn, depth + 1)
        if bound is e.bound and body is e.body:
            return e
        return Let(e.binder, e.annot, bound, body, e.loc)
    if isinstance(e, VecLit):
        elems = tuple(map_vars(x, fn, depth) for x in e.elements)
        if all(a is b for a, b in zip(elems, e.elements)):
            return e
        return VecLit(elems, e.loc)
    return e


def shift(e: Expr, amount: int, cutoff: int = 0) -> Expr:
    """Add ``amount`` to every free index >= ``cutoff``."""
    if amount == 0:
        return e

    def go(v, d):
        if v.index >= d + cutoff:
            return BoundVar(v.name, v.index + amount, v.loc)
        return v

    return map_vars(e, go)


def free_indices(e: Expr) -> set:
    """Free de Bruijn indices of ``e``, relative to its root."""
    found = set()

    def go(v, d):
        if v.index >= d:
            found.add(v.index - d)
        return v

    map_vars(e, go)
    return found


def is_closed(e: Expr) -> bool:
    return not free_indices(e)


def substitute_index(e: Expr, target: int, replacement: Expr) -> Expr:
    """Replace free index ``target`` by ``replacement`` and close the gap.

    ``replacement`` lives in the same context as ``e`` minus the removed
    binding, so it is shifted as it moves under binders.
    """

    def go(v, d):
        if v.index == d + target:
            return shift(replacement, d)
        if v.index > d + target:
            return BoundVar(v.name, v.index - 1, v.loc)
        return v

    return map_vars(e, go)


def instantiate(body: Expr, value: Expr) -> Expr:
    """Open a binder body, replacing its own variable (index 0) by ``value``."""
    return substitute_index(body, 0, value)


def substitute(e: Expr, binder: str, replacement: Expr) -> Expr:
    """Replace the free variable named ``binder`` in ``e`` by ``replacement``.

    When several free variables share the name, the innermost one (smallest
    free index) is the one replaced.  Capture cannot happen: indices under
    binders are adjusted, and the printer renames clashing binders.
    """
    candidates = []

    def find(v, d):
        if v.index >= d and v.name == binder:
            candidates.append(v.index - d)
        return v

    map_vars(e, find)
    if not candidates:
        return e
    return substitute_index(e, min(candidates), replacement)


# ---------------------------------------------------------------------------
# Alpha-equivalence


def alpha_eq(a: Expr, b: Expr) -> bool:
    """Structural equality ignoring binder and variable names."""
    if type(a) is not type(b):
        return False
    if isinstance(a, BoundVar):
        return a.index == b.index
    if isinstance(a, App):
        return alpha_eq(a.fn, b.fn) and alpha_eq(a.arg, b.arg)
    if isinstance(a, (Lam, Forall, Exists)):
        return a.annot == b.annot and alpha_eq(a.body, b.body)
    if isinstance(a, Let):
        return a.annot == b.annot and alpha_eq(a.bound, b.bound) and alpha_eq(a.body, b.body)
    if isinstance(a, VecLit):
        return len(a.elements) == len(b.elements) and all(
            alpha_eq(x, y) for x, y in zip(a.elements, b.elements)
        )
    if isinstance(a, RealConst):
        # bitwise: 0.0 and -0.0 print differently
        return repr(a.value) == repr(b.value)
    return a == b


# ---------------------------------------------------------------------------
# S-expression dump (golden files)


def to_sexpr(e: Expr) -> str:
    """Name-free structural dump: variables print as their de Bruijn index."""
    if isinstance(e, BoundVar):
        return f"#{e.index}"
    if isinstance(e, NetworkVar):
        return f"(net {e.name})"
    if isinstance(e, RealConst):
        return f"(real {e.value!r})"
    if isinstance(e, IndexConst):
        return f"(index {e.value})"
    if isinstance(e, BoolConst):
        return "true" if e.truth else "false"
    if isinstance(e, Builtin):
        return f"(op {e.op.value})"
    if isinstance(e, VecLit):
        return "(vec" + "".join(" " + to_sexpr(x) for x in e.elements) + ")"
    if isinstance(e, Let):
        return f"(let ({e.annot}) {to_sexpr(e.bound)} {to_sexpr(e.body)})"
    if isinstance(e, (Lam, Forall, Exists)):
        kw = {Lam: "lam", Forall: "forall", Exists: "exists"}[type(e)]
        return f"({kw} ({e.annot}) {to_sexpr(e.body)})"
    if isinstance(e, App):
        b = as_binop(e)
        if b is not None:
            return f"({b[0].value} {to_sexpr(b[1])} {to_sexpr(b[2])})"
        u = as_unop(e)
        if u is not None:
            return f"({u[0].value} {to_sexpr(u[1])})"
        return f"(app {to_sexpr(e.fn)} {to_sexpr(e.arg)})"
    raise TypeError(f"not an expression: {e!r}")
