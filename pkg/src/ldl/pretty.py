"""Surface-syntax printer.  ``parse(pretty_print(e))`` is alpha-equivalent to ``e``."""
from __future__ import annotations

import math

from .ast import (
    App,
    BoolConst,
    BoundVar,
    Builtin,
    Exists,
    Expr,
    Forall,
    IndexConst,
    Lam,
    Let,
    NetworkVar,
    Op,
    RealConst,
    VecLit,
    as_binop,
    as_unop,
    free_indices,
    map_vars,
    network_names,
)

# precedence levels, loosest first
BINDER, IMPLIES, OR, AND, CMP, ADD, MUL, UNARY, LOOKUP, APP, ATOM = range(11)

# op -> (level, min level of left operand, min level of right operand)
_INFIX = {
    Op.IMPLIES: (IMPLIES, OR, IMPLIES),
    Op.OR: (OR, OR, AND),
    Op.AND: (AND, AND, CMP),
    Op.EQ: (CMP, ADD, ADD),
    Op.NEQ: (CMP, ADD, ADD),
    Op.LEQ: (CMP, ADD, ADD),
    Op.GEQ: (CMP, ADD, ADD),
    Op.LT: (CMP, ADD, ADD),
    Op.GT: (CMP, ADD, ADD),
    Op.ADD: (ADD, ADD, MUL),
    Op.MUL: (MUL, MUL, UNARY),
    Op.LOOKUP: (LOOKUP, LOOKUP, APP),
}

_SECTION = {op: f"({op.value})" for op in Op}


def format_real(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot print non-finite constant {x!r}")
    text = repr(float(x))
    if "e" in text and "." not in text.split("e")[0]:
        # keep a '.' so that the literal re-lexes as a real
        mantissa, exp = text.split("e")
        text = f"{mantissa}.0e{exp}"
    return text


def _dangling_names(e: Expr, outer: int) -> set:
    """Names of variables in ``e`` that point past ``outer`` enclosing binders."""
    found = set()

    def go(v, d):
        if v.index >= d + outer:
            found.add(v.name)
        return v

    map_vars(e, go)
    return found


class _Printer:
    def __init__(self, nets: set):
        self.nets = nets

    def fresh(self, name: str, body: Expr, scope: tuple) -> str:
        taken = set(self.nets & network_names(body))
        for i in free_indices(body):
            if i >= 1 and i - 1 < len(scope):
                taken.add(scope[-i])
        taken |= _dangling_names(body, len(scope) + 1)
        while name in taken:
            name += "'"
        return name

    def wrap(self, e: Expr, scope: tuple, need: int) -> str:
        text, level = self.show(e, scope)
        return f"({text})" if level < need else text

    def show(self, e: Expr, scope: tuple):
        if isinstance(e, BoundVar):
            if e.index < len(scope):
                return scope[-1 - e.index], ATOM
            return e.name, ATOM
        if isinstance(e, NetworkVar):
            return e.name, ATOM
        if isinstance(e, RealConst):
            text = format_real(e.value)
            # a leading '-' after an operand would lex as subtraction
            return text, (APP if text.startswith("-") else ATOM)
        if isinstance(e, IndexConst):
            return str(e.value), ATOM
        if isinstance(e, BoolConst):
            return ("True" if e.truth else "False"), ATOM
        if isinstance(e, Builtin):
            return _SECTION[e.op], ATOM
        if isinstance(e, VecLit):
            return "[" + ", ".join(self.wrap(x, scope, BINDER) for x in e.elements) + "]", ATOM
        if isinstance(e, (Lam, Forall, Exists)):
            kw = {Lam: "lam", Forall: "forall", Exists: "exists"}[type(e)]
            name = self.fresh(e.binder, e.body, scope)
            body = self.wrap(e.body, scope + (name,), BINDER)
            return f"{kw} ({name} : {e.annot}) . {body}", BINDER
        if isinstance(e, Let):
            name = self.fresh(e.binder, e.body, scope)
            bound = self.wrap(e.bound, scope, BINDER)
            body = self.wrap(e.body, scope + (name,), BINDER)
            return f"let ({name} : {e.annot}) = {bound} in {body}", BINDER
        assert isinstance(e, App)
        b = as_binop(e)
        if b is not None and b[0] in _INFIX:
            op, lhs, rhs = b
            level, lneed, rneed = _INFIX[op]
            left = self.wrap(lhs, scope, lneed)
            if op is Op.ADD:
                u = as_unop(rhs)
                if u is not None and u[0] is Op.NEG:
                    return f"{left} - {self.wrap(u[1], scope, MUL)}", level
            sym = op.value
            if op is Op.LOOKUP:
                return f"{left} ! {self.wrap(rhs, scope, rneed)}", level
            return f"{left} {sym} {self.wrap(rhs, scope, rneed)}", level
        u = as_unop(e)
        if u is not None and u[0] in (Op.NEG, Op.NOT):
            op, arg = u
            text = self.wrap(arg, scope, UNARY)
            if op is Op.NOT:
                return f"not {text}", UNARY
            if text[0].isdigit() or text[0] == "-":
                text = f"({text})"
            return f"-{text}", UNARY
        fn = self.wrap(e.fn, scope, APP)
        arg = self.wrap(e.arg, scope, ATOM)
        return f"{fn} {arg}", APP


def pretty_print(e: Expr, networks=()) -> str:
    """Render ``e`` in surface syntax.

    ``networks`` lists network names in scope so binders that would shadow a
    network used in their body get renamed.
    """
    text, _ = _Printer(set(networks)).show(e, ())
    return text


def print_type(t) -> str:
    return str(t)
