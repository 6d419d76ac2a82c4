"""Syntactic rewrites needed before evaluating under DL2.

DL2 has no value-level negation, so implications become disjunctions and
negations are pushed down to comparisons and constants.  Pushing needs the
formula in a first-order shape, so function-typed and Bool-typed lets are
inlined, lambda redexes become lets (keeping shared arguments evaluated
once), and quantifiers over Bool expand into their two instances.
"""
from __future__ import annotations

from . import ast as A
from .ast import Op


class NegationNotPushable(Exception):
    def __init__(self, expr: A.Expr, reason: str = ""):
        from .pretty import pretty_print

        self.expr = expr
        text = pretty_print(expr)
        super().__init__(f"cannot push negation into '{text}'" + (f": {reason}" if reason else ""))


_FLIP = {
    Op.EQ: Op.NEQ,
    Op.NEQ: Op.EQ,
    Op.LEQ: Op.GT,
    Op.GEQ: Op.LT,
    Op.LT: Op.GEQ,
    Op.GT: Op.LEQ,
}


def mentions_negation(e: A.Expr) -> bool:
    return any(isinstance(t, A.Builtin) and t.op in (Op.NOT, Op.IMPLIES) for t in A.subterms(e))


def _must_inline(t: A.LdlType) -> bool:
    return isinstance(t, (A.Fun, A.BoolType))


def normalize(e: A.Expr) -> A.Expr:
    """Inline function/Bool lets, turn redexes into lets, expand Bool quantifiers."""
    if isinstance(e, A.Let):
        bound = normalize(e.bound)
        if _must_inline(e.annot):
            return normalize(A.instantiate(e.body, bound))
        return A.Let(e.binder, e.annot, bound, normalize(e.body), e.loc)
    if isinstance(e, A.App):
        fn = normalize(e.fn)
        arg = normalize(e.arg)
        return _apply(fn, arg, e.loc)
    if isinstance(e, (A.Forall, A.Exists)):
        if isinstance(e.annot, A.BoolType):
            op = Op.AND if isinstance(e, A.Forall) else Op.OR
            yes = A.instantiate(e.body, A.TOP)
            no = A.instantiate(e.body, A.BOTTOM)
            return A.binop(op, normalize(yes), normalize(no))
        return type(e)(e.binder, e.annot, normalize(e.body), e.loc)
    if isinstance(e, A.Lam):
        return A.Lam(e.binder, e.annot, normalize(e.body), e.loc)
    if isinstance(e, A.VecLit):
        return A.VecLit(tuple(normalize(x) for x in e.elements), e.loc)
    return e


def _apply(fn: A.Expr, arg: A.Expr, loc) -> A.Expr:
    if isinstance(fn, A.Lam):
        if _must_inline(fn.annot):
            return normalize(A.instantiate(fn.body, arg))
        return A.Let(fn.binder, fn.annot, arg, fn.body, loc)
    if isinstance(fn, A.Let):
        # (let x = b in g) a  ~>  let x = b in g a
        return A.Let(fn.binder, fn.annot, fn.bound, _apply(fn.body, A.shift(arg, 1), loc), fn.loc)
    return A.App(fn, arg, loc)


def rewrite(e: A.Expr) -> A.Expr:
    """Remove every ``=>`` and push every ``not`` to the atoms."""
    b = A.as_binop(e)
    if b is not None:
        op, lhs, rhs = b
        if op is Op.IMPLIES:
            return A.binop(Op.OR, push_negation(lhs), rewrite(rhs))
        return A.binop(op, rewrite(lhs), rewrite(rhs))
    u = A.as_unop(e)
    if u is not None and u[0] is Op.NOT:
        return push_negation(u[1])
    if isinstance(e, A.App):
        return A.App(rewrite(e.fn), rewrite(e.arg), e.loc)
    if isinstance(e, A.Let):
        return A.Let(e.binder, e.annot, rewrite(e.bound), rewrite(e.body), e.loc)
    if isinstance(e, (A.Lam, A.Forall, A.Exists)):
        return type(e)(e.binder, e.annot, rewrite(e.body), e.loc)
    if isinstance(e, A.VecLit):
        return A.VecLit(tuple(rewrite(x) for x in e.elements), e.loc)
    if isinstance(e, A.Builtin) and e.op in (Op.NOT, Op.IMPLIES):
        raise NegationNotPushable(e, "unapplied negation or implication")
    return e


def push_negation(e: A.Expr) -> A.Expr:
    """An expression equivalent to ``not e`` that contains no ``not`` or ``=>``."""
    b = A.as_binop(e)
    if b is not None:
        op, lhs, rhs = b
        if op is Op.AND:
            return A.binop(Op.OR, push_negation(lhs), push_negation(rhs))
        if op is Op.OR:
            return A.binop(Op.AND, push_negation(lhs), push_negation(rhs))
        if op is Op.IMPLIES:
            return A.binop(Op.AND, rewrite(lhs), push_negation(rhs))
        if op in _FLIP:
            return A.binop(_FLIP[op], rewrite(lhs), rewrite(rhs))
        raise NegationNotPushable(e)
    u = A.as_unop(e)
    if u is not None and u[0] is Op.NOT:
        return rewrite(u[1])
    if isinstance(e, A.BoolConst):
        return A.BoolConst(not e.truth, e.loc)
    if isinstance(e, A.Forall):
        return A.Exists(e.binder, e.annot, push_negation(e.body), e.loc)
    if isinstance(e, A.Exists):
        return A.Forall(e.binder, e.annot, push_negation(e.body), e.loc)
    if isinstance(e, A.Let):
        return A.Let(e.binder, e.annot, rewrite(e.bound), push_negation(e.body), e.loc)
    raise NegationNotPushable(e)


def lower_dl2(e: A.Expr) -> A.Expr:
    if not mentions_negation(e):
        return e
    return rewrite(normalize(e))
