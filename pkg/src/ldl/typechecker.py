"""Bidirectional type checking for LDL expressions.

Types are synthesised bottom-up.  Index literals are the one exception: their
size is only known from context, so they are checked against an expected
``Index n`` (the argument of a function or of ``!``, or a let annotation).
"""
from __future__ import annotations

from typing import Optional

from . import ast as A
from .ast import Op


class LdlTypeError(Exception):
    loc: A.Loc = None

    def with_loc(self, loc):
        if self.loc is None:
            self.loc = loc
        return self

    def __str__(self):
        msg = self.describe()
        if self.loc:
            return f"{self.loc[0]}:{self.loc[1]}: {msg}"
        return msg

    def describe(self) -> str:
        return self.args[0] if self.args else type(self).__name__


class TypeMismatch(LdlTypeError):
    def __init__(self, expected, actual, loc=None, what: str = ""):
        super().__init__(expected, actual)
        self.expected = expected
        self.actual = actual
        self.loc = loc
        self.what = what

    def describe(self):
        what = f" in {self.what}" if self.what else ""
        return f"type mismatch{what}: expected {self.expected}, got {self.actual}"


class UnboundVariable(LdlTypeError):
    def __init__(self, name, loc=None):
        super().__init__(name)
        self.name = name
        self.loc = loc

    def describe(self):
        return f"unbound variable '{self.name}'"


class IndexOutOfRange(LdlTypeError):
    def __init__(self, i, n, loc=None):
        super().__init__(i, n)
        self.i = i
        self.n = n
        self.loc = loc

    def describe(self):
        return f"index {self.i} out of range for Index {self.n}"


class QuantifierOverFunctionType(LdlTypeError):
    def __init__(self, binder, annot, loc=None):
        super().__init__(binder, annot)
        self.binder = binder
        self.annot = annot
        self.loc = loc

    def describe(self):
        return f"cannot quantify '{self.binder}' over function type {self.annot}"


class NonBooleanQuantifierBody(LdlTypeError):
    def __init__(self, binder, actual, loc=None):
        super().__init__(binder, actual)
        self.binder = binder
        self.actual = actual
        self.loc = loc

    def describe(self):
        return f"body of quantifier over '{self.binder}' has type {self.actual}, expected Bool"


class AmbiguousType(LdlTypeError):
    def describe(self):
        return self.args[0]


_R, _B = A.Real, A.Bool
BUILTIN_TYPES = {
    Op.AND: A.fun(_B, _B, _B),
    Op.OR: A.fun(_B, _B, _B),
    Op.IMPLIES: A.fun(_B, _B, _B),
    Op.NOT: A.fun(_B, _B),
    Op.ADD: A.fun(_R, _R, _R),
    Op.MUL: A.fun(_R, _R, _R),
    Op.NEG: A.fun(_R, _R),
    **{op: A.fun(_R, _R, _B) for op in A.COMPARISONS},
}


def classify_quantifier(q) -> str:
    """``'finite'`` for Index/Bool domains, ``'infinite'`` for Real/Vec ones."""
    annot = q.annot if hasattr(q, "annot") else q
    if isinstance(annot, (A.Index, A.BoolType)):
        return "finite"
    if isinstance(annot, (A.RealType, A.Vec)):
        return "infinite"
    raise QuantifierOverFunctionType(getattr(q, "binder", "?"), annot)


class _Checker:
    def __init__(self, networks):
        self.networks = dict(networks or {})

    def check(self, e: A.Expr, ctx: tuple, expected: A.LdlType, what: str = "") -> None:
        if isinstance(e, A.IndexConst):
            if not isinstance(expected, A.Index):
                raise TypeMismatch(expected, "an index literal", e.loc, what)
            if not 0 <= e.value < expected.n:
                raise IndexOutOfRange(e.value, expected.n, e.loc)
            return
        # push the expected type through binders so index literals can be checked
        if isinstance(e, A.Let):
            self.check(e.bound, ctx, e.annot, f"let '{e.binder}'")
            self.check(e.body, ctx + ((e.binder, e.annot),), expected, what)
            return
        if isinstance(e, A.Lam) and isinstance(expected, A.Fun) and e.annot == expected.domain:
            self.check(e.body, ctx + ((e.binder, e.annot),), expected.codomain, what)
            return
        actual = self.synth(e, ctx)
        if actual != expected:
            raise TypeMismatch(expected, actual, e.loc, what)

    def synth(self, e: A.Expr, ctx: tuple) -> A.LdlType:
        if isinstance(e, A.BoundVar):
            if e.index >= len(ctx):
                raise UnboundVariable(e.name, e.loc)
            return ctx[-1 - e.index][1]
        if isinstance(e, A.NetworkVar):
            if e.name not in self.networks:
                raise UnboundVariable(e.name, e.loc)
            m, n = self.networks[e.name]
            return A.Fun(A.Vec(m), A.Vec(n))
        if isinstance(e, A.RealConst):
            return A.Real
        if isinstance(e, A.BoolConst):
            return A.Bool
        if isinstance(e, A.IndexConst):
            raise AmbiguousType(f"cannot infer the size of index literal {e.value}").with_loc(e.loc)
        if isinstance(e, A.Builtin):
            if e.op is Op.LOOKUP:
                raise AmbiguousType("cannot infer the type of (!) without its vector").with_loc(e.loc)
            return BUILTIN_TYPES[e.op]
        if isinstance(e, A.VecLit):
            for x in e.elements:
                self.check(x, ctx, A.Real, "vector element")
            return A.Vec(len(e.elements))
        if isinstance(e, A.Lam):
            return A.Fun(e.annot, self.synth(e.body, ctx + ((e.binder, e.annot),)))
        if isinstance(e, A.Let):
            self.check(e.bound, ctx, e.annot, f"let '{e.binder}'")
            return self.synth(e.body, ctx + ((e.binder, e.annot),))
        if isinstance(e, (A.Forall, A.Exists)):
            if not e.annot.is_simple:
                raise QuantifierOverFunctionType(e.binder, e.annot, e.loc)
            body = self.synth(e.body, ctx + ((e.binder, e.annot),))
            if body != A.Bool:
                raise NonBooleanQuantifierBody(e.binder, body, e.loc)
            return A.Bool
        if isinstance(e, A.App):
            return self.synth_app(e, ctx)
        raise TypeError(f"not an expression: {e!r}")

    def synth_app(self, e: A.App, ctx: tuple) -> A.LdlType:
        fn = e.fn
        # the lookup builtin is size-polymorphic: type it from its vector
        if isinstance(fn, A.Builtin) and fn.op is Op.LOOKUP:
            vt = self.synth(e.arg, ctx)
            if not isinstance(vt, A.Vec):
                raise TypeMismatch("Vec n", vt, e.arg.loc, "left operand of !")
            return A.Fun(A.Index(vt.n), A.Real)
        ft = self.synth(fn, ctx)
        if not isinstance(ft, A.Fun):
            raise TypeMismatch("a function", ft, e.loc, "application")
        self.check(e.arg, ctx, ft.domain, "argument")
        return ft.codomain


def typecheck(e: A.Expr, networks=None, bound: A.BoundTypeCtx = ()) -> A.LdlType:
    """Return the type of ``e`` or raise an :class:`LdlTypeError`."""
    return _Checker(networks).synth(e, tuple(bound))


def check_type(e: A.Expr, expected: A.LdlType, networks=None, bound: A.BoundTypeCtx = ()) -> None:
    """Check ``e`` against ``expected``; unlike :func:`typecheck` this accepts bare index literals."""
    _Checker(networks).check(e, tuple(bound), expected, "expression")


def check_spec(spec) -> A.LdlType:
    """Check every definition of a parsed file against its declared type.

    Returns the type of the last definition.
    """
    checker = _Checker(spec.networks)
    ctx: tuple = ()
    result: Optional[A.LdlType] = None
    for d in spec.definitions:
        checker.check(d.expr, ctx, d.type, f"definition '{d.name}'")
        ctx = ctx + ((d.name, d.type),)
        result = d.type
    if result is None:
        raise AmbiguousType("specification has no definitions")
    return result
