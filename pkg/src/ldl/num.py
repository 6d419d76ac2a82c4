"""Scalar kernels shared by every evaluation route.

Logic interpretations are written once against these functions.  Plain
floats are computed directly.  Other scalar kinds (reverse-mode AD nodes,
graph-building symbols) subclass :class:`Lifted` and receive the call
through :meth:`Lifted.lift`, so all routes run the same arithmetic in the
same order and agree to the last bit on float inputs.
"""
from __future__ import annotations

import math
import operator

INF = math.inf


class Lifted:
    """Base class for non-float scalars.  Higher ``priority`` wins when mixed."""

    __slots__ = ()
    priority = 0

    @classmethod
    def lift(cls, name: str, args: tuple, params: dict):
        raise NotImplementedError

    def __add__(self, o):
        return apply("add", self, o)

    def __radd__(self, o):
        return apply("add", o, self)

    def __sub__(self, o):
        return apply("sub", self, o)

    def __rsub__(self, o):
        return apply("sub", o, self)

    def __mul__(self, o):
        return apply("mul", self, o)

    def __rmul__(self, o):
        return apply("mul", o, self)

    def __truediv__(self, o):
        return apply("div", self, o)

    def __rtruediv__(self, o):
        return apply("div", o, self)

    def __neg__(self):
        return apply("neg", self)

    def __abs__(self):
        return apply("abs", self)


def is_lifted(x) -> bool:
    return isinstance(x, Lifted)


def value_of(x) -> float:
    """Concrete float behind a scalar (AD nodes carry one; symbols do not)."""
    return float(x)


# ---------------------------------------------------------------------------
# Float reference implementations


def _powc(x, p):
    return x ** p


def _max(a, b):
    return b if b > a else a


def _min(a, b):
    return b if b < a else a


def _dl2_or(a, b):
    # -(a*b) on [-inf, 0], with 0 * -inf read as 0
    if a == 0 or b == 0:
        return 0.0
    return -(a * b)


def _ind_eq(a, b):
    return 1.0 if a == b else 0.0


def _lookup(i, *comps):
    return comps[int(i)]


def _stl_and(*vals, nu):
    return stl_and_generic(vals, nu)


def _stl_or(*vals, nu):
    return -stl_and_generic([-v for v in vals], nu)


FLOAT_OPS = {
    "add": operator.add,
    "sub": operator.sub,
    "mul": operator.mul,
    "div": operator.truediv,
    "neg": operator.neg,
    "abs": abs,
    "tanh": math.tanh,
    "exp": math.exp,
    "powc": _powc,
    "max": _max,
    "min": _min,
    "neg_mul": _dl2_or,
    "ind_eq": _ind_eq,
    "lookup": _lookup,
    "and_s": _stl_and,
    "or_s": _stl_or,
}


def apply(name: str, *args, **params):
    owner = None
    for a in args:
        if isinstance(a, Lifted) and (owner is None or type(a).priority > owner.priority):
            owner = type(a)
    if owner is None:
        return FLOAT_OPS[name](*args, **params)
    return owner.lift(name, args, params)


# ---------------------------------------------------------------------------
# Public kernels


def tanh(x):
    return apply("tanh", x)


def exp(x):
    return apply("exp", x)


def powc(x, p: float):
    return apply("powc", x, p=p)


def maximum(a, b):
    return apply("max", a, b)


def minimum(a, b):
    return apply("min", a, b)


def dl2_or(a, b):
    return apply("neg_mul", a, b)


def ind_eq(a, b):
    return apply("ind_eq", a, b)


def lookup(vec, i):
    if isinstance(i, Lifted):
        return apply("lookup", i, *vec)
    return vec[i]


def stl_and(vals, nu: float):
    return apply("and_s", *vals, nu=nu)


def stl_or(vals, nu: float):
    return apply("or_s", *vals, nu=nu)


def stl_and_generic(vals, nu: float):
    """Smooth n-ary STL conjunction.

    Written against scalar arithmetic so AD nodes can run it directly; the
    branches read concrete values only.
    """
    vals = list(vals)
    if len(vals) == 1:
        return vals[0]
    v_min = vals[0]
    for v in vals[1:]:
        v_min = minimum(v_min, v)
    m = float(v_min)
    if m == 0:
        return 0.0 * v_min
    if m == -INF:
        return v_min
    if m == INF:
        return v_min
    if m < 0:
        num = 0.0
        den = 0.0
        for v in vals:
            if float(v) == INF:
                continue
            r = (v - v_min) / v_min
            w = exp(nu * r)
            num = num + v_min * exp(r) * w
            den = den + w
        return num / den
    num = 0.0
    den = 0.0
    for v in vals:
        if float(v) == INF:
            continue
        r = (v - v_min) / v_min
        w = exp(-nu * r)
        num = num + v * w
        den = den + w
    return num / den
