"""Interpretations of the connectives and comparisons in six differentiable logics.

Every function takes the logic first and works on any scalar kind supported
by :mod:`ldl.num` (floats, AD nodes, graph symbols).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from . import num

INF = math.inf

DL2 = "dl2"
GODEL = "godel"
LUKASIEWICZ = "lukasiewicz"
YAGER = "yager"
PRODUCT = "product"
STL = "stl"

TAGS = (DL2, GODEL, LUKASIEWICZ, YAGER, PRODUCT, STL)
FUZZY = (GODEL, LUKASIEWICZ, YAGER, PRODUCT)

_ALIASES = {
    "dl2": DL2,
    "godel": GODEL,
    "gödel": GODEL,
    "g": GODEL,
    "lukasiewicz": LUKASIEWICZ,
    "łukasiewicz": LUKASIEWICZ,
    "l": LUKASIEWICZ,
    "yager": YAGER,
    "y": YAGER,
    "product": PRODUCT,
    "p": PRODUCT,
    "stl": STL,
}


class DomainError(ValueError):
    pass


class NegationUnsupported(Exception):
    """DL2 has no value-level negation; formulas must be rewritten first."""


@dataclass(frozen=True)
class Logic:
    tag: str
    yager_p: float = 2.0
    stl_nu: float = 1.0
    neq_xi: float = 1.0
    leq_signed: bool = False

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown logic {self.tag!r}; expected one of {', '.join(TAGS)}")
        if not self.yager_p >= 1:
            raise ValueError("Yager parameter p must be >= 1")
        if not self.stl_nu > 0:
            raise ValueError("STL parameter nu must be > 0")
        if not self.neq_xi > 0:
            raise ValueError("DL2/STL parameter xi must be > 0")

    @property
    def is_fuzzy(self) -> bool:
        return self.tag in FUZZY

    @property
    def domain(self):
        return domain(self)

    @property
    def top(self) -> float:
        return interp_top(self)

    @property
    def bottom(self) -> float:
        return interp_bottom(self)

    @property
    def name(self) -> str:
        if self.tag == YAGER:
            return f"yager(p={self.yager_p:g})"
        if self.tag == STL:
            return f"stl(nu={self.stl_nu:g})"
        return self.tag

    def with_params(self, **kw) -> "Logic":
        return replace(self, **kw)


def logic(name: str, **params) -> Logic:
    """Look up a logic by (case-insensitive) name, e.g. ``logic("yager", yager_p=3)``."""
    key = name.strip().lower()
    if key not in _ALIASES:
        raise ValueError(f"unknown logic {name!r}; expected one of {', '.join(TAGS)}")
    return Logic(_ALIASES[key], **params)


def all_logics(**params) -> list:
    return [Logic(t) for t in TAGS] if not params else [Logic(t, **params) for t in TAGS]


def domain(L: Logic):
    if L.tag == DL2:
        return (-INF, 0.0)
    if L.tag == STL:
        return (-INF, INF)
    return (0.0, 1.0)


def in_domain(L: Logic, v) -> bool:
    if isinstance(v, num.Lifted) and not hasattr(v, "value"):
        return True
    x = float(v)
    lo, hi = domain(L)
    return lo <= x <= hi


def _check(L: Logic, *vals):
    lo, hi = domain(L)
    for v in vals:
        if isinstance(v, num.Lifted) and not hasattr(v, "value"):
            continue
        x = float(v)
        if not lo <= x <= hi:
            raise DomainError(f"{x!r} is outside the {L.name} truth domain [{lo}, {hi}]")


def _check_real(*vals):
    for v in vals:
        if isinstance(v, num.Lifted) and not hasattr(v, "value"):
            continue
        if not math.isfinite(float(v)):
            raise DomainError(f"comparison operand {float(v)!r} is not finite")


def interp_top(L: Logic) -> float:
    return {DL2: 0.0, STL: INF}.get(L.tag, 1.0)


def interp_bottom(L: Logic) -> float:
    return {DL2: -INF, STL: -INF}.get(L.tag, 0.0)


# ---------------------------------------------------------------------------
# Connectives


def _and2(L: Logic, a, b):
    t = L.tag
    if t == DL2:
        return a + b
    if t == GODEL:
        return num.minimum(a, b)
    if t == LUKASIEWICZ:
        return num.maximum(a + b - 1.0, 0.0)
    if t == YAGER:
        p = L.yager_p
        s = num.powc(1.0 - a, p) + num.powc(1.0 - b, p)
        return num.maximum(1.0 - num.powc(s, 1.0 / p), 0.0)
    if t == PRODUCT:
        return a * b
    return num.stl_and([a, b], L.stl_nu)


def _or2(L: Logic, a, b):
    t = L.tag
    if t == DL2:
        return num.dl2_or(a, b)
    if t == GODEL:
        return num.maximum(a, b)
    if t == LUKASIEWICZ:
        return num.minimum(a + b, 1.0)
    if t == YAGER:
        p = L.yager_p
        return num.minimum(num.powc(num.powc(a, p) + num.powc(b, p), 1.0 / p), 1.0)
    if t == PRODUCT:
        return a + b - a * b
    return num.stl_or([a, b], L.stl_nu)


def interp_and(L: Logic, args):
    """Conjunction.  STL combines all arguments at once; the others fold left."""
    args = list(args)
    if not args:
        raise ValueError("conjunction needs at least one argument")
    _check(L, *args)
    if L.tag == STL:
        return num.stl_and(args, L.stl_nu)
    acc = args[0]
    for b in args[1:]:
        acc = _and2(L, acc, b)
    return acc


def interp_or(L: Logic, args):
    args = list(args)
    if not args:
        raise ValueError("disjunction needs at least one argument")
    _check(L, *args)
    if L.tag == STL:
        return num.stl_or(args, L.stl_nu)
    acc = args[0]
    for b in args[1:]:
        acc = _or2(L, acc, b)
    return acc


def interp_not(L: Logic, a):
    if L.tag == DL2:
        raise NegationUnsupported("DL2 negation must be pushed to the atoms before evaluation")
    _check(L, a)
    if L.tag == STL:
        return -a
    return 1.0 - a


def interp_implies(L: Logic, a, b):
    t = L.tag
    if t == DL2:
        raise NegationUnsupported("DL2 implication must be rewritten to a disjunction before evaluation")
    _check(L, a, b)
    if t == GODEL:
        return num.maximum(1.0 - a, b)
    if t == LUKASIEWICZ:
        return num.minimum(1.0 - a + b, 1.0)
    if t == PRODUCT:
        return 1.0 - a + a * b
    if t == STL:
        return num.stl_or([-a, b], L.stl_nu)
    # Yager: not a or b
    return _or2(L, 1.0 - a, b)


# ---------------------------------------------------------------------------
# Comparisons


def interp_eq(L: Logic, a, b):
    _check_real(a, b)
    if L.is_fuzzy:
        return 1.0 - num.tanh(abs(a - b))
    return -abs(a - b)


def interp_leq(L: Logic, a, b):
    _check_real(a, b)
    t = L.tag
    if t == DL2:
        return -num.maximum(a - b, 0.0)
    if t == STL:
        return b - a
    if L.leq_signed:
        return 1.0 - num.maximum(num.tanh(a - b), 0.0)
    return 1.0 - num.maximum(num.tanh(abs(a - b)), 0.0)


def interp_neq(L: Logic, a, b):
    _check_real(a, b)
    if L.is_fuzzy:
        return 1.0 - num.ind_eq(a, b)
    return -(L.neq_xi * num.ind_eq(a, b))


def interp_geq(L: Logic, a, b):
    return interp_leq(L, b, a)


def interp_lt(L: Logic, a, b):
    return interp_and(L, [interp_leq(L, a, b), interp_neq(L, a, b)])


def interp_gt(L: Logic, a, b):
    return interp_and(L, [interp_geq(L, a, b), interp_neq(L, a, b)])


def penalty(L: Logic, value):
    """Distance of a truth value from the top element; 0 means satisfied."""
    if L.tag == DL2:
        return 0.0 - value
    if L.tag == STL:
        return -value
    return 1.0 - value


def satisfied(L: Logic, value) -> bool:
    """Whether a truth value reads as true (used for classical checks)."""
    v = float(value)
    if L.tag == DL2:
        return v == 0.0
    if L.tag == STL:
        return v > 0.0
    return v == 1.0
