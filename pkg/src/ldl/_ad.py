"""Minimal scalar reverse-mode automatic differentiation."""
from __future__ import annotations

import math

from . import num
from .num import FLOAT_OPS, Lifted


def _val(x) -> float:
    return x.value if isinstance(x, Node) else x


class Node(Lifted):
    __slots__ = ("value", "parents", "grad")
    priority = 1

    def __init__(self, value: float, parents=()):
        self.value = value
        self.parents = parents  # tuple of (Node, local gradient)
        self.grad = 0.0

    def __float__(self):
        return self.value

    def __repr__(self):
        return f"Node({self.value!r})"

    # comparisons read the value; used by branchy kernels and extremum search
    def __lt__(self, o):
        return self.value < _val(o)

    def __gt__(self, o):
        return self.value > _val(o)

    def __le__(self, o):
        return self.value <= _val(o)

    def __ge__(self, o):
        return self.value >= _val(o)

    def __eq__(self, o):
        return self.value == _val(o)

    __hash__ = object.__hash__

    @classmethod
    def lift(cls, name, args, params):
        rule = _RULES.get(name)
        if rule is None:
            raise NotImplementedError(f"no derivative rule for {name}")
        return rule(args, params)

    def backward(self, seed: float = 1.0) -> None:
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p, _ in node.parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad += seed
        for node in reversed(order):
            g = node.grad
            if g == 0.0:
                continue
            for p, local in node.parents:
                p.grad += g * local


def _make(value, pairs):
    parents = tuple((a, d) for a, d in pairs if isinstance(a, Node))
    return Node(value, parents)


def _binary(fn):
    def rule(args, params):
        a, b = args
        av, bv = _val(a), _val(b)
        value, da, db = fn(av, bv)
        return _make(value, ((a, da), (b, db)))

    return rule


def _unary(fn):
    def rule(args, params):
        (a,) = args
        value, da = fn(_val(a), params)
        return _make(value, ((a, da),))

    return rule


def _select(pick):
    def rule(args, params):
        a, b = args
        return a if pick(_val(a), _val(b)) == 0 else b

    return rule


def _pow_rule(x, params):
    p = params["p"]
    value = FLOAT_OPS["powc"](x, p)
    if x == 0:
        # subgradient 0 where the derivative blows up or vanishes
        return value, (0.0 if p != 1 else 1.0)
    return value, p * x ** (p - 1)


def _dl2_or_rule(args, params):
    a, b = args
    av, bv = _val(a), _val(b)
    if av == 0 or bv == 0:
        return 0.0
    return -(a * b)


def _lookup_rule(args, params):
    i = int(_val(args[0]))
    return args[1 + i]


_RULES = {
    "add": _binary(lambda a, b: (a + b, 1.0, 1.0)),
    "sub": _binary(lambda a, b: (a - b, 1.0, -1.0)),
    "mul": _binary(lambda a, b: (a * b, b, a)),
    "div": _binary(lambda a, b: (a / b, 1.0 / b, -a / (b * b))),
    "neg": _unary(lambda a, p: (-a, -1.0)),
    "abs": _unary(lambda a, p: (abs(a), 1.0 if a > 0 else (-1.0 if a < 0 else 0.0))),
    "tanh": _unary(lambda a, p: (math.tanh(a), 1.0 - math.tanh(a) ** 2)),
    "exp": _unary(lambda a, p: (math.exp(a), math.exp(a))),
    "powc": _unary(_pow_rule),
    "max": _select(lambda a, b: 1 if b > a else 0),
    "min": _select(lambda a, b: 1 if b < a else 0),
    "neg_mul": _dl2_or_rule,
    "ind_eq": lambda args, params: FLOAT_OPS["ind_eq"](*(_val(a) for a in args)),
    "lookup": _lookup_rule,
    "and_s": lambda args, params: num.stl_and_generic(args, params["nu"]),
    "or_s": lambda args, params: -num.stl_and_generic([-a for a in args], params["nu"]),
}


def variables(values):
    """Wrap floats as fresh leaf nodes."""
    return [Node(float(v)) for v in values]
