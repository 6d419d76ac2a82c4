"""Evaluation of typed LDL expressions under a chosen logic.

Values are plain Python objects: floats for reals and truth values, ints for
indices, tuples for vectors, and :class:`Closure` / :class:`OpValue` /
:class:`NetValue` for functions.  Scalars may also be AD nodes or graph
symbols (see :mod:`ldl.num`), which is how training and graph lowering reuse
this evaluator.

Quantifiers over ``Index n`` and ``Bool`` are folded exactly.  Quantifiers
over ``Real`` and ``Vec n`` draw samples from the distribution registered for
the variable name, take the minimum (forall) or maximum (exists) body value
and optionally polish the best sample by coordinate descent.
"""
from __future__ import annotations

import functools
import math
import zlib
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from . import ast as A
from . import logics as Lg
from . import num
from .ast import Op
from .lowering import lower_dl2


class EvalError(Exception):
    pass


# ---------------------------------------------------------------------------
# Distributions


class Distribution:
    dim: int

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def clip(self, x: np.ndarray) -> np.ndarray:
        return x

    def scale(self) -> np.ndarray:
        """Initial step size per coordinate for refinement."""
        return np.ones(self.dim)

    refinable = True


@dataclass
class UniformBox(Distribution):
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        self.hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if self.lo.shape != self.hi.shape:
            raise ValueError("box bounds must have the same shape")
        if np.any(self.hi < self.lo):
            raise ValueError("box upper bounds must be >= lower bounds")
        self.dim = self.lo.size

    def sample(self, rng, n):
        return self.lo + (self.hi - self.lo) * rng.random((n, self.dim))

    def clip(self, x):
        return np.clip(x, self.lo, self.hi)

    def scale(self):
        return (self.hi - self.lo) / 4.0


@dataclass
class Gaussian(Distribution):
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        self.mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        self.std = np.broadcast_to(np.asarray(self.std, dtype=float), self.mean.shape).copy()
        if np.any(self.std < 0):
            raise ValueError("standard deviations must be non-negative")
        self.dim = self.mean.size

    def sample(self, rng, n):
        return self.mean + self.std * rng.standard_normal((n, self.dim))

    def scale(self):
        return self.std / 2.0


@dataclass
class Empirical(Distribution):
    """Points of a dataset.  Asking for at least as many samples as points
    returns every point; fewer draws a random selection with replacement."""

    points: np.ndarray
    refinable = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or len(pts) == 0:
            raise ValueError("empirical distribution needs a non-empty 2-D array of points")
        self.points = pts
        self.dim = pts.shape[1]

    def sample(self, rng, n):
        if n >= len(self.points):
            return self.points.copy()
        return self.points[rng.integers(len(self.points), size=n)]


@dataclass(frozen=True)
class SamplingConfig:
    sample_count: int = 64
    seed: int = 0
    refinement_steps: int = 0

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if self.refinement_steps < 0:
            raise ValueError("refinement_steps must be >= 0")


def sample_points(dist: Distribution, name: str, cfg: SamplingConfig) -> np.ndarray:
    """Samples for variable ``name``.  A larger count extends the smaller one's samples."""
    rng = np.random.default_rng([cfg.seed, zlib.crc32(name.encode())])
    return dist.sample(rng, cfg.sample_count)


def extremize(body: Callable, dist: Distribution, name: str, cfg: SamplingConfig, want_min: bool):
    """Best body value over samples of ``dist`` (then refined).

    ``body`` maps a sample row to a scalar.  Returns ``(value, row, k)`` where
    ``k`` is the evaluation number that produced the winner.
    """
    rows = sample_points(dist, name, cfg)
    best = None
    best_row = None
    best_k = -1
    k = 0

    def better(v, b):
        fv, fb = float(v), float(b)
        if math.isnan(fv):
            return False
        if math.isnan(fb):
            return True
        return fv < fb if want_min else fv > fb

    for row in rows:
        v = body(row)
        if best is None or better(v, best):
            best, best_row, best_k = v, row, k
        k += 1
    if cfg.refinement_steps and dist.refinable:
        step = np.array(dist.scale(), dtype=float)
        row = np.array(best_row, dtype=float)
        for _ in range(cfg.refinement_steps):
            improved = False
            for j in range(dist.dim):
                if step[j] == 0:
                    continue
                for sign in (1.0, -1.0):
                    cand = row.copy()
                    cand[j] += sign * step[j]
                    cand = dist.clip(cand)
                    if np.array_equal(cand, row):
                        continue
                    v = body(cand)
                    k += 1
                    if better(v, best):
                        best, row, best_k = v, cand, k - 1
                        best_row = cand
                        improved = True
                        break
            if not improved:
                step = step / 2.0
    return best, best_row, best_k


# ---------------------------------------------------------------------------
# Values


@dataclass
class Closure:
    lam: A.Lam
    env: tuple


@dataclass
class OpValue:
    op: Op
    args: tuple = ()


@dataclass
class NetValue:
    name: str


_ARITY = {Op.NOT: 1, Op.NEG: 1}


@dataclass
class SemanticContext:
    logic: Lg.Logic
    networks: Dict[str, object] = field(default_factory=dict)
    samplers: Dict[str, Distribution] = field(default_factory=dict)
    bindings: Dict[str, object] = field(default_factory=dict)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)


def truth_constant(L: Lg.Logic, b: bool) -> float:
    return Lg.interp_top(L) if b else Lg.interp_bottom(L)


@functools.lru_cache(maxsize=512)
def prepare(e: A.Expr, tag: str) -> A.Expr:
    """Logic-specific rewriting done once before evaluation."""
    if tag == Lg.DL2:
        return lower_dl2(e)
    return e


class Evaluator:
    """One evaluation run.  Subclassed hooks give the AD and graph routes."""

    def __init__(self, ctx: SemanticContext):
        self.ctx = ctx
        self.L = ctx.logic
        self.stl = ctx.logic.tag == Lg.STL
        # record/replay of chosen samples, see loss_and_gradient
        self.record: Optional[dict] = None
        self.replay: Optional[dict] = None
        self._qstack: tuple = ()
        self._occurrence: dict = {}
        self._counter = 0

    # hooks

    def call_network(self, name: str, x: tuple) -> tuple:
        net = self.ctx.networks.get(name)
        if net is None:
            raise EvalError(f"no network bound for '{name}'")
        xs = np.array([float(v) for v in x])
        if xs.size != net.input_dim:
            raise EvalError(f"network '{name}' expects {net.input_dim} inputs, got {xs.size}")
        return tuple(float(v) for v in net.forward(xs))

    def infinite_quantifier(self, q, env):
        dist = self.ctx.samplers.get(q.binder)
        if dist is None:
            raise EvalError(f"no sampler registered for quantified variable '{q.binder}'")
        want = 1 if isinstance(q.annot, A.RealType) else q.annot.n
        if dist.dim != want:
            raise EvalError(f"sampler for '{q.binder}' has dimension {dist.dim}, expected {want}")
        want_min = isinstance(q, A.Forall)
        key = (id(q), self._qstack)
        occ = self._occurrence.get(key, 0)
        self._occurrence[key] = occ + 1
        key = key + (occ,)
        outer = self._qstack

        if self.replay is not None:
            row, tag = self.replay[key]
            self._qstack = outer + (tag,)
            try:
                return self.eval(q.body, env + (self.row_value(q.annot, row),))
            finally:
                self._qstack = outer

        tags = []

        def body(row):
            self._counter += 1
            tag = (key, self._counter)
            tags.append(tag)
            self._qstack = outer + (tag,)
            try:
                return self.eval(q.body, env + (self.row_value(q.annot, row),))
            finally:
                self._qstack = outer

        value, row, k = extremize(body, dist, q.binder, self.ctx.sampling, want_min)
        if self.record is not None:
            self.record[key] = (np.array(row), tags[k])
        return value

    @staticmethod
    def row_value(annot, row):
        if isinstance(annot, A.RealType):
            return float(row[0])
        return tuple(float(v) for v in row)

    # core

    def run(self, e: A.Expr, env: tuple = ()):
        return self.eval(prepare(e, self.L.tag), env)

    def eval(self, e: A.Expr, env: tuple):
        if isinstance(e, A.App):
            b = A.as_binop(e)
            if b is not None:
                return self.eval_binop(b[0], b[1], b[2], env, e)
            fn = self.eval(e.fn, env)
            return self.apply(fn, self.eval(e.arg, env))
        if isinstance(e, A.BoundVar):
            return env[-1 - e.index]
        if isinstance(e, A.RealConst):
            return e.value
        if isinstance(e, A.IndexConst):
            return e.value
        if isinstance(e, A.BoolConst):
            return truth_constant(self.L, e.truth)
        if isinstance(e, A.Let):
            return self.eval(e.body, env + (self.eval(e.bound, env),))
        if isinstance(e, A.Lam):
            return Closure(e, env)
        if isinstance(e, A.VecLit):
            return tuple(self.eval(x, env) for x in e.elements)
        if isinstance(e, A.Builtin):
            return OpValue(e.op)
        if isinstance(e, A.NetworkVar):
            return NetValue(e.name)
        if isinstance(e, (A.Forall, A.Exists)):
            return self.eval_quantifier(e, env)
        raise EvalError(f"cannot evaluate {e!r}")

    def eval_binop(self, op, lhs, rhs, env, e):
        if self.stl and op in (Op.AND, Op.OR):
            # STL connectives are n-ary: evaluate a whole chain at once
            leaves = A.chain_operands(e, op)
            vals = [self.eval(x, env) for x in leaves]
            return Lg.interp_and(self.L, vals) if op is Op.AND else Lg.interp_or(self.L, vals)
        return self.compute(op, (self.eval(lhs, env), self.eval(rhs, env)))

    def apply(self, fn, arg):
        if isinstance(fn, Closure):
            return self.eval(fn.lam.body, fn.env + (arg,))
        if isinstance(fn, OpValue):
            args = fn.args + (arg,)
            if len(args) == _ARITY.get(fn.op, 2):
                return self.compute(fn.op, args)
            return OpValue(fn.op, args)
        if isinstance(fn, NetValue):
            return self.call_network(fn.name, arg)
        raise EvalError(f"cannot apply a non-function value {fn!r}")

    def compute(self, op: Op, args: tuple):
        L = self.L
        if op is Op.ADD:
            return args[0] + args[1]
        if op is Op.MUL:
            return args[0] * args[1]
        if op is Op.NEG:
            return -args[0]
        if op is Op.AND:
            return Lg.interp_and(L, args)
        if op is Op.OR:
            return Lg.interp_or(L, args)
        if op is Op.NOT:
            return Lg.interp_not(L, args[0])
        if op is Op.IMPLIES:
            return Lg.interp_implies(L, args[0], args[1])
        if op is Op.LOOKUP:
            vec, i = args
            if isinstance(i, int) and not 0 <= i < len(vec):
                raise EvalError(f"index {i} out of range for vector of length {len(vec)}")
            return num.lookup(vec, i)
        fn = _COMPARE[op]
        return fn(L, args[0], args[1])

    def eval_quantifier(self, q, env):
        annot = q.annot
        if isinstance(annot, A.Index):
            domain = range(annot.n)
        elif isinstance(annot, A.BoolType):
            domain = (truth_constant(self.L, True), truth_constant(self.L, False))
        elif isinstance(annot, (A.RealType, A.Vec)):
            return self.infinite_quantifier(q, env)
        else:
            raise EvalError(f"cannot quantify over {annot}")
        is_forall = isinstance(q, A.Forall)
        op = Op.AND if is_forall else Op.OR
        vals = []
        for d in domain:
            body_env = env + (d,)
            if self.stl:
                # splice the body's own chain so the fold matches the expansion
                for leaf in A.chain_operands(q.body, op):
                    vals.append(self.eval(leaf, body_env))
            else:
                vals.append(self.eval(q.body, body_env))
        return Lg.interp_and(self.L, vals) if is_forall else Lg.interp_or(self.L, vals)


_COMPARE = {
    Op.EQ: Lg.interp_eq,
    Op.NEQ: Lg.interp_neq,
    Op.LEQ: Lg.interp_leq,
    Op.GEQ: Lg.interp_geq,
    Op.LT: Lg.interp_lt,
    Op.GT: Lg.interp_gt,
}


# ---------------------------------------------------------------------------
# Public entry points


def to_value(t: A.LdlType, v, L: Lg.Logic):
    """Convert a user-supplied Python value to an evaluator value of type ``t``."""
    if isinstance(t, A.RealType):
        return float(v)
    if isinstance(t, A.Index):
        i = int(v)
        if not 0 <= i < t.n:
            raise EvalError(f"index {i} out of range for Index {t.n}")
        return i
    if isinstance(t, A.Vec):
        vals = tuple(float(x) for x in np.asarray(v, dtype=float).ravel())
        if len(vals) != t.n:
            raise EvalError(f"expected a vector of length {t.n}, got {len(vals)}")
        return vals
    if isinstance(t, A.BoolType):
        if isinstance(v, bool):
            return truth_constant(L, v)
        return float(v)
    raise EvalError(f"cannot supply a value of type {t}")


def eval_expr(e: A.Expr, ctx: SemanticContext, env: tuple = ()):
    """Value of ``e`` (closed, or open over ``env`` with innermost last)."""
    return Evaluator(ctx).run(e, env)


def apply_root(e: A.Expr, root_type: A.LdlType, ctx: SemanticContext, args=None, evaluator=None):
    """Evaluate ``e`` and apply it to its parameters.

    ``args`` is a sequence of positional values or a dict keyed by parameter
    name; missing names fall back to ``ctx.bindings``.
    """
    ev = evaluator or Evaluator(ctx)
    params, _ = A.uncurry(root_type)
    value = ev.run(e)
    names = _param_names(e, len(params))
    for k, t in enumerate(params):
        if isinstance(args, dict) or args is None:
            src = dict(ctx.bindings)
            src.update(args or {})
            if names[k] not in src:
                raise EvalError(f"no value supplied for parameter '{names[k]}'")
            raw = src[names[k]]
        else:
            if k >= len(args):
                raise EvalError(f"expected {len(params)} arguments, got {len(args)}")
            raw = args[k]
        value = ev.apply(value, raw if _is_internal(raw) else to_value(t, raw, ctx.logic))
    return value


def _is_internal(v) -> bool:
    return isinstance(v, (num.Lifted, Closure, OpValue, NetValue))


def _param_names(e: A.Expr, n: int) -> list:
    names = []
    while isinstance(e, A.Let):
        e = e.body
    while isinstance(e, A.Lam) and len(names) < n:
        names.append(e.binder)
        e = e.body
    while len(names) < n:
        names.append(f"arg{len(names)}")
    return names


def param_names(e: A.Expr, root_type: A.LdlType) -> list:
    return _param_names(e, len(A.uncurry(root_type)[0]))


def eval_forall(binder: str, binder_type: A.LdlType, body: A.Expr, ctx: SemanticContext, env: tuple = ()):
    return Evaluator(ctx).run(A.Forall(binder, binder_type, body), env)


def eval_exists(binder: str, binder_type: A.LdlType, body: A.Expr, ctx: SemanticContext, env: tuple = ()):
    return Evaluator(ctx).run(A.Exists(binder, binder_type, body), env)


def loss(e: A.Expr, ctx: SemanticContext, env: tuple = ()):
    """Penalty of a Bool-typed expression: 0 when fully satisfied."""
    return Lg.penalty(ctx.logic, eval_expr(e, ctx, env))
