"""Gradient descent on a dense network against cross-entropy plus a logical loss.

The total objective is ``alpha * CE + beta * DL`` where DL is the mean penalty
of the specification over the rows of a mini-batch, with the data input
bound to each row.  Infinite quantifiers are sampled afresh for every batch;
their gradient flows through the chosen extremal sample only.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

from . import ast as A
from . import logics as Lg
from ._ad import Node
from .evaluator import (
    Empirical,
    EvalError,
    Evaluator,
    SamplingConfig,
    SemanticContext,
    UniformBox,
    apply_root,
    param_names,
)
from .netio import Context, Dataset, DenseNetwork

CE_CLAMP = 1e-12


class TrainingError(Exception):
    """Non-finite loss; carries where it happened."""

    def __init__(self, message: str, epoch: int, batch: int, term: str):
        super().__init__(f"{message} (epoch {epoch}, batch {batch}, term {term})")
        self.epoch = epoch
        self.batch = batch
        self.term = term


@dataclass(frozen=True)
class TrainConfig:
    alpha: float = 1.0
    beta: float = 1.0
    epochs: int = 10
    batch_size: int = 16
    lr: float = 0.1
    seed: int = 0
    eval_samples: int = 200
    samples: int = 8  # per infinite quantifier per row
    refine: int = 0
    perturbation: float = 0.1  # radius of per-row boxes for unsampled quantified inputs
    test_fraction: float = 0.25

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if self.alpha + self.beta <= 0:
            raise ValueError("alpha + beta must be positive")
        if self.epochs < 0 or self.batch_size < 1 or self.eval_samples < 1:
            raise ValueError("epochs, batch_size and eval_samples must be positive")


@dataclass
class EpochRecord:
    epoch: int
    total: float
    ce: float
    dl: float
    accuracy: float
    satisfaction: float


@dataclass
class TrainReport:
    config: dict
    logic: str
    epochs: List[EpochRecord] = field(default_factory=list)

    def rows(self) -> List[dict]:
        return [asdict(r) for r in self.epochs]

    def dumps(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.rows())

    @property
    def final(self) -> EpochRecord:
        return self.epochs[-1]


def cross_entropy(y_pred, y_true) -> float:
    p = np.asarray(y_pred, dtype=float)
    y = np.asarray(y_true, dtype=float)
    if p.shape != y.shape:
        raise ValueError(f"dimension mismatch: prediction {p.shape} vs label {y.shape}")
    return float(-np.sum(y * np.log(np.maximum(p, CE_CLAMP))))


def make_synthetic_dataset(seed: int, n_points: int, margin: float) -> Dataset:
    """Two 2-D Gaussian blobs with one-hot labels, separated by a band of width ``margin``.

    The separating direction is drawn from the seed.  Along it every point
    lies at least ``margin / 2`` from the origin on its class's side, so the
    hyperplane through the origin separates the classes exactly.
    """
    if margin <= 0:
        raise ValueError("margin must be positive")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 2 * math.pi)
    u = np.array([math.cos(theta), math.sin(theta)])
    w = np.array([-u[1], u[0]])
    labels = np.arange(n_points) % 2
    along = margin / 2 + np.abs(rng.standard_normal(n_points))
    across = rng.standard_normal(n_points)
    sign = np.where(labels == 0, 1.0, -1.0)
    x = (sign * along)[:, None] * u + across[:, None] * w
    y = np.eye(2)[labels]
    return Dataset(x, y)


# ---------------------------------------------------------------------------
# Evaluators


class _GradEvaluator(Evaluator):
    """Evaluates on AD nodes; network calls are recorded for weight gradients."""

    def __init__(self, ctx):
        super().__init__(ctx)
        self.calls = []

    def call_network(self, name, x):
        net = self.ctx.networks.get(name)
        if net is None:
            raise EvalError(f"no network bound for '{name}'")
        xs = np.array([float(v) for v in x])
        trace = net.forward_with_gradient(xs)
        lifted = [(k, v) for k, v in enumerate(x) if isinstance(v, Node)]
        J = trace.input_jacobian() if lifted else None
        out = tuple(
            Node(float(y), tuple((v, float(J[j, k])) for k, v in lifted) if lifted else ())
            for j, y in enumerate(trace.output)
        )
        self.calls.append((name, trace, out))
        return out


class _Classical(Evaluator):
    """Two-valued reading with exact comparisons (used for constraint satisfaction)."""

    def eval(self, e, env):
        if isinstance(e, A.BoolConst):
            return e.truth
        return super().eval(e, env)

    def compute(self, op, args):
        if op is A.Op.AND:
            return bool(args[0]) and bool(args[1])
        if op is A.Op.OR:
            return bool(args[0]) or bool(args[1])
        if op is A.Op.NOT:
            return not args[0]
        if op is A.Op.IMPLIES:
            return (not args[0]) or bool(args[1])
        cmp = _CLASSICAL_CMP.get(op)
        if cmp is not None:
            return cmp(float(args[0]), float(args[1]))
        return super().compute(op, args)

    def eval_quantifier(self, q, env):
        if isinstance(q.annot, A.Index):
            domain = range(q.annot.n)
        elif isinstance(q.annot, A.BoolType):
            domain = (True, False)
        else:
            return self.infinite_quantifier(q, env)
        vals = (self.eval(q.body, env + (d,)) for d in domain)
        return all(vals) if isinstance(q, A.Forall) else any(vals)


_CLASSICAL_CMP = {
    A.Op.EQ: lambda a, b: a == b,
    A.Op.NEQ: lambda a, b: a != b,
    A.Op.LEQ: lambda a, b: a <= b,
    A.Op.GEQ: lambda a, b: a >= b,
    A.Op.LT: lambda a, b: a < b,
    A.Op.GT: lambda a, b: a > b,
}


# ---------------------------------------------------------------------------
# Training


class _Problem:
    """A specification prepared for per-row evaluation against one network."""

    def __init__(self, spec, net: DenseNetwork, ctx: Context, logic: Lg.Logic, cfg: TrainConfig):
        self.expr = spec.as_expr()
        self.root_type = spec.type_of()
        self.logic = logic
        self.cfg = cfg
        self.ctx = ctx
        names = [n for n, (m, k) in spec.networks.items() if (m, k) == (net.input_dim, net.output_dim)]
        if not names:
            raise EvalError("no declared network matches the trained network's dimensions")
        self.net_name = names[0]
        params, result = A.uncurry(self.root_type)
        if result != A.Bool:
            raise EvalError("training specification must return Bool")
        self.params = list(zip(param_names(self.expr, self.root_type), params))
        free = [n for n, t in self.params if n not in ctx.bindings]
        if len(free) > 1:
            raise EvalError(f"parameters {free} need bindings; only one may be the data input")
        if free:
            t = dict(self.params)[free[0]]
            if t != A.Vec(net.input_dim):
                raise EvalError(f"data parameter '{free[0]}' must have type Vec {net.input_dim}")
        self.data_param = free[0] if free else None
        self.qtypes = _infinite_quantified(self.expr)

    def samplers(self, row) -> dict:
        out = dict(self.ctx.samplers)
        r = self.cfg.perturbation
        for name, dim in self.qtypes.items():
            if name not in out and dim == len(row):
                out[name] = UniformBox(row - r, row + r)
        return out

    def args(self, row) -> dict:
        return {self.data_param: row} if self.data_param else {}

    def semantic(self, net, samplers, sampling, logic=None) -> SemanticContext:
        return SemanticContext(
            logic or self.logic, {self.net_name: net}, samplers, dict(self.ctx.bindings), sampling
        )

    def row_loss(self, net, row, seed: int, want_grad: bool):
        """Penalty at ``row`` and, optionally, its weight gradient."""
        sampling = SamplingConfig(self.cfg.samples, seed, self.cfg.refine)
        sem = self.semantic(net, self.samplers(row), sampling)
        ev = Evaluator(sem)
        ev.record = {}
        value = apply_root(self.expr, self.root_type, sem, self.args(row), evaluator=ev)
        pen = float(Lg.penalty(self.logic, value))
        if not want_grad:
            return pen, None
        gev = _GradEvaluator(sem)
        gev.replay = ev.record
        gval = apply_root(self.expr, self.root_type, sem, self.args(row), evaluator=gev)
        gpen = Lg.penalty(self.logic, gval)
        grads = [(np.zeros_like(l.weight), np.zeros_like(l.bias)) for l in net.layers]
        if isinstance(gpen, Node):
            gpen.backward()
            for name, trace, out in gev.calls:
                g = np.array([o.grad for o in out])
                if not np.any(g):
                    continue
                _, layer_grads = trace.backward(g)
                for acc, (dW, db) in zip(grads, layer_grads):
                    acc[0][...] += dW
                    acc[1][...] += db
        return pen, grads

    def satisfied(self, net, row, probe: dict) -> bool:
        samplers = dict(self.ctx.samplers)
        samplers.update({k: Empirical(np.atleast_2d(v)) for k, v in probe.items()})
        sem = self.semantic(net, samplers, SamplingConfig(1, 0, 0), Lg.logic("godel"))
        return bool(apply_root(self.expr, self.root_type, sem, self.args(row), evaluator=_Classical(sem)))


def _infinite_quantified(e: A.Expr) -> Dict[str, int]:
    out = {}
    for s in A.subterms(e):
        if isinstance(s, (A.Forall, A.Exists)):
            if isinstance(s.annot, A.Vec):
                out[s.binder] = s.annot.n
            elif isinstance(s.annot, A.RealType):
                out[s.binder] = 1
    return out


def _ce_and_grad(net: DenseNetwork, x: np.ndarray, y: np.ndarray):
    trace = net.forward_with_gradient(x)
    p = trace.output
    clipped = np.maximum(p, CE_CLAMP)
    ce = float(-np.sum(y * np.log(clipped)) / len(x))
    g = np.where(p > CE_CLAMP, -y / clipped, 0.0) / len(x)
    _, grads = trace.backward(g)
    return ce, grads


def accuracy(net: DenseNetwork, ds: Dataset) -> float:
    if len(ds) == 0:
        return float("nan")
    pred = net.forward(ds.x).argmax(axis=1)
    return float(np.mean(pred == ds.y.argmax(axis=1)))


def split(ds: Dataset, test_fraction: float, seed: int):
    rng = np.random.default_rng([seed, 1])
    idx = rng.permutation(len(ds))
    n_test = int(round(test_fraction * len(ds)))
    return ds.subset(np.sort(idx[n_test:])), ds.subset(np.sort(idx[:n_test]))


def constraint_satisfaction(problem: _Problem, net, test: Dataset, n: int, seed: int) -> float:
    """Fraction of ``n`` fresh probe points where the property holds classically."""
    rng = np.random.default_rng([seed, 2])
    r = problem.cfg.perturbation
    hits = 0
    for _ in range(n):
        row = test.x[int(rng.integers(len(test)))]
        probe = {}
        for name, dim in problem.qtypes.items():
            if name in problem.ctx.samplers:
                probe[name] = problem.ctx.samplers[name].sample(rng, 1)[0]
            elif dim == len(row):
                probe[name] = row + rng.uniform(-r, r, dim)
        hits += problem.satisfied(net, row, probe)
    return hits / n


def train(spec, net: DenseNetwork, dataset: Dataset, ctx: Optional[Context], logic: Lg.Logic, cfg: TrainConfig) -> TrainReport:
    """Plain SGD on ``alpha * CE + beta * DL``; ``net`` is updated in place."""
    ctx = ctx or Context()
    problem = _Problem(spec, net, ctx, logic, cfg)
    train_ds, test_ds = split(dataset, cfg.test_fraction, cfg.seed)
    if len(test_ds) == 0:
        test_ds = train_ds
    rng = np.random.default_rng([cfg.seed, 0])
    report = TrainReport(asdict(cfg), logic.tag)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(train_ds))
        ce_sum = dl_sum = 0.0
        batches = 0
        for b, start in enumerate(range(0, len(order), cfg.batch_size)):
            idx = order[start:start + cfg.batch_size]
            x, y = train_ds.x[idx], train_ds.y[idx]
            ce, ce_grads = _ce_and_grad(net, x, y)
            if not math.isfinite(ce):
                raise TrainingError("non-finite cross-entropy", epoch, b, "ce")
            seeds = rng.integers(0, 2**31, len(idx))
            dl = 0.0
            dl_grads = [(np.zeros_like(l.weight), np.zeros_like(l.bias)) for l in net.layers]
            for row, s in zip(x, seeds):
                pen, g = problem.row_loss(net, row, int(s), want_grad=cfg.beta > 0)
                if not math.isfinite(pen):
                    raise TrainingError("non-finite logical loss", epoch, b, f"dl at row {row.tolist()}")
                dl += pen
                if g is not None:
                    for acc, (dW, db) in zip(dl_grads, g):
                        acc[0][...] += dW
                        acc[1][...] += db
            dl /= len(idx)
            grads = [
                (cfg.alpha * cW + cfg.beta * dW / len(idx), cfg.alpha * cb + cfg.beta * db / len(idx))
                for (cW, cb), (dW, db) in zip(ce_grads, dl_grads)
            ]
            net.apply_update(grads, cfg.lr)
            ce_sum += ce
            dl_sum += dl
            batches += 1
        ce_mean = ce_sum / max(batches, 1)
        dl_mean = dl_sum / max(batches, 1)
        report.epochs.append(EpochRecord(
            epoch,
            cfg.alpha * ce_mean + cfg.beta * dl_mean,
            ce_mean,
            dl_mean,
            accuracy(net, test_ds),
            constraint_satisfaction(problem, net, test_ds, cfg.eval_samples, cfg.seed + epoch),
        ))
    return report


def loss_and_gradient(spec, net: DenseNetwork, x, y, ctx: Optional[Context], logic: Lg.Logic, cfg: TrainConfig, seed: int = 0):
    """Batch objective ``alpha * CE + beta * DL`` and its weight gradient (for checking)."""
    problem = _Problem(spec, net, ctx or Context(), logic, cfg)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    ce, ce_grads = _ce_and_grad(net, x, y)
    dl = 0.0
    grads = [(cfg.alpha * cW, cfg.alpha * cb) for cW, cb in ce_grads]
    for row in x:
        pen, g = problem.row_loss(net, row, seed, want_grad=True)
        dl += pen / len(x)
        for acc, (dW, db) in zip(grads, g):
            acc[0][...] += cfg.beta * dW / len(x)
            acc[1][...] += cfg.beta * db / len(x)
    return cfg.alpha * ce + cfg.beta * dl, grads
