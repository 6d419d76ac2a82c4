"""Shared helpers for building random inputs, networks and samplers for corpus specs."""
import glob
import os

import numpy as np

from ldl import ast as A
from ldl.evaluator import SamplingConfig, SemanticContext, apply_root, param_names
from ldl.graph import compile_spec, run_graph
from ldl.logics import penalty
from ldl.netio import DenseNetwork
from ldl.parser import parse
from ldl.typechecker import check_spec

CORPUS = os.path.join(os.path.dirname(__file__), os.pardir, "src", "ldl", "corpus")


def corpus_files(include_large=False):
    files = sorted(glob.glob(os.path.join(CORPUS, "*.ldl")))
    if not include_large:
        files = [f for f in files if os.path.basename(f) != "robustness.ldl"]
    return files


def load(path):
    with open(path) as fh:
        spec = parse(fh.read())
    check_spec(spec)
    return spec


def random_networks(spec, seed):
    nets = {}
    for k, (name, (m, n)) in enumerate(sorted(spec.networks.items())):
        acts = ["relu", "softmax"] if n > 1 else ["relu", "identity"]
        nets[name] = DenseNetwork.random([m, 4, n], acts, seed=seed * 31 + k)
    return nets


def samplers_for(spec):
    from ldl.evaluator import UniformBox

    out = {}
    for s in A.subterms(spec.as_expr()):
        if isinstance(s, (A.Forall, A.Exists)):
            if isinstance(s.annot, A.RealType):
                out[s.binder] = UniformBox([-1.0], [1.0])
            elif isinstance(s.annot, A.Vec):
                out[s.binder] = UniformBox([-1.0] * s.annot.n, [1.0] * s.annot.n)
    return out


def random_inputs(spec, rng):
    t = spec.type_of()
    names = param_names(spec.as_expr(), t)
    out = {}
    for name, pt in zip(names, A.uncurry(t)[0]):
        if isinstance(pt, A.RealType):
            out[name] = float(np.round(rng.uniform(-2, 2), 2)) if rng.random() < 0.3 else float(rng.uniform(-2, 2))
        elif isinstance(pt, A.Vec):
            out[name] = rng.uniform(-2, 2, pt.n).tolist()
        elif isinstance(pt, A.Index):
            out[name] = int(rng.integers(pt.n))
        else:
            raise ValueError(f"no random input for {pt}")
    return out


def direct_and_graph(spec, logic, inputs, nets, samplers, sampling=SamplingConfig(8, 3, 1)):
    ctx = SemanticContext(logic, nets, samplers, {}, sampling)
    truth = apply_root(spec.as_expr(), spec.type_of(), ctx, inputs)
    g = compile_spec(spec, logic)
    gt, gp = run_graph(g, inputs, nets, samplers, sampling)
    return (truth, penalty(logic, truth)), (gt, gp)


def _flat(grads):
    return np.concatenate([np.concatenate([dW.ravel(), db.ravel()]) for dW, db in grads])


def _perturbed(net, k, h):
    out = net.copy()
    for p in out.parameters():
        if k < p.size:
            p.ravel()[k] += h
            return out
        k -= p.size
    raise IndexError(k)


def rel_err(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), 1e-12))


def netio_gradient_error(seed, h=1e-5):
    """Relative error of reverse-mode weight gradients of c . f(x) against central differences."""
    rng = np.random.default_rng(seed)
    m, k, n = (int(v) for v in rng.integers(1, 5, 3))
    acts = ["relu", str(rng.choice(["identity", "softmax", "relu"]))]
    net = DenseNetwork.random([m, k, n], acts, seed=seed)
    x = rng.standard_normal(m)
    c = rng.standard_normal(n)
    _, grads = net.forward_with_gradient(x).backward(c)
    analytic = _flat(grads)
    total = sum(p.size for p in net.parameters())
    fd = np.array([
        (c @ _perturbed(net, j, h).forward(x) - c @ _perturbed(net, j, -h).forward(x)) / (2 * h)
        for j in range(total)
    ])
    return rel_err(analytic, fd)


GRAD_SPEC = """
network f : Vec 2 -> Vec 2
let p : Vec 2 -> Bool =
  lam (x : Vec 2) .
    (f x ! 0 <= 0.7 and forall (i : Index 2) . f x ! i >= 0.05) or f x ! 1 > f x ! 0
"""


def dl_gradient_error(seed, logic, h=1e-6):
    """Relative error of the full alpha*CE + beta*DL weight gradient against central differences.

    Coordinates where the two one-sided quotients disagree sit next to a kink
    and are left out.
    """
    from ldl.trainer import TrainConfig, loss_and_gradient

    spec = parse(GRAD_SPEC)
    rng = np.random.default_rng(seed)
    net = DenseNetwork.random([2, 3, 2], ["relu", "softmax"], seed=seed)
    x = rng.standard_normal((3, 2))
    y = np.eye(2)[rng.integers(2, size=3)]
    cfg = TrainConfig(alpha=float(rng.uniform(0, 1)), beta=1.0)
    f0, grads = loss_and_gradient(spec, net, x, y, None, logic, cfg)
    analytic = _flat(grads)
    keep, fd = [], []
    for j in range(len(analytic)):
        up = loss_and_gradient(spec, _perturbed(net, j, h), x, y, None, logic, cfg)[0]
        down = loss_and_gradient(spec, _perturbed(net, j, -h), x, y, None, logic, cfg)[0]
        right, left = (up - f0) / h, (f0 - down) / h
        if abs(right - left) > 1e-3 * max(1.0, abs(right), abs(left)):
            continue
        keep.append(j)
        fd.append((up - down) / (2 * h))
    if not keep:
        return 0.0
    return rel_err(analytic[keep], np.array(fd))


TREND = dict(eps=0.5, delta=0.05, margin=1.0, points=80, epochs=10)


def trend_pair(seed, logic):
    """Final constraint satisfaction with (alpha, beta) = (1, 1) and (1, 0) on the same data and seed."""
    from ldl.netio import Context
    from ldl.trainer import TrainConfig, make_synthetic_dataset, train

    spec = load(os.path.join(CORPUS, "robustness2d.ldl"))
    ctx = Context(bindings={"eps": TREND["eps"], "delta": TREND["delta"]})
    ds = make_synthetic_dataset(seed, TREND["points"], TREND["margin"])
    out = []
    for beta in (1.0, 0.0):
        cfg = TrainConfig(alpha=1.0, beta=beta, epochs=TREND["epochs"], lr=0.5, seed=seed, perturbation=TREND["eps"])
        out.append(train(spec, DenseNetwork.identity(2, "softmax"), ds, ctx, logic, cfg).final.satisfaction)
    return out


def dl_only_curve(seed, logic, lr):
    """Per-epoch DL component when training with (alpha, beta) = (0, 1)."""
    from ldl.netio import Context
    from ldl.trainer import TrainConfig, make_synthetic_dataset, train

    spec = load(os.path.join(CORPUS, "robustness2d.ldl"))
    ctx = Context(bindings={"eps": TREND["eps"], "delta": TREND["delta"]})
    ds = make_synthetic_dataset(seed, TREND["points"], TREND["margin"])
    cfg = TrainConfig(alpha=0.0, beta=1.0, epochs=TREND["epochs"], lr=lr, seed=seed, perturbation=TREND["eps"])
    report = train(spec, DenseNetwork.identity(2, "softmax"), ds, ctx, logic, cfg)
    return [e.dl for e in report.epochs]


def non_increasing(values, band=0.05):
    """Each value at most the previous one plus ``band`` times the first."""
    slack = band * abs(values[0])
    return all(b <= a + slack for a, b in zip(values, values[1:]))
