"""Dense feed-forward networks, datasets and quantifier contexts.

File formats (all UTF-8):

``.net``  JSON object::

    {"format": "ldl-net", "version": 1,
     "layers": [{"in": 2, "out": 3, "activation": "relu",
                 "weights": [...row-major out*in values...],
                 "bias": [...out values...]}, ...]}

``.ctx``  JSON object with optional ``samplers`` and ``bindings``::

    {"samplers": {"x": {"kind": "uniform", "lo": 0.0, "hi": 1.0},
                  "y": {"kind": "gaussian", "mean": [0, 0], "std": 0.5},
                  "z": {"kind": "empirical", "points": [[0, 0], [1, 0]]},
                  "w": {"kind": "empirical", "csv": "data.csv"}},
     "bindings": {"eps": 0.1, "xhat": [0.0, 0.0], "i": 3}}

    Scalar bounds broadcast to the variable's dimension.  A ``csv`` path is
    relative to the context file and contributes its input columns.

``.csv``  header row naming every column; names starting with ``x`` are
    inputs and names starting with ``y`` are outputs, each in file order.
"""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import ast as A
from .evaluator import Distribution, Empirical, Gaussian, UniformBox

ACTIVATIONS = ("relu", "identity", "softmax")


class NetIOError(Exception):
    pass


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def _activate(kind: str, z: np.ndarray) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "softmax":
        return _softmax(z)
    return z


def _activation_vjp(kind: str, z: np.ndarray, a: np.ndarray, g: np.ndarray) -> np.ndarray:
    if kind == "relu":
        return g * (z > 0)
    if kind == "softmax":
        return a * (g - (g * a).sum(axis=-1, keepdims=True))
    return g


@dataclass
class Layer:
    weight: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str = "identity"

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=float)
        self.bias = np.asarray(self.bias, dtype=float).reshape(-1)
        if self.weight.ndim != 2:
            raise NetIOError("layer weights must be a matrix")
        if self.bias.shape != (self.weight.shape[0],):
            raise NetIOError(
                f"bias has {self.bias.size} entries but the layer has {self.weight.shape[0]} outputs"
            )
        if self.activation not in ACTIVATIONS:
            raise NetIOError(f"unknown activation '{self.activation}'")


class ForwardTrace:
    """Intermediate values of one forward pass, for reverse accumulation."""

    def __init__(self, net: "DenseNetwork", x: np.ndarray):
        self.net = net
        self.inputs = []
        self.pre = []
        self.post = []
        a = x
        for layer in net.layers:
            self.inputs.append(a)
            z = a @ layer.weight.T + layer.bias
            a = _activate(layer.activation, z)
            self.pre.append(z)
            self.post.append(a)
        self.output = a

    def backward(self, grad_output) -> Tuple[np.ndarray, List[Tuple[np.ndarray, np.ndarray]]]:
        """Gradient w.r.t. the input and per-layer ``(dW, db)`` for output cotangent ``grad_output``.

        For a batch of inputs the weight gradients are summed over the batch.
        """
        g = np.asarray(grad_output, dtype=float).reshape(self.output.shape)
        grads = []
        for layer, a_in, z, a in zip(
            reversed(self.net.layers), reversed(self.inputs), reversed(self.pre), reversed(self.post)
        ):
            gz = _activation_vjp(layer.activation, z, a, g)
            if gz.ndim == 1:
                dW = np.outer(gz, a_in)
                db = gz.copy()
            else:
                dW = gz.T @ a_in
                db = gz.sum(axis=0)
            grads.append((dW, db))
            g = gz @ layer.weight
        grads.reverse()
        return g, grads

    def input_jacobian(self) -> np.ndarray:
        """d output / d input, shape (n, m), for a single (unbatched) input."""
        n = self.output.shape[-1]
        rows = [self.backward(np.eye(n)[j])[0] for j in range(n)]
        return np.array(rows)


class DenseNetwork:
    def __init__(self, layers: Sequence[Layer]):
        layers = list(layers)
        if not layers:
            raise NetIOError("a network needs at least one layer")
        for k in range(1, len(layers)):
            prev_out = layers[k - 1].weight.shape[0]
            this_in = layers[k].weight.shape[1]
            if prev_out != this_in:
                raise NetIOError(
                    f"layer {k} takes {this_in} inputs but layer {k - 1} produces {prev_out}"
                )
        for layer in layers[:-1]:
            if layer.activation == "softmax":
                raise NetIOError("softmax is only allowed as the final activation")
        self.layers = layers

    @property
    def input_dim(self) -> int:
        return self.layers[0].weight.shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].weight.shape[0]

    def _check_input(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.input_dim or x.ndim > 2:
            raise NetIOError(f"network expects inputs of length {self.input_dim}, got shape {x.shape}")
        return x

    def forward(self, x) -> np.ndarray:
        """Outputs for one input vector or a batch of rows."""
        a = self._check_input(x)
        for layer in self.layers:
            a = _activate(layer.activation, a @ layer.weight.T + layer.bias)
        return a

    __call__ = forward

    def forward_with_gradient(self, x) -> ForwardTrace:
        return ForwardTrace(self, self._check_input(x))

    def parameters(self) -> List[np.ndarray]:
        out = []
        for layer in self.layers:
            out.extend([layer.weight, layer.bias])
        return out

    def copy(self) -> "DenseNetwork":
        return DenseNetwork(
            [Layer(l.weight.copy(), l.bias.copy(), l.activation) for l in self.layers]
        )

    def apply_update(self, grads, lr: float) -> None:
        for layer, (dW, db) in zip(self.layers, grads):
            layer.weight -= lr * dW
            layer.bias -= lr * db

    @classmethod
    def random(cls, sizes: Sequence[int], activations: Sequence[str], seed: int = 0) -> "DenseNetwork":
        """He-style random initialisation; ``sizes`` lists every layer width including the input."""
        rng = np.random.default_rng(seed)
        layers = []
        for (m, n), act in zip(zip(sizes[:-1], sizes[1:]), activations):
            W = rng.standard_normal((n, m)) * np.sqrt(2.0 / m)
            b = rng.standard_normal(n) * 0.1
            layers.append(Layer(W, b, act))
        return cls(layers)

    @classmethod
    def identity(cls, n: int, activation: str = "identity") -> "DenseNetwork":
        return cls([Layer(np.eye(n), np.zeros(n), activation)])

    def to_json(self) -> dict:
        return {
            "format": "ldl-net",
            "version": 1,
            "layers": [
                {
                    "in": int(l.weight.shape[1]),
                    "out": int(l.weight.shape[0]),
                    "activation": l.activation,
                    "weights": [float(v) for v in l.weight.ravel()],
                    "bias": [float(v) for v in l.bias],
                }
                for l in self.layers
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DenseNetwork":
        if not isinstance(data, dict) or data.get("format") != "ldl-net":
            raise NetIOError("not an ldl-net file (missing \"format\": \"ldl-net\")")
        layers = []
        for k, spec in enumerate(data.get("layers", [])):
            try:
                m, n = int(spec["in"]), int(spec["out"])
                w = np.asarray(spec["weights"], dtype=float)
                b = np.asarray(spec["bias"], dtype=float)
                act = spec.get("activation", "identity")
            except (KeyError, TypeError, ValueError) as exc:
                raise NetIOError(f"layer {k}: malformed entry ({exc})") from None
            if w.size != m * n:
                raise NetIOError(f"layer {k}: expected {n}x{m}={m * n} weights, found {w.size}")
            layers.append(Layer(w.reshape(n, m), b, act))
        return cls(layers)


def load_network(path: str) -> DenseNetwork:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise NetIOError(f"{path}: malformed network file ({exc})") from None
    return DenseNetwork.from_json(data)


def save_network(net: DenseNetwork, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(net.to_json(), fh, indent=1)
        fh.write("\n")


def forward(net: DenseNetwork, x) -> np.ndarray:
    return net.forward(x)


def forward_with_gradient(net: DenseNetwork, x) -> ForwardTrace:
    return net.forward_with_gradient(x)


# ---------------------------------------------------------------------------
# Datasets


@dataclass
class Dataset:
    x: np.ndarray  # (N, m)
    y: np.ndarray  # (N, n)
    input_names: List[str] = field(default_factory=list)
    output_names: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        self.y = np.atleast_2d(np.asarray(self.y, dtype=float))
        if len(self.x) != len(self.y):
            raise NetIOError("inputs and outputs have different row counts")
        if not self.input_names:
            self.input_names = [f"x{i}" for i in range(self.x.shape[1])]
        if not self.output_names:
            self.output_names = [f"y{i}" for i in range(self.y.shape[1])]

    def __len__(self):
        return len(self.x)

    @property
    def rows(self):
        return list(zip(self.x, self.y))

    def check_labels(self, tol: float = 1e-9) -> None:
        if np.any(self.y < -tol) or np.any(np.abs(self.y.sum(axis=1) - 1.0) > tol):
            raise NetIOError("labels must be probability vectors summing to 1")

    def subset(self, idx) -> "Dataset":
        return Dataset(self.x[idx], self.y[idx], self.input_names, self.output_names)


def load_dataset(path: str) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise NetIOError(f"{path}: empty dataset file") from None
        xi = [k for k, h in enumerate(header) if h.startswith("x")]
        yi = [k for k, h in enumerate(header) if h.startswith("y")]
        if len(xi) + len(yi) != len(header):
            bad = [h for h in header if not h.startswith(("x", "y"))]
            raise NetIOError(f"{path}: column names must start with 'x' or 'y', got {bad}")
        xs, ys = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise NetIOError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                vals = [float(v) for v in row]
            except ValueError as exc:
                raise NetIOError(f"{path}:{lineno}: {exc}") from None
            xs.append([vals[k] for k in xi])
            ys.append([vals[k] for k in yi])
    if not xs:
        raise NetIOError(f"{path}: dataset has no rows")
    return Dataset(
        np.array(xs), np.array(ys) if yi else np.zeros((len(xs), 0)),
        [header[k] for k in xi], [header[k] for k in yi],
    )


def save_dataset(ds: Dataset, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(ds.input_names) + list(ds.output_names))
        for x, y in zip(ds.x, ds.y):
            w.writerow([repr(float(v)) for v in x] + [repr(float(v)) for v in y])


# ---------------------------------------------------------------------------
# Quantifier contexts


def _quantified_types(e: A.Expr) -> Dict[str, A.LdlType]:
    return {
        t.binder: t.annot
        for t in A.subterms(e)
        if isinstance(t, (A.Forall, A.Exists)) and isinstance(t.annot, (A.RealType, A.Vec))
    }


def _dim(t: A.LdlType) -> int:
    return 1 if isinstance(t, A.RealType) else t.n


def _vector(value, dim: int, what: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        arr = np.full(dim, float(arr[0]))
    if arr.shape != (dim,):
        raise NetIOError(f"{what}: expected {dim} values, got {arr.size}")
    return arr


def make_distribution(spec: dict, dim: Optional[int], base_dir: str = ".", what: str = "sampler") -> Distribution:
    kind = spec.get("kind")
    try:
        if kind == "uniform":
            return UniformBox(_vector(spec["lo"], dim, what + ".lo"), _vector(spec["hi"], dim, what + ".hi"))
        if kind == "box":
            c = _vector(spec["center"], dim, what + ".center")
            r = _vector(spec["radius"], dim, what + ".radius")
            return UniformBox(c - r, c + r)
        if kind == "gaussian":
            return Gaussian(_vector(spec["mean"], dim, what + ".mean"), _vector(spec["std"], dim, what + ".std"))
        if kind == "empirical":
            if "csv" in spec:
                pts = load_dataset(os.path.join(base_dir, spec["csv"])).x
            else:
                pts = np.asarray(spec["points"], dtype=float)
                if pts.ndim == 1:
                    pts = pts[:, None]
            if pts.ndim != 2 or (dim is not None and pts.shape[1] != dim):
                raise NetIOError(f"{what}: empirical points must have dimension {dim}")
            return Empirical(pts)
    except KeyError as exc:
        raise NetIOError(f"{what}: missing field {exc}") from None
    except ValueError as exc:
        raise NetIOError(f"{what}: {exc}") from None
    raise NetIOError(f"{what}: unknown distribution kind {kind!r}")


@dataclass
class Context:
    samplers: Dict[str, Distribution] = field(default_factory=dict)
    bindings: Dict[str, object] = field(default_factory=dict)


def parse_context(data: dict, spec_expr: Optional[A.Expr] = None, root_type=None, base_dir: str = ".") -> Context:
    """Build samplers and bindings from a decoded ``.ctx`` object.

    With ``spec_expr`` given, sampler names must be quantified variables of
    the expression (with matching dimension) and binding names must be
    parameters of the root function.
    """
    if not isinstance(data, dict):
        raise NetIOError("context must be a JSON object")
    unknown = set(data) - {"samplers", "bindings"}
    if unknown:
        raise NetIOError(f"unknown context sections: {sorted(unknown)}")
    qtypes = _quantified_types(spec_expr) if spec_expr is not None else {}
    params = {}
    if spec_expr is not None and root_type is not None:
        from .evaluator import param_names

        names = param_names(spec_expr, root_type)
        params = dict(zip(names, A.uncurry(root_type)[0]))
    ctx = Context()
    for name, sspec in (data.get("samplers") or {}).items():
        if spec_expr is not None and name not in qtypes:
            raise NetIOError(f"sampler for undeclared quantified variable '{name}'")
        dim = _dim(qtypes[name]) if name in qtypes else _infer_dim(sspec)
        ctx.samplers[name] = make_distribution(sspec, dim, base_dir, f"sampler '{name}'")
    for name, value in (data.get("bindings") or {}).items():
        if spec_expr is not None and root_type is not None:
            if name not in params:
                raise NetIOError(f"binding for undeclared parameter '{name}'")
            t = params[name]
            if isinstance(t, A.Vec) and np.asarray(value, dtype=float).size != t.n:
                raise NetIOError(f"binding '{name}': expected {t.n} values")
        ctx.bindings[name] = value
    return ctx


def _infer_dim(sspec: dict) -> Optional[int]:
    if "csv" in sspec:
        return None  # taken from the file
    for key in ("lo", "mean", "center"):
        if key in sspec:
            return np.atleast_1d(np.asarray(sspec[key])).size
    if "points" in sspec:
        pts = np.asarray(sspec["points"], dtype=float)
        return 1 if pts.ndim == 1 else pts.shape[1]
    return 1


def load_context(path: str, spec_expr: Optional[A.Expr] = None, root_type=None) -> Context:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError:
        raise
    if not text.strip():
        return Context()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetIOError(f"{path}: malformed context file ({exc})") from None
    return parse_context(data, spec_expr, root_type, os.path.dirname(os.path.abspath(path)))
