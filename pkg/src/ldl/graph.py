"""Lowering of a specification to a flat expression graph, and its interpreter.

The graph is built by running the ordinary evaluator on symbolic scalars, so
lambdas, lets and finite quantifiers disappear and each logic's connectives
show up as the arithmetic kernels of :mod:`ldl.num`.  Infinite quantifiers
stay as reducer nodes: a ``sample`` node per coordinate inside a numbered
scope, and a ``forall``/``exists`` node that minimises/maximises the scope's
body over samples drawn at run time.

Serialised form: one JSON object per line with sorted keys.  The first line
is the header, then one line per node in topological order, then the
outputs line.  Floats are stored as ``%.17g`` strings.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from . import ast as A
from . import logics as Lg
from . import num
from .evaluator import (
    EvalError,
    Evaluator,
    SamplingConfig,
    SemanticContext,
    extremize,
    param_names,
)
from .num import FLOAT_OPS, Lifted


class GraphError(Exception):
    pass


def fmt(x: float) -> str:
    return "%.17g" % float(x)


class Sym(Lifted):
    __slots__ = ("g", "id")
    priority = 2

    def __init__(self, g: "Graph", node_id: int):
        self.g = g
        self.id = node_id

    def __float__(self):
        raise GraphError("symbolic value has no concrete float")

    def __repr__(self):
        return f"Sym({self.id})"

    @classmethod
    def lift(cls, name, args, params):
        g = next(a.g for a in args if isinstance(a, Sym))
        ids = [g.operand(a) for a in args]
        return g.add(name, ids, params=params)


@dataclass
class Graph:
    logic: Lg.Logic
    nodes: List[dict] = field(default_factory=list)
    inputs: List[dict] = field(default_factory=list)
    networks: Dict[str, list] = field(default_factory=dict)
    outputs: Dict[str, int] = field(default_factory=dict)
    scope: int = 0
    n_scopes: int = 1

    # building

    def add(self, op: str, args=(), params=None, **attrs) -> Sym:
        node = {"id": len(self.nodes), "op": op, "args": list(args), "scope": self.scope}
        if params:
            node["params"] = {k: fmt(v) for k, v in params.items()}
        node.update(attrs)
        self.nodes.append(node)
        return Sym(self, node["id"])

    def const(self, value) -> int:
        return self.add("const", value=fmt(value)).id

    def operand(self, v) -> int:
        if isinstance(v, Sym):
            return v.id
        if isinstance(v, (int, float)):
            return self.const(v)
        raise GraphError(f"cannot use {v!r} as a graph operand")

    # serialisation

    def header(self) -> dict:
        L = self.logic
        return {
            "kind": "header",
            "format": "ldl-graph",
            "version": 1,
            "logic": {
                "tag": L.tag,
                "yager_p": fmt(L.yager_p),
                "stl_nu": fmt(L.stl_nu),
                "neq_xi": fmt(L.neq_xi),
                "leq_signed": L.leq_signed,
            },
            "inputs": self.inputs,
            "networks": self.networks,
            "scopes": self.n_scopes,
        }

    def dumps(self) -> str:
        lines = [self.header()]
        lines += [dict(n, kind="node") for n in self.nodes]
        lines.append({"kind": "outputs", **self.outputs})
        return "".join(json.dumps(x, sort_keys=True, separators=(",", ":")) + "\n" for x in lines)

    @classmethod
    def loads(cls, text: str) -> "Graph":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not rows or rows[0].get("kind") != "header" or rows[0].get("format") != "ldl-graph":
            raise GraphError("not an ldl-graph file")
        h = rows[0]
        lg = h["logic"]
        L = Lg.Logic(
            lg["tag"],
            yager_p=float(lg["yager_p"]),
            stl_nu=float(lg["stl_nu"]),
            neq_xi=float(lg["neq_xi"]),
            leq_signed=bool(lg["leq_signed"]),
        )
        g = cls(L, inputs=h["inputs"], networks=h["networks"], n_scopes=h["scopes"])
        for row in rows[1:]:
            kind = row.pop("kind")
            if kind == "node":
                if row["id"] != len(g.nodes):
                    raise GraphError(f"node ids must be consecutive, got {row['id']}")
                for a in row["args"]:
                    if not 0 <= a < row["id"]:
                        raise GraphError(f"node {row['id']} uses operand {a} that does not precede it")
                g.nodes.append(row)
            elif kind == "outputs":
                g.outputs = row
        return g

    def op_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for n in self.nodes:
            counts[n["op"]] = counts.get(n["op"], 0) + 1
        return counts


class _Tracer(Evaluator):
    def __init__(self, ctx: SemanticContext, g: Graph, net_dims):
        super().__init__(ctx)
        self.g = g
        self.net_dims = net_dims

    def call_network(self, name, x):
        m, n = self.net_dims[name]
        if len(x) != m:
            raise EvalError(f"network '{name}' expects {m} inputs, got {len(x)}")
        self.g.networks[name] = [m, n]
        call = self.g.add("net", [self.g.operand(v) for v in x], name=name)
        return tuple(self.g.add("out", [call.id], index=j) for j in range(n))

    def infinite_quantifier(self, q, env):
        g = self.g
        outer = g.scope
        scope = g.n_scopes
        g.n_scopes += 1
        dim = 1 if isinstance(q.annot, A.RealType) else q.annot.n
        g.scope = scope
        try:
            comps = tuple(g.add("sample", var=q.binder, index=j) for j in range(dim))
            value = comps[0] if isinstance(q.annot, A.RealType) else comps
            body = self.eval(q.body, env + (value,))
            body_id = g.operand(body)
        finally:
            g.scope = outer
        op = "forall" if isinstance(q, A.Forall) else "exists"
        return g.add(op, [body_id], var=q.binder, dim=dim, body_scope=scope)


def compile_expr(e: A.Expr, root_type: A.LdlType, networks, logic: Lg.Logic) -> Graph:
    """Lower ``e`` (of type ``T1 -> ... -> Bool``) to a graph under ``logic``.

    ``networks`` maps network names to (inputs, outputs).
    """
    params, result = A.uncurry(root_type)
    if result != A.Bool:
        raise GraphError(f"can only compile properties returning Bool, not {result}")
    g = Graph(logic)
    names = param_names(e, root_type)
    args = []
    for name, t in zip(names, params):
        if isinstance(t, A.RealType) or isinstance(t, A.BoolType):
            args.append(g.add("input", name=name, index=0))
            g.inputs.append({"name": name, "type": str(t)})
        elif isinstance(t, A.Index):
            args.append(g.add("input", name=name, index=0))
            g.inputs.append({"name": name, "type": str(t)})
        elif isinstance(t, A.Vec):
            args.append(tuple(g.add("input", name=name, index=j) for j in range(t.n)))
            g.inputs.append({"name": name, "type": str(t)})
        else:
            raise GraphError(f"parameter '{name}' has unsupported type {t}")
    ctx = SemanticContext(logic)
    tracer = _Tracer(ctx, g, dict(networks))
    value = tracer.run(e)
    for a in args:
        value = tracer.apply(value, a)
    truth = g.operand(value)
    pen = Lg.penalty(logic, Sym(g, truth))
    g.outputs = {"truth": truth, "penalty": g.operand(pen)}
    return g


def compile_spec(spec, logic: Lg.Logic, name: Optional[str] = None) -> Graph:
    t = spec.type_of(name)
    return compile_expr(spec.as_expr(name), t, spec.networks, logic)


# ---------------------------------------------------------------------------
# Interpreter


def _node_params(node):
    return {k: float(v) for k, v in node.get("params", {}).items()}


class _Runner:
    def __init__(self, g: Graph, inputs: dict, networks: dict, samplers: dict, sampling: SamplingConfig):
        self.g = g
        self.networks = networks
        self.samplers = samplers
        self.sampling = sampling
        self.vals: List[object] = [None] * len(g.nodes)
        self.by_scope: Dict[int, List[dict]] = {}
        for n in g.nodes:
            self.by_scope.setdefault(n["scope"], []).append(n)
        self.inputs = {}
        for spec in g.inputs:
            name = spec["name"]
            if name not in inputs:
                raise GraphError(f"missing graph input '{name}'")
            v = inputs[name]
            if spec["type"].startswith("Vec"):
                self.inputs[name] = [float(x) for x in np.asarray(v, dtype=float).ravel()]
            elif spec["type"].startswith("Index"):
                self.inputs[name] = [int(v)]
            elif spec["type"] == "Bool" and isinstance(v, bool):
                self.inputs[name] = [Lg.interp_top(g.logic) if v else Lg.interp_bottom(g.logic)]
            else:
                self.inputs[name] = [float(v)]
        self.samples: Dict[int, np.ndarray] = {}

    def run_scope(self, scope: int):
        vals = self.vals
        for n in self.by_scope.get(scope, ()):
            op = n["op"]
            args = [vals[a] for a in n["args"]]
            if op == "const":
                v = float(n["value"])
            elif op == "input":
                v = self.inputs[n["name"]][n["index"]]
            elif op == "sample":
                v = float(self.samples[n["scope"]][n["index"]])
            elif op == "net":
                net = self.networks.get(n["name"])
                if net is None:
                    raise EvalError(f"no network bound for '{n['name']}'")
                v = tuple(float(y) for y in net.forward(np.array(args, dtype=float)))
            elif op == "out":
                v = args[0][n["index"]]
            elif op in ("forall", "exists"):
                v = self.reduce(n)
            else:
                v = FLOAT_OPS[op](*args, **_node_params(n))
            vals[n["id"]] = v

    def reduce(self, n):
        scope = n["body_scope"]
        dist = self.samplers.get(n["var"])
        if dist is None:
            raise EvalError(f"no sampler registered for quantified variable '{n['var']}'")
        if dist.dim != n["dim"]:
            raise EvalError(f"sampler for '{n['var']}' has dimension {dist.dim}, expected {n['dim']}")
        body_id = n["args"][0]

        def body(row):
            self.samples[scope] = row
            self.run_scope(scope)
            return self.vals[body_id]

        value, _, _ = extremize(body, dist, n["var"], self.sampling, n["op"] == "forall")
        return value


def run_graph(g: Graph, inputs: dict, networks=None, samplers=None, sampling: SamplingConfig = None):
    """Evaluate a graph; returns ``(truth, penalty)``."""
    r = _Runner(g, inputs, networks or {}, samplers or {}, sampling or SamplingConfig())
    r.run_scope(0)
    return r.vals[g.outputs["truth"]], r.vals[g.outputs["penalty"]]
