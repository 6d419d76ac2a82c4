"""Compile the robustness property to an expression graph and run it against direct evaluation.

Run: python3 demos/compile_graph.py
"""
import os

from ldl import logics as Lg
from ldl.evaluator import SamplingConfig, SemanticContext, UniformBox, apply_root
from ldl.graph import compile_spec, run_graph
from ldl.netio import DenseNetwork
from ldl.parser import parse

CORPUS = os.path.join(os.path.dirname(__file__), os.pardir, "src", "ldl", "corpus")

with open(os.path.join(CORPUS, "robustness2d.ldl")) as fh:
    spec = parse(fh.read())
net = DenseNetwork.random([2, 4, 2], ["relu", "softmax"], seed=0)
samplers = {"x": UniformBox([-0.2, -0.2], [0.2, 0.2])}
inputs = {"eps": 0.1, "delta": 0.05, "xhat": [0.0, 0.0]}
sampling = SamplingConfig(16, 1, 2)

for L in Lg.all_logics():
    g = compile_spec(spec, L)
    truth, pen = run_graph(g, inputs, {"f": net}, samplers, sampling)
    direct = apply_root(spec.as_expr(), spec.type_of(), SemanticContext(L, {"f": net}, samplers, {}, sampling), inputs)
    print(f"{L.name:>14}  {len(g.nodes):4d} nodes  graph {truth!r:>24}  direct {float(direct)!r:>24}")

print()
print("first lines of the Godel graph:")
print("".join(compile_spec(spec, Lg.logic("godel")).dumps().splitlines(True)[:4]))
