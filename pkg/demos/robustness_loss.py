"""Evaluate the 2-D robustness property under every logic at one sampled point.

Run: python3 demos/robustness_loss.py
"""
import os

from ldl import logics as Lg
from ldl.evaluator import Empirical, SemanticContext, apply_root
from ldl.netio import DenseNetwork
from ldl.parser import parse
from ldl.typechecker import check_spec

CORPUS = os.path.join(os.path.dirname(__file__), os.pardir, "src", "ldl", "corpus")

with open(os.path.join(CORPUS, "robustness2d.ldl")) as fh:
    spec = parse(fh.read())
print("root type:", check_spec(spec))

net = DenseNetwork.identity(2)
# one adversarial candidate inside the eps-ball whose output moves by 0.05
ctx_args = {"eps": 0.1, "delta": 0.01, "xhat": [0.0, 0.0]}
for L in Lg.all_logics():
    ctx = SemanticContext(L, {"f": net}, {"x": Empirical([[0.05, 0.0]])})
    value = apply_root(spec.as_expr(), spec.type_of(), ctx, ctx_args)
    print(f"{L.name:>14}  truth {float(value):+.6g}  penalty {float(Lg.penalty(L, value)):.6g}")
