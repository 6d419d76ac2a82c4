"""Train a 2->2 softmax layer on synthetic blobs with and without the robustness loss.

Run: python3 demos/train_blobs.py [logic]
"""
import os
import sys

from ldl import logics as Lg
from ldl.netio import Context, DenseNetwork
from ldl.parser import parse
from ldl.trainer import TrainConfig, make_synthetic_dataset, train

CORPUS = os.path.join(os.path.dirname(__file__), os.pardir, "src", "ldl", "corpus")

with open(os.path.join(CORPUS, "robustness2d.ldl")) as fh:
    spec = parse(fh.read())
L = Lg.logic(sys.argv[1] if len(sys.argv) > 1 else "godel")
ds = make_synthetic_dataset(seed=3, n_points=80, margin=1.0)
ctx = Context(bindings={"eps": 0.5, "delta": 0.05})

for beta in (0.0, 1.0):
    cfg = TrainConfig(alpha=1.0, beta=beta, epochs=10, lr=0.5, seed=3, perturbation=0.5)
    report = train(spec, DenseNetwork.identity(2, "softmax"), ds, ctx, L, cfg)
    print(f"beta={beta}")
    for r in report.epochs:
        print(f"  epoch {r.epoch:2d}  ce {r.ce:.4f}  dl {r.dl:.5f}  acc {r.accuracy:.3f}  sat {r.satisfaction:.3f}")
