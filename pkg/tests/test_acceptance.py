"""Acceptance suite: one test and one printed verdict line per criterion."""
import json
import math
import time

import numpy as np
import pytest

from ldl import ast as A
from ldl import logics as Lg
from ldl import properties as P
from ldl.cli import main
from ldl.evaluator import Closure, Empirical, Evaluator, NetValue, OpValue, SamplingConfig, SemanticContext, apply_root
from ldl.netio import DenseNetwork
from ldl.parser import parse_expr
from ldl.pretty import pretty_print
from ldl.typechecker import check_type
from gen import NETWORKS, TermGen, samplers
from report import record
from support import (
    CORPUS,
    TREND,
    corpus_files,
    direct_and_graph,
    dl_gradient_error,
    dl_only_curve,
    load,
    netio_gradient_error,
    non_increasing,
    random_inputs,
    random_networks,
    samplers_for,
    trend_pair,
)

LOGICS = Lg.all_logics()


def test_1_table_matrix(tmp_path):
    out = tmp_path / "props.jsonl"
    t0 = time.perf_counter()
    code = main(["props", "--all", "--trials", "10000", "--seed", "7", "--report", "structured", "-o", str(out)])
    elapsed = time.perf_counter() - t0
    keep = set(P.PropertyVerdict.__dataclass_fields__)
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    verdicts = [P.PropertyVerdict(**{k: v for k, v in r.items() if k in keep}) for r in rows]
    bad = [f"{v.logic}/{v.property}={v.verdict}" for v in verdicts if not P.matches_table(v)]
    stl_sound = next(v.verdict for v in verdicts if v.logic == "stl" and v.property == "soundness")
    smooth_advisory = all(v.advisory for v in verdicts if v.property == "weak_smoothness")
    ok = code == 0 and len(verdicts) == 48 and not bad and stl_sound == "vacuous" and smooth_advisory and elapsed < 60
    detail = f"{48 - len(bad)}/48 cells match, STL soundness {stl_sound}, {elapsed:.1f}s (limit 60s)"
    if bad:
        detail += f"; mismatches {bad}"
    assert record(1, "property matrix", ok, detail)


def test_2_soundness_oracle():
    t0 = time.perf_counter()
    v = {L.tag: P.check_soundness(L, 10000, seed=7) for L in LOGICS}
    directed = P._luk_directed(Lg.logic("lukasiewicz"))
    elapsed = time.perf_counter() - t0
    clean = all(v[t].verdict == "holds" for t in (Lg.GODEL, Lg.PRODUCT, Lg.DL2))
    luk = directed is not None and not P.classical_eval(directed[0]) and directed[1] == 1.0
    ok = clean and luk and v[Lg.STL].verdict == "vacuous" and elapsed < 30
    detail = (
        f"godel/product/dl2 {[v[t].verdict for t in (Lg.GODEL, Lg.PRODUCT, Lg.DL2)]} on 10^4 formulas; "
        f"lukasiewicz witness '{pretty_print(directed[0]) if directed else None}' = 1; {elapsed:.1f}s (limit 30s)"
    )
    assert record(2, "soundness oracle", ok, detail)


def _member(t, v, L):
    if isinstance(t, A.RealType):
        return isinstance(v, float)
    if isinstance(t, A.BoolType):
        return isinstance(v, float) and Lg.in_domain(L, v)
    if isinstance(t, A.Vec):
        return isinstance(v, tuple) and len(v) == t.n and all(isinstance(x, float) for x in v)
    if isinstance(t, A.Index):
        return isinstance(v, int) and 0 <= v < t.n
    return isinstance(v, (Closure, OpValue, NetValue))


def test_3_type_soundness_fuzz():
    net = DenseNetwork.random([2, 3, 2], ["relu", "softmax"], seed=0)
    failures = {}
    for L in LOGICS:
        gen = TermGen(np.random.default_rng([11, Lg.TAGS.index(L.tag)]))
        # DL2 cannot lower an unapplied Bool -> Bool function that negates its argument
        exclude = (A.Fun(A.Bool, A.Bool),) if L.tag == Lg.DL2 else ()
        bad = 0
        for _ in range(1000):
            e, t = gen.closed(exclude)
            check_type(e, t, NETWORKS)
            ctx = SemanticContext(L, {"f": net}, samplers(), {}, SamplingConfig(4, 0, 0))
            try:
                ok = _member(t, Evaluator(ctx).run(e), L)
            except Exception:
                ok = False
            bad += not ok
        failures[L.tag] = bad
    ok = not any(failures.values())
    assert record(3, "type-soundness fuzz", ok, f"1000 terms per logic, failures {failures}")


def _expansion(q):
    dom = [A.IndexConst(k) for k in range(q.annot.n)] if isinstance(q.annot, A.Index) else [A.TOP, A.BOTTOM]
    parts = [A.instantiate(q.body, d) for d in dom]
    if isinstance(q, A.Forall):
        return A.conj(*parts)
    out = parts[0]
    for p in parts[1:]:
        out = A.binop(A.Op.OR, out, p)
    return out


def test_4_finite_quantifier_expansion():
    rng = np.random.default_rng(4)
    gen = TermGen(rng, max_depth=3)
    net = DenseNetwork.random([2, 3, 2], ["relu", "softmax"], seed=1)
    mismatches = 0
    for k in range(500):
        annot = (A.Index(2), A.Index(3), A.Index(5), A.Bool)[k % 4]
        body = gen.gen(A.Bool, (("i", annot),), 1)
        q = (A.Forall if k % 2 == 0 else A.Exists)("i", annot, body)
        for L in LOGICS:
            ctx = SemanticContext(L, {"f": net}, samplers(), {}, SamplingConfig(4, 0, 0))
            a = Evaluator(ctx).run(q)
            b = Evaluator(ctx).run(_expansion(q))
            mismatches += not (a == b or (math.isnan(a) and math.isnan(b)))
    ok = mismatches == 0
    assert record(4, "finite-quantifier expansion", ok, f"500 formulas x 6 logics, {mismatches} not bit-equal")


def _closed_form(x, xhat, eps, delta, y, yhat):
    """Hand-derived DL2 value of the robustness property at one sample, identity network."""

    def gt(a, b):  # a > b  ~  (a >= b) and (a != b)
        return -max(b - a, 0.0) + -(1.0 if a == b else 0.0)

    # not (-eps <= d and d <= eps)  ~  -eps > d or d > eps
    not_ante = [-(gt(-eps, d) * gt(d, eps)) for d in (x[0] - xhat[0], x[1] - xhat[1])]
    exists = -(not_ante[0] * not_ante[1])
    cons = sum(-max(-delta - e, 0.0) + -max(e - delta, 0.0) for e in (y[0] - yhat[0], y[1] - yhat[1]))
    return -(exists * cons)


def test_5_robustness_end_to_end():
    spec = load(f"{CORPUS}/robustness2d.ldl")
    nets = {"f": DenseNetwork.identity(2)}
    x, xhat, eps = [0.05, 0.0], [0.0, 0.0], 0.1
    devs = []
    for delta, sat in ((0.01, False), (0.2, True)):
        ctx = SemanticContext(Lg.logic("dl2"), nets, {"x": Empirical([x])})
        value = apply_root(spec.as_expr(), spec.type_of(), ctx, [eps, delta, xhat])
        loss = Lg.penalty(Lg.logic("dl2"), value)
        expect = -_closed_form(x, xhat, eps, delta, x, xhat)
        devs.append(abs(loss - expect))
        if sat:
            sat_loss = loss
        else:
            viol_loss = loss
    ok = max(devs) <= 1e-12 and viol_loss > 0 and sat_loss == 0.0
    detail = f"violated loss {viol_loss!r} vs closed form, max |diff| {max(devs):.1e} (tol 1e-12); satisfied loss {sat_loss!r}"
    assert record(5, "robustness end-to-end", ok, detail)


def test_6_gradient_checks():
    net_worst = max(netio_gradient_error(s) for s in range(100))
    dl_worst = max(dl_gradient_error(s, LOGICS[s % 6]) for s in range(100))
    ok = net_worst < 1e-4 and dl_worst < 1e-3
    detail = f"netio worst rel err {net_worst:.1e} (tol 1e-4), full loss worst {dl_worst:.1e} (tol 1e-3), 100 configs each"
    assert record(6, "gradient checks", ok, detail)


def test_7_differential_compile():
    files = corpus_files()
    mismatches = 0
    runs = 0
    for path in files:
        spec = load(path)
        nets = random_networks(spec, 0)
        sm = samplers_for(spec)
        rng = np.random.default_rng(7)
        inputs = [random_inputs(spec, rng) for _ in range(100)]
        for L in LOGICS:
            for inp in inputs:
                d, g = direct_and_graph(spec, L, inp, nets, sm, SamplingConfig(4, 3, 0))
                runs += 1
                same = all(repr(float(a)) == repr(float(b)) for a, b in zip(d, g))
                mismatches += not same
    ok = mismatches == 0 and len(files) >= 20
    detail = f"{len(files)} specs x 6 logics x 100 inputs = {runs} runs, {mismatches} mismatches (exact)"
    assert record(7, "differential compile", ok, detail)


def test_8_training_trend():
    t0 = time.perf_counter()
    godel = Lg.logic("godel")
    pairs = [trend_pair(seed, godel) for seed in range(10)]
    wins = sum(a >= b for a, b in pairs)
    curve = dl_only_curve(0, Lg.logic("dl2"), lr=20.0)
    mono = non_increasing(curve)
    elapsed = time.perf_counter() - t0
    ok = wins >= 8 and mono and elapsed < 300
    detail = (
        f"godel beta=1 >= beta=0 satisfaction in {wins}/10 pairs (need 8); "
        f"dl2 alpha=0 DL {curve[0]:.3g} -> {curve[-1]:.3g} non-increasing within 5%: {mono}; {elapsed:.0f}s (limit 300s)"
    )
    assert record(8, "training trend", ok, detail)


PRECEDENCE = [
    ("a and b or c", "(or (and #2 #1) #0)"),
    ("a => b => c", "(=> #2 (=> #1 #0))"),
    ("not a and b", "(and (not #2) #1)"),
    ("a or forall (i : Index 2) . b and c", "(or #2 (forall (Index 2) (and #2 #1)))"),
]


def test_9_round_trip():
    gen = TermGen(np.random.default_rng(9))
    failures = 0
    for _ in range(1000):
        e, _ = gen.closed()
        try:
            failures += not A.alpha_eq(parse_expr(pretty_print(e, NETWORKS), NETWORKS), e)
        except Exception:
            failures += 1
    prec = all(A.to_sexpr(parse_expr(t, scope=["a", "b", "c"])) == s for t, s in PRECEDENCE)
    spec = load(f"{CORPUS}/robustness.ldl")
    lines = [f"network {n} {m} {k}" for n, (m, k) in spec.networks.items()]
    for d in spec.definitions:
        lines += [f"define {d.name} ({d.type})", A.to_sexpr(d.expr)]
    with open(f"{CORPUS}/robustness.sexpr") as fh:
        golden = lines == fh.read().splitlines()
    ok = failures == 0 and prec and golden
    detail = f"1000 terms, {failures} not alpha-equivalent; precedence {prec}; robustness golden AST {golden}"
    assert record(9, "parser round trip", ok, detail)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
