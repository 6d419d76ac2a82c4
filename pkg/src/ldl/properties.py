"""Empirical checks of the geometric, logical and soundness properties of each logic.

Every check returns a :class:`PropertyVerdict`.  A failing verdict carries a
witness from which :func:`replay` recomputes the reported magnitude.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import ast as A
from . import logics as Lg
from .ast import Op
from .evaluator import (
    Empirical,
    Evaluator,
    SamplingConfig,
    SemanticContext,
    UniformBox,
)
from .parser import parse_expr
from .pretty import pretty_print

PROPERTIES = (
    "weak_smoothness",
    "shadow_lifting",
    "scale_invariance",
    "idempotence",
    "commutativity",
    "associativity",
    "quantifier_commutativity",
    "soundness",
)

# Table of expected answers: "yes", "yes*" (smooth only propositionally) or "no".
TABLE1 = {
    "weak_smoothness": dict(dl2="yes*", godel="no", lukasiewicz="no", yager="no", product="yes*", stl="yes"),
    "shadow_lifting": dict(dl2="yes", godel="no", lukasiewicz="no", yager="no", product="yes", stl="yes"),
    "scale_invariance": dict(dl2="yes", godel="yes", lukasiewicz="no", yager="no", product="no", stl="yes"),
    "idempotence": dict(dl2="no", godel="yes", lukasiewicz="no", yager="no", product="no", stl="yes"),
    "commutativity": dict(dl2="yes", godel="yes", lukasiewicz="yes", yager="yes", product="yes", stl="yes"),
    "associativity": dict(dl2="yes", godel="yes", lukasiewicz="yes", yager="yes", product="yes", stl="no"),
    "quantifier_commutativity": dict(dl2="no", godel="yes", lukasiewicz="no", yager="no", product="no", stl="no"),
    "soundness": dict(dl2="yes", godel="yes", lukasiewicz="no", yager="no", product="yes", stl="no"),
}

ARITIES = (2, 3, 5)
# quantifier trials run the full evaluator, so they are capped
QC_MAX_FINITE = 2000
QC_MAX_INFINITE = 100
DEFAULT_TOL = 1e-9


@dataclass
class PropertyVerdict:
    logic: str
    property: str
    verdict: str  # holds | holds* | fails | vacuous
    trials: int
    tolerance: float
    witness: Optional[dict] = None
    magnitude: Optional[float] = None
    advisory: bool = False
    note: str = ""
    params: dict = field(default_factory=dict)

    @property
    def table_entry(self) -> str:
        return {"holds": "yes", "holds*": "yes*", "fails": "no", "vacuous": "no"}[self.verdict]

    def to_dict(self) -> dict:
        return asdict(self)


def _logic_params(L: Lg.Logic) -> dict:
    return dict(yager_p=L.yager_p, stl_nu=L.stl_nu, neq_xi=L.neq_xi, leq_signed=L.leq_signed)


def _verdict(L, prop, ok, trials, tol, witness=None, magnitude=None, **kw) -> PropertyVerdict:
    return PropertyVerdict(
        L.tag, prop, "holds" if ok else "fails", trials, tol,
        None if ok else witness, None if ok else magnitude, params=_logic_params(L), **kw,
    )


def rel_dev(a: float, b: float) -> float:
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    if math.isnan(a) or math.isnan(b):
        return math.inf
    return abs(a - b) / max(1.0, abs(a), abs(b))


def sample_truth(L: Lg.Logic, rng: np.random.Generator, size) -> np.ndarray:
    """Truth values drawn uniformly from the logic's domain (finite surrogates for DL2/STL)."""
    if L.tag == Lg.DL2:
        return rng.uniform(-1e6, 0.0, size)
    if L.tag == Lg.STL:
        return rng.uniform(-1e6, 1e6, size)
    return rng.uniform(0.0, 1.0, size)


def conj_m(L: Lg.Logic, args) -> float:
    """M-ary conjunction: one n-ary node under STL, a left fold otherwise."""
    return Lg.interp_and(L, [float(a) for a in args])


# ---------------------------------------------------------------------------
# Algebraic laws


def _algebraic_sides(L, prop, rng):
    if prop == "associativity":
        a, b, c = sample_truth(L, rng, 3)
        lhs = Lg.interp_and(L, [Lg.interp_and(L, [a, b]), c])
        rhs = Lg.interp_and(L, [a, Lg.interp_and(L, [b, c])])
        return {"args": [float(a), float(b), float(c)]}, lhs, rhs
    M = int(rng.choice(ARITIES))
    if prop == "idempotence":
        a = float(sample_truth(L, rng, 1)[0])
        return {"M": M, "args": [a]}, conj_m(L, [a] * M), a
    if prop == "commutativity":
        args = [float(v) for v in sample_truth(L, rng, M)]
        perm = [int(k) for k in rng.permutation(M)]
        return {"M": M, "args": args, "perm": perm}, conj_m(L, args), conj_m(L, [args[k] for k in perm])
    if prop == "scale_invariance":
        alpha = float(rng.uniform(0.0, 10.0))
        while alpha == 0.0:
            alpha = float(rng.uniform(0.0, 10.0))
        if L.is_fuzzy:
            args = [float(v) for v in rng.uniform(0.0, min(1.0, 1.0 / alpha), M)]
        else:
            args = [float(v) for v in sample_truth(L, rng, M)]
        lhs = alpha * conj_m(L, args)
        rhs = conj_m(L, [alpha * a for a in args])
        return {"M": M, "args": args, "alpha": alpha}, lhs, rhs
    raise ValueError(f"unknown algebraic property {prop!r}")


def _algebraic_replay(L, prop, w):
    args = w["args"]
    if prop == "associativity":
        a, b, c = args
        return Lg.interp_and(L, [Lg.interp_and(L, [a, b]), c]), Lg.interp_and(L, [a, Lg.interp_and(L, [b, c])])
    if prop == "idempotence":
        return conj_m(L, args * w["M"]), args[0]
    if prop == "commutativity":
        return conj_m(L, args), conj_m(L, [args[k] for k in w["perm"]])
    alpha = w["alpha"]
    return alpha * conj_m(L, args), conj_m(L, [alpha * a for a in args])


def check_algebraic(L: Lg.Logic, prop: str, trials: int = 1000, tol: float = DEFAULT_TOL, seed: int = 0) -> PropertyVerdict:
    """Idempotence, commutativity, associativity or scale invariance (alpha > 0) of conjunction."""
    if trials < 100:
        raise ValueError("algebraic checks need at least 100 trials")
    rng = np.random.default_rng([seed, _salt(prop), _salt(L.tag)])
    worst, worst_w = 0.0, None
    for _ in range(trials):
        w, lhs, rhs = _algebraic_sides(L, prop, rng)
        d = rel_dev(lhs, rhs)
        if d > worst:
            worst, worst_w = d, dict(w, lhs=float(lhs), rhs=float(rhs))
    return _verdict(L, prop, worst <= tol, trials, tol, worst_w, worst)


def _salt(s: str) -> int:
    import zlib

    return zlib.crc32(s.encode())


# ---------------------------------------------------------------------------
# Shadow-lifting


def _shadow_point(L, rng, M):
    if L.tag == Lg.DL2:
        a = -float(rng.uniform(1e-3, 1e6))
    elif L.tag == Lg.STL:
        a = float(rng.uniform(1e-3, 1e6)) * (1 if rng.random() < 0.5 else -1)
    else:
        a = float(rng.uniform(1e-3, 1.0 - 1e-3))
    return a


def _shadow_partial(L, M, a, i, h):
    base = [a] * M
    bumped = list(base)
    bumped[i] = a + h
    return (conj_m(L, bumped) - conj_m(L, base)) / h


def check_shadow_lifting(L: Lg.Logic, trials: int = 1000, tol_pos: float = 1e-9, seed: int = 0, quorum: float = 0.99) -> PropertyVerdict:
    """Does raising one conjunct raise the conjunction?

    Partials are probed at points where all M conjuncts share a non-zero
    value, using one-sided differences in the improving direction.  Holds
    iff every partial exceeds ``tol_pos`` at ``quorum`` of the points.
    """
    rng = np.random.default_rng([seed, _salt("shadow"), _salt(L.tag)])
    good = 0
    first_bad = None
    for _ in range(trials):
        M = int(rng.choice(ARITIES))
        a = _shadow_point(L, rng, M)
        h = 1e-6 * max(1.0, abs(a))
        ok = True
        for i in range(M):
            p = _shadow_partial(L, M, a, i, h)
            if not p > tol_pos:
                ok = False
                if first_bad is None:
                    first_bad = {"M": M, "point": a, "i": i, "h": h, "partial": p}
                break
        good += ok
    frac = good / trials
    v = _verdict(L, "shadow_lifting", frac >= quorum, trials, tol_pos, first_bad,
                 first_bad["partial"] if first_bad else None)
    v.note = f"positive partials at {frac:.2%} of points"
    return v


# ---------------------------------------------------------------------------
# Weak smoothness


def _probes(L: Lg.Logic) -> Dict[str, tuple]:
    """name -> (function of a point, arity, box, tie-sensitive)."""
    if L.tag == Lg.DL2:
        box = (-10.0, 0.0)
    elif L.tag == Lg.STL:
        box = (-10.0, 10.0)
    else:
        box = (0.0, 1.0)
    probes = {
        "and": (lambda p: Lg.interp_and(L, list(p)), 2, box, True),
        "or": (lambda p: Lg.interp_or(L, list(p)), 2, box, True),
    }
    if L.tag != Lg.DL2:
        probes["not"] = (lambda p: Lg.interp_not(L, p[0]), 1, box, False)
        probes["implies"] = (lambda p: Lg.interp_implies(L, p[0], p[1]), 2, box, False)
    probes["leq"] = (lambda p: Lg.interp_leq(L, p[0], p[1]), 2, (-3.0, 3.0), False)
    return probes


def _find_kink(F: Callable[[float], float], eta: float = 1e-9, grid: int = 200, jump_tol: float = 1e-4):
    """Locate a slope discontinuity of F on [0, 1]; returns (t, left, right) or None."""
    ts = np.linspace(0.0, 1.0, grid + 1)
    fs = [F(t) for t in ts]
    slopes = np.diff(fs) / np.diff(ts)
    jumps = np.abs(np.diff(slopes))
    for k in np.argsort(-jumps)[:3]:
        lo, hi = ts[k], ts[k + 2]

        def left(t):
            return (F(t) - F(t - eta)) / eta

        def right(t):
            return (F(t + eta) - F(t)) / eta

        s_lo, s_hi = right(lo), left(hi)
        for _ in range(60):
            if hi - lo < 1e-13:
                break
            mid = 0.5 * (lo + hi)
            s_mid = right(mid)
            if abs(s_mid - s_lo) > abs(s_mid - s_hi):
                hi = mid
            else:
                lo = mid
        sl, sr = left(lo), right(hi)
        if abs(sr - sl) > jump_tol:
            return 0.5 * (lo + hi), sl, sr
    return None


def check_weak_smoothness(L: Lg.Logic, trials: int = 100, seed: int = 0) -> PropertyVerdict:
    """Advisory kink search on connectives and the <= comparison.

    Random segments through each probe's input box are scanned for slope
    jumps.  Jumps where two conjunct/disjunct arguments tie (a non-unique
    minimum) are allowed.  ``holds*`` means only the comparison is kinked.
    """
    rng = np.random.default_rng([seed, _salt("smooth"), _salt(L.tag)])
    lines = max(10, min(trials, 100))
    found = {}
    for name, (fn, k, (lo, hi), ties) in _probes(L).items():
        width = hi - lo
        for _ in range(lines):
            p = rng.uniform(lo, hi, k)
            d = rng.standard_normal(k)
            d /= np.linalg.norm(d)
            # longest segment through p inside the box
            tmax = min(
                ((hi - p[j]) / d[j] if d[j] > 0 else (lo - p[j]) / d[j]) if d[j] != 0 else math.inf
                for j in range(k)
            )
            tmin = max(
                ((lo - p[j]) / d[j] if d[j] > 0 else (hi - p[j]) / d[j]) if d[j] != 0 else -math.inf
                for j in range(k)
            )
            margin = 1e-6 * width
            start, end = p + (tmin + margin) * d, p + (tmax - margin) * d

            def F(t, start=start, end=end, lo=lo, hi=hi):
                return float(fn(np.clip(start + t * (end - start), lo, hi)))

            kink = _find_kink(F)
            if kink is None:
                continue
            t, sl, sr = kink
            point = start + t * (end - start)
            if ties and k > 1 and abs(point[0] - point[1]) < 10 * 1e-6 * width:
                continue
            found.setdefault(name, {
                "probe": name,
                "start": [float(v) for v in start],
                "end": [float(v) for v in end],
                "t": float(t),
                "point": [float(v) for v in point],
                "left_slope": float(sl),
                "right_slope": float(sr),
            })
            break
    connective_kinks = [n for n in found if n != "leq"]
    if connective_kinks:
        w = found[connective_kinks[0]]
        verdict = "fails"
    elif "leq" in found:
        w = found["leq"]
        verdict = "holds*"
    else:
        w = None
        verdict = "holds"
    v = PropertyVerdict(
        L.tag, "weak_smoothness", verdict, lines, 1e-4, w,
        abs(w["right_slope"] - w["left_slope"]) if w else None,
        advisory=True, params=_logic_params(L),
        note="kinks found in: " + (", ".join(sorted(found)) or "none"),
    )
    return v


# ---------------------------------------------------------------------------
# Quantifier commutativity


def _rand_const(rng, lo=-2.0, hi=2.0) -> A.Expr:
    return A.RealConst(round(float(rng.uniform(lo, hi)), 3))


_CMP_OPS = (Op.LEQ, Op.GEQ, Op.EQ, Op.LT, Op.GT)


def _finite_atom(rng, n, var_index=0):
    vec = A.VecLit(tuple(_rand_const(rng) for _ in range(n)))
    lhs = A.binop(Op.LOOKUP, vec, A.BoundVar("i", var_index))
    op = _CMP_OPS[int(rng.integers(len(_CMP_OPS)))]
    return A.binop(op, lhs, _rand_const(rng))


def _infinite_atom(rng):
    x = A.BoundVar("x", 0)
    term = A.binop(Op.ADD, A.binop(Op.MUL, x, _rand_const(rng)), _rand_const(rng))
    op = _CMP_OPS[int(rng.integers(len(_CMP_OPS)))]
    return A.binop(op, term, _rand_const(rng))


def _qc_pair(atoms, binder, annot, exists):
    Q = A.Exists if exists else A.Forall
    join = A.disj if exists else A.conj
    lhs = Q(binder, annot, join(*atoms))
    rhs = join(*[Q(binder, annot, a) for a in atoms])
    return lhs, rhs


def _qc_eval(L, lhs, rhs, samplers=None, cfg=None):
    ctx = SemanticContext(L, samplers=samplers or {}, sampling=cfg or SamplingConfig())
    return Evaluator(ctx).run(lhs), Evaluator(ctx).run(rhs)


def check_quantifier_commutativity(L: Lg.Logic, trials: int = 1000, tol: float = 1e-12, seed: int = 0) -> PropertyVerdict:
    """Does a quantifier distribute over an M-ary conjunction (and exists over disjunction)?

    Finite trials quantify over Index n; infinite trials quantify over Real
    with both sides drawing the same samples.  The first infinite trial is
    the directed witness A1 = (x == 0), A2 = (x == 1) over the points {0, 1}.
    """
    rng = np.random.default_rng([seed, _salt("qcomm"), _salt(L.tag)])
    worst, worst_w = 0.0, None
    cfg = SamplingConfig(sample_count=16, seed=seed, refinement_steps=0)
    n_fin = min(trials, QC_MAX_FINITE)
    n_inf = max(5, min(trials // 20, QC_MAX_INFINITE))

    def consider(lhs, rhs, samplers, kind):
        nonlocal worst, worst_w
        lv, rv = _qc_eval(L, lhs, rhs, samplers, cfg)
        d = rel_dev(lv, rv)
        if d > worst:
            worst = d
            worst_w = {
                "kind": kind,
                "lhs": pretty_print(lhs),
                "rhs": pretty_print(rhs),
                "lhs_value": float(lv),
                "rhs_value": float(rv),
                "samplers": samplers_to_json(samplers),
                "sampling": [cfg.sample_count, cfg.seed, cfg.refinement_steps],
            }

    for t in range(n_fin):
        n = int(rng.choice(ARITIES))
        M = int(rng.choice(ARITIES))
        exists = bool(rng.random() < 0.5)
        atoms = [_finite_atom(rng, n) for _ in range(M)]
        lhs, rhs = _qc_pair(atoms, "i", A.Index(n), exists)
        consider(lhs, rhs, {}, "finite")
    for t in range(n_inf):
        exists = bool(t % 2)
        if t < 2:
            x = A.BoundVar("x", 0)
            atoms = [A.binop(Op.EQ, x, A.RealConst(0.0)), A.binop(Op.EQ, x, A.RealConst(1.0))]
            samplers = {"x": Empirical([[0.0], [1.0]])}
            if exists:
                atoms = [A.binop(Op.NEQ, x, A.RealConst(0.0)), A.binop(Op.NEQ, x, A.RealConst(1.0))]
        else:
            M = int(rng.choice(ARITIES))
            atoms = [_infinite_atom(rng) for _ in range(M)]
            samplers = {"x": UniformBox([-2.0], [2.0])}
        lhs, rhs = _qc_pair(atoms, "x", A.Real, exists)
        consider(lhs, rhs, samplers, "infinite")
    return _verdict(L, "quantifier_commutativity", worst <= tol, n_fin + n_inf, tol, worst_w, worst)


def _json_dim(s: dict) -> int:
    if s["kind"] == "empirical":
        return len(np.atleast_1d(s["points"][0]))
    return len(s["lo"] if s["kind"] == "uniform" else s["mean"])


def samplers_to_json(samplers) -> dict:
    out = {}
    for name, d in samplers.items():
        if isinstance(d, Empirical):
            out[name] = {"kind": "empirical", "points": d.points.tolist()}
        elif isinstance(d, UniformBox):
            out[name] = {"kind": "uniform", "lo": d.lo.tolist(), "hi": d.hi.tolist()}
        else:
            out[name] = {"kind": "gaussian", "mean": d.mean.tolist(), "std": d.std.tolist()}
    return out


# ---------------------------------------------------------------------------
# Soundness


GRID = (-1.0, -0.5, 0.0, 0.5, 1.0)


def classical_eval(g: A.Expr, env: tuple = ()) -> bool:
    """Exact two-valued reading of a ground formula."""
    return bool(_classical(g, env))


def _classical(e: A.Expr, env: tuple):
    if isinstance(e, A.BoolConst):
        return e.truth
    if isinstance(e, A.RealConst):
        return e.value
    if isinstance(e, A.IndexConst):
        return e.value
    if isinstance(e, A.BoundVar):
        return env[-1 - e.index]
    if isinstance(e, A.VecLit):
        return tuple(_classical(x, env) for x in e.elements)
    if isinstance(e, A.Let):
        return _classical(e.body, env + (_classical(e.bound, env),))
    if isinstance(e, (A.Forall, A.Exists)):
        if isinstance(e.annot, A.Index):
            dom = range(e.annot.n)
        elif isinstance(e.annot, A.BoolType):
            dom = (True, False)
        else:
            raise ValueError("classical evaluation needs finite quantifiers")
        vals = (_classical(e.body, env + (d,)) for d in dom)
        return all(vals) if isinstance(e, A.Forall) else any(vals)
    u = A.as_unop(e)
    if u is not None and u[0] in (Op.NOT, Op.NEG):
        v = _classical(u[1], env)
        return (not v) if u[0] is Op.NOT else -v
    b = A.as_binop(e)
    if b is None:
        raise ValueError(f"not a ground formula: {pretty_print(e)}")
    op, l, r = b
    if op is Op.AND:
        return _classical(l, env) and _classical(r, env)
    if op is Op.OR:
        return _classical(l, env) or _classical(r, env)
    if op is Op.IMPLIES:
        return (not _classical(l, env)) or _classical(r, env)
    x, y = _classical(l, env), _classical(r, env)
    return {
        Op.ADD: lambda: x + y,
        Op.MUL: lambda: x * y,
        Op.LOOKUP: lambda: x[y],
        Op.EQ: lambda: x == y,
        Op.NEQ: lambda: x != y,
        Op.LEQ: lambda: x <= y,
        Op.GEQ: lambda: x >= y,
        Op.LT: lambda: x < y,
        Op.GT: lambda: x > y,
    }[op]()


class FormulaGenerator:
    """Seeded random ground formulas over a small dyadic constant grid.

    ``max_atoms`` caps the number of comparison leaves so that truth values
    stay far from float rounding at the top element.
    """

    def __init__(self, L: Lg.Logic, rng: np.random.Generator, max_depth: int = 5, max_atoms: int = 8):
        self.rng = rng
        self.max_depth = max_depth
        self.max_atoms = max_atoms
        self.allow_consts = L.tag != Lg.STL
        self.allow_implies = L.tag != Lg.STL
        self.atoms = 0

    def const(self) -> A.Expr:
        return A.RealConst(GRID[int(self.rng.integers(len(GRID)))])

    def term(self) -> A.Expr:
        r = self.rng.random()
        if r < 0.7:
            return self.const()
        if r < 0.85:
            return A.binop(Op.ADD, self.const(), self.const())
        return A.unop(Op.NEG, self.const())

    def atom(self, index_var: Optional[int] = None) -> A.Expr:
        self.atoms += 1
        if self.allow_consts and self.rng.random() < 0.08:
            return A.BoolConst(bool(self.rng.random() < 0.5))
        op = (Op.EQ, Op.NEQ, Op.LEQ, Op.GEQ, Op.LT, Op.GT)[int(self.rng.integers(6))]
        lhs = self.term()
        if index_var is not None and self.rng.random() < 0.7:
            n = 3
            vec = A.VecLit(tuple(self.const() for _ in range(n)))
            lhs = A.binop(Op.LOOKUP, vec, A.BoundVar("i", index_var))
        return A.binop(op, lhs, self.term())

    def formula(self, depth: int = 0, index_var: Optional[int] = None) -> A.Expr:
        if depth >= self.max_depth or self.atoms >= self.max_atoms or self.rng.random() < 0.35 + 0.1 * depth:
            return self.atom(index_var)
        r = self.rng.random()
        iv = None if index_var is None else index_var
        if r < 0.3:
            return A.binop(Op.AND, self.formula(depth + 1, iv), self.formula(depth + 1, iv))
        if r < 0.55:
            return A.binop(Op.OR, self.formula(depth + 1, iv), self.formula(depth + 1, iv))
        if r < 0.72:
            return A.unop(Op.NOT, self.formula(depth + 1, iv))
        if r < 0.87 and self.allow_implies:
            return A.binop(Op.IMPLIES, self.formula(depth + 1, iv), self.formula(depth + 1, iv))
        if index_var is None:
            Q = A.Forall if self.rng.random() < 0.5 else A.Exists
            return Q("i", A.Index(3), self.formula(depth + 1, 0))
        return self.atom(index_var)

    def __call__(self) -> A.Expr:
        self.atoms = 0
        return self.formula()


def _truth(L, g):
    return Evaluator(SemanticContext(L)).run(g)


def _luk_directed(L: Lg.Logic):
    """Search implications between comparison atoms for a = true, b = false with [[a => b]] = top."""
    atoms = []
    for op in (Op.EQ, Op.LEQ, Op.GEQ):
        for x in GRID:
            for y in GRID:
                atoms.append(A.binop(op, A.RealConst(x), A.RealConst(y)))
    true_atoms = [a for a in atoms if classical_eval(a)]
    false_atoms = [a for a in atoms if not classical_eval(a)]
    top = Lg.interp_top(L)
    for a in true_atoms:
        for b in false_atoms:
            g = A.binop(Op.IMPLIES, a, b)
            v = _truth(L, g)
            if v == top:
                return g, v
    return None


def check_soundness(L: Lg.Logic, count: int = 10000, seed: int = 0) -> PropertyVerdict:
    """Top-valued ground formulas must be classically true.

    For the fuzzy logics, bottom-valued formulas must also be classically
    false.  Lukasiewicz and Yager additionally get a directed search over
    implications between comparison atoms.  STL never reaches its top
    (+infinity) without Boolean constants, so its verdict is ``vacuous``.
    """
    rng = np.random.default_rng([seed, _salt("sound"), _salt(L.tag)])
    gen = FormulaGenerator(L, rng)
    top, bottom = Lg.interp_top(L), Lg.interp_bottom(L)
    reached_top = 0
    witness = None
    for _ in range(count):
        g = gen()
        v = _truth(L, g)
        if v == top:
            reached_top += 1
            if not classical_eval(g):
                witness = {"formula": pretty_print(g), "value": float(v), "classical": False}
                break
        elif L.is_fuzzy and v == bottom and classical_eval(g):
            witness = {"formula": pretty_print(g), "value": float(v), "classical": True}
            break
    if witness is None and L.tag in (Lg.LUKASIEWICZ, Lg.YAGER):
        found = _luk_directed(L)
        if found is not None:
            g, v = found
            witness = {"formula": pretty_print(g), "value": float(v), "classical": False, "directed": True}
    if witness is not None:
        return PropertyVerdict(L.tag, "soundness", "fails", count, 0.0, witness, witness["value"], params=_logic_params(L))
    if reached_top == 0:
        return PropertyVerdict(
            L.tag, "soundness", "vacuous", count, 0.0, params=_logic_params(L),
            note="no generated formula reached the top truth value",
        )
    return PropertyVerdict(
        L.tag, "soundness", "holds", count, 0.0, params=_logic_params(L),
        note=f"{reached_top} formulas reached the top truth value",
    )


# ---------------------------------------------------------------------------
# Driver and replay


def check(L: Lg.Logic, prop: str, trials: int = 1000, seed: int = 0) -> PropertyVerdict:
    if prop in ("idempotence", "commutativity", "associativity", "scale_invariance"):
        return check_algebraic(L, prop, trials, seed=seed)
    if prop == "shadow_lifting":
        return check_shadow_lifting(L, trials, seed=seed)
    if prop == "weak_smoothness":
        return check_weak_smoothness(L, trials, seed=seed)
    if prop == "quantifier_commutativity":
        return check_quantifier_commutativity(L, trials, seed=seed)
    if prop == "soundness":
        return check_soundness(L, trials, seed=seed)
    raise ValueError(f"unknown property {prop!r}")


def run_matrix(logics, trials: int = 1000, seed: int = 0, properties=PROPERTIES) -> List[PropertyVerdict]:
    return [check(L, p, trials, seed) for L in logics for p in properties]


def expected(v: PropertyVerdict) -> str:
    return TABLE1[v.property][v.logic]


def matches_table(v: PropertyVerdict) -> bool:
    return v.table_entry == expected(v)


def replay(v: PropertyVerdict) -> float:
    """Recompute the magnitude of a failing verdict from its witness alone."""
    if v.witness is None:
        raise ValueError("verdict has no witness")
    L = Lg.Logic(v.logic, **v.params)
    w = v.witness
    if v.property in ("idempotence", "commutativity", "associativity", "scale_invariance"):
        lhs, rhs = _algebraic_replay(L, v.property, w)
        return rel_dev(lhs, rhs)
    if v.property == "shadow_lifting":
        return _shadow_partial(L, w["M"], w["point"], w["i"], w["h"])
    if v.property == "weak_smoothness":
        fn, _, (lo, hi), _ = _probes(L)[w["probe"]]
        start, end = np.array(w["start"]), np.array(w["end"])

        def F(t):
            return float(fn(np.clip(start + t * (end - start), lo, hi)))

        found = _find_kink(F)
        if found is None:
            return 0.0
        return abs(found[2] - found[1])
    if v.property == "quantifier_commutativity":
        from .netio import make_distribution

        samplers = {k: make_distribution(s, _json_dim(s)) for k, s in w["samplers"].items()}
        cfg = SamplingConfig(*w["sampling"])
        lhs, rhs = parse_expr(w["lhs"]), parse_expr(w["rhs"])
        lv, rv = _qc_eval(L, lhs, rhs, samplers, cfg)
        return rel_dev(lv, rv)
    if v.property == "soundness":
        g = parse_expr(w["formula"])
        value = _truth(L, g)
        if classical_eval(g) != w["classical"]:
            raise AssertionError("classical reading changed on replay")
        return float(value)
    raise ValueError(f"cannot replay {v.property}")


def format_text(verdicts: List[PropertyVerdict]) -> str:
    logics = []
    for v in verdicts:
        if v.logic not in logics:
            logics.append(v.logic)
    props = []
    for v in verdicts:
        if v.property not in props:
            props.append(v.property)
    cell = {(v.logic, v.property): v for v in verdicts}
    width = max(len(p) for p in props) + 2
    head = "property".ljust(width) + "".join(l.ljust(13) for l in logics)
    lines = [head, "-" * len(head)]
    for p in props:
        row = p.ljust(width)
        for l in logics:
            v = cell.get((l, p))
            if v is None:
                row += "".ljust(13)
                continue
            mark = "" if matches_table(v) else " !"
            row += (v.verdict + ("~" if v.advisory else "") + mark).ljust(13)
        lines.append(row)
    mismatches = [v for v in verdicts if not matches_table(v)]
    lines.append("")
    lines.append("~ advisory verdict;  ! differs from the reference table")
    lines.append(f"{len(verdicts) - len(mismatches)}/{len(verdicts)} cells match the reference table")
    return "\n".join(lines) + "\n"
