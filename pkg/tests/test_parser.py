import os

import numpy as np
import pytest

from ldl import ast as A
from ldl.ast import Op
from ldl.parser import ParseError, UndeclaredName, parse, parse_expr, parse_type, print_spec, tokenize
from ldl.pretty import format_real, pretty_print
from gen import NETWORKS, TermGen
from support import CORPUS, corpus_files


def kinds(text):
    return [(t.kind, t.text) for t in tokenize(text)][:-1]


def test_tokenize_binder_header():
    toks = kinds("forall (x : Vec 2) .")
    assert [t for _, t in toks] == ["forall", "(", "x", ":", "Vec", "2", ")", "."]


def test_tokenize_comparison():
    assert [t for _, t in kinds("a <= b")] == ["a", "<=", "b"]


def test_scientific_literal():
    e = parse_expr("1.5e-3")
    assert e == A.RealConst(0.0015)


def test_integer_literal_is_index():
    assert parse_expr("[1.0, 2.0] ! 1") == A.binop(Op.LOOKUP, A.VecLit((A.RealConst(1.0), A.RealConst(2.0))), A.IndexConst(1))


def test_negative_literal_vs_subtraction():
    assert parse_expr("-1.5") == A.RealConst(-1.5)
    a_minus = parse_expr("a -1.5", scope=["a"])
    assert a_minus == A.binop(Op.ADD, A.BoundVar("a", 0), A.unop(Op.NEG, A.RealConst(1.5)))
    # after an operator the '-' is part of the literal
    assert parse_expr("a * -1.5", scope=["a"]) == A.binop(Op.MUL, A.BoundVar("a", 0), A.RealConst(-1.5))


def test_comment_is_ignored():
    assert parse_expr("True -- anything here\n") == A.TOP


def test_empty_file_is_an_error():
    with pytest.raises(ParseError):
        parse("")


def test_undeclared_network_is_named():
    with pytest.raises(UndeclaredName) as exc:
        parse("let p : Vec 2 -> Bool = lam (x : Vec 2) . g x ! 0 <= 1.0")
    assert exc.value.name == "g"
    assert "'g'" in str(exc.value)


def test_error_position():
    with pytest.raises(ParseError) as exc:
        parse("let p : Bool =\n  1.0 <= ")
    assert exc.value.line == 2


def test_comparisons_are_non_associative():
    with pytest.raises(ParseError):
        parse_expr("1.0 <= 2.0 <= 3.0")


@pytest.mark.parametrize(
    "text, expected",
    [
        ("a and b or c", "(or (and #2 #1) #0)"),
        ("a or b and c", "(or #2 (and #1 #0))"),
        ("a => b => c", "(=> #2 (=> #1 #0))"),
        ("not a and b", "(and (not #2) #1)"),
    ],
)
def test_connective_precedence(text, expected):
    scope = ["a", "b", "c"]
    e = parse_expr(text.replace(" c", " c"), scope=scope)
    assert A.to_sexpr(e) == expected


def test_arithmetic_precedence():
    e = parse_expr("1.0 + 2.0 * 3.0 <= 4.0 - 5.0")
    assert A.to_sexpr(e) == "(<= (+ (real 1.0) (* (real 2.0) (real 3.0))) (+ (real 4.0) (- (real 5.0))))"


def test_lookup_binds_tighter_than_arithmetic_and_looser_than_application():
    e = parse_expr("f x ! 0 + 1.0", networks={"f": (2, 2)}, scope=["x"])
    assert A.to_sexpr(e) == "(+ (! (app (net f) #0) (index 0)) (real 1.0))"


def test_binder_extends_right():
    e = parse_expr("a and forall (i : Index 2) . b or c", scope=["a", "b", "c"])
    assert A.to_sexpr(e) == "(and #2 (forall (Index 2) (or #2 #1)))"


def test_sections():
    e = parse_expr("(<=) 1.0 ((+) 2.0 3.0)")
    assert A.to_sexpr(e) == "(<= (real 1.0) (+ (real 2.0) (real 3.0)))"
    assert parse_expr("(not)") == A.Builtin(Op.NOT)


def test_parse_type():
    assert parse_type("Real -> Vec 3 -> Bool") == A.Fun(A.Real, A.Fun(A.Vec(3), A.Bool))
    assert parse_type("(Real -> Real)") == A.Fun(A.Real, A.Real)


def test_format_real_keeps_a_dot():
    assert format_real(3.0) == "3.0"
    assert format_real(1e-05) == "1.0e-05"
    assert isinstance(parse_expr(format_real(1e-05)), A.RealConst)


def test_pretty_infix():
    assert pretty_print(A.binop(Op.ADD, A.RealConst(1.0), A.RealConst(2.0))) == "1.0 + 2.0"
    assert pretty_print(A.RealConst(3.0)) == "3.0"


def test_pretty_renames_shadowing_binders():
    inner = A.Lam("x", A.Real, A.binop(Op.ADD, A.BoundVar("x", 0), A.BoundVar("x", 1)))
    e = A.Lam("x", A.Real, inner)
    text = pretty_print(e)
    assert text == "lam (x : Real) . lam (x' : Real) . x' + x"
    assert A.alpha_eq(parse_expr(text), e)


def test_corpus_parses_and_round_trips():
    for path in corpus_files(include_large=True):
        with open(path) as fh:
            spec = parse(fh.read())
        again = parse(print_spec(spec))
        assert again.networks == spec.networks
        assert [d.name for d in again.definitions] == [d.name for d in spec.definitions]
        for d, d2 in zip(spec.definitions, again.definitions):
            assert d.type == d2.type
            assert A.alpha_eq(d.expr, d2.expr), path


def test_robustness_file_shape():
    with open(os.path.join(CORPUS, "robustness.ldl")) as fh:
        spec = parse(fh.read())
    assert spec.networks == {"f": (784, 10)}
    assert [d.name for d in spec.definitions] == ["bounded", "robust"]


def test_robustness_golden_ast():
    with open(os.path.join(CORPUS, "robustness.ldl")) as fh:
        spec = parse(fh.read())
    with open(os.path.join(CORPUS, "robustness.sexpr")) as fh:
        golden = fh.read().splitlines()
    lines = [f"network {n} {m} {k}" for n, (m, k) in spec.networks.items()]
    for d in spec.definitions:
        lines += [f"define {d.name} ({d.type})", A.to_sexpr(d.expr)]
    assert lines == golden


def test_generated_terms_round_trip():
    gen = TermGen(np.random.default_rng(11))
    for _ in range(300):
        e, _ = gen.closed()
        text = pretty_print(e, NETWORKS)
        assert A.alpha_eq(parse_expr(text, NETWORKS), e), text
