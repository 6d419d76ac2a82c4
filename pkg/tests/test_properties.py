import pytest

from ldl import logics as Lg
from ldl.logics import all_logics, logic
from ldl.parser import parse_expr
from ldl import properties as P


@pytest.fixture(scope="module")
def matrix():
    return P.run_matrix(all_logics(), trials=500, seed=3)


def test_matrix_matches_reference_table(matrix):
    bad = [(v.logic, v.property, v.verdict) for v in matrix if not P.matches_table(v)]
    assert bad == []


def test_failures_carry_replayable_witnesses(matrix):
    for v in matrix:
        if v.verdict != "fails":
            continue
        assert v.witness is not None
        again = P.replay(v)
        if v.property == "shadow_lifting":
            assert again <= 1e-9
        elif v.property == "soundness":
            assert again == v.magnitude
        else:
            assert again == pytest.approx(v.magnitude, rel=1e-9)


def test_weak_smoothness_is_advisory(matrix):
    assert all(v.advisory for v in matrix if v.property == "weak_smoothness")


def test_text_report_counts_cells(matrix):
    text = P.format_text(matrix)
    assert "48/48 cells match" in text
    assert text.splitlines()[0].startswith("property")


def test_dl2_idempotence_witness():
    v = P.check_algebraic(logic("dl2"), "idempotence", trials=100)
    assert v.verdict == "fails"
    (a,) = v.witness["args"]
    assert v.witness["M"] * a != a


def test_algebraic_needs_enough_trials():
    with pytest.raises(ValueError):
        P.check_algebraic(logic("godel"), "idempotence", trials=10)


def test_stl_associativity_fails():
    assert P.check_algebraic(logic("stl"), "associativity", trials=200).verdict == "fails"


def test_godel_shadow_lifting_fails_and_product_holds():
    assert P.check_shadow_lifting(logic("godel"), trials=200).verdict == "fails"
    assert P.check_shadow_lifting(logic("product"), trials=200).verdict == "holds"
    assert P.check_shadow_lifting(logic("stl"), trials=200).verdict == "holds"


def test_quantifier_commutativity_examples():
    assert P.check_quantifier_commutativity(logic("godel"), trials=200).verdict == "holds"
    v = P.check_quantifier_commutativity(logic("dl2"), trials=200)
    assert v.verdict == "fails" and "lhs" in v.witness


def test_classical_eval_examples():
    assert P.classical_eval(parse_expr("3.0 <= 5.0"))
    assert not P.classical_eval(parse_expr("3.0 <= 5.0 and not (2.0 == 2.0)"))
    assert P.classical_eval(parse_expr("forall (i : Index 3) . [1.0, 2.0, 3.0] ! i <= 3.0"))


def test_soundness_verdicts():
    assert P.check_soundness(logic("godel"), 2000).verdict == "holds"
    assert P.check_soundness(logic("stl"), 500).verdict == "vacuous"
    v = P.check_soundness(logic("lukasiewicz"), 500)
    assert v.verdict == "fails"
    g = parse_expr(v.witness["formula"])
    assert not P.classical_eval(g)
    assert P.replay(v) == Lg.interp_top(logic("lukasiewicz"))


def test_verdicts_are_deterministic():
    a = P.check(logic("yager"), "scale_invariance", trials=200, seed=4)
    b = P.check(logic("yager"), "scale_invariance", trials=200, seed=4)
    assert a == b


def test_unknown_property():
    with pytest.raises(ValueError):
        P.check(logic("godel"), "distributivity")
