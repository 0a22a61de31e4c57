import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvlab.expr import (
    BinOp,
    Call,
    Coord,
    EvaluationError,
    ExprError,
    ExprSyntaxError,
    Neg,
    Num,
    Param,
    Pow,
    UnknownSymbolError,
    eval_jet,
    eval_value,
    parse_expr,
    pretty,
)
from curvlab.jets import multi_indices

mpmath.mp.dps = 40


def test_poincare_factor_depth():
    e = parse_expr("4/(1 - (x1^2 + x2^2))^2", ["x1", "x2"])
    assert e.depth == 5


def test_params_parse():
    e = parse_expr("r^2 * sin(x1)^2", ["x1"], ["r"])
    assert e.symbols() == {"r", "x1"}
    assert eval_value(e, [0.5], {"r": 2.0}) == pytest.approx(4 * np.sin(0.5) ** 2)


def test_unknown_symbol():
    with pytest.raises(UnknownSymbolError) as info:
        parse_expr("x3 + 1", ["x1", "x2"])
    assert info.value.symbol == "x3"
    assert info.value.offset == 0


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("x1 + * 2", ["x1"])
    assert info.value.offset == 5


@pytest.mark.parametrize("text", ["", "x1 +", "(x1", "x1^0.5", "x1^17", "foo(x1)", "x1 x1"])
def test_rejects_malformed(text):
    with pytest.raises(ExprError):
        parse_expr(text, ["x1"])


def test_precedence():
    e = parse_expr("-x1^2 + 2*x1/4 - 1", ["x1"])
    assert eval_value(e, [3.0], {}) == pytest.approx(-9 + 1.5 - 1)
    # exponents are integer literals, so powers do not chain without parentheses
    assert eval_value(parse_expr("(2^3)^2", ["x1"]), [0.0], {}) == pytest.approx(64.0)
    with pytest.raises(ExprSyntaxError):
        parse_expr("2^3^1", ["x1"])
    assert eval_value(parse_expr("8/2/2", ["x1"]), [0.0], {}) == pytest.approx(2.0)
    assert eval_value(parse_expr("x1^-2", ["x1"]), [2.0], {}) == pytest.approx(0.25)
    assert eval_value(parse_expr("x1^(-2)", ["x1"]), [2.0], {}) == pytest.approx(0.25)


def test_square_jet():
    j = eval_jet(parse_expr("x1^2", ["x1"]), [3.0], {}, 2)
    assert j.value == pytest.approx(9.0)
    assert j.partial((1,)) == pytest.approx(6.0)
    assert j.partial((2,)) == pytest.approx(2.0)
    assert j.coefficient((2,)) == pytest.approx(1.0)


def test_sine_jet():
    j = eval_jet(parse_expr("sin(x1)", ["x1"]), [0.0], {}, 3)
    assert [float(j.partial((k,))) for k in range(4)] == pytest.approx([0, 1, 0, -1])


def test_poincare_jet_against_high_precision_differences():
    e = parse_expr("4/(1-(x1^2+x2^2))^2", ["x1", "x2"])
    p = [0.1, 0.2]
    j = eval_jet(e, p, {}, 4)
    f = lambda a, b: 4 / (1 - (a * a + b * b)) ** 2
    alphas = multi_indices(2, 4)
    assert len(alphas) == 15
    for alpha in alphas:
        ref = float(mpmath.diff(f, [mpmath.mpf(v) for v in p], tuple(int(a) for a in alpha)))
        assert j.partial(alpha) == pytest.approx(ref, rel=1e-6)


def test_poincare_jet_against_float_central_differences():
    # plain float64 central differences, step 1e-3, for first and second partials
    e = parse_expr("4/(1-(x1^2+x2^2))^2", ["x1", "x2"])
    p = np.array([0.1, 0.2])
    h = 1e-3
    f = lambda q: float(eval_value(e, q, {}))
    j = eval_jet(e, p, {}, 4)
    for i in range(2):
        ei = np.eye(2)[i] * h
        d1 = (f(p + ei) - f(p - ei)) / (2 * h)
        d2 = (f(p + ei) - 2 * f(p) + f(p - ei)) / h**2
        alpha1 = tuple(np.eye(2, dtype=int)[i])
        assert j.partial(alpha1) == pytest.approx(d1, rel=1e-5)
        assert j.partial(tuple(2 * np.eye(2, dtype=int)[i])) == pytest.approx(d2, rel=1e-5)


def test_poincare_metric_coefficient_convention():
    e = parse_expr("4/(1-(x1^2+x2^2))^2", ["x1", "x2"])
    j = eval_jet(e, [0.0, 0.0], {}, 4)
    assert j.coefficient((2, 0)) == pytest.approx(8.0)
    assert j.partial((2, 0)) == pytest.approx(16.0)


def test_sqrt_jet():
    j = eval_jet(parse_expr("sqrt(1 + x1)", ["x1"]), [0.0], {}, 4)
    assert j.coef == pytest.approx([1, 0.5, -0.125, 0.0625, -0.0390625])


def test_polynomial_exactness():
    e = parse_expr("x1^4 - 3*x1^2*x2 + x2^3 - 2*x1*x2 + 5", ["x1", "x2"])
    p = [0.7, -1.3]
    j = eval_jet(e, p, {}, 4)
    x, y = p
    assert j.partial((4, 0)) == pytest.approx(24.0, rel=1e-12)
    assert j.partial((2, 1)) == pytest.approx(-6.0, rel=1e-12)
    assert j.partial((0, 3)) == pytest.approx(6.0, rel=1e-12)
    assert j.partial((1, 1)) == pytest.approx(-6 * x - 2, rel=1e-12)
    assert j.partial((0, 4)) == 0.0


def test_evaluation_errors():
    with pytest.raises(EvaluationError) as info:
        eval_jet(parse_expr("1/(x1 - 1)", ["x1"]), [1.0], {}, 1)
    assert "(x1 - 1.0)" in str(info.value)
    with pytest.raises(EvaluationError):
        eval_jet(parse_expr("sqrt(x1)", ["x1"]), [-1.0], {}, 1)
    with pytest.raises(EvaluationError):
        eval_jet(parse_expr("x1^-1", ["x1"]), [0.0], {}, 1)


def test_unbound_param_and_bad_order():
    e = parse_expr("a*x1", ["x1"], ["a"])
    with pytest.raises(ExprError):
        eval_jet(e, [1.0], {}, 1)
    with pytest.raises(ExprError):
        eval_jet(e, [1.0], {"a": 1.0}, 5)


def test_batched_eval():
    e = parse_expr("exp(x1)*cos(x2)", ["x1", "x2"])
    pts = np.array([[0.1, 0.2], [0.3, 0.4]])
    j = eval_jet(e, pts, {}, 2)
    assert j.shape == (2,)
    assert j.value == pytest.approx(np.exp(pts[:, 0]) * np.cos(pts[:, 1]))


COORDS = ("x1", "x2")


def _leaf():
    return st.one_of(
        st.floats(0, 100, allow_nan=False, allow_infinity=False).map(Num),
        st.sampled_from([Coord("x1", 0), Coord("x2", 1)]),
        st.just(Param("a")),
    )


def _extend(children):
    return st.one_of(
        st.builds(BinOp, st.sampled_from("+-*/"), children, children),
        st.builds(Neg, children),
        st.builds(Pow, children, st.integers(-16, 16)),
        st.builds(Call, st.sampled_from(["sin", "cos", "exp", "sqrt"]), children),
    )


trees = st.recursive(_leaf(), _extend, max_leaves=12)


@given(trees)
@settings(max_examples=200, deadline=None)
def test_pretty_round_trip(tree):
    text = pretty(tree)
    assert parse_expr(text, COORDS, ["a"]).root == tree


polys = st.lists(st.tuples(st.integers(-3, 3), st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=4)


def _poly_text(terms):
    return " + ".join(f"({c})*x1^{i}*x2^{k}" for c, i, k in terms)


@given(polys, polys)
@settings(max_examples=50, deadline=None)
def test_jet_homomorphism(p, q):
    e1, e2 = _poly_text(p), _poly_text(q)
    pt = [0.3, -0.4]
    j1 = eval_jet(parse_expr(e1, COORDS), pt, {}, 4)
    j2 = eval_jet(parse_expr(e2, COORDS), pt, {}, 4)
    js = eval_jet(parse_expr(f"({e1}) + ({e2})", COORDS), pt, {}, 4)
    jp = eval_jet(parse_expr(f"({e1}) * ({e2})", COORDS), pt, {}, 4)
    assert np.allclose(js.coef, (j1 + j2).coef, rtol=1e-14, atol=1e-14)
    assert np.allclose(jp.coef, (j1 * j2).coef, rtol=1e-12, atol=1e-12)
