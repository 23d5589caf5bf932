import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from polyode.expr import (BinOp, ExprDomainError, ExprSyntaxError, Func, Neg, Num, T,
                          UnknownIdentifier, compile_expr, evaluate, parse_coefficient,
                          substitute_t, unparse)

SAFE_FUNCS = ("sin", "cos", "arctan", "abs", "exp")


def random_expression(rs, depth=0):
    """Random expression text over a domain-safe subset of the grammar."""
    if depth > 3 or rs.rand() < 0.3:
        return rs.choice(["t", "pi", f"{rs.uniform(-3, 3):.4f}", str(rs.randint(1, 5))])
    kind = rs.randint(0, 4)
    if kind == 0:
        return f"{rs.choice(SAFE_FUNCS)}({random_expression(rs, depth + 1)})"
    if kind == 1:
        op = rs.choice(["+", "-", "*"])
        return f"({random_expression(rs, depth + 1)} {op} {random_expression(rs, depth + 1)})"
    if kind == 2:
        return f"({random_expression(rs, depth + 1)})^{rs.randint(0, 4)}"
    return f"-{random_expression(rs, depth + 1)}"


def sympy_reference(text):
    t = sp.Symbol("t")
    expr = sp.sympify(text.replace("^", "**"),
                      locals={"t": t, "pi": sp.pi, "arctan": sp.atan, "ln": sp.log,
                              "abs": sp.Abs})
    return sp.lambdify(t, expr, "mpmath")


class TestParse:
    def test_zero(self):
        assert parse_coefficient("0") == Num(0.0)

    def test_forcing_term_shape(self):
        ast = parse_coefficient("-sin(10*t)")
        assert ast == Neg(Func("sin", BinOp("*", Num(10.0), T())))

    def test_product_with_abs_is_zero_at_origin(self):
        ast = parse_coefficient("sin(t)^2 * abs(cos(pi*t))")
        assert evaluate(ast, 0.0) == 0.0

    def test_whitespace_insensitive(self):
        a = parse_coefficient(" 3 *  t ^ 2 ")
        b = parse_coefficient("3*t^2")
        assert a == b

    def test_power_is_right_associative(self):
        assert evaluate(parse_coefficient("2^3^2"), 0.0) == 512.0

    def test_unary_minus_binds_looser_than_power(self):
        assert evaluate(parse_coefficient("-2^2"), 0.0) == -4.0

    def test_scientific_notation(self):
        assert evaluate(parse_coefficient("1.5e-3*t"), 2.0) == pytest.approx(3e-3)

    @pytest.mark.parametrize("text,offset", [("2t", 1), ("sin(t", 5), ("3 + * t", 4), ("", 0)])
    def test_syntax_errors_carry_offset(self, text, offset):
        with pytest.raises(ExprSyntaxError) as exc:
            parse_coefficient(text)
        assert exc.value.offset == offset

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifier) as exc:
            parse_coefficient("sqrt(t)")
        assert exc.value.name == "sqrt"


class TestEvaluate:
    def test_sine_squared_at_half_pi(self):
        assert evaluate(parse_coefficient("sin(t)^2"), math.pi / 2) == 1.0

    def test_forcing_term_vanishes_at_zero(self):
        assert evaluate(parse_coefficient("-sin(10*t)"), 0.0) == 0.0

    def test_degree_five_coefficient_at_zero(self):
        assert evaluate(parse_coefficient("7*sin(t)^2*cos(3*t)+2"), 0.0) == 2.0

    def test_sign(self):
        f = parse_coefficient("sign(t)")
        assert [evaluate(f, x) for x in (-2.0, 0.0, 3.0)] == [-1.0, 0.0, 1.0]

    def test_division_by_zero_names_subexpression(self):
        with pytest.raises(ExprDomainError) as exc:
            evaluate(parse_coefficient("1/(t-1)"), 1.0)
        assert exc.value.subexpr is not None
        assert "/" in unparse(exc.value.subexpr)

    def test_log_of_nonpositive(self):
        with pytest.raises(ExprDomainError):
            evaluate(parse_coefficient("ln(t)"), 0.0)

    def test_agrees_with_sympy_reference(self, rng):
        # 500 random expressions x 20 points = 10^4 pairs
        worst = 0.0
        for _ in range(500):
            text = random_expression(rng)
            ast = parse_coefficient(text)
            ref = sympy_reference(text)
            for t in rng.uniform(-2, 2, 20):
                try:
                    got = evaluate(ast, t)
                except ExprDomainError:
                    continue
                want = float(ref(t))
                worst = max(worst, abs(got - want) / max(1.0, abs(want)))
        assert worst <= 1e-14 * 10


class TestRoundTrip:
    def test_unparse_reparse_grid(self, rng):
        ts = np.linspace(-3, 3, 1000)
        for _ in range(200):
            ast = parse_coefficient(random_expression(rng))
            back = parse_coefficient(unparse(ast))
            a = [evaluate(ast, t) for t in ts]
            b = [evaluate(back, t) for t in ts]
            assert a == b

    @settings(max_examples=200, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_random_trees_finite_or_domain_error(self, seed):
        rs = np.random.RandomState(seed)
        ast = parse_coefficient(random_expression(rs))
        for t in rs.uniform(-5, 5, 10):
            try:
                value = evaluate(ast, t)
            except ExprDomainError as exc:
                assert exc.t == t
                continue
            assert math.isfinite(value)


class TestCompile:
    def test_scalar_and_vector_match_evaluate(self, rng):
        ts = np.linspace(-2, 2, 101)
        for _ in range(100):
            ast = parse_coefficient(random_expression(rng))
            scalar = compile_expr(ast)
            vector = compile_expr(ast, vectorized=True)
            ref = np.array([evaluate(ast, t) for t in ts])
            np.testing.assert_allclose([scalar(t) for t in ts], ref, rtol=1e-13, atol=1e-13)
            np.testing.assert_allclose(np.broadcast_to(vector(ts), ts.shape), ref,
                                       rtol=1e-13, atol=1e-13)

    def test_substitute_reflects_argument(self):
        ast = parse_coefficient("t^3 + sin(t)")
        flipped = substitute_t(ast, Neg(T()))
        assert evaluate(flipped, 0.7) == pytest.approx(evaluate(ast, -0.7), abs=1e-15)
