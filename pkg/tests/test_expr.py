"""Tests for the closed-form expression grammar: parsing, evaluation,
derivatives, and the error surface (byte offsets, domain errors)."""

from __future__ import annotations

import math
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pyhardy.expr import (
    DomainError,
    ExpressionSyntaxError,
    NonConstantExponentError,
    UnknownIdentifierError,
    differentiate,
    evaluate,
    parse,
    serialize,
)
from pyhardy.nfunction import LAMBDA_VARIABLES

_exponent = st.floats(min_value=-2.0, max_value=3.0).map(repr)
_rate = st.floats(min_value=0.1, max_value=2.0).map(repr)
_r_points = st.floats(min_value=0.5, max_value=5.0)

# building blocks of the catalog weights, all smooth on [0.5, 5]
_weight_leaf = st.one_of(
    st.just("r"),
    st.just("ln(r)"),
    st.just("ln(1+r)"),
    st.just("ln(ln(1+r))"),
    _exponent.map(lambda a: f"r^({a})"),
    _rate.map(lambda b: f"exp(-({b})*r)"),
)


def _weight_combine(children):
    pair = st.tuples(children, children)
    return st.one_of(
        pair.map(lambda p: f"({p[0]} + {p[1]})"),
        pair.map(lambda p: f"({p[0]} - {p[1]})"),
        pair.map(lambda p: f"({p[0]} * {p[1]})"),
    )


class TestEvaluation:
    def test_log_weight(self):
        assert evaluate(parse("-4*ln(r)"), math.e) == pytest.approx(-4.0)

    def test_precedence_and_power(self):
        e = parse("1 + 2*r^2 - r/4")
        assert e(2.0) == pytest.approx(1 + 8 - 0.5)

    def test_unary_minus_binds_looser_than_power(self):
        assert parse("-r^2/2")(3.0) == pytest.approx(-4.5)

    def test_constant_e(self):
        assert parse("e^2")(1.0) == pytest.approx(math.e**2)

    def test_min_max_abs(self):
        e = parse("max(0, 1-abs(r-2))")
        assert e(2.0) == pytest.approx(1.0)
        assert e(2.5) == pytest.approx(0.5)
        assert e(5.0) == 0.0

    def test_vectorised(self):
        x = np.array([1.0, 2.0, 4.0])
        np.testing.assert_allclose(parse("r^2")(x), x**2)

    def test_scalar_call_returns_float(self):
        assert isinstance(parse("r + 1")(1.0), float)

    def test_parenthesised_constant_exponent(self):
        assert parse("r^(1/2)")(9.0) == pytest.approx(3.0)

    def test_negative_exponent(self):
        assert parse("r^-1")(4.0) == pytest.approx(0.25)

    def test_lambda_variable(self):
        M = parse("λ^2 + λ^3", LAMBDA_VARIABLES)
        assert M(2.0) == pytest.approx(12.0)
        assert M.variable == "λ"


class TestDerivative:
    def test_log_weight_reads_naturally(self):
        d = differentiate(parse("-4*ln(r)"))
        assert d.text == "((-4.0) / r)"
        assert d(2.0) == pytest.approx(-2.0)

    def test_gaussian(self):
        d = parse("-r^2/2").derivative()
        assert d(3.0) == pytest.approx(-3.0)
        assert d.derivative()(3.0) == pytest.approx(-1.0)

    def test_constant_folds_to_zero(self):
        assert parse("5").derivative().text == "0.0"

    def test_abs_kink_is_a_domain_error(self):
        d = parse("abs(r-1)").derivative()
        assert d(2.0) == pytest.approx(1.0)
        assert d(0.5) == pytest.approx(-1.0)
        with pytest.raises(DomainError, match="division by zero"):
            d(1.0)

    def test_min_selects_the_smaller_branch(self):
        d = parse("min(r, 2)").derivative()
        assert d(1.0) == pytest.approx(1.0)
        assert d(3.0) == pytest.approx(0.0)

    @settings(max_examples=50, deadline=None)
    @given(
        a=st.floats(min_value=-2.0, max_value=3.0),
        b=st.floats(min_value=0.1, max_value=2.0),
        r=st.floats(min_value=0.5, max_value=5.0),
    )
    def test_matches_central_difference(self, a, b, r):
        e = parse(f"r^({a!r}) * exp(-({b!r})*r) + ln(1 + r)")
        h = 1e-6 * r
        fd = (e(r + h) - e(r - h)) / (2 * h)
        assert e.derivative()(r) == pytest.approx(fd, rel=1e-5, abs=1e-6)

    def test_log_log_weight(self):
        d = parse("-1*ln(r) - 1*ln(ln(1+r))").derivative()
        assert d(1.0) == pytest.approx(-1 - 1 / (2 * math.log(2)), rel=1e-12)
        assert d(1.0) == pytest.approx(-1.7213475, abs=1e-7)

    @settings(max_examples=200, deadline=None)
    @given(text=st.recursive(_weight_leaf, _weight_combine, max_leaves=4), r=_r_points)
    def test_catalog_shapes_match_central_difference(self, text, r):
        e = parse(text)
        h = 1e-5 * r
        fd = (e(r + h) - e(r - h)) / (2 * h)
        scale = max(1.0, abs(e(r)))
        assert e.derivative()(r) == pytest.approx(fd, rel=1e-5, abs=1e-6 * scale)

    def test_dilate(self):
        e = parse("r^2").dilate(3.0)
        assert e(2.0) == pytest.approx(36.0)


_leaf = st.one_of(
    st.just("r"),
    st.just("e"),
    st.floats(min_value=0.1, max_value=100.0).map(repr),
)


def _combine(children):
    pair = st.tuples(children, children)
    return st.one_of(
        pair.map(lambda p: f"({p[0]} + {p[1]})"),
        pair.map(lambda p: f"({p[0]} - {p[1]})"),
        pair.map(lambda p: f"({p[0]} * {p[1]})"),
        pair.map(lambda p: f"({p[0]} / {p[1]})"),
        pair.map(lambda p: f"max({p[0]}, {p[1]})"),
        children.map(lambda c: f"-{c}"),
        children.map(lambda c: f"exp({c})"),
        children.map(lambda c: f"ln({c})"),
        children.map(lambda c: f"abs({c})"),
        children.map(lambda c: f"({c})^2.5"),
    )


class TestSerialize:
    @settings(max_examples=100, deadline=None)
    @given(text=st.recursive(_leaf, _combine, max_leaves=8))
    def test_parse_serialize_round_trip(self, text):
        e = parse(text)
        assert parse(serialize(e)) == e

    def test_negative_literal_is_parenthesised(self):
        assert serialize(parse("-4*r")) == "((-4.0) * r)"


class TestSyntaxErrors:
    def test_unknown_function_is_echoed_with_offset(self):
        with pytest.raises(UnknownIdentifierError, match="'sin'") as exc:
            parse("sin(r)")
        assert exc.value.offset == 0
        assert exc.value.text == "sin(r)"

    @pytest.mark.parametrize(
        "text, close",
        [("expp(r)", "exp"), ("abss(r)", "abs"), ("lnn(r)", "ln"), ("mx(r, 1)", "max")],
    )
    def test_unknown_identifier_suggests_function(self, text, close):
        with pytest.raises(UnknownIdentifierError) as exc:
            parse(text)
        assert f"did you mean {close!r}" in str(exc.value)
        assert "did you mean 'e'" not in str(exc.value)

    def test_offset_counts_utf8_bytes(self):
        with pytest.raises(UnknownIdentifierError) as exc:
            parse("λ + foo", LAMBDA_VARIABLES)
        assert exc.value.offset == 5

    def test_trailing_operator(self):
        with pytest.raises(ExpressionSyntaxError, match="end of input") as exc:
            parse("r +")
        assert exc.value.offset == 3

    def test_unbalanced_parenthesis(self):
        with pytest.raises(ExpressionSyntaxError, match=re.escape("expected ')'")):
            parse("(r + 1")

    def test_non_constant_exponent(self):
        with pytest.raises(NonConstantExponentError) as exc:
            parse("r^r")
        assert exc.value.offset == 2

    def test_non_constant_parenthesised_exponent(self):
        with pytest.raises(NonConstantExponentError):
            parse("2^(r+1)")

    def test_bad_character(self):
        with pytest.raises(ExpressionSyntaxError, match="unexpected character '#'"):
            parse("r # 2")

    def test_non_string(self):
        with pytest.raises(TypeError, match="must be a string"):
            parse(3.0)

    def test_errors_are_value_errors(self):
        with pytest.raises(ValueError):
            parse("sin(r)")


class TestDomainErrors:
    def test_ln_of_zero(self):
        with pytest.raises(DomainError) as exc:
            parse("ln(r)")(0.0)
        assert exc.value.reason == "ln of non-positive argument"
        assert exc.value.at == 0.0
        assert exc.value.expression == "ln(r)"

    def test_division_by_zero_names_the_point(self):
        with pytest.raises(DomainError, match="division by zero") as exc:
            parse("1/(r-2)")(np.array([1.0, 2.0, 3.0]))
        assert exc.value.at == 2.0

    def test_non_strict_returns_nan(self):
        out = parse("1/(r-2)").evaluate_array(np.array([1.0, 2.0]), strict=False)
        assert out[0] == pytest.approx(-1.0)
        assert math.isnan(out[1])
