"""Tests for N-functions: constructors, indices, conjugates, the comparison
function, and the assumption (M) diagnostics."""

import math
import re

import numpy as np
import pytest

from pyhardy.expr import parse
from pyhardy.nfunction import (
    LAMBDA_VARIABLES,
    NFunction,
    NotAnNFunctionError,
    c_inverse,
    c_of,
    check_assumption_M,
    conjugate_value,
    delta2_constant,
    domination_constant,
    make_power,
    make_power_sum,
    parse_nfunction,
    simonenko_indices,
)

N_FUNCTIONS = [
    pytest.param(make_power(1.5), id="power-1.5"),
    pytest.param(make_power(2.0), id="power-2"),
    pytest.param(make_power(3.0), id="power-3"),
    pytest.param(make_power_sum(2.0, 3.0), id="power_sum-2-3"),
]

N_SAMPLES = 10_000


def _log_uniform(rng, lo_exp, hi_exp, n=N_SAMPLES):
    return 10.0 ** rng.uniform(lo_exp, hi_exp, n)


class TestConstructors:
    def test_power_name_and_indices(self):
        M = make_power(2)
        assert M.name == "power:p=2"
        assert (M.d_M, M.D_M) == (2.0, 2.0)
        assert M.indices_certified
        assert M.degree == 2.0

    def test_power_needs_p_above_one(self):
        with pytest.raises(NotAnNFunctionError, match=re.escape("need p > 1")):
            make_power(1)

    def test_power_sum_indices(self):
        M = make_power_sum(3, 2)
        assert (M.d_M, M.D_M) == (2.0, 3.0)
        assert M.value(2.0) == pytest.approx(12.0)

    def test_power_sum_needs_both_above_one(self):
        with pytest.raises(NotAnNFunctionError):
            make_power_sum(2, 0.5)

    def test_index_order_is_validated(self):
        M = parse("x^2", LAMBDA_VARIABLES)
        with pytest.raises(NotAnNFunctionError, match="1 <= d_M <= D_M"):
            NFunction("bad", M, M.derivative(), d_M=3.0, D_M=2.0)


class TestParseNFunction:
    def test_catalog_power(self):
        M = parse_nfunction("power:p=3")
        assert M.name == "power:p=3"
        assert M.indices_certified

    def test_catalog_power_sum_with_spaces(self):
        M = parse_nfunction("power_sum: p=2, q=3")
        assert (M.d_M, M.D_M) == (2.0, 3.0)

    def test_malformed_number(self):
        with pytest.raises(
            ValueError, match=re.escape("Malformed number 'abc' in N-function 'power:p=abc'")
        ):
            parse_nfunction("power:p=abc")

    def test_malformed_catalog_string(self):
        with pytest.raises(ValueError, match="Malformed N-function catalog string"):
            parse_nfunction("power:p=2,q=3")

    def test_expression_gets_estimated_indices(self):
        M = parse_nfunction("x^2 + x^3")
        assert not M.indices_certified
        assert M.d_M == pytest.approx(2.0, abs=1e-4)
        assert M.D_M == pytest.approx(3.0, abs=1e-4)

    def test_lambda_spelling(self):
        M = parse_nfunction("λ^2")
        assert M.value(3.0) == pytest.approx(9.0)


class TestSimonenkoIndices:
    def test_power_sum(self):
        d, D, certified = simonenko_indices(parse("λ^2 + λ^3", LAMBDA_VARIABLES))
        assert d == pytest.approx(2.0, abs=1e-4)
        assert D == pytest.approx(3.0, abs=1e-4)
        assert certified is False

    def test_pure_power(self):
        d, D, _ = simonenko_indices(parse("x^2.5", LAMBDA_VARIABLES))
        assert d == pytest.approx(2.5, abs=1e-9)
        assert D == pytest.approx(2.5, abs=1e-9)

    def test_sublinear_is_rejected(self):
        with pytest.raises(NotAnNFunctionError, match="not an N-function"):
            simonenko_indices(parse("x^0.5", LAMBDA_VARIABLES))

    def test_exponential_growth_is_rejected(self):
        with pytest.raises(NotAnNFunctionError):
            simonenko_indices(parse("exp(x) - 1", LAMBDA_VARIABLES))


class TestConjugate:
    def test_power_closed_form(self):
        assert conjugate_value(make_power(2), 4.0) == pytest.approx(4.0)

    def test_power_dual_value(self):
        assert make_power(2).dual().value(2.0) == pytest.approx(1.0)

    def test_power_sum_numeric(self):
        assert conjugate_value(make_power_sum(2, 3), 5.0) == pytest.approx(3.0, rel=1e-10)

    def test_conjugate_at_zero(self):
        assert conjugate_value(make_power_sum(2, 3), 0.0) == 0.0

    def test_negative_argument(self):
        with pytest.raises(ValueError, match="requires y >= 0"):
            conjugate_value(make_power(2), -1.0)

    def test_dual_indices(self):
        dual = make_power_sum(2, 3).dual()
        assert dual.d_M == pytest.approx(1.5)
        assert dual.D_M == pytest.approx(2.0)
        assert dual.name == "conj(power_sum:p=2,q=3)"

    def test_power_dual_is_power(self):
        dual = make_power(3).dual()
        assert dual.degree == pytest.approx(1.5)
        assert dual.value(3.0) == pytest.approx(2.0)

    def test_numeric_dual_derivative_inverts_mprime(self):
        M = make_power_sum(2, 3)
        assert M.dual().derivative(5.0) == pytest.approx(1.0, rel=1e-12)


class TestComparisonFunction:
    def test_c_of_branches(self):
        M = make_power_sum(2, 3)
        assert c_of(M, 0.5) == pytest.approx(0.25)
        assert c_of(M, 2.0) == pytest.approx(8.0)
        assert c_of(M, 0.0) == 0.0

    def test_c_of_overflow(self):
        assert c_of(make_power(3), 1e200) == math.inf

    def test_c_of_rejects_negative(self):
        with pytest.raises(ValueError, match="c_of requires"):
            c_of(make_power(2), -1.0)

    def test_c_inverse_rejects_zero(self):
        with pytest.raises(ValueError, match="c_inverse requires t > 0"):
            c_inverse(make_power(2), 0.0)

    @pytest.mark.parametrize("M", N_FUNCTIONS)
    def test_c_of_inverts_c_inverse(self, M):
        rng = np.random.default_rng(7)
        t = _log_uniform(rng, -6, 6)
        s = c_inverse(M, t)
        back = np.array([c_of(M, float(v)) for v in s])
        np.testing.assert_allclose(back, t, rtol=1e-12)


class TestNFunctionProperties:
    """Randomised checks of the inequalities every N-function with indices
    (d_M, D_M) satisfies, on batches of 10⁴ samples."""

    @pytest.mark.parametrize("M", N_FUNCTIONS)
    def test_dilation_bounded_by_comparison_function(self, M):
        rng = np.random.default_rng(11)
        lam = _log_uniform(rng, -3, 3)
        r = _log_uniform(rng, -3, 3)
        lhs = M.value(lam * r)
        c = np.maximum(lam**M.d_M, lam**M.D_M)
        rhs = c * M.value(r)
        assert np.all(lhs <= rhs * (1 + 1e-12))

    @pytest.mark.parametrize("M", N_FUNCTIONS)
    def test_slope_bound_from_indices(self, M):
        rng = np.random.default_rng(13)
        r = _log_uniform(rng, -3, 3)
        s = _log_uniform(rng, -3, 3)
        lhs = M.value(r) / r * s
        rhs = (M.D_M - 1.0) / M.d_M * M.value(r) + M.value(s) / M.d_M
        assert np.all(lhs <= rhs * (1 + 1e-12))

    @pytest.mark.parametrize("M", N_FUNCTIONS)
    def test_young_inequality(self, M):
        rng = np.random.default_rng(17)
        x = _log_uniform(rng, -3, 3)
        y = _log_uniform(rng, -3, 3)
        rhs = M.value(x) + M.conjugate_array(y)
        assert np.all(x * y <= rhs * (1 + 1e-9))

    @pytest.mark.parametrize("M", N_FUNCTIONS)
    def test_young_equality_at_the_maximiser(self, M):
        y = np.array([0.1, 1.0, 10.0])
        x = M.maximizer(y)
        np.testing.assert_allclose(x * y, M.value(x) + M.conjugate_array(y), rtol=1e-9)


class TestConstants:
    def test_delta2_constant_of_square(self):
        assert delta2_constant(make_power(2)) == pytest.approx(4.0)

    def test_delta2_constant_of_power_sum(self):
        assert delta2_constant(make_power_sum(2, 3)) == pytest.approx(8.0, rel=1e-6)

    def test_domination_constant(self):
        assert domination_constant(3.0, 2.0) == 8.0

    def test_domination_constant_rejects_bad_input(self):
        with pytest.raises(ValueError, match="domination constants"):
            domination_constant(-1.0, 2.0)


class TestAssumptionM:
    @staticmethod
    def _by_name(diagnostics):
        return {d.name: d.passed for d in diagnostics}

    def test_power_passes_everything(self):
        passed = self._by_name(check_assumption_M(make_power(2)))
        assert passed == {
            "M(0)=0": True,
            "convex": True,
            "superlinear": True,
            "index_bracket": True,
            "delta2": True,
            "conjugate_delta2": True,
        }

    def test_linear_is_not_superlinear(self):
        passed = self._by_name(check_assumption_M("x"))
        assert passed["superlinear"] is False
        assert passed["conjugate_delta2"] is False
        assert passed["convex"] is True

    def test_exponential_fails_delta2(self):
        passed = self._by_name(check_assumption_M("exp(x) - 1"))
        assert passed["delta2"] is False
        assert passed["M(0)=0"] is True

    def test_never_raises_on_nonsense(self):
        diagnostics = check_assumption_M("ln(x)")
        assert not all(d.passed for d in diagnostics)
