import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvsteer.quadrature import (
    DEFAULT_SPEC,
    QuadratureSpec,
    adaptive_panels,
    gauss_hermite_rule,
    integrate_entropy_1d,
    integrate_entropy_2d,
    integrate_moment_1d,
    integrate_moment_2d,
)

SQPI = math.sqrt(math.pi)


class TestGaussHermiteRule:
    def test_order_two_closed_form(self):
        # Two-point rule from the Jacobi matrix: nodes +-1/sqrt(2), weights sqrt(pi)/2
        rule = gauss_hermite_rule(2)
        assert rule.nodes == pytest.approx([-1 / math.sqrt(2), 1 / math.sqrt(2)], abs=1e-15)
        assert rule.weights == pytest.approx([SQPI / 2, SQPI / 2], abs=1e-15)

    def test_zeroth_moment(self):
        rule = gauss_hermite_rule(10)
        assert rule.weights.sum() == pytest.approx(SQPI, rel=1e-12)

    def test_fourth_moment(self):
        # gamma(5/2) = (3/4) sqrt(pi)
        rule = gauss_hermite_rule(10)
        assert (rule.weights * rule.nodes**4).sum() == pytest.approx(0.75 * SQPI, rel=1e-12)

    def test_nodes_symmetric(self):
        for order in (7, 32, 64):
            rule = gauss_hermite_rule(order)
            np.testing.assert_array_equal(rule.nodes, -rule.nodes[::-1])
            np.testing.assert_array_equal(rule.weights, rule.weights[::-1])

    @pytest.mark.parametrize("order", [2, 5, 10])
    def test_exact_for_all_moments_up_to_degree(self, order):
        # Gaussian-moment oracle: int y^k e^{-y^2} dy = gamma((k+1)/2) for even k, 0 odd.
        # Odd moments cancel pairwise; "relative" there means relative to the summand
        # scale sum w |y|^k, the roundoff floor of any dot product.
        rule = gauss_hermite_rule(order)
        for k in range(2 * order):
            got = float(rule.weights @ rule.nodes**k)
            scale = float(rule.weights @ np.abs(rule.nodes) ** k)
            expected = math.gamma((k + 1) / 2) if k % 2 == 0 else 0.0
            assert got == pytest.approx(expected, abs=1e-12 * scale)

    def test_modified_weights(self):
        rule = gauss_hermite_rule(64)
        # w * exp(x^2) stays O(1); spot-check against direct computation mid-range
        mid = np.abs(rule.nodes) < 4
        np.testing.assert_allclose(
            rule.modified_weights[mid],
            rule.weights[mid] * np.exp(rule.nodes[mid] ** 2),
            rtol=1e-12,
        )
        assert np.all(np.isfinite(rule.modified_weights))

    def test_rejects_tiny_order(self):
        with pytest.raises(ValueError):
            gauss_hermite_rule(1)

    @given(st.integers(min_value=2, max_value=24), st.integers(min_value=0, max_value=12))
    @settings(max_examples=40, deadline=None)
    def test_moment_exactness_property(self, order, k):
        rule = gauss_hermite_rule(order)
        if k > 2 * order - 1:
            return
        got = float(rule.weights @ rule.nodes**k)
        scale = float(rule.weights @ np.abs(rule.nodes) ** k)
        expected = math.gamma((k + 1) / 2) if k % 2 == 0 else 0.0
        assert got == pytest.approx(expected, abs=1e-12 * scale)


class TestMomentIntegrals:
    def test_gaussian_normalization_1d(self):
        rule = gauss_hermite_rule(16)
        val = integrate_moment_1d(lambda a: np.exp(-2.0 * a * a), rule, gaussian_scale=2.0)
        assert val == pytest.approx(math.sqrt(math.pi / 2), rel=1e-13)

    def test_second_moment_2d(self):
        # int b^2 (1/pi) e^{-(a^2+b^2)} = 1/2
        rule = gauss_hermite_rule(32)
        val = integrate_moment_2d(
            lambda a, b: b * b / math.pi * np.exp(-(a * a + b * b)), rule, 1.0)
        assert val == pytest.approx(0.5, rel=1e-13)

    def test_scale_change_of_variables(self):
        rule = gauss_hermite_rule(32)
        val = integrate_moment_2d(
            lambda a, b: (3.0 / math.pi) * np.exp(-3.0 * (a * a + b * b)), rule, 3.0)
        assert val == pytest.approx(1.0, rel=1e-13)


class TestQuadratureSpec:
    def test_defaults(self):
        assert DEFAULT_SPEC == QuadratureSpec(gh_order=64, half_width=8.0,
                                              panel_tol=1e-10, max_depth=40)

    @pytest.mark.parametrize("kwargs", [
        {"gh_order": 1},
        {"half_width": 0.0},
        {"panel_tol": 0.0},
        {"panel_tol": 1.5},
        {"max_depth": 0},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            QuadratureSpec(**kwargs)


class TestAdaptivePanels:
    def test_polynomial_exact(self):
        res = adaptive_panels(lambda x: x * x, 0.0, 1.0, 1e-12, 10)
        assert res.converged
        assert res.value == pytest.approx(1.0 / 3.0, rel=1e-14)

    def test_breakpoints_recover_kink(self):
        res = adaptive_panels(np.abs, -1.0, 1.0, 1e-13, 40, breakpoints=(0.0,))
        assert res.converged
        assert res.value == pytest.approx(1.0, rel=1e-14)

    def test_depth_exhaustion_flags(self):
        # Tolerance far below the roundoff floor of the sum cannot be met
        res = adaptive_panels(lambda x: np.exp(-x * x), -8.0, 8.0, 1e-15, 3)
        assert not res.converged
        assert res.value == pytest.approx(SQPI, rel=1e-10)


class TestEntropy1d:
    def test_unit_gaussian_entropy(self):
        # Differential entropy of N(0, 1/2): (1/2) ln(2 pi e sigma^2) = (1/2) ln(pi e)
        g = lambda x: np.exp(-x * x) / SQPI
        res = integrate_entropy_1d(g, DEFAULT_SPEC)
        assert res.converged
        assert res.value == pytest.approx(0.5 * (1 + math.log(math.pi)), abs=1e-12)

    def test_first_level_density_entropy(self):
        # (2/sqrt(pi)) x^2 e^{-x^2}: entropy gamma + ln 2 + (1/2) ln pi - 1/2, from the
        # digamma identity psi(3/2) = 2 - gamma - ln 4 applied to the Gamma(3/2) integral
        g = lambda x: 2.0 / SQPI * x * x * np.exp(-x * x)
        expected = np.euler_gamma + math.log(2) + 0.5 * math.log(math.pi) - 0.5
        res = integrate_entropy_1d(g, DEFAULT_SPEC, breakpoints=(0.0,))
        assert res.converged
        assert res.value == pytest.approx(expected, abs=1e-12)

    def test_zero_handling_never_nan(self):
        g = lambda x: np.zeros_like(x)
        res = integrate_entropy_1d(g, DEFAULT_SPEC)
        assert res.value == 0.0
        assert math.isfinite(res.error)

    @given(st.floats(min_value=0.2, max_value=5.0))
    @settings(max_examples=15, deadline=None)
    def test_scaling_law(self, lam):
        # Stretching x by lambda shifts differential entropy by +ln lambda
        g = lambda x: np.exp(-x * x) / SQPI
        g_scaled = lambda x: g(x / lam) / lam
        spec = QuadratureSpec(half_width=8.0 * max(1.0, lam))
        h0 = integrate_entropy_1d(g, spec).value
        h1 = integrate_entropy_1d(g_scaled, spec).value
        assert h1 - h0 == pytest.approx(math.log(lam), abs=1e-10)

    def test_unmet_tolerance_flagged_value_returned(self):
        g = lambda x: np.exp(-x * x) / SQPI
        res = integrate_entropy_1d(g, QuadratureSpec(panel_tol=1e-15, max_depth=4))
        assert not res.converged
        assert res.value == pytest.approx(0.5 * (1 + math.log(math.pi)), abs=1e-8)


class TestEntropy2d:
    def test_product_of_gaussians(self):
        g = lambda a, b: np.exp(-(a * a + b * b)) / math.pi
        res = integrate_entropy_2d(g, DEFAULT_SPEC)
        assert res.converged
        assert res.value == pytest.approx(1 + math.log(math.pi), abs=1e-10)

    def test_tail_truncation_insensitive(self):
        c, s = math.cos(0.7), math.sin(0.7)
        g = lambda a, b: (c + 2 * a * b * s) ** 2 / math.pi * np.exp(-(a * a + b * b))
        r8 = integrate_entropy_2d(g, QuadratureSpec(half_width=8.0))
        r16 = integrate_entropy_2d(g, QuadratureSpec(half_width=16.0))
        assert abs(r8.value - r16.value) < 1e-10

    @staticmethod
    def _bracket_zero_hints(c, s):
        def hints(av):
            safe = np.where(np.abs(av) > 1e-12, av, 1.0)
            return np.where(np.abs(av) > 1e-12, -c / (2 * s * safe), np.nan)[:, None]
        return hints

    def test_deterministic(self):
        c, s = math.cos(1.1), math.sin(1.1)
        g = lambda a, b: (c + 2 * a * b * s) ** 2 / math.pi * np.exp(-(a * a + b * b))
        hints = self._bracket_zero_hints(c, s)
        r1 = integrate_entropy_2d(g, DEFAULT_SPEC, inner_breakpoints=hints)
        r2 = integrate_entropy_2d(g, DEFAULT_SPEC, inner_breakpoints=hints)
        assert r1.value == r2.value  # bitwise
        assert r1 == r2

    def test_inner_breakpoints_match_free_refinement(self):
        # The zero-curve pre-split is an efficiency hint, not a correctness requirement
        c, s = math.cos(1.1), math.sin(1.1)
        g = lambda a, b: (c + 2 * a * b * s) ** 2 / math.pi * np.exp(-(a * a + b * b))
        with_hints = integrate_entropy_2d(g, DEFAULT_SPEC,
                                          inner_breakpoints=self._bracket_zero_hints(c, s))
        without = integrate_entropy_2d(g, DEFAULT_SPEC)
        assert with_hints.value == pytest.approx(without.value, abs=5e-10)
