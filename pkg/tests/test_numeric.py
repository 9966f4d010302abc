"""Tests for the floating-point verification layer: gamma plumbing, the
ordered-simplex beta integral (closed form, contiguous relation, quadrature),
and the end-to-end rank-one difference-equation and determinant checks."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kzdyn.dyn import PoleHit
from kzdyn.numeric import (
    MAIN_THEOREM_GRID,
    QUADRATURE_GRID,
    SELBERG_GRID,
    ChamberIntegral,
    NonIntegrable,
    SelbergParams,
    det_formula_sl2_check,
    evaluate_expr,
    log_gamma,
    main_theorem_sl2_check,
    quad_chamber,
    selberg_closed,
    selberg_difference_check,
    selberg_signed,
)
from kzdyn.symexpr import parse, symbol


class TestLogGamma:
    def test_special_values(self):
        assert log_gamma(1.0) == 0.0
        assert log_gamma(2.0) == 0.0
        assert abs(log_gamma(0.5) - 0.5 * math.log(math.pi)) < 1e-15
        assert abs(log_gamma(10.0) - math.log(362880)) < 1e-12

    def test_poles_at_nonpositive_integers(self):
        for bad in (0.0, -1.0, -2.0, -7.0):
            with pytest.raises(PoleHit):
                log_gamma(bad)

    def test_negative_noninteger_gives_log_abs(self):
        # Gamma(-0.5) = -2 sqrt(pi); the log variant reports log|.|
        assert abs(log_gamma(-0.5) - math.log(2 * math.sqrt(math.pi))) < 1e-14


class TestEvaluateExpr:
    def test_rational_point(self):
        expr = parse("(l1 + 2) / (l1 - 1)")
        assert evaluate_expr(expr, {"l1": 3}) == 2.5

    def test_float_arguments_are_taken_exactly(self):
        expr = symbol("kap") * symbol("kap")
        assert evaluate_expr(expr, {"kap": 1.5}) == 2.25

    def test_fraction_arguments(self):
        expr = parse("1 / (2*l1 - 1)")
        assert evaluate_expr(expr, {"l1": Fraction(3, 4)}) == 2.0

    def test_pole_hit_on_vanishing_denominator(self):
        expr = parse("1 / (l1 - 1)")
        with pytest.raises(PoleHit):
            evaluate_expr(expr, {"l1": 1})


class TestSelbergClosedForm:
    def test_dimension_zero_is_log_one(self):
        assert selberg_closed(SelbergParams(1.3, 0.7, 0.4, 0)) == 0.0

    def test_one_dimensional_case_is_log_beta(self):
        # the coupling parameter cancels identically when m = 1
        for a, b, c in ((1.7, 2.4, 0.9), (1.0, 1.0, 0.3), (0.4, 3.1, 2.0)):
            got = selberg_closed(SelbergParams(a, b, c, 1))
            want = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
            assert abs(got - want) < 1e-13

    def test_two_dimensional_unit_parameters(self):
        # int over 0<t1<t2<1 of (t2-t1)^2 = 1/12, derived by direct integration
        got = math.exp(selberg_closed(SelbergParams(1.0, 1.0, 1.0, 2)))
        assert abs(got - Fraction(1, 12)) < 1e-15

    def test_signed_variant_tracks_negative_values(self):
        # Beta(1, -1/2) = Gamma(1)Gamma(-1/2)/Gamma(1/2) = -2
        sign, log_value = selberg_signed(SelbergParams(1.0, -0.5, 0.5, 1))
        assert sign == -1
        assert abs(math.exp(log_value) - 2.0) < 1e-14

    def test_closed_raises_on_negative_value(self):
        with pytest.raises(ValueError):
            selberg_closed(SelbergParams(1.0, -0.5, 0.5, 1))

    def test_gamma_pole_propagates(self):
        with pytest.raises(PoleHit):
            selberg_closed(SelbergParams(-1.0, 1.0, 0.5, 1))


class TestSelbergDifference:
    def test_one_dimensional_oracle(self):
        # Beta(a+1, b)/Beta(a, b) = a/(a+b), directly from the lgamma values
        a, b = 1.9, 0.8
        report = selberg_difference_check(SelbergParams(a, b, 0.6, 1))
        assert report.passed
        direct = (
            math.lgamma(a + 1)
            + math.lgamma(b)
            - math.lgamma(a + 1 + b)
            - (math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
        )
        assert abs(direct - math.log(a / (a + b))) < 1e-13

    def test_grid_within_tolerance(self):
        for m, a, b, c in SELBERG_GRID:
            report = selberg_difference_check(SelbergParams(a, b, c, m))
            assert report.passed, (m, a, b, c, report.error)
            assert report.error <= 1e-10

    def test_report_fields_round_trip(self):
        report = selberg_difference_check(SelbergParams(1.3, 0.7, 0.4, 2))
        data = report.to_json()
        assert data["passed"] is True
        assert data["m"] == 2
        assert data["error"] == report.error

    def test_pole_in_contiguous_factor(self):
        # a + b + c(2m - 2) = 0 makes the ratio undefined
        with pytest.raises(PoleHit):
            selberg_difference_check(SelbergParams(1.0, -2.0, 0.5, 2))

    @settings(max_examples=25, deadline=None)
    @given(
        m=st.integers(min_value=1, max_value=4),
        a=st.floats(min_value=0.5, max_value=4.0),
        b=st.floats(min_value=0.5, max_value=4.0),
        c=st.floats(min_value=0.1, max_value=1.5),
    )
    def test_difference_property(self, m, a, b, c):
        report = selberg_difference_check(SelbergParams(a, b, c, m))
        assert report.passed


class TestChamberIntegralValidation:
    def test_exponent_length_mismatch(self):
        with pytest.raises(ValueError):
            ChamberIntegral(2, (0.0,), (0.0, 0.0))

    def test_invalid_pair_key(self):
        with pytest.raises(ValueError):
            ChamberIntegral(2, (0.0, 0.0), (0.0, 0.0), {(2, 1): 1.0})
        with pytest.raises(ValueError):
            ChamberIntegral(2, (0.0, 0.0), (0.0, 0.0), {(1, 3): 1.0})

    def test_nonpositive_bound(self):
        with pytest.raises(ValueError):
            ChamberIntegral(1, (0.0,), (0.0,), bound=0.0)

    def test_from_selberg_integrability_guard(self):
        with pytest.raises(NonIntegrable):
            ChamberIntegral.from_selberg(SelbergParams(0.0, 1.0, 0.5, 1))
        with pytest.raises(NonIntegrable):
            ChamberIntegral.from_selberg(SelbergParams(1.0, -0.2, 0.5, 1))
        with pytest.raises(NonIntegrable):
            ChamberIntegral.from_selberg(SelbergParams(1.0, 1.0, -0.6, 2))

    def test_boundary_exponent_list(self):
        ci = ChamberIntegral(2, (0.25, -0.5), (0.5, -0.75), {(1, 2): -0.4})
        assert ci.boundary_exponents() == [0.25, -0.75, -0.4]


class TestQuadrature:
    def test_one_dimensional_beta(self):
        for a, b in ((2.0, 3.0), (0.5, 0.5), (1.25, 4.0)):
            ci = ChamberIntegral(1, (a - 1,), (b - 1,))
            got = quad_chamber(ci, 1e-10)
            want = math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
            assert abs(got - want) <= 1e-8 * want

    def test_two_dimensional_unit_parameters(self):
        ci = ChamberIntegral.from_selberg(SelbergParams(2.0, 2.0, 1.0, 2))
        got = quad_chamber(ci, 1e-9)
        want = math.exp(selberg_closed(SelbergParams(2.0, 2.0, 1.0, 2)))
        assert abs(got - want) <= 1e-9 * want

    def test_grid_matches_closed_form(self):
        for m, a, b, c in QUADRATURE_GRID:
            params = SelbergParams(a, b, c, m)
            got = quad_chamber(ChamberIntegral.from_selberg(params), 1e-8)
            want = math.exp(selberg_closed(params))
            rel = abs(got - want) / want
            assert rel <= 1e-6, (m, a, b, c, rel)

    def test_three_dimensional_case(self):
        params = SelbergParams(2.0, 2.0, 0.5, 3)
        got = quad_chamber(ChamberIntegral.from_selberg(params), 1e-8)
        want = math.exp(selberg_closed(params))
        assert abs(got - want) <= 1e-6 * want

    def test_asymmetric_chamber_against_frozen_oracle(self):
        # reference values from an independent high-precision nested
        # tanh-sinh quadrature of the same integrand
        cases = (
            ((0.5, 0.25), (0.5, 0.75), -0.4, 0.15390919144232607945),
            ((1.0, 0.5), (-0.5, 1.5), 0.6, 0.0081011693232964241918),
        )
        for pow0, pow1, coupling, want in cases:
            ci = ChamberIntegral(2, pow0, pow1, {(1, 2): coupling})
            got = quad_chamber(ci, 1e-8)
            assert abs(got - want) <= 1e-6 * want

    def test_scaled_bound(self):
        # substituting t -> bound * s rescales a beta integral by a power
        a, b, bound = 2.5, 1.5, 2.0
        ci = ChamberIntegral(1, (a - 1,), (b - 1,), bound=bound)
        got = quad_chamber(ci, 1e-10)
        want = bound ** (a + b - 1) * math.exp(
            math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
        )
        assert abs(got - want) <= 1e-8 * want

    def test_dimension_zero(self):
        assert quad_chamber(ChamberIntegral(0, (), ()), 1e-10) == 1.0

    def test_dimension_cap(self):
        with pytest.raises(ValueError):
            quad_chamber(ChamberIntegral(4, (0.0,) * 4, (0.0,) * 4), 1e-8)

    def test_divergent_origin_exponent(self):
        with pytest.raises(NonIntegrable):
            quad_chamber(ChamberIntegral(1, (-1.0,), (0.0,)), 1e-8)

    def test_divergent_upper_exponent(self):
        with pytest.raises(NonIntegrable):
            quad_chamber(ChamberIntegral(1, (0.0,), (-1.5,)), 1e-8)

    def test_divergent_coincidence_exponent(self):
        with pytest.raises(NonIntegrable):
            quad_chamber(
                ChamberIntegral(2, (0.0, 0.0), (0.0, 0.0), {(1, 2): -1.0}), 1e-8
            )

    def test_divergent_corner(self):
        # each factor is individually integrable but the corner t1,t2 -> 0
        # accumulates a non-integrable total power
        with pytest.raises(NonIntegrable):
            quad_chamber(
                ChamberIntegral(2, (-0.8, -0.9), (0.0, 0.0), {(1, 2): -0.5}), 1e-8
            )

    @settings(max_examples=15, deadline=None)
    @given(
        m=st.integers(min_value=1, max_value=2),
        a=st.floats(min_value=1.2, max_value=3.0),
        b=st.floats(min_value=1.2, max_value=3.0),
        c=st.floats(min_value=0.25, max_value=1.0),
    )
    def test_quadrature_matches_closed_form_property(self, m, a, b, c):
        params = SelbergParams(a, b, c, m)
        got = quad_chamber(ChamberIntegral.from_selberg(params), 1e-8)
        want = math.exp(selberg_closed(params))
        assert abs(got - want) <= 1e-6 * want


class TestMainTheoremRankOne:
    def test_grid_within_tolerance(self):
        for p, m, kappa, lam, z in MAIN_THEOREM_GRID:
            report = main_theorem_sl2_check(p, m, kappa, lam, z)
            assert report.passed, (p, m, kappa, lam, z, report.rel_error)
            assert report.rel_error <= 1e-9

    def test_highest_weight_vector_is_exact(self):
        # m = 0: both sides reduce to the same pure coordinate power
        report = main_theorem_sl2_check(5, 0, 2.3, 1.1, 0.7)
        assert report.rel_error == 0.0

    def test_report_round_trip(self):
        report = main_theorem_sl2_check(3, 1, 2.0, 1.7, 0.8)
        data = report.to_json()
        assert data["passed"] is True
        assert data["p"] == 3 and data["m"] == 1
        assert data["rel_error"] == report.rel_error

    def test_empty_weight_space_rejected(self):
        with pytest.raises(ValueError):
            main_theorem_sl2_check(2, 3, 2.0, 1.7, 0.8)

    def test_nonpositive_coordinate_rejected(self):
        with pytest.raises(ValueError):
            main_theorem_sl2_check(3, 1, 2.0, 1.7, 0.0)


class TestDetFormulaRankOne:
    def test_grid_within_tolerance(self):
        for p, m, kappa, lam, z in MAIN_THEOREM_GRID:
            report = det_formula_sl2_check(p, m, kappa, lam, z)
            assert report.passed, (p, m, kappa, lam, z, report.rel_error)
            assert report.rel_error <= 1e-9
            assert report.periodicity_error <= 1e-9

    def test_periodicity_at_further_shifts(self):
        # the factored form holds with the same constant one full step along
        p, m, kappa, z = 4, 2, 3.3, 1.1
        base = det_formula_sl2_check(p, m, kappa, 2.35, z)
        stepped = det_formula_sl2_check(p, m, kappa, 2.35 + kappa, z)
        assert base.passed and stepped.passed
        assert abs(base.u11 / base.cd_product - 1.0) <= 1e-9
        assert abs(stepped.u11 / stepped.cd_product - 1.0) <= 1e-9

    def test_report_round_trip(self):
        report = det_formula_sl2_check(3, 1, 2.0, 1.7, 0.8)
        data = report.to_json()
        assert data["passed"] is True
        assert data["periodicity_error"] == report.periodicity_error

    def test_empty_weight_space_rejected(self):
        with pytest.raises(ValueError):
            det_formula_sl2_check(1, 2, 2.0, 1.7, 0.8)

    def test_nonpositive_coordinate_rejected(self):
        with pytest.raises(ValueError):
            det_formula_sl2_check(3, 1, 2.0, 1.7, -1.0)
