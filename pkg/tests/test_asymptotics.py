"""Tail regimes: the tilted root, its constant, and both flanks of the law."""

import math

import numpy as np
import pytest

from levy_expfun import LevyModel, ExponentialJumps
from levy_expfun import asymptotics as asy
from levy_expfun.errors import (
    DivergentMoment,
    HypothesisFailure,
    InfiniteTiltedMean,
    NoRoot,
    OutsideDomain,
    UnsupportedModel,
)
from levy_expfun.density import solve_renewal
from levy_expfun.montecarlo import sample_I_closed
from levy_expfun.wienerhopf import factorize


class TestCramerRoot:
    def test_dufresne_root_exact(self, dufresne):
        assert abs(asy.cramer_root(dufresne) - 1.0) < 1e-12

    def test_kou_root_frozen(self, kou):
        assert asy.cramer_root(kou) == pytest.approx(1.1445657553268462, abs=1e-12)

    def test_root_is_a_zero_of_the_exponent(self, kou):
        theta = asy.cramer_root(kou)
        assert abs(kou.laplace_exponent(theta)) < 1e-12

    def test_no_root_for_light_upper_tail(self, killed_unit, jumpy_sub_model):
        # both models have no upward jumps: the exponent stays positive
        for m in (killed_unit, jumpy_sub_model):
            with pytest.raises(NoRoot):
                asy.cramer_root(m)

    def test_tilted_mean(self, dufresne):
        # -Phi'(1) e^{-Phi(1)} with Phi(1) = 0, Phi'(1) = -2
        assert asy.tilted_mean(dufresne, 1.0) == pytest.approx(2.0, abs=1e-12)

    def test_tilted_mean_outside_strip(self, kou):
        with pytest.raises(InfiniteTiltedMean):
            asy.tilted_mean(kou, 2.0)


class TestCramerConstant:
    def test_dufresne_constant_exact(self, dufresne):
        report = asy.cramer_constant(dufresne)
        assert report.kind == "Cramer"
        assert report.exponent == pytest.approx(1.0, abs=1e-12)
        assert abs(report.constant - 0.5) < 1e-10
        assert report.meta["tilted_mean"] == pytest.approx(2.0, abs=1e-12)
        assert report.meta["rate_constant"] == pytest.approx(2.0, abs=1e-9)

    def test_ladder_route_agrees(self, dufresne, kou):
        # kappa'(-theta) * kappahat(theta) must equal -Phi'(theta); Kou's
        # theta - 1 is fractional, so its moment needs an explicit source
        est = solve_renewal(kou, 0.05, 20.0)
        for m, src in ((dufresne, None), (kou, est)):
            report = asy.cramer_constant(m, moment_source=src)
            assert report.meta["ladder_route_gap"] < 1e-12

    def test_comparison_against_samples(self, dufresne):
        draws = sample_I_closed(dufresne, 200_000, seed=107)
        report = asy.cramer_constant(dufresne, samples=draws.values)
        comp = report.comparison
        assert comp is not None
        ratios = np.asarray(comp["ratio"], dtype=float)
        assert np.all(ratios > 0.8) and np.all(ratios < 1.2)

    def test_second_order_coefficient(self, dufresne):
        out = asy.second_order_coefficient(dufresne)
        assert out["theta"] == pytest.approx(1.0, abs=1e-12)
        assert out["constant"] == pytest.approx(0.5, abs=1e-10)
        # theta^2 C / phi_hat(theta + 1) with phi_hat(2) = 4
        assert out["phi_hat_at_theta_plus_1"] == pytest.approx(4.0, abs=1e-10)
        assert out["correction"] == pytest.approx(0.125, abs=1e-10)

    def test_second_order_needs_spectral_negativity(self, kou):
        with pytest.raises(UnsupportedModel):
            asy.second_order_coefficient(kou)


class TestConvolutionEquivalent:
    def test_needs_positive_jumps(self, dufresne):
        with pytest.raises(HypothesisFailure):
            asy.convolution_equiv_tail(dufresne, 0.0)

    def test_gate_reports_class_boundary(self, kou):
        # exponential jump tails sit on the boundary of the required class,
        # so the honest default refuses to report a number
        with pytest.raises(HypothesisFailure, match="boundary"):
            asy.convolution_equiv_tail(kou, 0.0)

    def test_alpha_below_root_refused(self, kou):
        with pytest.raises(HypothesisFailure, match="theta"):
            asy.convolution_equiv_tail(kou, 1.5)

    def test_ungated_alpha_beyond_domain(self, kou):
        # past the root the log-moment flips sign: no finite constant exists
        with pytest.raises(OutsideDomain):
            asy.convolution_equiv_tail(kou, 1.5, gate=False)

    def test_ungated_alpha_positive_formula(self, kou):
        report = asy.convolution_equiv_tail(kou, 0.5, gate=False, moment_source=0.9)
        assert report.kind == "ConvolutionEquivalent"
        phi = kou.laplace_exponent(0.5)
        assert report.constant == pytest.approx(0.9 * 1.0 / (2.0 * phi), rel=1e-12)

    def test_ungated_alpha_zero_unkilled(self, kou):
        report = asy.convolution_equiv_tail(kou, 0.0, gate=False)
        assert report.kind == "Subexponential"
        assert report.exponent == pytest.approx(2.0)
        # intensity / (|mean| * rate^2)
        assert report.constant == pytest.approx(0.1875, abs=1e-12)

    def test_ungated_alpha_zero_killed(self):
        m = LevyModel.double_exp(1.0, -1.5, 1.0, 1.0, 2.0, 1.0, 3.0)
        report = asy.convolution_equiv_tail(m, 0.0, gate=False)
        # intensity / rate for the killed branch
        assert report.constant == pytest.approx(0.5, abs=1e-12)


class TestLeftTail:
    def test_killed_models_are_linear_at_zero(self, killed_unit, killed_two):
        r1 = asy.left_tail(killed_unit)
        assert r1.kind == "LeftTailKilled"
        assert r1.exponent == pytest.approx(1.0)
        assert r1.constant == pytest.approx(1.0)
        assert asy.left_tail(killed_two).constant == pytest.approx(2.0)

    def test_gaussian_flank_refused(self, dufresne):
        with pytest.raises(HypothesisFailure, match="Gaussian"):
            asy.left_tail(dufresne)

    def test_kou_left_tail_frozen(self, kou):
        report = asy.left_tail(kou)
        assert report.kind == "LeftTailUnkilled"
        assert report.exponent == pytest.approx(3.0)
        assert report.constant == pytest.approx(169.0 / 72.0, abs=1e-12)
        assert report.meta["moment"] == pytest.approx(169.0 / 18.0, abs=1e-12)
        assert report.meta["power"] == pytest.approx(4.0)
        assert report.meta["power_prefactor"] == pytest.approx(169.0 / 216.0, abs=1e-12)

    def test_no_downward_motion_unsupported(self):
        m = LevyModel(
            family="DoubleExpJumps",
            q=1.0,
            drift=-2.0,
            gaussian=0.0,
            pos_jumps=ExponentialJumps(1.0, 2.0),
            neg_jumps=None,
        )
        with pytest.raises(UnsupportedModel):
            asy.left_tail(m)

    def test_comparison_against_samples(self, killed_unit):
        draws = sample_I_closed(killed_unit, 200_000, seed=109)
        report = asy.left_tail(killed_unit, samples=draws.values)
        ratios = np.asarray(report.comparison["ratio"], dtype=float)
        assert np.all(np.abs(ratios - 1.0) < 0.1)


class TestTransferConstants:
    def test_dufresne_alpha_one(self, dufresne):
        tc = asy.rv_transfer_constant(dufresne, 1.0)
        assert tc.at_infinity == pytest.approx(0.5, abs=1e-12)
        assert tc.at_zero == pytest.approx(1.0, abs=1e-12)
        assert not tc.degenerate_at_infinity
        assert tc.degenerate_at_zero
        assert tc.meta["down_route"] == "closed"

    def test_dufresne_alpha_half_closed_form(self, dufresne):
        tc = asy.rv_transfer_constant(dufresne, 0.5)
        # R_up ~ Exp(1) and I_down is the constant 1/2
        assert tc.at_zero == pytest.approx(math.gamma(1.5), abs=1e-12)
        assert tc.at_infinity == pytest.approx(math.gamma(1.5) / math.sqrt(2.0), abs=1e-12)

    def test_kou_goes_through_the_sampled_route(self, kou):
        # a fractional order has no closed descending-ladder moment here
        alpha = asy.cramer_root(kou)
        tc = asy.rv_transfer_constant(kou, alpha, n=20_000, seed=11)
        assert tc.meta["down_route"] == "sampled"
        assert tc.at_infinity > 0 and tc.at_zero > 0


class TestEmpiricalDiagnostics:
    def test_hill_index_on_known_tail(self):
        rng = np.random.default_rng(7)
        # Pareto with index 2
        values = (1.0 - rng.random(200_000)) ** -0.5
        assert asy.hill_index(values) == pytest.approx(2.0, rel=0.1)

    def test_hill_index_on_dufresne(self, dufresne):
        draws = sample_I_closed(dufresne, 100_000, seed=101)
        assert asy.hill_index(draws.values) == pytest.approx(1.0, rel=0.1)

    def test_excess_distribution_matches_pareto_form(self, dufresne):
        draws = sample_I_closed(dufresne, 100_000, seed=101)
        t = float(np.quantile(draws.values, 0.95))
        out = asy.excess_distribution(draws.values, 1.0, t)
        gap = np.max(np.abs(np.asarray(out["empirical"]) - np.asarray(out["predicted"])))
        assert gap < 0.02

    def test_report_validation(self):
        with pytest.raises(OutsideDomain):
            asy.TailReport(kind="Cramer", exponent=-1.0, constant=1.0, validity="t -> inf")
        with pytest.raises(DivergentMoment):
            asy.TailReport(kind="Cramer", exponent=1.0, constant=float("inf"), validity="t -> inf")
