"""Ladder factorization: exactness of the rational factors and their potentials.

The factors of a catalog model are rational with explicitly located roots, so
most assertions here are tight (1e-10 or better) rather than statistical.
"""

import math

import numpy as np
import pytest

from levy_expfun import LevyModel
from levy_expfun.errors import UnsupportedModel
from levy_expfun.wienerhopf import (
    LadderFactors,
    PotentialMeasure,
    RationalFactor,
    factorization_residual,
    factorize,
    potential_transform_residual,
    potential_U,
    supremum_law,
    vigon_tail,
)


def catalog(dufresne, kou, killed_unit, jumpy_sub_model):
    sn = LevyModel.spectrally_negative_bm(0.25, -0.5, 1.0, 2.0, 1.5)
    return [killed_unit, dufresne, sn, kou, jumpy_sub_model]


# -- factor structure ---------------------------------------------------------


def test_dufresne_factors_are_linear(dufresne):
    f = factorize(dufresne)
    # kappa(lam) = 1 + lam (Exp(1) supremum), kappahat(lam) = 2 lam
    assert f.ascending.scale == pytest.approx(1.0)
    assert f.ascending.roots == (1.0,)
    assert f.ascending.poles == ()
    assert f.descending.scale == pytest.approx(2.0)
    assert f.descending.roots == (0.0,)
    assert f.kill_up == pytest.approx(1.0)
    assert f.kill_down == 0.0


def test_killed_drift_factors(killed_unit):
    f = factorize(killed_unit)
    # no upward motion at all: kappa is the constant q
    assert f.ascending.roots == ()
    assert f.kill_up == pytest.approx(1.0)
    assert f.descending.roots == (1.0,)


def test_kou_factor_roots_frozen(kou):
    f = factorize(kou)
    assert f.ascending.scale == pytest.approx(1.0)
    assert np.allclose(f.ascending.roots, (1.1445657553268462, 4.190966074920854), atol=1e-12)
    assert f.ascending.poles == (2.0,)
    assert f.descending.scale == pytest.approx(0.5)
    assert np.allclose(f.descending.roots, (0.0, 3.3355318302477004), atol=1e-12)
    assert f.descending.poles == (3.0,)
    assert f.kill_up == pytest.approx(2.3984181255454877, abs=1e-12)
    assert f.kill_down == 0.0


def test_spectrally_negative_factors_frozen():
    sn = LevyModel.spectrally_negative_bm(0.25, -0.5, 1.0, 2.0, 1.5)
    f = factorize(sn)
    assert f.ascending.roots == pytest.approx((2.2781830853666194,), abs=1e-12)
    assert f.ascending.poles == ()
    assert np.allclose(f.descending.roots, (0.12403597045716504, 2.6541471149094544), atol=1e-12)
    assert f.descending.poles == (1.5,)


def test_product_reproduces_exponent(kou, dufresne):
    for m in (kou, dufresne):
        f = factorize(m)
        lo, hi = m.mgf_strip
        if math.isinf(lo) or math.isinf(hi):
            lo, hi = -2.6, 1.0
        beta = np.linspace(lo + 0.1, hi - 0.1, 23)
        assert np.allclose(f.phi_product(beta), m.laplace_exponent(beta), atol=1e-10)


def test_residuals_small_across_catalog(dufresne, kou, killed_unit, jumpy_sub_model):
    for m in catalog(dufresne, kou, killed_unit, jumpy_sub_model):
        f = factorize(m)
        assert factorization_residual(m, f) < 1e-10
        assert potential_transform_residual(m, f) < 1e-9


def test_derivative_matches_finite_difference(kou):
    f = factorize(kou)
    h = 1e-6
    for lam in (0.3, 1.0, 2.5):
        fd = (f.ascending(lam + h) - f.ascending(lam - h)) / (2 * h)
        assert f.ascending.deriv(lam) == pytest.approx(float(fd), rel=1e-7)


def test_ladder_as_subordinator(kou):
    f = factorize(kou)
    sub = f.ascending.as_subordinator()
    # phi of the extracted subordinator must agree with kappa itself
    lam = np.linspace(0.0, 6.0, 13)
    assert np.allclose(sub.phi(lam), np.real(f.ascending(lam)), atol=1e-10)
    assert sub.kill == pytest.approx(f.kill_up)


def test_mean_ladder_height(dufresne):
    f = factorize(dufresne)
    # descending exponent 2*lam: pure drift 2, no jumps
    assert f.descending.mean_ladder_height() == pytest.approx(2.0)
    assert f.descending.drift == pytest.approx(2.0)


# -- potentials and derived measures -----------------------------------------


def test_potential_laplace_is_reciprocal(kou):
    f = factorize(kou)
    v = f.ascending.potential()
    lam = np.linspace(0.2, 8.0, 17)
    assert np.allclose(v.laplace(lam), 1.0 / np.real(f.ascending(lam)), atol=1e-12)


def test_potential_mass_vs_kill(kou):
    f = factorize(kou)
    v = f.ascending.potential()
    # total mass of V_H is 1/kappa(0)
    assert v.mass == pytest.approx(1.0 / f.kill_up, abs=1e-12)


def test_supremum_law_is_probability(dufresne, kou):
    for m in (dufresne, kou):
        law = supremum_law(m)
        assert law.mass == pytest.approx(1.0, abs=1e-12)
        y = np.linspace(0.0, 10.0, 50)
        assert np.all(law.density(y) >= 0.0)


def test_dufresne_supremum_is_exponential(dufresne):
    law = supremum_law(dufresne)
    assert law.atom == pytest.approx(0.0)
    assert law.weights == pytest.approx((1.0,))
    assert law.rates == pytest.approx((1.0,))


def test_supremum_requires_kill_up(kou):
    # q = 0 with negative mean still has kill_up > 0; drifting up does not
    up = LevyModel.brownian_drift(0.0, 1.0, 1.0)
    with pytest.raises(UnsupportedModel):
        supremum_law(up)
    supremum_law(kou)


def test_two_sided_potential_transform(kou):
    u = potential_U(kou)
    beta = np.array([-1.2, -0.3, 0.4, 0.9])
    assert np.allclose(u.moment_transform(beta), 1.0 / kou.laplace_exponent(beta), atol=1e-10)


def test_vigon_tail_collapses_to_scaled_jump_tail(kou):
    f = factorize(kou)
    x = np.array([0.5, 1.0, 2.0])
    scale = float(f.descending.potential().laplace(2.0))
    assert np.allclose(vigon_tail(kou, x, f), np.exp(-2.0 * x) * scale, atol=1e-12)
    assert vigon_tail(kou, 0.5, f) == pytest.approx(0.34474487, abs=1e-7)


def test_vigon_tail_zero_without_positive_jumps(dufresne):
    assert vigon_tail(dufresne, 1.0) == 0.0


def test_potential_measure_guards():
    with pytest.raises(Exception):
        PotentialMeasure(atom=-0.5, weights=(), rates=())
    with pytest.raises(ValueError):
        PotentialMeasure(atom=0.0, weights=(1.0,), rates=())


def test_lebesgue_component_has_infinite_mass(kou):
    f = factorize(kou)
    # unkilled descending ladder of a drifting model: rate-0 component
    v = f.descending.potential()
    assert 0.0 in v.rates
    assert v.mass == math.inf
