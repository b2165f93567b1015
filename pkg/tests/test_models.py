"""Model catalog: exponents, strips, admissibility, and the JSON round trip."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from levy_expfun import ExponentialJumps, LevyModel, SubordinatorModel
from levy_expfun.errors import ModelFileError, UnsupportedModel
from levy_expfun.models import model_label


class TestLaplaceExponent:
    def test_dufresne_is_two_beta_one_minus_beta(self, dufresne):
        beta = np.linspace(-3.0, 0.99, 37)
        expected = 2.0 * beta * (1.0 - beta)
        assert np.allclose(dufresne.laplace_exponent(beta), expected, atol=1e-12)

    def test_killed_drift_exponent(self, killed_unit):
        # Phi(beta) = q - drift*beta = 1 + beta, so E[I] = 1/Phi(1) = 1/2
        for beta in (-2.0, -0.5, 0.0, 1.0, 7.5):
            assert killed_unit.laplace_exponent(beta) == pytest.approx(1.0 + beta)

    def test_derivative_matches_finite_difference(self, kou):
        h = 1e-6
        for beta in (-1.0, 0.0, 0.5, 1.5):
            fd = (kou.laplace_exponent(beta + h) - kou.laplace_exponent(beta - h)) / (2 * h)
            assert kou.laplace_exponent_deriv(beta) == pytest.approx(fd, rel=1e-7)

    def test_mean_is_minus_derivative_at_zero(self, kou, dufresne):
        assert kou.mean == pytest.approx(-kou.laplace_exponent_deriv(0.0), abs=1e-12)
        assert kou.mean == pytest.approx(-4.0 / 3.0, abs=1e-14)
        assert dufresne.mean == -2.0

    def test_char_exponent_consistent_with_laplace(self, kou):
        # Phi(beta) = Psi(-i*beta) inside the strip
        for beta in (-0.7, 0.3, 1.2):
            psi = complex(kou.char_exponent(complex(0.0, -beta)))
            assert psi.real == pytest.approx(kou.laplace_exponent(beta), abs=1e-12)
            assert abs(psi.imag) < 1e-12

    def test_strip_bounds(self, kou, dufresne, jumpy_sub_model):
        assert kou.mgf_strip == (-3.0, 2.0)
        assert dufresne.mgf_strip == (-math.inf, math.inf)
        assert jumpy_sub_model.mgf_strip == (-2.0, math.inf)

    def test_moment_domain(self, dufresne, kou):
        assert dufresne.in_moment_domain(0.5)
        assert not dufresne.in_moment_domain(1.0)  # Phi(1) = 0
        assert not dufresne.in_moment_domain(-0.5)
        assert kou.in_moment_domain(1.0)
        assert not kou.in_moment_domain(2.0)


class TestAdmissibility:
    def test_killed_models_always_admissible(self, killed_unit):
        assert killed_unit.admissible()

    def test_zero_kill_needs_negative_mean(self):
        drifting_up = LevyModel.brownian_drift(0.0, 1.0, 1.0)
        assert not drifting_up.admissible()
        with pytest.raises(UnsupportedModel):
            drifting_up.require_admissible()

    def test_catalog_fixtures_admissible(self, dufresne, kou, jumpy_sub_model):
        for m in (dufresne, kou, jumpy_sub_model):
            m.require_admissible()


class TestJumpStructure:
    def test_exponential_tail(self):
        jumps = ExponentialJumps(intensity=2.0, rate=3.0)
        x = np.array([0.0, 0.5, 1.0])
        assert np.allclose(jumps.tail(x), 2.0 * np.exp(-3.0 * x))
        assert jumps.mean == pytest.approx(2.0 / 3.0)

    def test_jump_params_must_be_positive(self):
        with pytest.raises(UnsupportedModel):
            ExponentialJumps(intensity=-1.0, rate=2.0)
        with pytest.raises(UnsupportedModel):
            ExponentialJumps(intensity=1.0, rate=0.0)

    def test_model_tails(self, kou):
        x = np.array([0.5, 1.0])
        assert np.allclose(kou.jump_tail_pos(x), 1.0 * np.exp(-2.0 * x))
        assert np.allclose(kou.jump_tail_neg(x), 1.0 * np.exp(-3.0 * x))

    def test_linear_term_includes_small_jump_compensation(self, jumpy_sub_model):
        # a = -drift - int_{|x|<1} x Pi(dx); frozen for Exp(2) jumps at rate 1
        assert jumpy_sub_model.a == pytest.approx(1.296997075145081, abs=1e-12)


class TestSubordinatorModel:
    def test_phi_values(self, drift_sub, jumpy_sub):
        # phi(s) = kill + drift*s + intensity*s/(rate+s)
        assert drift_sub.phi(3.0) == pytest.approx(4.0)
        assert jumpy_sub.phi(2.0) == pytest.approx(0.5 + 2.0 + 2.0 / 4.0)

    def test_phi_deriv(self, jumpy_sub):
        h = 1e-6
        fd = (jumpy_sub.phi(1.0 + h) - jumpy_sub.phi(1.0 - h)) / (2 * h)
        assert jumpy_sub.phi_deriv(1.0) == pytest.approx(fd, rel=1e-8)

    def test_as_subordinator_round_trip(self, jumpy_sub, jumpy_sub_model):
        back = jumpy_sub_model.as_subordinator()
        assert back.kill == jumpy_sub.kill
        assert back.drift == jumpy_sub.drift
        assert back.jumps == jumpy_sub.jumps

    def test_as_subordinator_rejects_two_sided(self, kou):
        with pytest.raises(UnsupportedModel):
            kou.as_subordinator()


class TestSerialization:
    def test_round_trip_all_families(self, killed_unit, dufresne, kou, jumpy_sub_model):
        sn = LevyModel.spectrally_negative_bm(0.25, -0.5, 1.0, 2.0, 1.5)
        for m in (killed_unit, dufresne, kou, jumpy_sub_model, sn):
            again = LevyModel.from_dict(m.to_dict())
            assert again == m

    def test_file_round_trip(self, tmp_path, kou):
        path = tmp_path / "kou.json"
        kou.to_file(path)
        assert LevyModel.from_file(path) == kou
        raw = json.loads(path.read_text())
        assert set(raw) == {"family", "q", "a", "Q", "jump_params"}

    def test_unknown_field_rejected(self, tmp_path, killed_unit):
        data = killed_unit.to_dict()
        data["drift"] = -1.0
        with pytest.raises(ModelFileError, match="drift"):
            LevyModel.from_dict(data)

    def test_unknown_family_rejected(self):
        with pytest.raises(ModelFileError):
            LevyModel.from_dict(
                {"family": "StableProcess", "q": 0.0, "a": 1.0, "Q": 0.0, "jump_params": {}}
            )

    def test_inconsistent_linear_term_rejected(self, jumpy_sub_model):
        data = jumpy_sub_model.to_dict()
        data["a"] = data["a"] + 1e-3
        with pytest.raises(ModelFileError, match="linear coefficient"):
            LevyModel.from_dict(data)

    def test_neg_subordinator_kill_must_match(self, jumpy_sub_model):
        data = jumpy_sub_model.to_dict()
        data["q"] = data["q"] + 0.25
        with pytest.raises(ModelFileError):
            LevyModel.from_dict(data)

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ModelFileError):
            LevyModel.from_file(path)

    def test_describe_reports_mean_and_admissibility(self, dufresne):
        desc = dufresne.describe()
        assert desc["family"] == "BrownianDrift"
        assert desc["mean"] == -2.0
        assert desc["admissible"] is True

    def test_labels(self, killed_unit, kou):
        assert model_label(killed_unit) == "KilledDrift q=1 drift=-1"
        assert "pos=(1,2)" in model_label(kou)

    def test_shipped_model_files_load(self):
        root = Path(__file__).resolve().parent.parent / "models"
        files = sorted(root.glob("*.json"))
        assert len(files) == 5
        for path in files:
            m = LevyModel.from_file(path)
            m.require_admissible()
