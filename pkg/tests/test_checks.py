"""End-to-end identity verification with fixed seeds at the 1% KS level."""

import json
import math

import pytest

from levy_expfun import checks
from levy_expfun.checks import (
    IDENTITIES,
    check_identity,
    control_check,
    ks_critical_1pct,
    run_all,
)
from levy_expfun.errors import UnsupportedIdentity


class TestCriticalValue:
    def test_formula(self):
        assert ks_critical_1pct(100, 400) == pytest.approx(
            1.6276 * math.sqrt(500 / 40_000), abs=1e-15
        )

    def test_symmetric_in_sample_sizes(self):
        assert ks_critical_1pct(1_000, 2_000) == ks_critical_1pct(2_000, 1_000)


class TestKilledDriftIdentities:
    def test_run_all_passes(self, killed_unit):
        reports, skipped = run_all(killed_unit, 20_000, seed=7)
        # the size-biased factor needs q = 0, everything else is supported
        assert set(skipped) == {"Undershoot_cor2"}
        assert "infinite lifetime" in skipped["Undershoot_cor2"]
        assert len(reports) == 5
        for rep in reports:
            assert rep.verdict == "pass", rep.identity_id
            assert rep.ks_stat < rep.ks_critical_1pct
            assert all(abs(z) < 4 for _, z in rep.mellin_z)

    def test_repeatable(self, killed_unit):
        a = check_identity("BY_exponential", killed_unit, 5_000, seed=3)
        b = check_identity("BY_exponential", killed_unit, 5_000, seed=3)
        assert a.ks_stat == b.ks_stat
        assert a.mellin_z == b.mellin_z

    def test_seed_moves_the_draws(self, killed_unit):
        a = check_identity("BY_exponential", killed_unit, 5_000, seed=3)
        b = check_identity("BY_exponential", killed_unit, 5_000, seed=4)
        assert a.ks_stat != b.ks_stat


class TestBrownianIdentities:
    def test_factorization(self, dufresne):
        rep = check_identity("PPS_fact", dufresne, 10_000, seed=7)
        assert rep.verdict == "pass"
        assert rep.meta["down_scheme"] == "closed"

    def test_undershoot(self, dufresne):
        rep = check_identity("Undershoot_cor2", dufresne, 10_000, seed=7)
        assert rep.verdict == "pass"
        # no downward jumps, so the stationary undershoot is the atom at zero
        assert rep.meta["undershoot_atom"] == 1.0
        assert rep.meta["ess"] > 1_000


class TestJumpyIdentities:
    def test_exponential_product(self, jumpy_sub_model):
        rep = check_identity("BY_exponential", jumpy_sub_model, 10_000, seed=11)
        assert rep.verdict == "pass"
        assert rep.meta["sigma"] == "model"
        assert rep.meta["down_scheme"] == "path"


class TestGuards:
    def test_identity_names_are_stable(self):
        assert IDENTITIES == (
            "PPS_fact",
            "PPS_sup",
            "BY_exponential",
            "Undershoot_cor2",
            "J_corollary2",
            "Perpetuity_consistency",
        )

    def test_unknown_identity(self, killed_unit):
        with pytest.raises(UnsupportedIdentity):
            check_identity("Not_an_identity", killed_unit, 100, seed=0)

    def test_undershoot_needs_unkilled_model(self, killed_unit):
        with pytest.raises(UnsupportedIdentity, match="infinite lifetime"):
            check_identity("Undershoot_cor2", killed_unit, 100, seed=0)


class TestControl:
    def test_wrong_law_is_caught(self, killed_unit):
        rep = control_check(killed_unit, 20_000, seed=5)
        assert rep.identity_id == "Control_wrong_law"
        assert rep.verdict == "fail"
        assert rep.ks_stat > rep.ks_critical_1pct


class TestReportSurface:
    def test_as_dict_round_trips_through_json(self, killed_unit):
        rep = check_identity("BY_exponential", killed_unit, 2_000, seed=1)
        back = json.loads(json.dumps(rep.as_dict()))
        assert back["identity_id"] == "BY_exponential"
        assert back["n"] == 2_000
        assert back["verdict"] == "pass"
        assert set(back["mellin_z"][0]) == {"s", "z"}
