"""Exercises the command-line surface in-process through run(argv)."""

import json
import math

import pytest

from levy_expfun.cli import run
from levy_expfun.models import LevyModel


def write_model(tmp_path, model, name="model.json") -> str:
    path = tmp_path / name
    path.write_text(json.dumps(model.to_dict()))
    return str(path)


@pytest.fixture
def kd_file(tmp_path, killed_unit):
    return write_model(tmp_path, killed_unit, "kd.json")


@pytest.fixture
def kou_file(tmp_path, kou):
    return write_model(tmp_path, kou, "kou.json")


@pytest.fixture
def duf_file(tmp_path, dufresne):
    return write_model(tmp_path, dufresne, "duf.json")


class TestFactorize:
    def test_text_report(self, kd_file, capsys):
        assert run(["factorize", "--model", kd_file]) == 0
        out = capsys.readouterr().out
        assert "kappa" in out and "kappahat" in out
        assert "factorization residual" in out

    def test_json_report(self, kou_file, capsys):
        assert run(["factorize", "--model", kou_file, "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        asc = payload["ascending"]
        assert asc["roots"][0] == pytest.approx(1.1445657553268462, abs=1e-12)
        assert asc["roots"][1] == pytest.approx(4.190966074920854, abs=1e-12)
        assert asc["poles"] == [2.0]
        assert payload["descending"]["poles"] == [3.0]
        assert payload["factorization_residual"] < 1e-10


class TestSimulate:
    def test_csv_format_and_range(self, kd_file, tmp_path, capsys):
        out = tmp_path / "draws.csv"
        code = run(
            ["simulate", "--model", kd_file, "--n", "60", "--seed", "9", "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# model=")
        assert "scheme=" in lines[1] and "seed=9" in lines[1]
        values = [float(s) for s in lines[2:]]
        assert len(values) == 60
        # a unit-killed unit-drift integral never leaves (0, 1)
        assert all(0.0 < v < 1.0 for v in values)

    def test_byte_identical_reruns(self, kd_file, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["simulate", "--model", kd_file, "--n", "100", "--seed", "5"]
        assert run(argv + ["--out", str(a)]) == 0
        assert run(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_perpetuity_scheme(self, kd_file, capsys):
        code = run(
            ["simulate", "--model", kd_file, "--scheme", "perpetuity", "--n", "50", "--seed", "2"]
        )
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert "scheme=perpetuity" in lines[1]
        assert len(lines) == 52

    def test_bad_n(self, kd_file, capsys):
        assert run(["simulate", "--model", kd_file, "--n", "0"]) == 1
        assert "error" in capsys.readouterr().err


class TestDensity:
    def test_uniform_window(self, kd_file, tmp_path):
        out = tmp_path / "dens.csv"
        code = run(
            [
                "density",
                "--model",
                kd_file,
                "--tmin",
                "0.001",
                "--tmax",
                "0.999",
                "--points",
                "40",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[3] == "t,k,tail"
        rows = [line.split(",") for line in lines[4:]]
        assert len(rows) == 40
        # the law is uniform on (0, 1): density one, tail 1 - t
        for t_s, k_s, tail_s in rows:
            t, k, tail = float(t_s), float(k_s), float(tail_s)
            assert abs(k - 1.0) < 1e-3
            assert abs(tail - (1.0 - t)) < 1e-3

    def test_deterministic_output(self, kd_file, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["density", "--model", kd_file, "--tmin", "0.01", "--tmax", "0.9"]
        assert run(argv + ["--out", str(a)]) == 0
        assert run(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_bad_window(self, kd_file, capsys):
        assert run(["density", "--model", kd_file, "--tmin", "0.5", "--tmax", "0.1"]) == 1
        assert "error" in capsys.readouterr().err


class TestMoments:
    def test_integer_orders(self, kd_file, capsys):
        assert run(["moments", "--model", kd_file, "--beta", "1,2,3"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["1"] == pytest.approx(0.5, abs=1e-12)
        assert payload["2"] == pytest.approx(1.0 / 3.0, abs=1e-12)
        assert payload["3"] == pytest.approx(0.25, abs=1e-12)

    def test_negative_orders(self, kou_file, capsys):
        assert run(["moments", "--model", kou_file, "--beta", "-3"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["-3"] == pytest.approx(169.0 / 18.0, rel=1e-12)

    def test_fractional_with_anchor(self, duf_file, capsys):
        anchor = repr(math.sqrt(2.0) * math.gamma(1.5))
        assert run(["moments", "--model", duf_file, "--beta", "0.5", "--anchor", anchor]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["0.5"] == pytest.approx(2**-0.5 * math.gamma(0.5), rel=1e-10)

    def test_fractional_without_anchor(self, duf_file, capsys):
        assert run(["moments", "--model", duf_file, "--beta", "0.5"]) == 1
        assert "anchor" in capsys.readouterr().err

    def test_mixed_residue_classes(self, duf_file, capsys):
        code = run(["moments", "--model", duf_file, "--beta", "0.5,0.25", "--anchor", "1.0"])
        assert code == 1
        assert "residue class" in capsys.readouterr().err

    def test_unparseable_orders(self, kd_file, capsys):
        assert run(["moments", "--model", kd_file, "--beta", "one"]) == 1


class TestTail:
    def test_cramer_closed_form(self, duf_file, capsys):
        assert run(["tail", "--model", duf_file, "--mode", "cramer", "--n", "0"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["kind"] == "Cramer"
        assert payload["exponent"] == pytest.approx(1.0, abs=1e-12)
        assert payload["constant"] == pytest.approx(0.5, abs=1e-10)
        assert payload["comparison"] is None

    def test_cramer_with_samples(self, duf_file, capsys):
        code = run(["tail", "--model", duf_file, "--mode", "cramer", "--n", "20000", "--seed", "3"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["comparison"] is not None

    def test_cramer_without_root(self, kd_file, capsys):
        # no upward movement, so there is no tilt root to report
        assert run(["tail", "--model", kd_file, "--mode", "cramer", "--n", "0"]) == 2
        assert "numerical failure" in capsys.readouterr().err

    def test_left_tail_killed(self, kd_file, capsys):
        assert run(["tail", "--model", kd_file, "--mode", "lefttail", "--n", "0"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert "LeftTail" in payload["kind"]
        assert payload["constant"] == pytest.approx(1.0, abs=1e-12)

    def test_convequiv_display(self, kou_file, capsys):
        assert run(["tail", "--model", kou_file, "--mode", "convequiv", "--n", "0"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["kind"] == "Subexponential"
        assert payload["constant"] == pytest.approx(0.1875, abs=1e-12)
        assert "trend monitoring" in payload["validity"]


class TestCheck:
    def test_single_identity_json(self, kd_file, capsys):
        code = run(
            ["check", "--model", kd_file, "--identity", "by_exponential", "--n", "2000", "--seed", "1"]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["identity_id"] == "BY_exponential"
        assert payload["verdict"] == "pass"

    def test_all_matrix_csv(self, kd_file, tmp_path):
        out = tmp_path / "matrix.csv"
        code = run(
            ["check", "--model", kd_file, "--all", "--n", "2000", "--seed", "1", "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[1] == "identity,status,ks_stat,ks_critical_1pct,max_abs_z,note"
        rows = {line.split(",")[0]: line for line in lines[2:]}
        assert len(rows) == 6
        for ident in ("PPS_fact", "PPS_sup", "BY_exponential", "J_corollary2"):
            assert rows[ident].split(",")[1] == "pass"
        assert rows["Undershoot_cor2"].split(",")[1] == "skipped"
        assert "infinite lifetime" in rows["Undershoot_cor2"]

    def test_all_matrix_deterministic(self, kd_file, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["check", "--model", kd_file, "--all", "--n", "1000", "--seed", "4"]
        assert run(argv + ["--out", str(a)]) == 0
        assert run(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_unknown_identity(self, kd_file, capsys):
        assert run(["check", "--model", kd_file, "--identity", "nope", "--n", "100"]) == 1
        assert "unknown identity" in capsys.readouterr().err

    def test_needs_identity_or_all(self, kd_file, capsys):
        assert run(["check", "--model", kd_file, "--n", "100"]) == 1


class TestErrorPaths:
    def test_missing_model_file(self, tmp_path, capsys):
        code = run(["factorize", "--model", str(tmp_path / "absent.json")])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_malformed_model_file(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert run(["factorize", "--model", str(path)]) == 1

    def test_inadmissible_model(self, tmp_path, capsys):
        # unkilled with positive mean: the integral diverges
        drifting_up = LevyModel.brownian_drift(0.0, 2.0, 1.0)
        path = write_model(tmp_path, drifting_up, "up.json")
        assert run(["factorize", "--model", path]) == 1

    def test_unknown_subcommand(self, capsys):
        assert run(["frobnicate", "--model", "x.json"]) == 1

    def test_no_arguments(self, capsys):
        assert run([]) == 1
