import csv
import io
import json

import pytest

from twomode import __version__
from twomode.cli import main, parse_overrides
from twomode.errors import InvalidInputError, PoleError
from twomode.params import resolve_settings
from twomode.sweeps import check_delta_range, density_grid, fig3_sweep, format_value


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    header = [l for l in text.splitlines() if l.startswith("#")]
    body = [l for l in text.splitlines() if not l.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    return header, rows


class TestFormatting:
    @pytest.mark.parametrize("value, text", [
        (1.0, "1.00000000000e+00"), (-0.0, "0.00000000000e+00"), (float("nan"), "nan"),
        (3, "3"), (True, "true"), ("abc", "abc"), (123456789.123456789, "1.23456789123e+08"),
    ])
    def test_format_value(self, value, text):
        assert format_value(value) == text

    def test_overrides(self):
        assert parse_overrides(["a=1", "b = 2e3"]) == {"a": 1.0, "b": 2000.0}
        for bad in (["a"], ["=1"], ["a=x"]):
            with pytest.raises(InvalidInputError):
                parse_overrides(bad)

    def test_density_grid(self):
        g = density_grid(1e12, 1e14, 2)
        assert g == pytest.approx([1e12, 10**12.5, 1e13, 10**13.5, 1e14], rel=1e-12)
        with pytest.raises(InvalidInputError):
            density_grid(1e14, 1e12, 2)

    def test_delta_range(self):
        check_delta_range(-0.3, 0.3)
        with pytest.raises(PoleError, match="safe range"):
            check_delta_range(-0.5, 0.3)


class TestFig3:
    def test_shape(self, capsys):
        code, out, _ = run(capsys, "fig3", "--n-points", "21", "--gamma2-frac", "0.05", "--window", "10")
        assert code == 0
        header, rows = parse_csv(out)
        assert header[0] == f"# twomode {__version__} fig3"
        assert header[1].startswith("# fingerprint: ")
        r1 = [float(r["r1_s-1"]) for r in rows]
        r2 = [float(r["r2_full_s-1"]) for r in rows]
        mid = len(rows) // 2
        assert float(rows[mid]["delta_frac"]) == 0.0
        assert r1[mid] == 0.0 and r1[mid] == min(r1)
        assert r1 == r1[::-1]
        assert r2[mid] == max(r2) and r2.count(max(r2)) == 1
        assert max(float(r["r2_full_norm"]) for r in rows) == 1.0

    def test_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["fig3", "--n-points", "9", "--out", str(a)])
        main(["fig3", "--n-points", "9", "--out", str(b), "--jobs", "2"])
        assert a.read_bytes() == b.read_bytes()
        assert b"\r" not in a.read_bytes()

    def test_pole_range(self, capsys):
        code, _, err = run(capsys, "fig3", "--delta-min", "-0.5")
        assert code == 2 and "safe range" in err

    def test_sweep_rejects_one_point(self, rb):
        with pytest.raises(InvalidInputError):
            fig3_sweep(rb, -0.1, 0.1, 1)


class TestFig4:
    def test_columns_and_slopes(self, capsys):
        code, out, _ = run(capsys, "fig4", "--rho-min", "1e12", "--rho-max", "1e19", "--points-per-decade", "4")
        assert code == 0
        header, rows = parse_csv(out)
        assert list(rows[0])[:5] == ["rho_cm3", "n_atoms", "r2_dressed_s-1", "r2_full_s-1", "slope"]
        for r in rows:
            rho, slope = float(r["rho_cm3"]), float(r["slope"])
            if rho <= 1e15 * (1 + 1e-9):
                assert slope == pytest.approx(1.0, abs=0.05)
            if rho >= 1e17 * (1 - 1e-9):
                assert slope < 0.05
        assert any(h.startswith("# plateau_s-1: ") for h in header)

    def test_bad_range(self, capsys):
        code, _, err = run(capsys, "fig4", "--rho-min", "0")
        assert code == 1


class TestPoint:
    def test_spot_values(self, capsys):
        code, out, _ = run(capsys, "point", "--set", "delta_frac=0.2", "--set", "rho_cm3=1e15")
        assert code == 0
        header, rows = parse_csv(out)
        r1 = float(rows[0]["r1_s-1"])
        assert 2.3e7 / 3 <= r1 <= 2.3e7 * 3
        assert "# set.delta_frac: 2.00000000000e-01" in header
        assert any(h.startswith("# input.dipole1_cm:") for h in header)
        assert any(h.startswith("# warning:") for h in header)

    def test_null(self, capsys):
        _, out, _ = run(capsys, "point", "--set", "delta_frac=0")
        assert float(parse_csv(out)[1][0]["r1_s-1"]) == 0.0

    def test_unknown_key(self, capsys):
        code, _, err = run(capsys, "point", "--set", "bogus=1")
        assert code == 1 and "bogus" in err

    def test_scenario_file(self, capsys, tmp_path):
        p = tmp_path / "s.toml"
        p.write_text("delta_frac = 0.1\nrho_cm3 = 1e14\n")
        code, out, _ = run(capsys, "point", "--scenario", str(p))
        header, rows = parse_csv(out)
        assert code == 0
        assert float(rows[0]["n_atoms"]) == pytest.approx(7600.0, rel=1e-12)
        assert header[1] == "# fingerprint: " + resolve_settings({"delta_frac": 0.1, "rho_cm3": 1e14}).fingerprint

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "point", "--scenario", str(tmp_path / "none.toml"))
        assert code == 1

    def test_delta1_zero_point(self, capsys):
        code, out, _ = run(capsys, "point", "--set", "delta1_hz=0", "--set", "delta_frac=0.1")
        assert code == 0
        assert parse_csv(out)[1][0]["r2_two_path_s-1"] == "nan"


class TestValidate:
    def test_report(self, capsys):
        code, out, _ = run(capsys, "validate")
        report = json.loads(out)
        assert code == 0 and report["passed"]
        assert len(report["checks"]) >= 9
        for c in report["checks"]:
            assert {"name", "measured", "tolerance", "status"} <= set(c)

    def test_delta1_zero(self, capsys):
        code, out, _ = run(capsys, "validate", "--set", "delta1_hz=0")
        checks = {c["name"]: c for c in json.loads(out)["checks"]}
        assert checks["delta1_zero_rejected"]["status"] == "pass"
        assert checks["full_sum_over_two_path"]["status"] == "skip"
        assert code == 0

    def test_tampered(self, capsys, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("gamma1_per_s = -3\n")
        code, out, err = run(capsys, "validate", "--scenario", str(p))
        assert code == 1 and out == "" and "gamma1" in err

    def test_failure_exit_code(self, capsys, monkeypatch):
        import twomode.validation as v
        monkeypatch.setattr(v, "FULL_SUM_RATIO", 3.0)
        code, out, _ = run(capsys, "validate")
        assert code == 3 and not json.loads(out)["passed"]


class TestOracleRun:
    def test_run_with_trajectory(self, capsys, tmp_path):
        traj = tmp_path / "traj.csv"
        code, out, _ = run(capsys, "oracle-run", "--set", "delta_frac=0.2", "--modes", "3",
                           "--trajectory", str(traj))
        assert code == 0
        header, rows = parse_csv(out)
        rate, ref = float(rows[0]["oracle_rate_s-1"]), float(rows[0]["mode_sum_golden_rule_s-1"])
        assert rate == pytest.approx(ref, rel=0.1)
        lines = traj.read_text().splitlines()
        assert lines[0].startswith("# twomode") and lines[2].startswith("time_s,survival,")

    def test_no_loss_channel(self, capsys):
        code, _, err = run(capsys, "oracle-run", "--set", "delta_frac=0", "--modes", "2")
        assert code == 2
