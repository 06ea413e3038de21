import json

import pytest

from contris import cli
from contris.cli import (
    ExperimentConfig,
    ResultTable,
    SweepSpec,
    config_hash,
    default_sweep,
    default_system,
    emit,
    load_config,
    run_scenario,
    validate,
)
from contris.errors import ConfigError
from contris.quadrature import QuadratureSpec
from contris.sysmodel import CorrelationKind


def tiny_config(**overrides) -> ExperimentConfig:
    base = dict(system=default_system(), grid=(8, 8), replicates=150,
                seed=99, sweep=default_sweep(), output_path=None)
    base.update(overrides)
    return ExperimentConfig(**base)


class TestLoadConfig:
    def test_defaults(self):
        cfg = load_config(None)
        assert cfg.grid == (32, 32)
        assert cfg.replicates == 10000
        assert cfg.system.array.m == 32
        assert cfg.system.correlation.kind is CorrelationKind.JAKES
        assert cfg.system.correlation.wavelength_m == pytest.approx(
            299792458.0 / 5.8e9)

    def test_db_conversion(self):
        cfg = load_config({
            "system": {"link": {"c0_db": -30.0}, "transmit_snr_db": 100.0}})
        assert cfg.system.link.c0 == pytest.approx(1e-3)
        assert cfg.system.transmit_snr == pytest.approx(1e10)

    def test_conflicting_gain_keys(self):
        with pytest.raises(ConfigError):
            load_config({"system": {"transmit_snr": 1.0, "transmit_snr_db": 0.0}})

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            load_config({"system": {"geometry": {"width": 1.0}}})
        with pytest.raises(ConfigError):
            load_config({"extra": 1})

    def test_wavelength_override(self):
        cfg = load_config({"system": {"wavelength_m": 0.1}})
        assert cfg.system.correlation.wavelength_m == 0.1
        with pytest.raises(ConfigError):
            load_config({"system": {"wavelength_m": 0.1, "carrier_hz": 1e9}})

    def test_bs_correlation_follows_surface_by_default(self):
        cfg = load_config({"system": {"correlation": {"kind": "sinc", "kappa": 0.5}}})
        assert cfg.system.bs_correlation.kind is CorrelationKind.SINC
        assert cfg.system.bs_correlation.kappa == 0.5

    def test_sweep_validation(self):
        with pytest.raises(ConfigError):
            load_config({"sweep": {}})
        with pytest.raises(ConfigError):
            load_config({"sweep": {"setups": ["D"]}})

    def test_hash_stable_and_sensitive(self):
        a = load_config(None)
        b = load_config(None)
        assert config_hash(a) == config_hash(b)
        c = load_config({"seed": 7})
        assert config_hash(a) != config_hash(c)


class TestEmit(object):
    def _table(self):
        return ResultTable(columns=("a", "b"), rows=((1, 2.5), (3, 0.125)),
                           provenance={"config_sha256": "ff", "seed": 1,
                                       "version": "0.1.0"})

    def test_round_trip(self, tmp_path):
        path = tmp_path / "out.csv"
        emit(self._table(), str(path))
        text = path.read_text()
        lines = text.strip().split("\n")
        assert lines[0] == "# config_sha256=ff"
        assert lines[3] == "a,b"
        assert lines[4] == "1,2.5"

    def test_byte_identical_rerun(self, tmp_path):
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        emit(self._table(), str(p1))
        emit(self._table(), str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_empty_table(self, tmp_path):
        table = ResultTable(columns=("x",), rows=(),
                            provenance={"seed": 0})
        path = tmp_path / "empty.csv"
        emit(table, str(path))
        assert path.read_text() == "# seed=0\nx\n"


class TestScenarios:
    def test_unknown_scenario(self):
        with pytest.raises(ConfigError):
            run_scenario("fig9", tiny_config())

    def test_missing_sweep(self):
        cfg = tiny_config(sweep=SweepSpec(kappas=(1.0,)))
        with pytest.raises(ConfigError):
            run_scenario("fig2", cfg)

    def test_table1_ordering(self):
        cfg = tiny_config(sweep=SweepSpec(kappas=(0.0, 0.1, 0.5, 1.0)))
        table = run_scenario("table1", cfg)
        assert table.columns == ("kappa", "seb", "det", "det_over_seb_pct")
        ratios = [row[3] for row in table.rows]
        assert all(b < a for a, b in zip(ratios, ratios[1:]))

    def test_fig2_structure_and_zero_area_limit(self):
        cfg = tiny_config(sweep=SweepSpec(areas_m2=(1e-8, 0.1)))
        table = run_scenario("fig2", cfg)
        assert [row[:2] for row in table.rows] == [
            (1e-8, "sinc"), (1e-8, "jakes"), (0.1, "sinc"), (0.1, "jakes")]
        terms_gamma_m_beta = (cfg.system.transmit_snr * 32
                              * 1.3671797810418105e-12)
        for row in table.rows[:2]:
            assert row[2] == pytest.approx(terms_gamma_m_beta, rel=1e-3)

    def test_fig3_bound_dominates(self):
        cfg = tiny_config(replicates=400,
                          sweep=SweepSpec(kappas=(0.5, 1.0), areas_m2=(0.1,)))
        table = run_scenario("fig3", cfg)
        assert table.columns == ("kappa", "area", "se_bound", "mean_se_mc", "det")
        for row in table.rows:
            assert row[2] >= row[3]

    def test_fig4_structure(self):
        cfg = tiny_config(replicates=400, sweep=SweepSpec(
            areas_m2=(0.1,), aspects=(1.0,), thresholds_db=(20.0, 25.0, 30.0)))
        table = run_scenario("fig4", cfg)
        assert len(table.rows) == 6  # 2 models x 3 thresholds
        for row in table.rows:
            assert 0.0 <= row[4] <= 1.0
            assert 0.0 <= row[5] <= 1.0

    def test_fig5_structure(self):
        cfg = tiny_config(replicates=400, sweep=SweepSpec(
            setups=("A", "B"), areas_m2=(0.1,), kappas=(1.0,)))
        table = run_scenario("fig5", cfg)
        assert table.columns == ("area", "kappa", "setup", "cv2_analytic", "cv2_mc")
        assert [row[2] for row in table.rows] == ["A", "B"]
        # the longer direct path of setup B hardens the channel more
        assert table.rows[1][3] < table.rows[0][3]

    def test_reproducible_rows(self):
        cfg = tiny_config(sweep=SweepSpec(areas_m2=(0.1,)))
        a = run_scenario("fig2", cfg)
        b = run_scenario("fig2", cfg)
        assert a.rows == b.rows


class TestValidate:
    def test_default_passes(self):
        report = validate(tiny_config(replicates=400))
        assert report.all_passed
        names = {c.name for c in report.checks}
        assert {"m2_iso_vs_quad4_rel", "distance_pdf_normalization",
                "mean_y_exactness_z", "jensen_dominance_slack",
                "gamma_fit_round_trip_rel", "snr_expansion_identity_rel"} <= names

    def test_corrupted_tolerance_surfaces_quadrature_failure(self):
        report = validate(tiny_config(replicates=400),
                          quad=QuadratureSpec(rel_tol=10.0))
        failed = {c.name: c for c in report.checks if not c.passed}
        assert "m2_iso_vs_quad4_rel" in failed
        assert "QuadratureFailure" in failed["m2_iso_vs_quad4_rel"].note
        assert not report.all_passed


class TestMain:
    def test_scenario_run(self, tmp_path):
        config = {"grid": {"nx": 8, "ny": 8}, "replicates": 150,
                  "sweep": {"kappas": [0.5, 1.0]}, "seed": 3}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(config))
        out = tmp_path / "t.csv"
        code = cli.main(["--config", str(cfg_path), "--scenario", "table1",
                         "--out", str(out)])
        assert code == 0
        body = out.read_text()
        assert body.startswith("# config_sha256=")
        assert "kappa,seb,det,det_over_seb_pct" in body

    def test_overrides_change_hash(self, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        cfg = {"grid": {"nx": 8, "ny": 8}, "replicates": 100,
               "sweep": {"kappas": [1.0]}}
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(cfg))
        assert cli.main(["--config", str(p), "--scenario", "table1",
                         "--out", str(out1)]) == 0
        assert cli.main(["--config", str(p), "--scenario", "table1",
                         "--seed", "5", "--out", str(out2)]) == 0
        assert out1.read_text() != out2.read_text()

    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{\"sweep\": {}}")
        assert cli.main(["--config", str(bad), "--scenario", "table1",
                         "--out", "x.csv"]) == 2
        assert cli.main(["--scenario", "table1"]) == 2  # no output path
        assert cli.main([]) == 2  # no scenario
        assert "config error" in capsys.readouterr().err

    def test_missing_config_file(self):
        assert cli.main(["--config", "/nonexistent.json", "--scenario",
                         "table1", "--out", "x.csv"]) == 2

    def test_validation_failure_exit_code(self, monkeypatch):
        from contris.cli import CheckResult, ValidationReport
        monkeypatch.setattr(cli, "validate", lambda cfg: ValidationReport(
            checks=(CheckResult("x", 1.0, 0.5, False),)))
        assert cli.main(["--validate"]) == 1

    def test_validate_exit_ok(self, tmp_path):
        cfg = {"grid": {"nx": 8, "ny": 8}, "replicates": 200}
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(cfg))
        assert cli.main(["--config", str(p), "--validate"]) == 0

    def test_byte_identical_csv(self, tmp_path):
        cfg = {"grid": {"nx": 8, "ny": 8}, "replicates": 120,
               "sweep": {"areas_m2": [0.1]}, "seed": 11}
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(cfg))
        out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
        assert cli.main(["--config", str(p), "--scenario", "fig2",
                         "--out", str(out1)]) == 0
        assert cli.main(["--config", str(p), "--scenario", "fig2",
                         "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_grid_override_parsing(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"replicates": 100, "sweep": {"kappas": [1.0]}}))
        out = tmp_path / "g.csv"
        assert cli.main(["--config", str(p), "--scenario", "table1",
                         "--grid", "8x8", "--out", str(out)]) == 0
        assert cli.main(["--config", str(p), "--scenario", "table1",
                         "--grid", "bogus", "--out", str(out)]) == 2
