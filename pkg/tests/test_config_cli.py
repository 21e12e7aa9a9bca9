"""Config parsing, CSV round trips, and the six CLI subcommands."""

import numpy as np
import pytest

from bifluor import cli, csvio
from bifluor.bloch import mollow_spectrum
from bifluor.config import (
    build_bichromatic_drive,
    build_grid,
    build_strong_drive,
    parse_config_text,
    weak_rabi_from_config,
)
from bifluor.dressed import doubly_dressed_lines
from bifluor.errors import ConfigError, ValidationError
from bifluor.scans import DipRecord, ScanResult2D


def read_keyvalue(path):
    out = {}
    for line in path.read_text().splitlines():
        key, _, val = line.partition("=")
        out[key] = val
    return out


class TestConfigParsing:
    TEXT = """\
# reference run
[emitter]
t1_ps = 390
t2_ps = 424

[drive]
rabi2_strong_ghz = 5.8
alpha = 0.3

[scan]
fit_delta1 = yes
orders = 1, 2, 3
"""

    def test_sections_comments_and_types(self):
        cfg = parse_config_text(self.TEXT)
        assert cfg.get_float("emitter.t1_ps") == 390.0
        assert cfg.get_bool("scan.fit_delta1") is True
        assert cfg.get_int_list("scan.orders") == (1, 2, 3)
        assert cfg.get_float("numerics.tau_max_ns", None) is None
        assert cfg.line("drive.alpha") == 8

    def test_defaults_are_recorded_for_metadata(self):
        cfg = parse_config_text(self.TEXT)
        cfg.get_float("emitter.t1_ps")
        cfg.get_int("numerics.n_phases", 16)
        eff = cfg.effective()
        assert eff["emitter.t1_ps"] == "390"
        assert eff["numerics.n_phases (default)"] == 16

    def test_missing_required_key(self):
        cfg = parse_config_text(self.TEXT)
        with pytest.raises(ConfigError, match="missing required key"):
            cfg.get_float("etalon.fsr_ghz")

    def test_parse_errors_carry_line_numbers(self):
        with pytest.raises(ConfigError, match=":2:"):
            parse_config_text("a = 1\nnot a pair\n")
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_text("[s]\na = 1\na = 2\n")
        with pytest.raises(ConfigError, match="empty section"):
            parse_config_text("[]\n")
        with pytest.raises(ConfigError, match="empty key"):
            parse_config_text("= 3\n")

    def test_typed_getter_errors(self):
        cfg = parse_config_text("[a]\nx = hello\ny = maybe\n")
        with pytest.raises(ConfigError, match="as a number"):
            cfg.get_float("a.x")
        with pytest.raises(ConfigError, match="as a boolean"):
            cfg.get_bool("a.y")
        with pytest.raises(ConfigError, match="integer"):
            cfg.get_int("a.x")

    def test_unused_keys_are_flagged(self):
        cfg = parse_config_text("[emitter]\nt1_ps = 390\nt3_ps = 1\n")
        cfg.get_float("emitter.t1_ps")
        with pytest.raises(ConfigError, match="unknown key emitter.t3_ps"):
            cfg.raise_on_unused()


class TestConfigBuilders:
    def test_strong_drive_uses_half_the_splitting(self):
        cfg = parse_config_text("[drive]\nrabi2_strong_ghz = 5.8\n")
        strong = build_strong_drive(cfg)
        assert strong.rabi == 2.9
        assert strong.detuning == 0.0

    def test_weak_field_from_alpha_or_splitting(self):
        cfg = parse_config_text("[drive]\nrabi2_strong_ghz = 5.8\nalpha = 0.3\n")
        strong = build_strong_drive(cfg)
        assert weak_rabi_from_config(cfg, strong) == pytest.approx(0.5 * 0.3 * 2.9)
        cfg2 = parse_config_text(
            "[drive]\nrabi2_strong_ghz = 5.8\nrabi2_weak_ghz = 1.74\n"
        )
        assert weak_rabi_from_config(cfg2, build_strong_drive(cfg2)) == 0.87

    def test_weak_field_keys_are_exclusive_and_required(self):
        both = parse_config_text(
            "[drive]\nrabi2_strong_ghz = 5.8\nalpha = 0.3\nrabi2_weak_ghz = 1\n"
        )
        with pytest.raises(ConfigError, match="mutually exclusive"):
            weak_rabi_from_config(both, build_strong_drive(both))
        neither = parse_config_text("[drive]\nrabi2_strong_ghz = 5.8\n")
        with pytest.raises(ConfigError, match="need exactly one"):
            weak_rabi_from_config(neither, build_strong_drive(neither))

    def test_bichromatic_drive_round_trip(self):
        cfg = parse_config_text(
            "[drive]\nrabi2_strong_ghz = 5.8\nrabi2_weak_ghz = 1.74\n"
            "detuning_weak_ghz = -5.8\nrelative_phase_rad = 0.5\n"
        )
        drive = build_bichromatic_drive(cfg)
        assert drive.weak.rabi == 0.87
        assert drive.delta == -5.8
        assert drive.relative_phase == 0.5

    def test_grid_construction_and_validation(self):
        cfg = parse_config_text(
            "[numerics]\ngrid_min_ghz = -1\ngrid_max_ghz = 1\ngrid_step_ghz = 0.5\n"
        )
        assert np.allclose(build_grid(cfg), [-1.0, -0.5, 0.0, 0.5, 1.0])
        bad = parse_config_text(
            "[numerics]\ngrid_min_ghz = 1\ngrid_max_ghz = -1\ngrid_step_ghz = 0.5\n"
        )
        with pytest.raises(ConfigError):
            build_grid(bad)


class TestCsvIO:
    def test_spectrum_round_trip_is_exact(self, tmp_path, emitter, strong):
        grid = np.linspace(-9.0, 9.0, 181)
        spec = mollow_spectrum(emitter, strong, grid)
        path = tmp_path / "spec.csv"
        csvio.write_spectrum(path, spec)
        freq, intensity = csvio.read_spectrum(path)
        assert np.array_equal(freq, grid)
        assert np.array_equal(intensity, spec.intensity)
        meta = read_keyvalue(tmp_path / "spec.csv.meta.txt")
        assert float(meta["elastic_weight"]) == spec.elastic_weight
        assert meta["n_elastic_lines"] == "1"

    def test_read_spectrum_rejects_malformed_files(self, tmp_path):
        bad_header = tmp_path / "a.csv"
        bad_header.write_text("wavelength,counts\n1,2\n2,3\n")
        with pytest.raises(ValidationError, match="header"):
            csvio.read_spectrum(bad_header)
        short = tmp_path / "b.csv"
        short.write_text("freq_ghz,intensity\n1,2\n")
        with pytest.raises(ValidationError, match="two samples"):
            csvio.read_spectrum(short)
        wide = tmp_path / "c.csv"
        wide.write_text("freq_ghz,intensity\n1,2,3\n4,5,6\n")
        with pytest.raises(ValidationError, match="two columns"):
            csvio.read_spectrum(wide)
        words = tmp_path / "d.csv"
        words.write_text("freq_ghz,intensity\n1,2\nx,3\n")
        with pytest.raises(ValidationError):
            csvio.read_spectrum(words)

    def test_map_long_format(self, tmp_path):
        result = ScanResult2D(
            delta2=np.array([-1.0, 1.0]),
            freq=np.array([0.0, 0.5, 1.0]),
            intensity=np.arange(6.0).reshape(2, 3),
            elastic_weight=np.zeros(2),
            failures=(),
        )
        path = tmp_path / "map.csv"
        csvio.write_map(path, result)
        lines = path.read_text().splitlines()
        assert lines[0] == "delta2_ghz,freq_ghz,intensity"
        assert len(lines) == 7
        assert lines[1] == "-1.0,0.0,0.0"
        assert lines[-1] == "1.0,1.0,5.0"

    def test_dip_report_and_line_list(self, tmp_path, drive):
        dips = (
            DipRecord(
                order=1,
                dip_position_ghz=5.995,
                unshifted_ghz=5.8,
                formula_shift_ghz=0.13,
            ),
        )
        rpath = tmp_path / "dips.csv"
        csvio.write_dip_report(rpath, dips)
        lines = rpath.read_text().splitlines()
        assert lines[0] == "n,dip_position_ghz,unshifted_2omega_over_n_ghz,formula_shift_ghz"
        assert lines[1].startswith("1,5.995,5.8,")
        lpath = tmp_path / "lines.csv"
        csvio.write_lines(lpath, doubly_dressed_lines(drive))
        rows = lpath.read_text().splitlines()
        assert rows[0] == "label,center_ghz,weight"
        assert len(rows) == 10


MOLLOW_CFG = """\
[emitter]
t1_ps = 390
t2_ps = 424

[drive]
rabi2_strong_ghz = 5.8

[numerics]
grid_min_ghz = -9
grid_max_ghz = 9
grid_step_ghz = 0.05
"""

SPECTRUM_CFG = """\
[emitter]
t1_ps = 390
t2_ps = 424

[drive]
rabi2_strong_ghz = 5.8
rabi2_weak_ghz = 1.74
detuning_weak_ghz = -5.8

[numerics]
grid_min_ghz = -9
grid_max_ghz = 9
grid_step_ghz = 0.1
"""


def write_cfg(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestCli:
    def test_mollow_writes_spectrum_and_metadata(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, MOLLOW_CFG)
        out = tmp_path / "out"
        assert cli.main(["mollow", "--config", cfg, "--out", str(out)]) == 0
        freq, intensity = csvio.read_spectrum(out / "mollow.csv")
        assert freq.size == 361
        assert intensity.max() > 0.0
        meta = (out / "metadata.txt").read_text()
        assert "command=mollow" in meta
        assert "config.drive.detuning_strong_ghz (default)=0.0" in meta
        assert "---config---" in meta and "rabi2_strong_ghz = 5.8" in meta
        assert "wrote mollow.csv" in capsys.readouterr().out

    def test_spectrum_writes_line_list(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, SPECTRUM_CFG)
        out = tmp_path / "out"
        assert cli.main(["spectrum", "--config", cfg, "--out", str(out)]) == 0
        freq, _ = csvio.read_spectrum(out / "spectrum.csv")
        assert freq.size == 181
        rows = (out / "lines.csv").read_text().splitlines()
        assert len(rows) == 10
        assert "daughter separation 3.48" in capsys.readouterr().out

    def test_map_with_detuning_fit(self, tmp_path, capsys):
        text = """\
[emitter]
t1_ps = 390
t2_ps = 424

[drive]
rabi2_strong_ghz = 5.8
rabi2_weak_ghz = 1.74

[numerics]
grid_min_ghz = -10
grid_max_ghz = 10
grid_step_ghz = 0.25

[scan]
delta2_min_ghz = -1
delta2_max_ghz = 1
delta2_step_ghz = 0.5
fit_delta1 = true
"""
        cfg = write_cfg(tmp_path, text)
        out = tmp_path / "out"
        assert cli.main(["map", "--config", cfg, "--out", str(out)]) == 0
        map_rows = (out / "map.csv").read_text().splitlines()
        assert map_rows[0] == "delta2_ghz,freq_ghz,intensity"
        assert len(map_rows) == 1 + 5 * 81
        curve_rows = (out / "central_curve.csv").read_text().splitlines()
        assert curve_rows[0] == "delta2_ghz,intensity"
        assert len(curve_rows) == 6
        meta = (out / "metadata.txt").read_text()
        assert "n_failures=0" in meta
        assert "fit_delta1_ghz=" in meta
        assert "fitted strong detuning" in capsys.readouterr().out

    def test_subharmonics_without_weak_field_reports_no_dips(self, tmp_path):
        text = """\
[emitter]
t1_ps = 390
t2_ps = 424

[drive]
rabi2_strong_ghz = 5.8

[scan]
alpha_squared = 0
orders = 1
points_per_order = 5

[etalon]
fsr_ghz = 9.18
fwhm_ghz = 0.14
"""
        cfg = write_cfg(tmp_path, text)
        out = tmp_path / "out"
        assert cli.main(["subharmonics", "--config", cfg, "--out", str(out)]) == 0
        curve = (out / "subharmonics.csv").read_text().splitlines()
        assert curve[0] == "delta3_ghz,intensity"
        assert len(curve) == 6
        report = (out / "dip_report.csv").read_text().splitlines()
        assert len(report) == 1
        assert "n_dips=0" in (out / "metadata.txt").read_text()

    def test_degenerate_reports_plateau(self, tmp_path, capsys):
        text = """\
[emitter]
t1_ps = 390
t2_ps = 424

[drive]
rabi2_strong_ghz = 5.8
alpha = 0.25

[numerics]
grid_min_ghz = -12
grid_max_ghz = 12
grid_step_ghz = 0.02
"""
        cfg = write_cfg(tmp_path, text)
        out = tmp_path / "out"
        assert cli.main(["degenerate", "--config", cfg, "--out", str(out)]) == 0
        freq, _ = csvio.read_spectrum(out / "degenerate.csv")
        assert freq.size == 1201
        meta = (out / "metadata.txt").read_text()
        assert "method=phase_average" in meta
        assert "plateau_high_ghz=" in meta
        assert "upper plateau" in capsys.readouterr().out

    def test_fit_recovers_the_generating_parameters(self, tmp_path, emitter, strong):
        grid = np.linspace(-9.0, 9.0, 721)
        spec = mollow_spectrum(emitter, strong, grid)
        data = tmp_path / "measured.csv"
        csvio.write_spectrum(data, spec)
        cfg = write_cfg(
            tmp_path,
            "[emitter]\nt1_ps = 390\n\n[fit]\nrabi2_guess_ghz = 5.0\nt2_guess_ps = 380\n",
        )
        out = tmp_path / "out"
        code = cli.main(
            ["fit", "--config", cfg, "--data", str(data), "--out", str(out)]
        )
        assert code == 0
        result = read_keyvalue(out / "fit_result.txt")
        assert result["converged"] == "True"
        assert float(result["rabi2_ghz"]) == pytest.approx(5.8, abs=1e-3)
        assert float(result["t2_ps"]) == pytest.approx(424.0, rel=1e-3)
        model_rows = (out / "fit_model.csv").read_text().splitlines()
        assert len(model_rows) == 722

    def test_unknown_config_key_exits_one(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, MOLLOW_CFG + "\n[scan]\nwindow_ghz = 0.5\n")
        assert cli.main(["mollow", "--config", cfg, "--out", str(tmp_path)]) == 1
        assert "unknown key scan.window_ghz" in capsys.readouterr().err

    def test_missing_config_exits_three(self, tmp_path, capsys):
        missing = str(tmp_path / "absent.ini")
        assert cli.main(["mollow", "--config", missing, "--out", str(tmp_path)]) == 3
        assert "i/o error" in capsys.readouterr().err

    def test_unreadable_data_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("nope\n")
        cfg = write_cfg(
            tmp_path,
            "[emitter]\nt1_ps = 390\n\n[fit]\nrabi2_guess_ghz = 5\nt2_guess_ps = 380\n",
        )
        code = cli.main(
            ["fit", "--config", cfg, "--data", str(bad), "--out", str(tmp_path)]
        )
        assert code == 1

    def test_strict_escalates_truncation_to_exit_two(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, SPECTRUM_CFG + "tau_max_ns = 4.24\n")
        out = tmp_path / "out"
        relaxed = cli.main(["spectrum", "--config", cfg, "--out", str(out)])
        assert relaxed == 0
        meta = (out / "metadata.txt").read_text()
        assert "TruncationWarning" in meta and "n_warnings=0" not in meta
        strict = cli.main(["spectrum", "--config", cfg, "--out", str(out), "--strict"])
        assert strict == 2
        assert "error:" in capsys.readouterr().err

    def test_version_and_usage_errors(self, capsys):
        with pytest.raises(SystemExit) as info:
            cli.main(["--version"])
        assert info.value.code == 0
        with pytest.raises(SystemExit):
            cli.main(["mollow"])  # --config is required
        capsys.readouterr()
