import json
import os

import numpy as np

from qcap.cli import EXIT_IO, EXIT_OK, EXIT_SOLVER, EXIT_USAGE, FIGURE_PRESETS, main
from qcap.model import Material, profile_to_dict, make_finite_well

E1_INF_A5 = 0.15041206486237424


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


class TestLevels:
    def test_finite_default_count(self, capsys, tmp_path):
        out_file = tmp_path / "spec.json"
        rc, _, _ = run(capsys, "levels", "--well", "finite", "--a", "5",
                       "--depth", "10", "--mstar", "0.1", "--out", str(out_file))
        assert rc == EXIT_OK
        doc = json.loads(out_file.read_text())
        assert doc["method"] == "AnalyticFiniteWell"
        assert len(doc["energies_eV"]) == 9

    def test_infinite_count_three(self, capsys):
        rc, out, _ = run(capsys, "levels", "--well", "infinite", "--a", "5",
                         "--count", "3", "--mstar", "0.1")
        assert rc == EXIT_OK
        doc = json.loads(out)
        np.testing.assert_allclose(
            doc["energies_eV"], [E1_INF_A5, 4 * E1_INF_A5, 9 * E1_INF_A5], rtol=1e-12)

    def test_invalid_width_is_usage_error(self, capsys):
        rc, _, err = run(capsys, "levels", "--well", "finite", "--a", "-1")
        assert rc == EXIT_USAGE
        assert "usage" in err.lower()

    def test_csv_format(self, capsys):
        rc, out, _ = run(capsys, "levels", "--well", "infinite", "--a", "5",
                         "--count", "2", "--format", "csv")
        assert rc == EXIT_OK
        lines = out.splitlines()
        assert lines[0] == "index,energy_eV,residual"
        assert len(lines) == 3

    def test_profile_json_source(self, capsys, tmp_path):
        doc = profile_to_dict(Material(0.1), make_finite_well(5.0, 10.0))
        path = tmp_path / "prof.json"
        path.write_text(json.dumps(doc))
        rc, out, _ = run(capsys, "levels", "--profile", str(path))
        assert rc == EXIT_OK
        assert len(json.loads(out)["energies_eV"]) == 9

    def test_profile_and_well_conflict(self, capsys, tmp_path):
        path = tmp_path / "prof.json"
        path.write_text("{}")
        rc, _, err = run(capsys, "levels", "--profile", str(path), "--well", "finite")
        assert rc == EXIT_USAGE

    def test_invalid_profile_json_names_field(self, capsys, tmp_path):
        path = tmp_path / "prof.json"
        path.write_text(json.dumps({"material": {}, "profile": {}}))
        rc, _, err = run(capsys, "levels", "--profile", str(path))
        assert rc == EXIT_USAGE
        assert "m_star" in err

    def test_missing_profile_file_is_io_error(self, capsys, tmp_path):
        rc, _, err = run(capsys, "levels", "--profile", str(tmp_path / "nope.json"))
        assert rc == EXIT_IO

    def test_strict_turns_solver_warning_into_exit_2(self, capsys, tmp_path):
        # sentinel-walled profile through the generic scanner: the
        # semiclassical count check cannot be satisfied and must warn
        from qcap.model import Material, make_infinite_well, profile_to_dict
        doc = profile_to_dict(Material(0.1), make_infinite_well(5.0))
        path = tmp_path / "prof.json"
        path.write_text(json.dumps(doc))
        rc_loose, _, _ = run(capsys, "levels", "--profile", str(path))
        assert rc_loose == EXIT_OK
        rc, _, err = run(capsys, "levels", "--profile", str(path), "--strict")
        assert rc == EXIT_SOLVER
        assert "warning" in err


class TestCq:
    def test_single_well_csv(self, capsys, tmp_path):
        out_file = tmp_path / "cq.csv"
        rc, _, _ = run(capsys, "cq", "--well", "finite", "--a", "5", "--depth", "10",
                       "--out", str(out_file))
        assert rc == EXIT_OK
        lines = out_file.read_text().splitlines()
        assert lines[0] == "lg_n_cm2,Cq_F_per_m2,Cq_uF_per_cm2,occupied_subbands"
        assert len(lines) == 501
        cq = np.array([float(l.split(",")[1]) for l in lines[1:]])
        assert np.all(np.diff(cq) >= -1e-15)

    def test_figure_presets_file_counts(self, capsys, tmp_path):
        for figure, expected in ((1, 2), (4, 4), (6, 3)):
            outdir = tmp_path / f"f{figure}"
            rc, out, _ = run(capsys, "cq", "--figure", str(figure), "--out", str(outdir))
            assert rc == EXIT_OK
            files = sorted(os.listdir(outdir))
            assert len(files) == expected
            assert all(f.startswith(f"figure{figure}_") and f.endswith(".csv")
                       for f in files)

    def test_figure_bounds(self, capsys):
        rc, _, _ = run(capsys, "cq", "--figure", "7")
        assert rc == EXIT_USAGE

    def test_figure_conflicts_with_well(self, capsys):
        rc, _, _ = run(capsys, "cq", "--figure", "1", "--well", "finite")
        assert rc == EXIT_USAGE

    def test_preset_table_complete(self):
        assert sorted(FIGURE_PRESETS) == [1, 2, 3, 4, 5, 6]
        assert len(FIGURE_PRESETS[5].curves) == 4
        assert FIGURE_PRESETS[5].assumptions  # fig 5 depth is an assumption
        assert len(FIGURE_PRESETS[2].curves) == 2
        assert len(FIGURE_PRESETS[3].curves) == 2

    def test_json_format(self, capsys):
        rc, out, _ = run(capsys, "cq", "--well", "infinite", "--a", "5",
                         "--format", "json")
        assert rc == EXIT_OK
        doc = json.loads(out)
        assert set(doc) == {"steps", "samples"}
        assert len(doc["samples"]["lg_n_cm2"]) == 500

    def test_determinism_figure1(self, capsys, tmp_path):
        d1, d2 = tmp_path / "r1", tmp_path / "r2"
        run(capsys, "cq", "--figure", "1", "--out", str(d1))
        run(capsys, "cq", "--figure", "1", "--out", str(d2))
        for name in os.listdir(d1):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


class TestCrosscheck:
    def test_finite_defaults_pass(self, capsys):
        rc, out, _ = run(capsys, "crosscheck", "--well", "finite", "--a", "5",
                         "--depth", "10")
        assert rc == EXIT_OK
        assert "delta" in out

    def test_infinite_uses_analytic_levels(self, capsys):
        rc, out, _ = run(capsys, "crosscheck", "--well", "infinite", "--a", "5",
                         "--count", "3")
        assert rc == EXIT_OK
        assert "AnalyticInfinite" in out

    def test_coarse_layers_fail(self, capsys):
        rc, out, _ = run(capsys, "crosscheck", "--well", "parabolic", "--x0", "5",
                         "--layers", "2")
        assert rc == EXIT_SOLVER


class TestConfigFile:
    def test_env_config_supplies_defaults(self, capsys, tmp_path, monkeypatch):
        cfg = tmp_path / "qcap.json"
        cfg.write_text(json.dumps({"well": "infinite", "a": 5.0, "count": 2}))
        monkeypatch.setenv("QCAP_CONFIG", str(cfg))
        rc, out, _ = run(capsys, "levels")
        assert rc == EXIT_OK
        assert len(json.loads(out)["energies_eV"]) == 2

    def test_flags_win_over_config(self, capsys, tmp_path, monkeypatch):
        cfg = tmp_path / "qcap.json"
        cfg.write_text(json.dumps({"well": "infinite", "a": 5.0, "count": 2}))
        monkeypatch.setenv("QCAP_CONFIG", str(cfg))
        rc, out, _ = run(capsys, "levels", "--count", "4")
        assert rc == EXIT_OK
        assert len(json.loads(out)["energies_eV"]) == 4

    def test_unknown_config_key_rejected(self, capsys, tmp_path, monkeypatch):
        cfg = tmp_path / "qcap.json"
        cfg.write_text(json.dumps({"depht": 3.0}))
        monkeypatch.setenv("QCAP_CONFIG", str(cfg))
        rc, _, err = run(capsys, "levels", "--well", "infinite", "--a", "5")
        assert rc == EXIT_USAGE
        assert "depht" in err
