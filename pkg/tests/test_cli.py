"""Command-line behaviour: parsing, exit codes, files, determinism."""

import csv
import json
import math

import pytest

from pconj.cli import main
from pconj.models import pattern_catalog


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _read_table(path):
    header = []
    rows = []
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        fields = next(reader)
        for row in reader:
            rows.append(dict(zip(fields, row)))
    with open(path, encoding="utf-8") as fh:
        header = [line[2:].strip() for line in fh if line.startswith("# ")]
    return dict(kv.split("=", 1) for kv in header), fields, rows


class TestCombine:
    def test_minimum_example(self, capsys):
        code, out, _ = _run(capsys, "combine", "--p", "0.01,0.2,1,1,1,1", "--gamma", "2", "--method", "minimum")
        assert code == 0
        assert out.strip() == "0.67232"

    def test_stouffer_symmetry(self, capsys):
        code, out, _ = _run(capsys, "combine", "--p", "0.5,0.5", "--gamma", "1", "--method", "stouffer")
        assert code == 0
        assert out.strip() == "0.5"

    def test_ten_significant_digits(self, capsys):
        code, out, _ = _run(capsys, "combine", "--p", "0.123456789123,0.5", "--gamma", "1", "--method", "fisher")
        assert code == 0
        digits = out.strip().replace("0.", "")
        assert len(digits) == 10

    def test_single_p_is_usage_error(self, capsys):
        code, _, err = _run(capsys, "combine", "--p", "0.5", "--gamma", "2", "--method", "fisher")
        assert code == 2
        assert "two p-values" in err

    def test_gamma_above_s_is_usage_error(self, capsys):
        code, _, err = _run(capsys, "combine", "--p", "0.5,0.5", "--gamma", "3", "--method", "fisher")
        assert code == 2
        assert "gamma" in err

    def test_malformed_token_named(self, capsys):
        code, _, err = _run(capsys, "combine", "--p", "0.5,zap,0.2", "--gamma", "1", "--method", "fisher")
        assert code == 2
        assert "'zap'" in err

    def test_out_of_range_token_named(self, capsys):
        code, _, err = _run(capsys, "combine", "--p", "0.5,1.5", "--gamma", "1", "--method", "fisher")
        assert code == 2
        assert "'1.5'" in err

    def test_unknown_method_rejected(self, capsys):
        code, _, _ = _run(capsys, "combine", "--p", "0.5,0.5", "--gamma", "1", "--method", "tippett")
        assert code == 2


class TestCombineE:
    def test_product_of_smallest(self, capsys):
        code, out, _ = _run(capsys, "combine-e", "--e", "4,2,8", "--gamma", "2")
        assert code == 0
        assert out.strip() == "8"

    def test_to_p(self, capsys):
        code, out, _ = _run(capsys, "combine-e", "--e", "4,2,8", "--gamma", "2", "--to-p")
        assert code == 0
        assert out.strip() == "0.125"

    def test_negative_e_rejected(self, capsys):
        code, _, err = _run(capsys, "combine-e", "--e", "4,-1", "--gamma", "1")
        assert code == 2
        assert "'-1'" in err

    def test_harmonic_rule_runs(self, capsys):
        code, out, _ = _run(capsys, "combine-e", "--e", "2,2", "--gamma", "1", "--rule", "harmonic")
        assert code == 0
        assert out.strip() == "2"


class TestPowerCommand:
    def test_custom_run_writes_csv(self, capsys, tmp_path):
        code, out, _ = _run(
            capsys, "power", "--model", "beta", "--pattern", "13,1c", "--r", "5",
            "--gamma", "2", "--reps", "512", "--seed", "7", "--out", str(tmp_path),
        )
        assert code == 0
        path = tmp_path / "power.csv"
        assert str(path) in out
        header, fields, rows = _read_table(path)
        assert fields == ["model", "pattern", "r", "gamma", "method", "estimate",
                          "se", "repetitions", "seed", "relative"]
        assert len(rows) == 2 * 4
        assert header["command"] == "power"
        assert header["patterns"] == "13,1c"
        # best method per pattern carries relative power one
        for label in ("13", "1c"):
            rel = [float(r["relative"]) for r in rows if r["pattern"] == label]
            assert max(rel) == 1.0

    def test_missing_flags_usage_error(self, capsys):
        code, _, err = _run(capsys, "power", "--model", "beta", "--reps", "64")
        assert code == 2
        assert "--r" in err

    def test_unknown_pattern_usage_error(self, capsys, tmp_path):
        code, _, err = _run(
            capsys, "power", "--model", "beta", "--pattern", "99", "--r", "1",
            "--gamma", "2", "--reps", "64", "--out", str(tmp_path),
        )
        assert code == 2
        assert "'99'" in err

    def test_preset_header_is_self_describing(self, capsys, tmp_path):
        code, _, _ = _run(capsys, "power", "--preset", "fig1", "--reps", "64",
                          "--seed", "42", "--out", str(tmp_path))
        assert code == 0
        header, _, rows = _read_table(tmp_path / "fig1.csv")
        assert header["preset"] == "fig1"
        assert header["model"] == "beta"
        assert header["r"] == "1"
        assert header["gamma"] == "2"
        assert header["repetitions"] == "64"
        assert header["seed"] == "42"
        assert header["patterns"].split(",") == [p.label for p in pattern_catalog(1.0)]
        assert len(rows) == 22 * 4

    def test_preset_conflicts_with_science_flags(self, capsys, tmp_path):
        code, _, err = _run(capsys, "power", "--preset", "fig1", "--model", "normal",
                            "--out", str(tmp_path))
        assert code == 2
        assert "--model" in err

    def test_unknown_preset_lists_choices(self, capsys):
        code, _, err = _run(capsys, "power", "--preset", "nope")
        assert code == 2
        assert "fig1" in err

    def test_full_without_preset_rejected(self, capsys):
        code, _, err = _run(capsys, "power", "--model", "beta", "--pattern", "13",
                            "--r", "1", "--gamma", "2", "--full")
        assert code == 2
        assert "--full" in err

    def test_reps_with_full_rejected(self, capsys):
        code, _, err = _run(capsys, "power", "--preset", "fig1", "--reps", "64", "--full")
        assert code == 2
        assert "--full" in err

    def test_plot_writes_svg(self, capsys, tmp_path):
        code, out, _ = _run(
            capsys, "power", "--model", "beta", "--pattern", "13", "--r", "5",
            "--gamma", "2", "--reps", "256", "--out", str(tmp_path), "--plot",
        )
        assert code == 0
        svg = tmp_path / "power.svg"
        assert str(svg) in out
        text = svg.read_text(encoding="utf-8")
        assert text.startswith("<svg ")
        assert text.count("<polyline") == 4

    def test_json_format(self, capsys, tmp_path):
        code, _, _ = _run(
            capsys, "power", "--model", "beta", "--pattern", "13", "--r", "5",
            "--gamma", "2", "--reps", "256", "--format", "json", "--out", str(tmp_path),
        )
        assert code == 0
        doc = json.loads((tmp_path / "power.json").read_text(encoding="utf-8"))
        assert doc["config"]["command"] == "power"
        assert len(doc["rows"]) == 4
        row = doc["rows"][0]
        assert isinstance(row["estimate"], float)
        assert isinstance(row["repetitions"], int)


class TestDeterminism:
    def test_rerun_is_byte_identical(self, capsys, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        for out in (a, b):
            code, _, _ = _run(
                capsys, "power", "--model", "normal", "--pattern", "7c", "--r", "0.4",
                "--gamma", "2", "--reps", "512", "--seed", "3", "--out", str(out),
            )
            assert code == 0
        assert (a / "power.csv").read_bytes() == (b / "power.csv").read_bytes()

    def test_worker_count_is_byte_invisible(self, capsys, tmp_path):
        a = tmp_path / "w1"
        b = tmp_path / "w8"
        for out, workers in ((a, "1"), (b, "8")):
            code, _, _ = _run(
                capsys, "null-ecdf", "--model", "beta", "--r", "5", "--gamma", "2",
                "--base", "both", "--conservative", "0..2", "--reps", "2048",
                "--workers", workers, "--out", str(out),
            )
            assert code == 0
        assert (a / "null-ecdf.csv").read_bytes() == (b / "null-ecdf.csv").read_bytes()


class TestNullEcdf:
    def test_rows_cover_bases_and_counts(self, capsys, tmp_path):
        code, _, _ = _run(
            capsys, "null-ecdf", "--model", "beta", "--r", "5", "--gamma", "2",
            "--base", "both", "--conservative", "0..2", "--reps", "256", "--out", str(tmp_path),
        )
        assert code == 0
        header, fields, rows = _read_table(tmp_path / "null-ecdf.csv")
        assert fields[-1] == "conservative"
        assert header["base"] == "zeros,spike"
        assert len(rows) == 2 * 3 * 4
        got = {(r["pattern"], r["conservative"]) for r in rows}
        assert got == {(b, str(c)) for b in ("zeros", "spike") for c in (0, 1, 2)}

    def test_count_beyond_zero_slots_is_usage_error(self, capsys, tmp_path):
        code, _, err = _run(
            capsys, "null-ecdf", "--model", "beta", "--r", "5", "--gamma", "2",
            "--base", "spike", "--conservative", "6", "--reps", "64", "--out", str(tmp_path),
        )
        assert code == 2
        assert "conservative_count" in err


class TestEcdfCurve:
    def test_rows_and_thresholds(self, capsys, tmp_path):
        code, _, _ = _run(
            capsys, "ecdf-curve", "--model", "beta", "--r", "5", "--gamma", "2",
            "--base", "spike", "--conservative", "1,4", "--grid", "0.2:0.8:0.2",
            "--reps", "256", "--out", str(tmp_path),
        )
        assert code == 0
        header, fields, rows = _read_table(tmp_path / "ecdf-curve.csv")
        assert fields[-1] == "threshold"
        assert header["grid"] == "0.2:0.8:0.2"
        assert len(rows) == 2 * 3 * 4
        labels = {r["pattern"] for r in rows}
        assert labels == {"spike-c1", "spike-c4"}
        one = [float(r["threshold"]) for r in rows
               if r["pattern"] == "spike-c1" and r["method"] == "fisher"]
        assert one == [0.2, 0.4, 0.6, 0.8]
        for r in rows:
            assert 0.0 <= float(r["estimate"]) <= 1.0

    def test_bad_grid_usage_error(self, capsys, tmp_path):
        code, _, err = _run(
            capsys, "ecdf-curve", "--model", "beta", "--r", "5", "--gamma", "2",
            "--grid", "0.5:0.1:0.1", "--reps", "64", "--out", str(tmp_path),
        )
        assert code == 2
        assert "grid" in err

    def test_plot_writes_one_svg_per_count(self, capsys, tmp_path):
        code, out, _ = _run(
            capsys, "ecdf-curve", "--model", "beta", "--r", "5", "--gamma", "2",
            "--base", "spike", "--conservative", "1,4", "--grid", "0.1:0.9:0.4",
            "--reps", "128", "--out", str(tmp_path), "--plot",
        )
        assert code == 0
        assert (tmp_path / "ecdf-curve-c1.svg").exists()
        assert (tmp_path / "ecdf-curve-c4.svg").exists()


class TestGammaSweep:
    def test_rows_cover_gammas(self, capsys, tmp_path):
        code, _, _ = _run(
            capsys, "gamma-sweep", "--model", "beta", "--pattern", "7", "--r", "10",
            "--gammas", "1..3", "--reps", "256", "--out", str(tmp_path),
        )
        assert code == 0
        header, _, rows = _read_table(tmp_path / "gamma-sweep.csv")
        assert header["gammas"] == "1,2,3"
        assert len(rows) == 3 * 4
        for g in ("1", "2", "3"):
            sub = [float(r["relative"]) for r in rows if r["gamma"] == g]
            assert max(sub) == 1.0

    def test_gamma_out_of_range_rejected(self, capsys):
        code, _, err = _run(
            capsys, "gamma-sweep", "--model", "beta", "--pattern", "7", "--r", "10",
            "--gammas", "0..2", "--reps", "64",
        )
        assert code == 2
        assert "gamma" in err


class TestPatterns:
    def test_catalog_csv(self, capsys, tmp_path):
        code, _, _ = _run(capsys, "patterns", "--out", str(tmp_path))
        assert code == 0
        _, fields, rows = _read_table(tmp_path / "patterns.csv")
        assert fields == ["label", "theta1", "theta2", "theta3", "theta4",
                          "theta5", "theta6", "dispersion"]
        assert len(rows) == 22
        by_label = {r["label"]: r for r in rows}
        assert float(by_label["1"]["theta6"]) == 5.0
        assert float(by_label["1"]["dispersion"]) == 26.0
        assert float(by_label["1c"]["theta1"]) == -2.0

    def test_strength_scales_theta_columns(self, capsys, tmp_path):
        code, _, _ = _run(capsys, "patterns", "--r", "2", "--out", str(tmp_path))
        assert code == 0
        _, _, rows = _read_table(tmp_path / "patterns.csv")
        row = next(r for r in rows if r["label"] == "13")
        assert all(float(row[f"theta{i}"]) == 2.0 for i in range(1, 7))


class TestOutputPlumbing:
    def test_env_var_sets_default_dir(self, capsys, tmp_path, monkeypatch):
        target = tmp_path / "envdir"
        monkeypatch.setenv("PCONJ_OUTPUT_DIR", str(target))
        code, out, _ = _run(capsys, "patterns")
        assert code == 0
        assert (target / "patterns.csv").exists()
        assert str(target / "patterns.csv") in out

    def test_out_flag_beats_env_var(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("PCONJ_OUTPUT_DIR", str(tmp_path / "ignored"))
        code, _, _ = _run(capsys, "patterns", "--out", str(tmp_path / "used"))
        assert code == 0
        assert (tmp_path / "used" / "patterns.csv").exists()
        assert not (tmp_path / "ignored").exists()

    def test_unwritable_dir_exit_3(self, capsys, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("file, not a directory")
        code, _, err = _run(capsys, "patterns", "--out", str(blocker / "sub"))
        assert code == 3
        assert "cannot write" in err

    def test_no_subcommand_exit_2(self, capsys):
        code, _, _ = _run(capsys)
        assert code == 2
