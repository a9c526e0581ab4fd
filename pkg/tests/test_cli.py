import json

import numpy as np
import pytest

from mafkit import CsvParseError, __version__
from mafkit.cli import ingest_csv, main
from mafkit.datasets import example_panel_path


def write_panel_csv(path, n=40, p=3, seed=0, with_time=True):
    rng = np.random.default_rng(seed)
    trend = np.linspace(-1.0, 1.0, n)
    values = trend[:, None] * rng.uniform(0.5, 1.5, p) + 0.4 * rng.standard_normal((n, p))
    header = (["t"] if with_time else []) + [f"s{j}" for j in range(p)]
    lines = [",".join(header)]
    for i in range(n):
        cells = ([str(i)] if with_time else []) + [repr(float(v)) for v in values[i]]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")
    return values


class TestIngestCsv:
    def test_example_panel_shape(self):
        panel = ingest_csv(example_panel_path())
        assert panel.n == 150 and panel.p == 4
        assert panel.labels == ("site_a", "site_b", "site_c", "site_d")
        assert panel.time is not None and panel.time[0] == 1850.0

    def test_time_column_excluded_from_p(self, tmp_path):
        path = tmp_path / "p.csv"
        values = write_panel_csv(path, with_time=True)
        panel = ingest_csv(path)
        assert panel.p == values.shape[1]
        np.testing.assert_array_equal(panel.values, values)

    def test_no_time_column(self, tmp_path):
        path = tmp_path / "p.csv"
        write_panel_csv(path, with_time=False)
        panel = ingest_csv(path)
        assert panel.time is None and panel.p == 3

    def test_ragged_row_names_row_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1.0,2.0\n3.0\n4.0,5.0\n")
        with pytest.raises(CsvParseError, match="row 3") as exc:
            ingest_csv(path)
        assert exc.value.row == 3

    def test_non_numeric_cell_located(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1.0,2.0\n3.0,x\n4.0,5.0\n")
        with pytest.raises(CsvParseError, match="row 3"):
            ingest_csv(path)

    def test_duplicate_headers(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,a\n1.0,2.0\n3.0,4.0\n5.0,6.0\n")
        with pytest.raises(CsvParseError, match="duplicate"):
            ingest_csv(path)

    def test_too_few_rows(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1.0,2.0\n3.0,4.0\n")
        with pytest.raises(CsvParseError, match="3 data rows"):
            ingest_csv(path)

    def test_standardize(self, tmp_path):
        path = tmp_path / "p.csv"
        write_panel_csv(path)
        panel = ingest_csv(path, standardize=True)
        np.testing.assert_allclose(panel.values.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(panel.values.std(axis=0, ddof=1), 1.0, atol=1e-12)


class TestCliCommands:
    def test_decompose_artifacts(self, tmp_path):
        out = tmp_path / "out"
        code = main([
            "decompose", "--input", str(example_panel_path()), "--output", str(out),
        ])
        assert code == 0
        coef_lines = (out / "coefficients.csv").read_text().splitlines()
        assert coef_lines[0] == "series,maf_1,maf_2,maf_3,maf_4,pca_1,pca_2,pca_3,pca_4"
        assert len(coef_lines) == 5  # header + one row per series
        factors = (out / "factors.csv").read_text().splitlines()
        assert len(factors) == 151
        meta = json.loads((out / "run.json").read_text())
        assert meta["version"] == __version__
        assert meta["seed"] == 0
        assert meta["config"]["command"] == "decompose"

    def test_decompose_factors_round_trip(self, tmp_path):
        out = tmp_path / "out"
        main(["decompose", "--input", str(example_panel_path()), "--output", str(out)])
        from mafkit import compute_maf, compute_pca

        panel = ingest_csv(example_panel_path())
        expected = np.column_stack(
            [compute_maf(panel).factors, compute_pca(panel).factors]
        )
        reread = ingest_csv(out / "factors.csv")
        np.testing.assert_array_equal(reread.values, expected)

    def test_rerun_byte_identical(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        args = ["test", "--input", str(example_panel_path()), "-B", "199", "--seed", "4"]
        assert main(args + ["--output", str(out1)]) == 0
        assert main(args + ["--output", str(out2)]) == 0
        assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()

    def test_test_report_schema(self, tmp_path):
        out = tmp_path / "out"
        code = main([
            "test", "--input", str(example_panel_path()), "--output", str(out),
            "-B", "199", "--seed", "11", "--factors", "2",
        ])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        for key in ("p_value", "observed_snr", "null_draws", "seed", "config"):
            assert key in report
        assert len(report["p_value"]) == 2
        assert len(report["null_draws"][0]) == 199
        assert report["p_value"][0] < 0.05  # the packaged panel carries a trend

    def test_resample_artifacts(self, tmp_path):
        out = tmp_path / "out"
        code = main([
            "resample", "--input", str(example_panel_path()), "--output", str(out),
            "-B", "50", "--block-len", "5", "--factors", "2", "--seed", "3",
        ])
        assert code == 0
        bands = (out / "bands.csv").read_text().splitlines()
        assert bands[0].split(",")[:3] == ["t", "maf_1_lower", "maf_1_upper"]
        assert len(bands) == 151
        reps = (out / "replicates_maf_1.csv").read_text().splitlines()
        assert len(reps) == 51
        assert (out / "replicate_coefficients.csv").exists()

    def test_select_command(self, tmp_path):
        out = tmp_path / "out"
        code = main([
            "select", "--input", str(example_panel_path()), "--output", str(out),
            "--method", "cutoff", "--alpha-frac", "0.9",
        ])
        assert code == 0
        payload = json.loads((out / "selection.json").read_text())
        assert payload["method"] == "cutoff"
        assert 1 <= payload["k"] <= 4

    def test_simulate_command(self, tmp_path):
        out = tmp_path / "out"
        code = main([
            "simulate", "--output", str(out), "--rho", "0.25", "--reps", "5",
            "-n", "80", "--seed", "2",
        ])
        assert code == 0
        lines = (out / "experiment.csv").read_text().splitlines()
        assert lines[0] == (
            "rho,multiplier,statistic,mean,se,mean_minus_2se,mean_plus_2se,reps"
        )
        assert len(lines) == 4  # one cell x three statistics

    def test_power_command(self, tmp_path):
        out = tmp_path / "out"
        code = main([
            "power", "--output", str(out), "--multipliers", "0", "1",
            "-B", "100", "-n", "60", "--seed", "9",
        ])
        assert code == 0
        lines = (out / "power.csv").read_text().splitlines()
        assert lines[0] == "multiplier,power"
        assert len(lines) == 3

    def test_env_seed_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MAFKIT_SEED", "77")
        out = tmp_path / "out"
        main(["decompose", "--input", str(example_panel_path()), "--output", str(out)])
        meta = json.loads((out / "run.json").read_text())
        assert meta["seed"] == 77

    def test_data_error_exit_code_and_json(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n3,oops\n5,6\n")
        code = main(["decompose", "--input", str(bad), "--output", str(tmp_path / "o")])
        assert code == 3
        err = json.loads(capsys.readouterr().out)
        assert err["error"]["type"] == "CsvParseError"
        assert err["error"]["exit_code"] == 3

    def test_config_error_exit_code(self, tmp_path, capsys):
        code = main([
            "test", "--input", str(example_panel_path()),
            "--output", str(tmp_path / "o"), "-B", "10",
        ])
        assert code == 2
        err = json.loads(capsys.readouterr().out)
        assert err["error"]["type"] == "InvalidConfigError"

    def test_numerical_error_exit_code(self, tmp_path, capsys):
        path = tmp_path / "collinear.csv"
        rng = np.random.default_rng(0)
        col = rng.standard_normal(30)
        lines = ["a,b"] + [f"{float(x)!r},{float(2 * x)!r}" for x in col]
        path.write_text("\n".join(lines) + "\n")
        code = main(["decompose", "--input", str(path), "--output", str(tmp_path / "o")])
        assert code == 4
        err = json.loads(capsys.readouterr().out)
        assert err["error"]["type"] == "SingularMatrixError"
