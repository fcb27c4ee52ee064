import json

import numpy as np
import pytest

from attraos import forecaster as fc
from attraos.cli import main, read_csv


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def lorenz_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "l63.csv"
    code = main(
        [
            "simulate", "--system", "lorenz63", "--steps", "6000", "--dt", "0.01",
            "--transient", "1000", "--out", str(path),
        ]
    )
    assert code == 0
    return path


class TestSimulate:
    def test_row_count_contract(self, tmp_path, capsys):
        out = tmp_path / "l96.csv"
        code, stdout, _ = run(
            capsys,
            "simulate", "--system", "lorenz96", "--dim", "6", "--f", "8",
            "--steps", "500", "--out", str(out),
        )
        assert code == 0
        assert json.loads(stdout)["rows"] == 501
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 502  # header + rows
        assert lines[0] == "t," + ",".join(f"v{i}" for i in range(6))

    def test_observation_channels(self, tmp_path, capsys):
        out = tmp_path / "l96obs.csv"
        code, stdout, _ = run(
            capsys,
            "simulate", "--system", "lorenz96", "--dim", "8", "--steps", "200",
            "--obs-dim", "3", "--seed", "5", "--out", str(out),
        )
        assert code == 0
        assert json.loads(stdout)["channels"] == 3

    def test_invalid_dim_exits_2(self, tmp_path, capsys):
        code, _, err = run(
            capsys,
            "simulate", "--system", "lorenz96", "--dim", "3", "--steps", "10",
            "--out", str(tmp_path / "x.csv"),
        )
        assert code == 2
        assert err.strip()

    def test_seed_determinism(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            code, _, _ = run(
                capsys,
                "simulate", "--system", "lorenz96", "--dim", "8", "--steps", "100",
                "--obs-dim", "2", "--seed", "9", "--out", str(path),
            )
            assert code == 0
        assert a.read_text() == b.read_text()

    def test_csv_full_precision_roundtrip(self, lorenz_csv):
        data = read_csv(lorenz_csv)
        # values survive text round trip bit-exactly (17 significant digits)
        rendered = format(data[17, 0], ".17g")
        assert float(rendered) == data[17, 0]


class TestEmbed:
    def test_embed_writes_trajectory_and_meta(self, lorenz_csv, tmp_path, capsys):
        traj = tmp_path / "traj.csv"
        meta = tmp_path / "meta.json"
        code, stdout, _ = run(
            capsys,
            "embed", "--input", str(lorenz_csv), "--max-tau", "40", "--max-m", "6",
            "--out-traj", str(traj), "--out-meta", str(meta),
        )
        assert code == 0
        doc = json.loads(stdout)
        assert doc["m"] >= 1 and doc["tau"] >= 1
        assert "mi_curve" in doc and "fnn_fraction_curve" in doc
        saved = json.loads(meta.read_text())
        assert saved["m"] == doc["m"]
        pts = read_csv(traj)
        assert pts.shape[1] == 3 * doc["m"]

    def test_missing_file_exits_3(self, tmp_path, capsys):
        code, _, err = run(
            capsys,
            "embed", "--input", str(tmp_path / "nope.csv"),
            "--out-traj", str(tmp_path / "t.csv"),
        )
        assert code == 3
        assert err.strip()

    def test_lone_m_flag_is_usage_error(self, lorenz_csv, tmp_path, capsys):
        code, _, err = run(
            capsys,
            "embed", "--input", str(lorenz_csv), "--m", "3",
            "--out-traj", str(tmp_path / "t.csv"),
        )
        assert code == 2
        assert "together" in err


class TestLyapunov:
    def test_reports_exponents(self, lorenz_csv, capsys):
        code, stdout, _ = run(
            capsys,
            "lyapunov", "--input", str(lorenz_csv), "--m", "3", "--tau", "16",
            "--horizon", "150", "--dt", "0.01",
        )
        assert code == 0
        doc = json.loads(stdout)
        assert len(doc["mle_per_channel"]) == 3
        assert doc["mean_mle"] == pytest.approx(np.mean(doc["mle_per_channel"]))
        assert "mean_mle_per_time_unit" in doc
        assert len(doc["divergence_curve"]) == 151


class TestFitPredictEval:
    def test_full_cycle(self, lorenz_csv, tmp_path, capsys):
        model_path = tmp_path / "model.json"
        code, stdout, _ = run(
            capsys,
            "fit", "--input", str(lorenz_csv), "--window", "96", "--horizon", "8",
            "--m", "3", "--tau", "12", "--patch-len", "6", "--poly-order", "4",
            "--levels", "2", "--out", str(model_path),
        )
        assert code == 0
        assert json.loads(stdout)["channels"] == 3

        pred_path = tmp_path / "pred.csv"
        code, stdout, _ = run(
            capsys,
            "predict", "--model", str(model_path), "--input", str(lorenz_csv),
            "--out", str(pred_path),
        )
        assert code == 0
        assert json.loads(stdout)["horizon"] == 8

        # eval of a file against itself is exactly zero
        code, stdout, _ = run(
            capsys, "eval", "--pred", str(pred_path), "--truth", str(pred_path)
        )
        assert code == 0
        doc = json.loads(stdout)
        assert doc["mse"] == 0.0 and doc["mae"] == 0.0

    def test_cli_predict_bit_identical_to_in_process(self, lorenz_csv, tmp_path, capsys):
        model_path = tmp_path / "model.json"
        run(
            capsys,
            "fit", "--input", str(lorenz_csv), "--window", "96", "--horizon", "8",
            "--m", "3", "--tau", "12", "--patch-len", "6", "--poly-order", "4",
            "--out", str(model_path),
        )
        pred_path = tmp_path / "pred.csv"
        run(
            capsys,
            "predict", "--model", str(model_path), "--input", str(lorenz_csv),
            "--out", str(pred_path),
        )
        data = read_csv(lorenz_csv)
        model = fc.load_model(model_path)
        in_process = fc.predict(model, data).predictions
        from_cli = read_csv(pred_path)
        assert np.array_equal(in_process, from_cli)

    def test_eval_missing_file_exits_3(self, tmp_path, capsys):
        code, _, _ = run(
            capsys, "eval", "--pred", str(tmp_path / "a.csv"), "--truth", str(tmp_path / "b.csv")
        )
        assert code == 3


class TestBenchScan:
    def test_reports_deviation(self, capsys):
        code, stdout, _ = run(capsys, "bench-scan", "--l-list", "64,100", "--n", "4")
        assert code == 0
        doc = json.loads(stdout)
        assert len(doc["bench"]) == 2
        for row in doc["bench"]:
            assert row["max_deviation"] <= 1e-10

    def test_rejects_n_zero(self, capsys):
        code, _, err = run(capsys, "bench-scan", "--l-list", "8", "--n", "0")
        assert code == 2
        assert err.strip()


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--system", "nonsense", "--steps", "1", "--out", "x.csv"])
    assert exc.value.code == 2
