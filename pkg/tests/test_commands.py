"""
End-to-end tests for the command-line verbs
"""
import json

import numpy as np
import pytest

from coretune.core.exceptions import NumericalError
from coretune.services import loss_service
from coretune.services.data_service import DataService
from main import main

METRIC_KEYS = {
    "epoch",
    "loss_total",
    "loss_ce_mixed",
    "loss_con_focal",
    "train_acc",
    "test_acc",
    "tightness",
    "feature_entropy",
    "lr",
}


def read_metrics(path):
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]


class TestTrain:
    """Test cases for the train verb"""

    def test_writes_run_outputs(self, config_file, tmp_path):
        """Test metrics.jsonl, config_resolved.conf and summary.json"""
        out = tmp_path / "run"
        assert main(["train", "--config", str(config_file), "--out", str(out)]) == 0

        records = read_metrics(out / "metrics.jsonl")
        assert [r["epoch"] for r in records] == [1, 2, 3]
        for record in records:
            assert set(record) == METRIC_KEYS
            assert 0.0 <= record["train_acc"] <= 1.0

        resolved = (out / "config_resolved.conf").read_text(encoding="utf-8")
        assert "epochs = 3" in resolved
        assert "proj_hidden = 4" in resolved
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        assert summary["epochs"] == 3
        assert summary["final_test_acc"] == records[-1]["test_acc"]

    def test_rerun_is_bitwise_identical(self, config_file, tmp_path):
        """Test two runs with the same seed write identical metrics"""
        for name in ("a", "b"):
            assert main(["train", "--config", str(config_file), "--out", str(tmp_path / name)]) == 0
        first = (tmp_path / "a" / "metrics.jsonl").read_bytes()
        second = (tmp_path / "b" / "metrics.jsonl").read_bytes()
        assert first == second

    def test_seed_override(self, config_file, tmp_path):
        """Test --seed lands in the resolved config"""
        out = tmp_path / "seeded"
        assert main(["train", "--config", str(config_file), "--seed", "7", "--out", str(out)]) == 0
        assert "seed = 7" in (out / "config_resolved.conf").read_text(encoding="utf-8")

    def test_invalid_config_exit_code(self, tmp_path):
        """Test an invariant violation exits with 2"""
        path = tmp_path / "bad.conf"
        path.write_text("tau = 0\n", encoding="utf-8")
        assert main(["train", "--config", str(path), "--out", str(tmp_path / "x")]) == 2
        assert not (tmp_path / "x").exists()

    def test_missing_csv_exit_code(self, tmp_path):
        """Test an unreadable embeddings file exits with 2"""
        path = tmp_path / "csv.conf"
        path.write_text(f"dataset = csv\ntrain_csv = {tmp_path / 'absent.csv'}\n", encoding="utf-8")
        assert main(["train", "--config", str(path), "--out", str(tmp_path / "x")]) == 2

    def test_numerical_error_exit_code(self, config_file, tmp_path, monkeypatch):
        """Test a non-finite loss exits with 3"""

        def broken(*args, **kwargs):
            raise NumericalError("loss is not finite")

        monkeypatch.setattr(loss_service, "total_objective", broken)
        assert main(["train", "--config", str(config_file), "--out", str(tmp_path / "x")]) == 3


class TestGradcheck:
    """Test cases for the gradcheck verb"""

    def test_passes(self, capsys):
        """Test the suite passes and prints one line per path"""
        assert main(["gradcheck", "--instances", "2"]) == 0
        out = capsys.readouterr().out
        for path in ("contrastive", "focal_contrastive", "soft_ce", "mixed_ce", "full_objective"):
            assert path in out
        assert "FAIL" not in out

    def test_corrupted_gradient_fails(self, capsys):
        """Test the negative control exits with 1"""
        assert main(["gradcheck", "--instances", "1", "--corrupt-gradient"]) == 1
        assert "FAIL" in capsys.readouterr().out


class TestGenData:
    """Test cases for the gen-data verb"""

    def test_blobs(self, tmp_path):
        """Test a generated blob file loads back"""
        path = tmp_path / "blobs.csv"
        args = ["gen-data", "--classes", "4", "--per-class", "5", "--dim", "3", "--out", str(path)]
        assert main(args) == 0
        ds = DataService.load_embeddings_csv(path)
        assert ds.size == 20
        assert ds.dim == 3
        assert ds.class_count == 4

    def test_moons(self, tmp_path):
        """Test two moons are two-dimensional with two classes"""
        path = tmp_path / "moons.csv"
        assert main(["gen-data", "--kind", "moons", "--per-class", "6", "--out", str(path)]) == 0
        ds = DataService.load_embeddings_csv(path)
        assert (ds.size, ds.dim, ds.class_count) == (12, 2, 2)

    def test_invalid_parameters(self, tmp_path):
        """Test a single class is a config error"""
        assert main(["gen-data", "--classes", "1", "--out", str(tmp_path / "x.csv")]) == 2

    @pytest.mark.parametrize("kind", ["blobs", "moons"])
    def test_zero_per_class_rejected(self, tmp_path, kind):
        """Test an explicit zero per-class count is a config error, not the default"""
        path = tmp_path / "x.csv"
        assert main(["gen-data", "--kind", kind, "--per-class", "0", "--out", str(path)]) == 2
        assert not path.exists()

    def test_train_on_generated_csv(self, tmp_path):
        """Test a generated file feeds a csv-backed run"""
        data = tmp_path / "blobs.csv"
        assert main(["gen-data", "--per-class", "8", "--dim", "3", "--out", str(data)]) == 0
        conf = tmp_path / "csv.conf"
        conf.write_text(
            f"dataset = csv\ntrain_csv = {data}\nepochs = 2\nbatch_size = 8\n", encoding="utf-8"
        )
        out = tmp_path / "run"
        assert main(["train", "--config", str(conf), "--out", str(out)]) == 0
        assert len(read_metrics(out / "metrics.jsonl")) == 2


class TestDumpFeatures:
    """Test cases for the dump-features verb"""

    def test_features_file(self, config_file, small_datasets, tmp_path):
        """Test header, one row per training sample and a clean reload"""
        out = tmp_path / "features"
        assert main(["dump-features", "--config", str(config_file), "--out", str(out)]) == 0

        lines = (out / "features.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "label,z0,z1,z2,z3"
        train_ds, _ = small_datasets
        assert len(lines) - 1 == train_ds.size

        ds = DataService.load_embeddings_csv(out / "features.csv")
        assert np.array_equal(ds.labels, train_ds.labels)
        assert np.all(np.isfinite(ds.features))


class TestAblate:
    """Test cases for the ablate verb"""

    def test_lattice_outputs(self, config_file, tmp_path, capsys):
        """Test five row directories plus the comparison table"""
        out = tmp_path / "ablate"
        assert main(["ablate", "--config", str(config_file), "--out", str(out)]) == 0

        rows = sorted(p.name for p in out.iterdir() if p.is_dir())
        assert rows == ["row1_ce_only", "row2_ce_con", "row3_ce_mix", "row4_ce_con_mixh", "row5_full"]
        for row in rows:
            assert (out / row / "seed0" / "metrics.jsonl").exists()

        payload = json.loads((out / "ablation.json").read_text(encoding="utf-8"))
        assert [r["row"] for r in payload["rows"]] == [1, 2, 3, 4, 5]
        assert isinstance(payload["trend"]["holds"], bool)

        table = (out / "ablation.md").read_text(encoding="utf-8")
        assert "full (ours)" in table
        assert "full (ours)" in capsys.readouterr().out

    @pytest.mark.slow
    def test_seed_count(self, config_file, tmp_path):
        """Test --seeds repeats every row"""
        out = tmp_path / "ablate"
        assert main(["ablate", "--config", str(config_file), "--seeds", "2", "--out", str(out)]) == 0
        payload = json.loads((out / "ablation.json").read_text(encoding="utf-8"))
        assert all(len(r["test_acc_per_seed"]) == 2 for r in payload["rows"])

    @pytest.mark.slow
    def test_full_row_and_reruns(self, tmp_path):
        """Test the full row matches CE only at default settings and reruns are bitwise identical"""
        first, second = tmp_path / "first", tmp_path / "second"
        for out in (first, second):
            assert main(["ablate", "--seeds", "5", "--out", str(out)]) == 0

        payload = json.loads((first / "ablation.json").read_text(encoding="utf-8"))
        by_name = {r["name"]: r for r in payload["rows"]}
        assert by_name["full"]["mean_test_acc"] >= by_name["ce_only"]["mean_test_acc"]

        runs = sorted(p.relative_to(first) for p in first.glob("row*/seed*/metrics.jsonl"))
        assert len(runs) == 25
        for run in runs:
            assert (first / run).read_bytes() == (second / run).read_bytes()
        assert (first / "ablation.json").read_bytes() == (second / "ablation.json").read_bytes()
