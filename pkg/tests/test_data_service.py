"""
Tests for dataset generation, CSV I/O, splitting and batching
"""
import logging
import math

import numpy as np
import pytest

from coretune.core.exceptions import DataFormatError
from coretune.models.dataset import Split
from coretune.schemas.run_config import DatasetKind, RunConfig
from coretune.services.data_service import DataService
from coretune.utils.numkernel import check_soft_labels


class TestGenBlobs:
    """Test cases for Gaussian blobs"""

    def test_shape_and_balance(self):
        """Test k=2, n_per_class=5 gives 10 balanced rows"""
        ds = DataService.gen_blobs(2, 5, 3.0, 1.0, 4, seed=0)
        assert ds.size == 10
        assert ds.class_count == 2
        np.testing.assert_array_equal(ds.labels.sum(axis=0), [5.0, 5.0])

    def test_zero_separation_overlaps(self):
        """Test separation 0 puts both class means on top of each other"""
        n = 400
        ds = DataService.gen_blobs(2, n, 0.0, 1.0, 1, seed=3)
        means = [ds.features[ds.classes == c].mean(axis=0) for c in range(2)]
        # difference of two sample means has std sqrt(2/n)
        assert np.linalg.norm(means[0] - means[1]) < 5.0 * math.sqrt(2.0 / n)

    def test_centres_are_separation_apart(self):
        """Test noise-free geometry via many samples: mean distance close to separation"""
        ds = DataService.gen_blobs(3, 2000, 4.0, 0.1, 3, seed=1)
        means = [ds.features[ds.classes == c].mean(axis=0) for c in range(3)]
        for a in range(3):
            for b in range(a + 1, 3):
                assert np.linalg.norm(means[a] - means[b]) == pytest.approx(4.0, abs=0.05)

    def test_same_seed_bitwise_identical(self):
        """Test determinism per seed"""
        a = DataService.gen_blobs(3, 7, 2.0, 1.0, 5, seed=42)
        b = DataService.gen_blobs(3, 7, 2.0, 1.0, 5, seed=42)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.labels, b.labels)

    def test_more_classes_than_dims(self):
        """Test k > d still yields valid labels"""
        ds = DataService.gen_blobs(5, 4, 3.0, 1.0, 2, seed=0)
        assert ds.class_count == 5
        check_soft_labels(ds.labels)

    @pytest.mark.parametrize("kwargs", [{"k": 1}, {"noise": 0.0}, {"d": 0}, {"n_per_class": 0}])
    def test_invalid_parameters(self, kwargs):
        """Test invalid generation parameters raise ValueError"""
        params = {"k": 2, "n_per_class": 3, "separation": 1.0, "noise": 1.0, "d": 2, "seed": 0}
        params.update(kwargs)
        with pytest.raises(ValueError):
            DataService.gen_blobs(**params)

    def test_fuzz_label_simplex(self, rng):
        """Test random generation parameters always give simplex labels"""
        for _ in range(20):
            ds = DataService.gen_blobs(
                int(rng.integers(2, 6)),
                int(rng.integers(1, 10)),
                float(rng.uniform(0, 5)),
                float(rng.uniform(0.1, 2)),
                int(rng.integers(1, 6)),
                seed=int(rng.integers(1000)),
            )
            check_soft_labels(ds.labels)


class TestGenTwoMoons:
    """Test cases for two moons"""

    def test_noise_free_on_half_circles(self):
        """Test points lie exactly on the two unit half-circles"""
        ds = DataService.gen_two_moons(100, 0.0, seed=0)
        upper = ds.features[ds.classes == 0]
        lower = ds.features[ds.classes == 1]
        np.testing.assert_allclose(np.linalg.norm(upper, axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(np.linalg.norm(lower - [1.0, 0.5], axis=1), 1.0, atol=1e-12)
        assert np.all(upper[:, 1] >= -1e-12)
        assert np.all(lower[:, 1] <= 0.5 + 1e-12)

    def test_class_counts(self):
        """Test exactly 100 samples per class"""
        ds = DataService.gen_two_moons(100, 0.1, seed=0)
        np.testing.assert_array_equal(ds.class_counts(), [100, 100])

    def test_same_seed_identical(self):
        """Test determinism per seed"""
        a = DataService.gen_two_moons(20, 0.2, seed=7)
        b = DataService.gen_two_moons(20, 0.2, seed=7)
        assert np.array_equal(a.features, b.features)


class TestEmbeddingsCsv:
    """Test cases for the embeddings CSV format"""

    def test_load_small_file(self, tmp_path):
        """Test a 3-row file with labels {0,1,0}"""
        path = tmp_path / "e.csv"
        path.write_text("label,f0,f1\n0,1.0,2.0\n1,3.0,4.0\n0,5.0,6.0\n", encoding="utf-8")
        ds = DataService.load_embeddings_csv(path)
        assert (ds.size, ds.dim, ds.class_count) == (3, 2, 2)
        np.testing.assert_array_equal(ds.classes, [0, 1, 0])

    def test_empty_data_section(self, tmp_path):
        """Test a header-only file reports no samples"""
        path = tmp_path / "e.csv"
        path.write_text("label,f0,f1\n", encoding="utf-8")
        with pytest.raises(DataFormatError, match="no samples"):
            DataService.load_embeddings_csv(path)

    @pytest.mark.parametrize(
        "body,line",
        [
            ("0,1.0,2.0\n1,3.0\n", 3),
            ("0,1.0,abc\n", 2),
            ("0,1.0,2.0\n-1,3.0,4.0\n", 3),
            ("x,1.0,2.0\n", 2),
        ],
    )
    def test_malformed_rows_name_the_line(self, tmp_path, body, line):
        """Test ragged, non-numeric and negative-label rows name their line"""
        path = tmp_path / "e.csv"
        path.write_text("label,f0,f1\n" + body, encoding="utf-8")
        with pytest.raises(DataFormatError) as exc:
            DataService.load_embeddings_csv(path)
        assert exc.value.line == line
        assert f"line {line}" in str(exc.value)

    def test_bad_header(self, tmp_path):
        """Test a header with misnumbered columns is rejected"""
        path = tmp_path / "e.csv"
        path.write_text("label,f0,f2\n0,1.0,2.0\n", encoding="utf-8")
        with pytest.raises(DataFormatError):
            DataService.load_embeddings_csv(path)

    def test_round_trip(self, tmp_path, rng):
        """Test dump then load returns identical features"""
        ds = DataService.gen_blobs(3, 4, 2.0, 1.0, 3, seed=5)
        path = DataService.dump_embeddings_csv(ds.features, ds.labels, tmp_path / "blobs.csv")
        loaded = DataService.load_embeddings_csv(path)
        np.testing.assert_allclose(loaded.features, ds.features, atol=1e-9)
        np.testing.assert_array_equal(loaded.labels, ds.labels)

    def test_z_prefix_accepted(self, tmp_path):
        """Test feature dumps with z columns load back"""
        path = DataService.dump_embeddings_csv(
            np.array([[0.5, -0.5]]), np.array([[0.0, 1.0]]), tmp_path / "z.csv", prefix="z"
        )
        assert path.read_text(encoding="utf-8").splitlines()[0] == "label,z0,z1"
        assert DataService.load_embeddings_csv(path).class_count == 2


class TestSplitAndBuild:
    """Test cases for train/test splitting and config resolution"""

    def test_stratified_split(self):
        """Test every class keeps training samples and the split is a partition"""
        ds = DataService.gen_blobs(3, 8, 2.0, 1.0, 2, seed=0)
        train, test = DataService.split_dataset(ds, 0.25, seed=0)
        assert train.size + test.size == ds.size
        assert train.split == Split.TRAIN and test.split == Split.TEST
        assert np.all(train.class_counts() >= 1)
        np.testing.assert_array_equal(test.class_counts(), [2, 2, 2])

    def test_split_deterministic(self):
        """Test the same seed gives the same split"""
        ds = DataService.gen_blobs(2, 10, 2.0, 1.0, 2, seed=0)
        a, _ = DataService.split_dataset(ds, 0.3, seed=9)
        b, _ = DataService.split_dataset(ds, 0.3, seed=9)
        assert np.array_equal(a.features, b.features)

    def test_empty_test_split_warns(self, caplog):
        """Test a zero test fraction falls back to the full set and says so"""
        ds = DataService.gen_blobs(2, 5, 2.0, 1.0, 2, seed=0)
        with caplog.at_level(logging.WARNING, logger="coretune.services.data_service"):
            train, test = DataService.split_dataset(ds, 0.0, seed=0)
        assert train.size == ds.size
        assert test.size == ds.size
        assert test.split == Split.TEST
        assert "leaves no test samples" in caplog.text

    def test_nonempty_test_split_is_quiet(self, caplog):
        """Test a normal split logs no warning"""
        ds = DataService.gen_blobs(2, 10, 2.0, 1.0, 2, seed=0)
        with caplog.at_level(logging.WARNING, logger="coretune.services.data_service"):
            DataService.split_dataset(ds, 0.3, seed=0)
        assert "leaves no test samples" not in caplog.text

    def test_build_moons(self):
        """Test a moons config resolves to two classes in 2-D"""
        config = RunConfig(dataset=DatasetKind.MOONS, moons_per_class=20)
        train, test = DataService.build_datasets(config)
        assert train.dim == 2 and train.class_count == 2
        assert train.size + test.size == 40

    def test_build_csv(self, tmp_path):
        """Test a csv config loads the train file and splits it"""
        ds = DataService.gen_blobs(2, 10, 2.0, 1.0, 3, seed=0)
        path = DataService.dump_embeddings_csv(ds.features, ds.labels, tmp_path / "train.csv")
        train, test = DataService.build_datasets(
            RunConfig(dataset=DatasetKind.CSV, train_csv=str(path))
        )
        assert train.size + test.size == 20


class TestBatchIter:
    """Test cases for seeded batching"""

    def test_sizes_ten_by_four(self):
        """Test n=10, batch 4 gives 4,4,2"""
        ds = DataService.gen_blobs(2, 5, 2.0, 1.0, 2, seed=0)
        assert [b.size for b in DataService.batch_iter(ds, 4, epoch=1, seed=0)] == [4, 4, 2]

    def test_trailing_singleton_dropped(self):
        """Test n=9, batch 4 gives 4,4"""
        ds = DataService.gen_blobs(3, 3, 2.0, 1.0, 2, seed=0)
        assert [b.size for b in DataService.batch_iter(ds, 4, epoch=1, seed=0)] == [4, 4]

    def test_union_covers_all_indices(self):
        """Test one epoch visits every index exactly once"""
        ds = DataService.gen_blobs(2, 6, 2.0, 1.0, 2, seed=0)
        batches = DataService.batch_iter(ds, 5, epoch=2, seed=3)
        seen = np.concatenate([b.indices for b in batches])
        assert sorted(seen.tolist()) == list(range(ds.size))

    def test_rows_match_indices(self):
        """Test batch rows are the dataset rows at the batch indices"""
        ds = DataService.gen_blobs(2, 6, 2.0, 1.0, 2, seed=0)
        for batch in DataService.batch_iter(ds, 4, epoch=1, seed=1):
            assert np.array_equal(batch.features, ds.features[batch.indices])

    def test_reproducible_and_epoch_dependent(self):
        """Test same (seed, epoch) repeats while epochs differ"""
        ds = DataService.gen_blobs(2, 8, 2.0, 1.0, 2, seed=0)
        first = np.concatenate([b.indices for b in DataService.batch_iter(ds, 4, 1, 0)])
        again = np.concatenate([b.indices for b in DataService.batch_iter(ds, 4, 1, 0)])
        other = np.concatenate([b.indices for b in DataService.batch_iter(ds, 4, 2, 0)])
        assert np.array_equal(first, again)
        assert not np.array_equal(first, other)

    def test_batch_size_one_rejected(self):
        """Test batch_size must be at least two"""
        ds = DataService.gen_blobs(2, 3, 2.0, 1.0, 2, seed=0)
        with pytest.raises(ValueError):
            DataService.batch_iter(ds, 1, epoch=1, seed=0)
