"""
Dataset generation, embeddings-file ingestion and batch iteration
"""
import csv
import logging
import math
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from coretune.core.exceptions import DataFormatError
from coretune.core.rng import Purpose, make_generator
from coretune.models.dataset import Batch, Dataset, Split
from coretune.schemas.run_config import DatasetKind, RunConfig
from coretune.utils.numkernel import hard_classes, one_hot

logger = logging.getLogger(__name__)


class DataService:
    """Builds and serializes datasets"""

    @staticmethod
    def gen_blobs(
        k: int,
        n_per_class: int,
        separation: float,
        noise: float,
        d: int,
        seed: int,
        split: Split = Split.TRAIN,
    ) -> Dataset:
        """Balanced isotropic Gaussian clusters.

        With k <= d the centres are (separation / sqrt 2) * e_c, so every pair of
        centres is exactly `separation` apart. Otherwise centres are random unit
        directions with the same scale.
        """
        if d < 1:
            raise ValueError("d must be >= 1")
        if k < 2:
            raise ValueError("k must be >= 2")
        if n_per_class < 1:
            raise ValueError("n_per_class must be >= 1")
        if separation < 0:
            raise ValueError("separation must be >= 0")
        if noise <= 0:
            raise ValueError("noise must be > 0")

        rng = make_generator(seed, Purpose.DATA)
        scale = separation / math.sqrt(2.0)
        if k <= d:
            centers = np.zeros((k, d))
            centers[np.arange(k), np.arange(k)] = scale
        else:
            directions = rng.standard_normal((k, d))
            directions /= np.linalg.norm(directions, axis=1, keepdims=True)
            centers = scale * directions

        classes = np.repeat(np.arange(k), n_per_class)
        features = centers[classes] + noise * rng.standard_normal((classes.size, d))
        return Dataset(features=features, labels=one_hot(classes, k), class_count=k, split=split)

    @staticmethod
    def gen_two_moons(
        n_per_class: int, noise: float, seed: int, split: Split = Split.TRAIN
    ) -> Dataset:
        """Two interleaved unit half-circles in 2-D"""
        if n_per_class < 1:
            raise ValueError("n_per_class must be >= 1")
        if noise < 0:
            raise ValueError("noise must be >= 0")

        rng = make_generator(seed, Purpose.DATA)
        t = np.linspace(0.0, math.pi, n_per_class)
        upper = np.column_stack([np.cos(t), np.sin(t)])
        lower = np.column_stack([1.0 - np.cos(t), 0.5 - np.sin(t)])
        features = np.vstack([upper, lower])
        if noise > 0:
            features = features + noise * rng.standard_normal(features.shape)

        classes = np.repeat(np.arange(2), n_per_class)
        return Dataset(features=features, labels=one_hot(classes, 2), class_count=2, split=split)

    @staticmethod
    def load_embeddings_csv(path: Union[str, Path], split: Split = Split.TRAIN) -> Dataset:
        """Read `label,f0,...,f{d-1}` rows; labels become one-hot with K = 1 + max label"""
        path = Path(path)
        try:
            handle = open(path, "r", encoding="utf-8", newline="")
        except OSError as e:
            raise DataFormatError(f"cannot open {path}: {e.strerror}")

        rows: List[List[float]] = []
        labels: List[int] = []
        with handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header is None:
                raise DataFormatError("missing header", line=1)
            header = [h.strip() for h in header]
            d = _check_header(header)

            for row in reader:
                lineno = reader.line_num
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) != d + 1:
                    raise DataFormatError(
                        f"expected {d + 1} fields, got {len(row)}", line=lineno
                    )
                try:
                    label = int(row[0].strip())
                except ValueError:
                    raise DataFormatError(f"label {row[0]!r} is not an integer", line=lineno)
                if label < 0:
                    raise DataFormatError(f"negative label {label}", line=lineno)
                try:
                    values = [float(cell) for cell in row[1:]]
                except ValueError:
                    raise DataFormatError("non-numeric feature field", line=lineno)
                if not all(math.isfinite(v) for v in values):
                    raise DataFormatError("non-finite feature field", line=lineno)
                labels.append(label)
                rows.append(values)

        if not rows:
            raise DataFormatError("no samples")

        k = max(labels) + 1
        ds = Dataset(
            features=np.array(rows, dtype=np.float64),
            labels=one_hot(labels, k),
            class_count=k,
            split=split,
        )
        logger.info(f"Loaded {ds.size} samples (d={ds.dim}, K={k}) from {path}")
        return ds

    @staticmethod
    def dump_embeddings_csv(
        features: np.ndarray,
        labels: np.ndarray,
        path: Union[str, Path],
        prefix: str = "f",
    ) -> Path:
        """Write rows in the embeddings schema; floats are written round-trip exact"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        classes = hard_classes(labels)
        d = features.shape[1]
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["label"] + [f"{prefix}{j}" for j in range(d)])
            for cls, row in zip(classes, features):
                writer.writerow([int(cls)] + [repr(float(x)) for x in row])
        return path

    @staticmethod
    def split_dataset(ds: Dataset, test_fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
        """Stratified split; every class keeps at least one training sample"""
        if not 0 <= test_fraction < 1:
            raise ValueError("test_fraction must lie in [0, 1)")

        rng = make_generator(seed, Purpose.SPLIT)
        classes = ds.classes
        train_idx: List[int] = []
        test_idx: List[int] = []
        for c in range(ds.class_count):
            members = np.flatnonzero(classes == c)
            if members.size == 0:
                continue
            members = members[rng.permutation(members.size)]
            n_test = min(int(round(test_fraction * members.size)), members.size - 1)
            test_idx.extend(members[:n_test].tolist())
            train_idx.extend(members[n_test:].tolist())

        train = ds.subset(np.sort(np.array(train_idx, dtype=np.int64)), Split.TRAIN)
        if not test_idx:
            logger.warning(
                f"test_fraction {test_fraction} leaves no test samples; "
                "test accuracy is measured on the training rows"
            )
            return train, ds.subset(np.arange(ds.size), Split.TEST)
        test = ds.subset(np.sort(np.array(test_idx, dtype=np.int64)), Split.TEST)
        return train, test

    @staticmethod
    def build_datasets(config: RunConfig, seed: Optional[int] = None) -> Tuple[Dataset, Dataset]:
        """Resolve the dataset section of a run config into (train, test)"""
        seed = config.seed if seed is None else seed

        if config.dataset == DatasetKind.CSV:
            train = DataService.load_embeddings_csv(config.train_csv, Split.TRAIN)
            if config.test_csv:
                test = DataService.load_embeddings_csv(config.test_csv, Split.TEST)
                return train, test
            return DataService.split_dataset(train, config.test_fraction, seed)

        if config.dataset == DatasetKind.MOONS:
            full = DataService.gen_two_moons(config.moons_per_class, config.moons_noise, seed)
        else:
            full = DataService.gen_blobs(
                config.blob_classes,
                config.blob_per_class,
                config.blob_separation,
                config.blob_noise,
                config.blob_dim,
                seed,
            )
        return DataService.split_dataset(full, config.test_fraction, seed)

    @staticmethod
    def batch_iter(ds: Dataset, batch_size: int, epoch: int, seed: int) -> List[Batch]:
        """Seeded permutation chunked into batches; a trailing singleton is dropped"""
        if batch_size < 2:
            raise ValueError("batch_size must be >= 2")

        rng = make_generator([int(seed), int(epoch)], Purpose.SHUFFLE)
        order = rng.permutation(ds.size)
        batches: List[Batch] = []
        for start in range(0, ds.size, batch_size):
            idx = order[start:start + batch_size]
            if idx.size < 2:
                break
            batches.append(Batch(indices=idx, features=ds.features[idx], labels=ds.labels[idx]))
        return batches


def _check_header(header: List[str]) -> int:
    """Validate `label,p0,...,p{d-1}` for a one-letter prefix p; returns d"""
    if not header or header[0] != "label":
        raise DataFormatError("header must start with 'label'", line=1)
    columns = header[1:]
    if not columns:
        raise DataFormatError("header names no feature columns", line=1)
    prefix = columns[0][:1]
    expected = [f"{prefix}{j}" for j in range(len(columns))]
    if not prefix.isalpha() or columns != expected:
        raise DataFormatError(
            f"feature columns must be {prefix or 'f'}0..{prefix or 'f'}{len(columns) - 1}", line=1
        )
    return len(columns)


# Module-level aliases for the data operations
gen_blobs = DataService.gen_blobs
gen_two_moons = DataService.gen_two_moons
load_embeddings_csv = DataService.load_embeddings_csv
dump_embeddings_csv = DataService.dump_embeddings_csv
split_dataset = DataService.split_dataset
batch_iter = DataService.batch_iter
