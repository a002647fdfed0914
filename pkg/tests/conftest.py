"""
Test configuration and fixtures
"""
import numpy as np
import pytest

from coretune.core.rng import Purpose, make_generator
from coretune.schemas.run_config import RunConfig
from coretune.services.data_service import DataService

SMALL_CONFIG_TEXT = """\
# small, fast run used by the command tests
epochs = 3
batch_size = 8
blob_classes = 3
blob_per_class = 10
blob_dim = 4
encoder_widths = 8
d_z = 4
proj_dim = 4
seeds = 1
gradcheck_instances = 2
"""


@pytest.fixture
def rng():
    """Seeded generator for test inputs"""
    return make_generator(1234, Purpose.DATA)


@pytest.fixture
def small_config():
    """A run config small enough to train in well under a second"""
    return RunConfig(
        epochs=3,
        batch_size=8,
        blob_classes=3,
        blob_per_class=10,
        blob_dim=4,
        encoder_widths=[8],
        d_z=4,
        proj_dim=4,
        seeds=1,
        gradcheck_instances=2,
    )


@pytest.fixture
def small_datasets(small_config):
    """Train/test split of the small blob dataset"""
    return DataService.build_datasets(small_config)


@pytest.fixture
def config_file(tmp_path):
    """The small config written in the key=value format"""
    path = tmp_path / "small.conf"
    path.write_text(SMALL_CONFIG_TEXT, encoding="utf-8")
    return path


@pytest.fixture
def three_sample_v():
    """v1=[1,0], v2=[0,1], v3=[-1,0] with classes (a, a, b)"""
    v = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    labels = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    return v, labels
