import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))


@pytest.fixture(scope="session")
def solid_root(tmp_path_factory):
    """Tiny flat-intensity dataset: trivially separable, milliseconds to train."""
    from filternet.synthetic import generate_solid_dataset

    root = tmp_path_factory.mktemp("solid")
    generate_solid_dataset(root)
    return root


@pytest.fixture(scope="session")
def solid_manifest(solid_root, tmp_path_factory):
    from filternet.dataset import save_manifest, scan_dataset

    manifest = scan_dataset(solid_root)
    path = tmp_path_factory.mktemp("solid_manifest") / "manifest.tsv"
    save_manifest(manifest, path)
    return path


@pytest.fixture(scope="session")
def textured_root(tmp_path_factory):
    """Small textured dataset for tests that need a learnable problem."""
    from filternet.synthetic import generate_dataset

    root = tmp_path_factory.mktemp("textured")
    generate_dataset(root, per_class_train=6, per_class_test=3, size=32, seed=7)
    return root


def tiny_spec(**overrides):
    from filternet.model import ModelSpec

    kwargs = dict(conv_filters=8, kernel_size=3, dense_units=16,
                  dropout_rate=0.0, input_height=12, input_width=12,
                  input_channels=3, classes=3)
    kwargs.update(overrides)
    return ModelSpec(**kwargs)


@pytest.fixture
def miniature_spec():
    return tiny_spec()
