import numpy as np
import pytest

from filternet.errors import ShapeError
from filternet.validation import check_image_batch, check_labels


def test_batch_passthrough():
    X = np.zeros((2, 4, 4, 3), dtype=np.float32)
    out = check_image_batch(X)
    assert out is X


def test_batch_dtype_cast():
    X = np.zeros((2, 4, 4, 3), dtype=np.uint8)
    out = check_image_batch(X, dtype=np.float32)
    assert out.dtype == np.float32


def test_batch_shape_errors():
    with pytest.raises(ShapeError):
        check_image_batch(np.zeros((4, 4, 3)))
    with pytest.raises(ShapeError):
        check_image_batch(np.zeros((1, 4, 4, 1)))
    with pytest.raises(ShapeError):
        check_image_batch(np.zeros((0, 4, 4, 3)))


def test_batch_rejects_non_finite():
    X = np.zeros((1, 2, 2, 3), dtype=np.float32)
    X[0, 0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        check_image_batch(X)


def test_labels_integral_floats_accepted():
    y = check_labels(np.array([0.0, 1.0, 2.0]), 3)
    assert y.dtype == np.int64
    assert y.tolist() == [0, 1, 2]


def test_labels_fractional_rejected():
    with pytest.raises(ValueError):
        check_labels(np.array([0.0, 0.5]), 2)


def test_labels_shape_errors():
    with pytest.raises(ShapeError):
        check_labels(np.zeros((2, 2)), 4)
    with pytest.raises(ShapeError):
        check_labels(np.array([0, 1]), 3)
