import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from filternet.errors import ShapeError
from filternet.tensor import (argmax_last_axis, emap, ezip, matmul, tensor,
                              tensor64)
from helpers import naive_matmul


def test_tensor_dtype():
    t = tensor([1, 2, 3])
    assert t.dtype == np.float32
    assert tensor64([1.5]).dtype == np.float64


def test_matmul_matches_naive():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((4, 6))
    b = rng.standard_normal((6, 3))
    np.testing.assert_allclose(matmul(a, b), naive_matmul(a, b), rtol=1e-12)


def test_matmul_rejects_mismatch():
    with pytest.raises(ShapeError) as err:
        matmul(np.zeros((2, 3)), np.zeros((4, 2)))
    assert "(2, 3)" in str(err.value) and "(4, 2)" in str(err.value)


def test_matmul_rejects_vectors():
    with pytest.raises(ShapeError):
        matmul(np.zeros(3), np.zeros((3, 2)))


def test_emap_identity_bit_exact():
    x = np.float32([0.1, -2.5, 7.25])
    out = emap(x, lambda v: v)
    assert out.dtype == x.dtype
    assert np.array_equal(out, x)


def test_ezip():
    a = np.float32([1, 2, 3])
    b = np.float32([10, 20, 30])
    out = ezip(a, b, lambda u, v: u + v)
    assert np.array_equal(out, np.float32([11, 22, 33]))


def test_argmax_ties_take_first():
    x = np.array([[3.0, 3.0, 1.0], [0.0, 2.0, 2.0]])
    assert argmax_last_axis(x).tolist() == [0, 1]


def test_argmax_empty_axis():
    with pytest.raises(ShapeError):
        argmax_last_axis(np.zeros((2, 0)))


@given(hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2,
                                               min_side=1, max_side=5),
                  elements=st.floats(-100, 100)))
def test_argmax_matches_numpy(x):
    assert np.array_equal(argmax_last_axis(x), np.argmax(x, axis=-1))


@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4),
       st.integers(0, 10_000))
def test_matmul_matches_naive_property(m, k, n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, k))
    b = rng.standard_normal((k, n))
    np.testing.assert_allclose(matmul(a, b), naive_matmul(a, b),
                               rtol=1e-10, atol=1e-12)
