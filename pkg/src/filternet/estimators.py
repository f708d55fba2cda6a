"""scikit-learn style wrappers so the pieces compose with pipelines.

RasterFilter is a stateless transformer over uint8 image batches;
ConvNetClassifier wraps init/train/predict behind fit and predict.
Both follow the estimator conventions: constructor only stores
hyperparameters, fit returns self, fitted attributes end in an
underscore, get_params and set_params come from the base class.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .adam import adam_step, init_adam
from .errors import NumericalError
from .model import (ModelSpec, backward_from_trace, init_params, model_forward)
from .nn import sparse_ce_loss
from .raster import apply_filter, get_filter, raster_from_array
from .seeding import derive_seed
from .tensor import argmax_last_axis
from .validation import check_image_batch, check_labels


class RasterFilter(BaseEstimator, TransformerMixin):
    """Applies one named 3x3 integer filter to every image in a batch.

    Input and output are uint8 arrays of shape (n, h, w, 3). The
    transform has no learned state; fit only validates the name.
    """

    def __init__(self, name: str = "sharpen"):
        self.name = name

    def fit(self, X, y=None):
        get_filter(self.name)
        self.n_features_in_ = None
        return self

    def transform(self, X) -> np.ndarray:
        spec = get_filter(self.name)
        X = check_image_batch(X, dtype=np.uint8)
        out = np.empty_like(X)
        for i in range(X.shape[0]):
            out[i] = apply_filter(raster_from_array(X[i]), spec).pixels
        return out


class ConvNetClassifier(BaseEstimator, ClassifierMixin):
    """The two-conv network as a classifier over float image batches.

    X is (n, h, w, 3) with values in [0, 1]; the input size is taken
    from the data at fit time and the class list from y. Training is
    plain minibatch Adam for a fixed number of epochs; no internal
    validation split, no early stopping.
    """

    def __init__(self, conv_filters: int = 64, kernel_size: int = 5,
                 dense_units: int = 160, dropout_rate: float = 0.0,
                 learning_rate: float = 1e-4, epochs: int = 15,
                 batch_size: int = 32, seed: int = 42):
        self.conv_filters = conv_filters
        self.kernel_size = kernel_size
        self.dense_units = dense_units
        self.dropout_rate = dropout_rate
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed

    def fit(self, X, y):
        X = check_image_batch(X, dtype=np.float32)
        y = check_labels(y, X.shape[0])
        self.classes_ = np.unique(y)
        if len(self.classes_) < 2:
            raise ValueError("fit needs at least 2 distinct classes")
        y_idx = np.searchsorted(self.classes_, y)
        spec = ModelSpec(
            conv_filters=self.conv_filters,
            kernel_size=self.kernel_size,
            dense_units=self.dense_units,
            dropout_rate=self.dropout_rate,
            input_height=X.shape[1],
            input_width=X.shape[2],
            input_channels=X.shape[3],
            classes=len(self.classes_),
        )
        params = init_params(spec, derive_seed(self.seed, "init"))
        state = init_adam(params.as_dict(), self.learning_rate)
        n = X.shape[0]
        for epoch in range(1, self.epochs + 1):
            order = np.random.default_rng(
                derive_seed(self.seed, "shuffle", epoch)).permutation(n)
            for batch_index, start in enumerate(range(0, n, self.batch_size)):
                idx = order[start:start + self.batch_size]
                probs, trace = model_forward(
                    spec, params, X[idx], mode="train",
                    seed=derive_seed(self.seed, "dropout", epoch, batch_index))
                if not np.isfinite(probs).all():
                    raise NumericalError(
                        f"non-finite loss at epoch {epoch} batch {batch_index}")
                loss, d_logits = sparse_ce_loss(probs, y_idx[idx])
                grads = backward_from_trace(spec, params, trace, d_logits)
                adam_step(params.as_dict(), grads.as_dict(), state)
        self.spec_ = spec
        self.params_ = params
        self.n_features_in_ = X.shape[1] * X.shape[2] * X.shape[3]
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError(
                "This ConvNetClassifier instance is not fitted yet; call fit first")

    def predict_proba(self, X) -> np.ndarray:
        self._check_fitted()
        X = check_image_batch(X, dtype=np.float32)
        out = []
        for start in range(0, X.shape[0], self.batch_size):
            probs, _ = model_forward(self.spec_, self.params_,
                                     X[start:start + self.batch_size], mode="eval")
            out.append(probs)
        return np.concatenate(out)

    def predict(self, X) -> np.ndarray:
        self._check_fitted()
        return self.classes_[argmax_last_axis(self.predict_proba(X))]
