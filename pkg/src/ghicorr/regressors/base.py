"""Shared estimator plumbing: parameter introspection and input validation.

The regressors follow the familiar fit/predict estimator protocol:
constructor keywords are hyperparameters, `fit(X, y)` returns self, fitted
state lives in trailing-underscore attributes, and get_params/set_params
make the estimators usable with generic search code.
"""

from __future__ import annotations

import inspect

import numpy as np

from ..errors import DegenerateInput, NonFiniteInput, NotFitted, ShapeMismatch


def as_matrix(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D feature matrix, got ndim={x.ndim}")
    return np.ascontiguousarray(x)


def as_vector(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise ShapeMismatch(f"expected a 1-D target vector, got ndim={y.ndim}")
    return np.ascontiguousarray(y)


def check_fit_inputs(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = as_matrix(x)
    y = as_vector(y)
    if x.shape[0] != y.shape[0]:
        raise ShapeMismatch(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
    if x.shape[0] < 2:
        raise DegenerateInput(f"need at least 2 training rows, got {x.shape[0]}")
    if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
        raise NonFiniteInput("training data contains NaN or infinite values")
    return x, y


def check_predict_input(x, n_columns: int) -> np.ndarray:
    x = as_matrix(x)
    if x.shape[1] != n_columns:
        raise ShapeMismatch(f"model was fit on {n_columns} columns, got {x.shape[1]}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("prediction input contains NaN or infinite values")
    return x


def normalize_seed(seed: int) -> int:
    return int(seed) & 0xFFFFFFFFFFFFFFFF


class BaseRegressor:
    """Minimal estimator base giving get_params/set_params from __init__."""

    family = ""

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [p for p in sig.parameters if p != "self"]

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params) -> "BaseRegressor":
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"invalid parameter {key!r} for {type(self).__name__}")
            setattr(self, key, value)
        return self

    def _check_fitted(self, attribute: str) -> None:
        if getattr(self, attribute, None) is None:
            raise NotFitted(f"{type(self).__name__} is not fitted; call fit first")

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"
