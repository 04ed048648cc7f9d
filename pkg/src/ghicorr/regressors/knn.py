"""k-nearest-neighbor regression on internally standardized features.

Euclidean distance is scale sensitive and the feature blocks mix degC, %,
and W/m2, so fit() z-scores every column using training statistics
(zero-variance columns pass through unscaled). Distance ties at the
k-boundary resolve to the lowest training-row index.

`knn_brute_force_oracle` is a deliberately naive re-implementation used by
the test suite; both paths compute distances, means, and standard
deviations with the same numpy reductions so agreement is exact, not
approximate.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateInput
from .base import BaseRegressor, check_fit_inputs, check_predict_input

WEIGHTINGS = ("uniform", "inverse_distance")


def _column_stats(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # per-column np.mean/np.std keeps the reduction order identical to the
    # oracle's column-at-a-time computation
    means = np.array([np.mean(x[:, j]) for j in range(x.shape[1])])
    scales = np.array([np.std(x[:, j]) for j in range(x.shape[1])])
    scales[scales == 0.0] = 1.0
    return means, scales


class KNNRegressor(BaseRegressor):
    family = "knn"

    def __init__(self, k: int = 5, weighting: str = "uniform"):
        self.k = k
        self.weighting = weighting
        self.x_ = None
        self.y_ = None
        self.means_ = None
        self.scales_ = None
        self.n_rows_ = None

    def fit(self, x, y) -> "KNNRegressor":
        x, y = check_fit_inputs(x, y)
        if self.k < 1:
            raise DegenerateInput(f"k must be >= 1, got {self.k}")
        if self.k > x.shape[0]:
            raise DegenerateInput(f"k={self.k} exceeds {x.shape[0]} training rows")
        if self.weighting not in WEIGHTINGS:
            raise ValueError(f"unknown weighting {self.weighting!r}")
        self.means_, self.scales_ = _column_stats(x)
        self.x_ = (x - self.means_) / self.scales_
        self.y_ = y.copy()
        self.n_rows_ = x.shape[0]
        return self

    def predict(self, x) -> np.ndarray:
        self._check_fitted("x_")
        x = check_predict_input(x, self.x_.shape[1])
        q = (x - self.means_) / self.scales_
        out = np.empty(x.shape[0])
        # cap the broadcast buffer at ~2M floats
        chunk = max(1, int(2e6) // max(1, self.x_.shape[0] * self.x_.shape[1]))
        for start in range(0, q.shape[0], chunk):
            block = q[start:start + chunk]
            diff = block[:, None, :] - self.x_[None, :, :]
            dist = np.sum(diff * diff, axis=2)
            order = np.argsort(dist, axis=1, kind="stable")[:, :self.k]
            if self.weighting == "uniform":
                out[start:start + chunk] = np.mean(self.y_[order], axis=1)
            else:
                d = np.take_along_axis(dist, order, axis=1)
                out[start:start + chunk] = _inverse_distance_mean(self.y_[order], d)
        return out


def _inverse_distance_mean(targets: np.ndarray, sq_dist: np.ndarray) -> np.ndarray:
    # rows containing an exact match average the zero-distance neighbors only
    zero = sq_dist <= 0.0
    with np.errstate(divide="ignore"):
        w = 1.0 / np.sqrt(sq_dist)
    w[zero] = 1.0
    w[~zero & zero.any(axis=1)[:, None]] = 0.0
    return np.sum(w * targets, axis=1) / np.sum(w, axis=1)


def knn_brute_force_oracle(train_x, train_y, query_x, k: int) -> np.ndarray:
    """Exhaustive O(n*m) uniform k-NN regression, for cross-checking predict.

    Same standardization and tie rule as KNNRegressor, coded with plain
    per-row loops instead of the vectorized path.
    """
    train_x = np.asarray(train_x, dtype=np.float64)
    train_y = np.asarray(train_y, dtype=np.float64)
    query_x = np.asarray(query_x, dtype=np.float64)
    n, m = train_x.shape
    means = np.array([np.mean(train_x[:, j]) for j in range(m)])
    scales = np.array([np.std(train_x[:, j]) for j in range(m)])
    scales[scales == 0.0] = 1.0
    xs = (train_x - means) / scales
    out = np.empty(query_x.shape[0])
    for i in range(query_x.shape[0]):
        q = (query_x[i] - means) / scales
        dist = [float(np.sum((q - xs[j]) ** 2)) for j in range(n)]
        ranked = sorted(range(n), key=lambda j: (dist[j], j))
        out[i] = np.mean(train_y[np.array(ranked[:k])])
    return out
