"""Plain squared-error gradient boosting over regression trees.

Stage 0 predicts mean(y); every round fits a tree to the current residuals
(optionally on a row subsample) and adds learning_rate times its output.
The training-MSE trace is recorded per round, stage 0 included, so the
non-increasing-loss property can be audited after the fact.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateInput, WrongFamily
from .base import BaseRegressor, check_fit_inputs, check_predict_input, normalize_seed
from .tree import RegressionTree, grow_tree


class GradientBoostingRegressor(BaseRegressor):
    family = "boost"

    def __init__(self, n_rounds: int = 100, learning_rate: float = 0.1,
                 max_depth: int | None = 3, min_samples_leaf: int = 1,
                 subsample_fraction: float = 1.0, seed: int = 0):
        self.n_rounds = n_rounds
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.subsample_fraction = subsample_fraction
        self.seed = seed
        self.base_value_ = None
        self.trees_ = None
        self.loss_trace_ = None
        self.n_columns_ = None
        self.n_rows_ = None

    def _validate_params(self):
        if self.n_rounds < 0:
            raise DegenerateInput(f"n_rounds must be >= 0, got {self.n_rounds}")
        if not 0.0 < self.learning_rate <= 1.0:
            raise DegenerateInput(f"learning_rate must be in (0, 1], got {self.learning_rate}")
        if not 0.0 < self.subsample_fraction <= 1.0:
            raise DegenerateInput(
                f"subsample_fraction must be in (0, 1], got {self.subsample_fraction}")
        if self.min_samples_leaf < 1:
            raise DegenerateInput(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if self.max_depth is not None and self.max_depth < 0:
            raise DegenerateInput(f"max_depth must be >= 0 or None, got {self.max_depth}")

    def fit(self, x, y) -> "GradientBoostingRegressor":
        x, y = check_fit_inputs(x, y)
        self._validate_params()
        n, m = x.shape
        base = normalize_seed(self.seed)
        self.base_value_ = float(np.mean(y))
        pred = np.full(n, self.base_value_)
        trace = [float(np.mean((y - pred) ** 2))]
        trees = []
        n_sub = max(1, int(round(self.subsample_fraction * n)))
        for r in range(self.n_rounds):
            rng = np.random.default_rng((base, r))
            residual = y - pred
            if n_sub < n:
                idx = np.sort(rng.choice(n, size=n_sub, replace=False))
                xr, yr = x[idx], residual[idx]
            else:
                xr, yr = x, residual
            tree = grow_tree(
                xr, yr,
                max_depth=self.max_depth,
                min_samples_leaf=self.min_samples_leaf,
                rng_seed=int(rng.integers(0, 2**63)),
            )
            trees.append(tree)
            pred = pred + self.learning_rate * tree.predict(x)
            trace.append(float(np.mean((y - pred) ** 2)))
        self.trees_ = trees
        self.loss_trace_ = np.array(trace)
        self.n_columns_ = m
        self.n_rows_ = n
        return self

    def predict(self, x) -> np.ndarray:
        self._check_fitted("trees_")
        x = check_predict_input(x, self.n_columns_)
        acc = np.full(x.shape[0], self.base_value_)
        for tree in self.trees_:
            acc += self.learning_rate * tree.predict(x)
        return acc

    def _state_dict(self) -> dict:
        return {
            "base_value": self.base_value_,
            "trees": [t.to_dict() for t in self.trees_],
            "loss_trace": self.loss_trace_.tolist(),
            "n_columns": self.n_columns_,
        }

    def _load_state(self, state: dict) -> None:
        self.base_value_ = float(state["base_value"])
        self.trees_ = [RegressionTree.from_dict(d) for d in state["trees"]]
        self.loss_trace_ = np.array(state["loss_trace"])
        self.n_columns_ = int(state["n_columns"])


def boosting_loss_trace(model) -> np.ndarray:
    """Training MSE per boosting stage (stage 0 first, n_rounds + 1 entries)."""
    if getattr(model, "family", None) != "boost":
        raise WrongFamily(f"loss trace only exists for boosting models, got {model!r}")
    model._check_fitted("trees_")
    return model.loss_trace_.copy()
