"""Bootstrap-aggregated regression trees (bagging).

Each tree draws its bootstrap sample and split-time column subsets from an
independent generator keyed by (seed, tree index), so per-tree work could be
scheduled in any order without changing the fit.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateInput
from .base import BaseRegressor, check_fit_inputs, check_predict_input, normalize_seed
from .tree import RegressionTree, grow_tree


class RandomForestRegressor(BaseRegressor):
    family = "forest"

    def __init__(self, n_trees: int = 100, max_depth: int | None = None,
                 min_samples_leaf: int = 1, max_features_fraction: float = 1.0,
                 bootstrap: bool = True, seed: int = 0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features_fraction = max_features_fraction
        self.bootstrap = bootstrap
        self.seed = seed
        self.trees_ = None
        self.n_columns_ = None
        self.n_rows_ = None

    def _validate_params(self):
        if self.n_trees < 1:
            raise DegenerateInput(f"n_trees must be >= 1, got {self.n_trees}")
        if self.min_samples_leaf < 1:
            raise DegenerateInput(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if not 0.0 < self.max_features_fraction <= 1.0:
            raise DegenerateInput(
                f"max_features_fraction must be in (0, 1], got {self.max_features_fraction}")
        if self.max_depth is not None and self.max_depth < 0:
            raise DegenerateInput(f"max_depth must be >= 0 or None, got {self.max_depth}")

    def fit(self, x, y) -> "RandomForestRegressor":
        x, y = check_fit_inputs(x, y)
        self._validate_params()
        n, m = x.shape
        n_consider = max(1, int(round(self.max_features_fraction * m)))
        base = normalize_seed(self.seed)
        trees = []
        for i in range(self.n_trees):
            rng = np.random.default_rng((base, i))
            if self.bootstrap:
                idx = rng.integers(0, n, size=n)
                xb, yb = x[idx], y[idx]
            else:
                xb, yb = x, y
            trees.append(grow_tree(
                xb, yb,
                max_depth=self.max_depth,
                min_samples_leaf=self.min_samples_leaf,
                n_consider=n_consider,
                rng_seed=int(rng.integers(0, 2**63)),
            ))
        self.trees_ = trees
        self.n_columns_ = m
        self.n_rows_ = n
        return self

    def predict(self, x) -> np.ndarray:
        self._check_fitted("trees_")
        x = check_predict_input(x, self.n_columns_)
        acc = np.zeros(x.shape[0])
        for tree in self.trees_:
            acc += tree.predict(x)
        return acc / len(self.trees_)

    def _state_dict(self) -> dict:
        return {
            "trees": [t.to_dict() for t in self.trees_],
            "n_columns": self.n_columns_,
        }

    def _load_state(self, state: dict) -> None:
        self.trees_ = [RegressionTree.from_dict(d) for d in state["trees"]]
        self.n_columns_ = int(state["n_columns"])
