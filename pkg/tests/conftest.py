import numpy as np
import pytest

from ghicorr.data import align, daylight_filter
from ghicorr.synth import ScenarioConfig, generate_scenario


@pytest.fixture(scope="session")
def small_scenario():
    return generate_scenario(ScenarioConfig(n_days=12, seed=11))


@pytest.fixture(scope="session")
def small_dataset(small_scenario):
    s = small_scenario
    return daylight_filter(align(s.all_met(), s.all_nwp(), "X0", ("X1", "X2", "X3")))


def random_regression_instance(seed, max_rows=200, max_cols=10):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(8, max_rows + 1))
    m = int(rng.integers(1, max_cols + 1))
    scale = rng.uniform(0.1, 50.0, size=m)
    x = rng.normal(size=(n, m)) * scale
    y = rng.normal(size=n) * 100.0 + 400.0
    return x, y


def walk_tree_dict(tree_dict, row):
    """Reference evaluator for a serialized tree: plain node walk."""
    nd = 0
    while tree_dict["feature"][nd] >= 0:
        if row[tree_dict["feature"][nd]] <= tree_dict["threshold"][nd]:
            nd = tree_dict["left"][nd]
        else:
            nd = tree_dict["right"][nd]
    return tree_dict["value"][nd]
