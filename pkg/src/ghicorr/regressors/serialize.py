"""Versioned JSON persistence for fitted regressors.

Round-tripping a model through to_dict/from_dict (or a JSON file) must give
prediction-identical results; floats survive exactly because json uses
repr-based shortest round-trip formatting.
"""

from __future__ import annotations

import json

import numpy as np

from ..errors import NotFitted
from .boosting import GradientBoostingRegressor
from .forest import RandomForestRegressor
from .knn import KNNRegressor

FORMAT_NAME = "ghicorr-model"
FORMAT_VERSION = 1

FAMILIES = {
    "knn": KNNRegressor,
    "forest": RandomForestRegressor,
    "boost": GradientBoostingRegressor,
}


def make_regressor(family: str, params: dict | None = None, seed: int | None = None):
    """Construct an unfitted regressor for a family name."""
    if family not in FAMILIES:
        raise ValueError(f"unknown regressor family {family!r}; expected one of {sorted(FAMILIES)}")
    model = FAMILIES[family]()
    if params:
        model.set_params(**params)
    if seed is not None and "seed" in model._param_names():
        model.set_params(seed=seed)
    return model


def _knn_state(model: KNNRegressor) -> dict:
    return {
        "x": model.x_.tolist(),
        "y": model.y_.tolist(),
        "means": model.means_.tolist(),
        "scales": model.scales_.tolist(),
    }


def _knn_load(model: KNNRegressor, state: dict) -> None:
    model.x_ = np.array(state["x"], dtype=np.float64)
    model.y_ = np.array(state["y"], dtype=np.float64)
    model.means_ = np.array(state["means"], dtype=np.float64)
    model.scales_ = np.array(state["scales"], dtype=np.float64)


def model_to_dict(model) -> dict:
    family = getattr(model, "family", None)
    if family not in FAMILIES:
        raise ValueError(f"cannot serialize object of type {type(model).__name__}")
    if family == "knn":
        if model.x_ is None:
            raise NotFitted("cannot serialize an unfitted model")
        state = _knn_state(model)
    else:
        if model.trees_ is None:
            raise NotFitted("cannot serialize an unfitted model")
        state = model._state_dict()
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "family": family,
        "params": model.get_params(),
        "state": state,
    }


def model_from_dict(doc: dict):
    if doc.get("format") != FORMAT_NAME:
        raise ValueError(f"not a {FORMAT_NAME} document")
    if doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    model = make_regressor(doc["family"], doc.get("params") or {})
    if doc["family"] == "knn":
        _knn_load(model, doc["state"])
    else:
        model._load_state(doc["state"])
    return model


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
