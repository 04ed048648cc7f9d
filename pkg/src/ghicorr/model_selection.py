"""Evaluation protocol: the NRMSE metric, k-fold CV, randomized
hyperparameter search, and the end-to-end experiment runner.

The experiment runner draws one train/test split per (dataset, seed) and
shares its test timestamps across every model spec, so lagged variants are
scored on the intersection of that split with the rows they can emit.
Hyperparameter search only ever sees training rows.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .data import AlignedDataset, split_train_test
from .errors import BadK, GhicorrError, LengthMismatch, SearchFailed, ZeroMeanTruth
from .features import (
    BaselineSpec,
    FeatureVariant,
    build_features,
    predict_baseline,
)
from .regressors import FAMILIES, make_regressor


def nrmse(pred, truth) -> float:
    """Root-mean-square error normalized by the mean of the true values."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise LengthMismatch(f"shape mismatch: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise LengthMismatch("need at least one value")
    denom = float(np.mean(truth))
    if denom <= 0.0:
        raise ZeroMeanTruth(f"mean of truth must be positive, got {denom}")
    return float(np.sqrt(np.mean((pred - truth) ** 2)) / denom)


def kfold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Shuffled partition of range(n) into k folds with sizes differing <= 1."""
    if not 2 <= k <= n:
        raise BadK(f"need 2 <= k <= n, got k={k}, n={n}")
    perm = np.random.default_rng(_u64(seed)).permutation(n)
    sizes = [n // k + (1 if i < n % k else 0) for i in range(k)]
    folds = []
    start = 0
    for size in sizes:
        folds.append(np.sort(perm[start:start + size]))
        start += size
    return folds


DEFAULT_GRIDS = {
    "knn": {
        "k": [3, 5, 10, 20],
        "weighting": ["uniform"],
    },
    "forest": {
        "n_trees": [50, 100, 200],
        "max_depth": [3, 5, 8, None],
        "min_samples_leaf": [1, 3, 10],
        "max_features_fraction": [0.33, 0.6, 1.0],
    },
    "boost": {
        "n_rounds": [50, 100, 200],
        "learning_rate": [0.05, 0.1, 0.3],
        "max_depth": [3, 5, 8, None],
        "min_samples_leaf": [1, 3, 10],
        "subsample_fraction": [0.7, 1.0],
    },
}


@dataclass(frozen=True)
class HyperparameterSpace:
    family: str
    grid: dict[str, list]
    n_samples: int = 25

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        for name, candidates in self.grid.items():
            if not candidates:
                raise ValueError(f"empty candidate list for {name!r}")

    @classmethod
    def default(cls, family: str, n_samples: int = 25) -> "HyperparameterSpace":
        return cls(family=family, grid=dict(DEFAULT_GRIDS[family]), n_samples=n_samples)

    def cardinality(self) -> int:
        total = 1
        for candidates in self.grid.values():
            total *= len(candidates)
        return total


def sample_configs(space: HyperparameterSpace, seed: int) -> list[dict]:
    """Draw n_samples configs uniformly with replacement, then de-duplicate."""
    rng = np.random.default_rng(_u64(seed))
    names = sorted(space.grid)
    drawn = []
    seen = set()
    for _ in range(space.n_samples):
        cfg = {name: space.grid[name][int(rng.integers(len(space.grid[name])))]
               for name in names}
        key = tuple(sorted((k, repr(v)) for k, v in cfg.items()))
        if key not in seen:
            seen.add(key)
            drawn.append(cfg)
    return drawn


@dataclass(frozen=True)
class TrialResult:
    trial_index: int
    params: dict
    fold_scores: tuple[float, ...]
    mean_nrmse: float
    error: str | None = None


@dataclass(frozen=True)
class SearchResult:
    family: str
    best_params: dict
    best_mean_nrmse: float
    trials: tuple[TrialResult, ...]


def randomized_search(space: HyperparameterSpace, x, y, k: int, seed: int) -> SearchResult:
    """Randomized grid search scored by mean validation NRMSE over k folds.

    Fold assignments are shared across trials; the regressor seed for trial i
    is seed ^ i. Failed trials score +inf instead of aborting the search; ties
    on the mean go to the earliest-drawn config.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    folds = kfold_indices(x.shape[0], k, seed)
    all_idx = np.arange(x.shape[0])
    trials = []
    best = None
    for i, params in enumerate(sample_configs(space, seed)):
        trial_seed = _u64(seed) ^ i
        scores = []
        error = None
        try:
            for fold in folds:
                train = np.setdiff1d(all_idx, fold, assume_unique=True)
                model = make_regressor(space.family, params, seed=trial_seed)
                model.fit(x[train], y[train])
                scores.append(nrmse(model.predict(x[fold]), y[fold]))
            mean = float(np.mean(scores))
        except GhicorrError as exc:
            error = f"{type(exc).__name__}: {exc}"
            mean = float("inf")
        trial = TrialResult(i, params, tuple(scores), mean, error)
        trials.append(trial)
        if best is None or trial.mean_nrmse < best.mean_nrmse:
            best = trial
    if best is None or not np.isfinite(best.mean_nrmse):
        raise SearchFailed("every search trial failed")
    return SearchResult(space.family, dict(best.params), best.mean_nrmse, tuple(trials))


@dataclass(frozen=True)
class ModelSpec:
    """One experiment arm: a baseline or a feature-variant + regressor pair."""

    label: str
    kind: str  # "baseline" | "corrected"
    baseline: BaselineSpec | None = None
    variant: FeatureVariant | None = None
    family: str | None = None

    @classmethod
    def for_baseline(cls, spec: BaselineSpec, label: str | None = None) -> "ModelSpec":
        return cls(label=label or spec.label, kind="baseline", baseline=spec)

    @classmethod
    def for_variant(cls, variant: FeatureVariant, family: str,
                    label: str | None = None) -> "ModelSpec":
        if family not in FAMILIES:
            raise ValueError(f"unknown family {family!r}")
        return cls(label=label or f"{variant.label}_{family}", kind="corrected",
                   variant=variant, family=family)


@dataclass(frozen=True)
class ProtocolConfig:
    test_fraction: float = 0.2
    split_mode: str = "random"
    k: int = 5
    n_samples: int = 25
    seed: int = 0
    # optional per-family search-space overrides; defaults to DEFAULT_GRIDS
    spaces: dict | None = None

    def space_for(self, family: str) -> HyperparameterSpace:
        if self.spaces and family in self.spaces:
            return self.spaces[family]
        return HyperparameterSpace.default(family, n_samples=self.n_samples)


@dataclass(frozen=True)
class ReportEntry:
    location: str
    label: str
    status: str  # "ok" | "failed"
    test_nrmse: float | None
    cv_mean_nrmse: float | None
    hyperparameters: dict | None
    n_train: int
    n_test: int
    seed: int
    message: str = ""


@dataclass(frozen=True)
class EvaluationReport:
    entries: tuple[ReportEntry, ...]
    metadata: dict

    def to_json(self) -> str:
        doc = {"metadata": self.metadata, "entries": [asdict(e) for e in self.entries]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["location", "label", "test_nrmse", "cv_mean_nrmse",
                         "n_train", "n_test", "seed"])
        for e in self.entries:
            writer.writerow([
                e.location, e.label,
                "" if e.test_nrmse is None else repr(e.test_nrmse),
                "" if e.cv_mean_nrmse is None else repr(e.cv_mean_nrmse),
                e.n_train, e.n_test, e.seed,
            ])
        return out.getvalue()

    def entry(self, label: str) -> ReportEntry:
        for e in self.entries:
            if e.label == label:
                return e
        raise KeyError(label)


def _u64(seed: int) -> int:
    return int(seed) & 0xFFFFFFFFFFFFFFFF


def dataset_fingerprint(ds: AlignedDataset) -> str:
    h = hashlib.sha256()
    h.update(repr((ds.target_location, ds.neighbor_locations, ds.channel_set,
                   ds.epoch.isoformat(), ds.filtered)).encode())
    h.update(np.array([(t.day_index, t.hour_of_day) for t in ds.times]).tobytes())
    for var in sorted(ds.met):
        h.update(ds.met[var].tobytes())
    for key in sorted(ds.nwp):
        for var in sorted(ds.nwp[key]):
            h.update(ds.nwp[key][var].tobytes())
    return h.hexdigest()


def _config_fingerprint(specs, protocol: ProtocolConfig) -> str:
    doc = {
        "specs": [(s.label, s.kind, s.family,
                   s.variant.label if s.variant else None,
                   s.baseline.label if s.baseline else None) for s in specs],
        "protocol": {
            "test_fraction": protocol.test_fraction,
            "split_mode": protocol.split_mode,
            "k": protocol.k,
            "n_samples": protocol.n_samples,
            "seed": protocol.seed,
        },
    }
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def evaluate_experiment(ds: AlignedDataset, specs, protocol: ProtocolConfig) -> EvaluationReport:
    """Score every spec on one shared train/test split of the dataset.

    A failing spec is reported with status "failed" and does not abort the
    rest. Entries come back in spec order, one per spec.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("no specs to evaluate")
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        dupes = sorted({l for l in labels if labels.count(l) > 1})
        raise ValueError(f"duplicate spec labels: {dupes}")
    if not ds.filtered:
        raise ValueError("evaluate_experiment expects a daylight-filtered dataset")

    train_ds, test_ds = split_train_test(
        ds, protocol.test_fraction, protocol.seed, protocol.split_mode)
    test_times = set(test_ds.times)
    entries = []
    for spec in specs:
        try:
            entries.append(_evaluate_spec(ds, spec, protocol, test_times))
        except GhicorrError as exc:
            entries.append(ReportEntry(
                location=ds.target_location, label=spec.label, status="failed",
                test_nrmse=None, cv_mean_nrmse=None, hyperparameters=None,
                n_train=0, n_test=0, seed=protocol.seed,
                message=f"{type(exc).__name__}: {exc}"))
    metadata = {
        "dataset_fingerprint": dataset_fingerprint(ds),
        "config_fingerprint": _config_fingerprint(specs, protocol),
        "toolkit_version": __version__,
        "n_rows": ds.n_rows,
        "n_test_times": len(test_times),
    }
    return EvaluationReport(tuple(entries), metadata)


def _evaluate_spec(ds, spec: ModelSpec, protocol: ProtocolConfig,
                   test_times: set) -> ReportEntry:
    if spec.kind == "baseline":
        result = predict_baseline(ds, spec.baseline)
        ghi = {t: g for t, g in zip(ds.times, ds.met["ghi"])}
        mask = [i for i, t in enumerate(result.row_times) if t in test_times]
        preds = result.predictions[mask]
        truth = np.array([ghi[result.row_times[i]] for i in mask])
        return ReportEntry(
            location=ds.target_location, label=spec.label, status="ok",
            test_nrmse=nrmse(preds, truth), cv_mean_nrmse=None,
            hyperparameters=None, n_train=0, n_test=len(mask),
            seed=protocol.seed)

    fm = build_features(ds, spec.variant)
    in_test = np.array([t in test_times for t in fm.row_times])
    train_idx = np.flatnonzero(~in_test)
    test_idx = np.flatnonzero(in_test)
    if len(test_idx) == 0 or len(train_idx) == 0:
        raise SearchFailed(f"spec {spec.label!r} has an empty train or test side")
    # one search seed for every spec: arms of the same family then explore the
    # same candidate draws, which keeps cross-arm comparisons paired
    search_seed = protocol.seed
    space = protocol.space_for(spec.family)
    search = randomized_search(space, fm.x[train_idx], fm.y[train_idx],
                               protocol.k, search_seed)
    model = make_regressor(spec.family, search.best_params, seed=search_seed)
    model.fit(fm.x[train_idx], fm.y[train_idx])
    score = nrmse(model.predict(fm.x[test_idx]), fm.y[test_idx])
    return ReportEntry(
        location=ds.target_location, label=spec.label, status="ok",
        test_nrmse=score, cv_mean_nrmse=search.best_mean_nrmse,
        hyperparameters=dict(search.best_params),
        n_train=len(train_idx), n_test=len(test_idx),
        seed=protocol.seed)
