"""Design matrices for the correction models, plus the non-ML baselines.

Every variant predicts the measured target-site GHI at hour t. Columns are
laid out as the hour-of-day feature first, then 5-variable blocks
(T, RH, GHI, DHI, DI) in a fixed order:

    base           t + one NWP block for a channel at the target      (6)
    neighbor       t + NWP blocks at target X0 and neighbors X1..X3   (21)
    lag1 / lag24   base + measured block at t-1 / t-24                (11)
    ensemble       t + NWP blocks for all four channels               (21)
    ensemble_lag24 ensemble + measured block at t-24                  (26)

Measured (met) values only ever enter at offsets <= -1 relative to the
prediction time; `column_provenance` exposes that for leakage audits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import CHANNELS, VARIABLES, AlignedDataset, HourStamp
from .errors import EmptyResult, MissingChannel, MissingNeighbor

#: column-label spellings for the 5 variables, in dataset variable order
VAR_LABELS = ("T", "RH", "GHI", "DHI", "DI")

VARIANT_KINDS = ("base", "neighbor", "lag1", "lag24", "ensemble", "ensemble_lag24")
_CHANNEL_KINDS = ("base", "neighbor", "lag1", "lag24")


@dataclass(frozen=True)
class FeatureVariant:
    kind: str
    channel: str | None = None

    def __post_init__(self):
        if self.kind not in VARIANT_KINDS:
            raise ValueError(f"unknown variant kind {self.kind!r}")
        if self.kind in _CHANNEL_KINDS:
            if self.channel not in CHANNELS:
                raise ValueError(f"variant {self.kind!r} needs a channel, got {self.channel!r}")
        elif self.channel is not None:
            raise ValueError(f"variant {self.kind!r} takes no channel")

    @property
    def lag_hours(self) -> int:
        return {"lag1": 1, "lag24": 24, "ensemble_lag24": 24}.get(self.kind, 0)

    @property
    def label(self) -> str:
        return self.kind if self.channel is None else f"{self.kind}_{self.channel}"


@dataclass(frozen=True)
class BaselineSpec:
    kind: str  # "raw_wrf" | "persistence"
    channel: str | None = None
    lag_hours: int | None = None

    def __post_init__(self):
        if self.kind == "raw_wrf":
            if self.channel not in CHANNELS:
                raise ValueError(f"raw_wrf baseline needs a channel, got {self.channel!r}")
        elif self.kind == "persistence":
            if self.lag_hours not in (1, 24):
                raise ValueError(f"persistence lag must be 1 or 24, got {self.lag_hours!r}")
        else:
            raise ValueError(f"unknown baseline kind {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == "raw_wrf":
            return f"raw_wrf_{self.channel}"
        return f"persistence_{self.lag_hours}"


@dataclass(frozen=True)
class FeatureMatrix:
    column_names: tuple[str, ...]
    x: np.ndarray
    y: np.ndarray
    row_times: tuple[HourStamp, ...]
    provenance: tuple[tuple[str, str, int], ...]
    variant: FeatureVariant
    n_dropped: int = 0

    @property
    def n_rows(self) -> int:
        return self.x.shape[0]

    def to_csv(self) -> bytes:
        """Feature columns plus a trailing `target` column, for diffing."""
        lines = [",".join(self.column_names + ("target",))]
        for i in range(self.n_rows):
            cells = [repr(float(v)) for v in self.x[i]] + [repr(float(self.y[i]))]
            lines.append(",".join(cells))
        return ("\n".join(lines) + "\n").encode("utf-8")


@dataclass(frozen=True)
class BaselinePrediction:
    predictions: np.ndarray
    row_times: tuple[HourStamp, ...]
    n_dropped: int = 0


def _require_channels(ds: AlignedDataset, channels) -> None:
    for ch in channels:
        if ch not in ds.channel_set:
            raise MissingChannel(ch)


def _nwp_block(ds: AlignedDataset, channel: str, location: str, loc_tag: str,
               suffix: str = "") -> tuple[list, list, list]:
    series = ds.nwp[(channel, location)]
    names, cols, prov = [], [], []
    for var, label in zip(VARIABLES, VAR_LABELS):
        names.append(f"{label}_wrf_{channel}{suffix}")
        cols.append(series[var])
        prov.append((names[-1], f"nwp:{channel}:{loc_tag}", 0))
    return names, cols, prov


def build_features(ds: AlignedDataset, variant: FeatureVariant) -> FeatureMatrix:
    """Assemble the named design matrix and target vector for one variant.

    The dataset must already be daylight filtered. Rows whose lagged met
    source falls before the measured series starts are dropped (counted in
    n_dropped); lagged lookups draw on the full unfiltered met series, so a
    t-1 lookup at 08:00 resolves to the 07:00 measurement.
    """
    if not ds.filtered:
        raise ValueError("build_features expects a daylight-filtered dataset")
    if variant.kind in ("ensemble", "ensemble_lag24"):
        _require_channels(ds, CHANNELS)
    else:
        _require_channels(ds, [variant.channel])
    if variant.kind == "neighbor" and not ds.neighbor_locations:
        raise MissingNeighbor("neighbor variant needs at least one neighbor location")

    names: list[str] = ["t"]
    cols: list[np.ndarray] = [np.array([t.hour_of_day for t in ds.times], dtype=float)]
    prov: list[tuple[str, str, int]] = [("t", "time:hour_of_day", 0)]

    if variant.kind in ("base", "lag1", "lag24"):
        n, c, p = _nwp_block(ds, variant.channel, ds.target_location, "X0")
        names += n; cols += c; prov += p
    elif variant.kind == "neighbor":
        for i, loc in enumerate(ds.locations):
            n, c, p = _nwp_block(ds, variant.channel, loc, f"X{i}", suffix=f"_X{i}")
            names += n; cols += c; prov += p
    else:  # ensemble variants
        for ch in CHANNELS:
            n, c, p = _nwp_block(ds, ch, ds.target_location, "X0")
            names += n; cols += c; prov += p

    lag = variant.lag_hours
    keep: list[int] = list(range(ds.n_rows))
    lag_cols: list[list[float]] = []
    if lag:
        keep = []
        lag_rows = []
        for i, t in enumerate(ds.times):
            src = t.shifted(-lag)
            vals = ds.met_lookup.get(src) if src is not None else None
            if vals is None:
                continue
            keep.append(i)
            lag_rows.append(vals)
        if not keep:
            raise EmptyResult("every row lost its lag source")
        lag_cols = [np.array([r[j] for r in lag_rows], dtype=float) for j in range(len(VARIABLES))]
        for label in VAR_LABELS:
            names.append(f"{label}_met_lag{lag}")
            prov.append((names[-1], "met:X0", -lag))
    if not keep:
        raise EmptyResult("no rows to build features from")

    keep_arr = np.asarray(keep, dtype=int)
    x = np.column_stack([c[keep_arr] for c in cols] + lag_cols)
    y = ds.met["ghi"][keep_arr].copy()
    return FeatureMatrix(
        column_names=tuple(names),
        x=x,
        y=y,
        row_times=tuple(ds.times[i] for i in keep),
        provenance=tuple(prov),
        variant=variant,
        n_dropped=ds.n_rows - len(keep),
    )


def predict_baseline(ds: AlignedDataset, spec: BaselineSpec) -> BaselinePrediction:
    """Raw NWP copy-through or measured-persistence predictions on ds rows."""
    if not ds.filtered:
        raise ValueError("predict_baseline expects a daylight-filtered dataset")
    if ds.n_rows == 0:
        raise EmptyResult("empty dataset")
    if spec.kind == "raw_wrf":
        _require_channels(ds, [spec.channel])
        preds = ds.nwp[(spec.channel, ds.target_location)]["ghi"].copy()
        return BaselinePrediction(preds, ds.times, 0)
    ghi_at = {t: v[2] for t, v in ds.met_lookup.items()}
    preds, times = [], []
    for t in ds.times:
        src = t.shifted(-spec.lag_hours)
        value = ghi_at.get(src) if src is not None else None
        if value is None:
            continue
        preds.append(value)
        times.append(t)
    if not preds:
        raise EmptyResult("no row has a persistence source")
    return BaselinePrediction(np.array(preds, dtype=float), tuple(times),
                              ds.n_rows - len(preds))


def column_provenance(fm: FeatureMatrix) -> list[tuple[str, str, int]]:
    """(column, source series, hour offset) for every column of the matrix."""
    return list(fm.provenance)


def leakage_violations(fm: FeatureMatrix) -> list[tuple[str, str, int]]:
    """Columns that would peek at measurements from the prediction hour on."""
    return [(name, src, off) for name, src, off in fm.provenance
            if src.startswith("met:") and off >= 0]
