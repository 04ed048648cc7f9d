"""Synthetic tropical irradiance scenarios with biased pseudo-NWP channels.

The generator is a statistical stand-in, not a radiative-transfer model: a
sinusoidal clear-sky curve is attenuated by a cloudiness process with both
hour-scale and day-scale persistence plus a shared regional component, so
neighbor-location and lagged-measurement experiments have real signal to
find. Each NWP channel is an affine distortion of the truth (gain, offset,
optional one-hour smear) plus Gaussian noise; channel noises share a common
component, mirroring how radiation schemes inside one NWP core err together.
"""

from __future__ import annotations

import datetime
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .data import (
    CHANNELS,
    HourStamp,
    MetObservation,
    NwpOutput,
    met_to_csv,
    nwp_to_csv,
)
from .errors import ConfigError


@dataclass(frozen=True)
class ChannelBias:
    gain: float = 1.0
    offset: float = 0.0
    noise_sd: float = 0.0
    lag_smear: int = 0


def _default_biases() -> dict[str, ChannelBias]:
    # one-hour smear on every channel emulates NWP phase error, which is what
    # makes lagged ground-truth measurements worth feeding back in
    return {
        "M1": ChannelBias(gain=0.80, offset=20.0, noise_sd=40.0, lag_smear=1),
        "M2": ChannelBias(gain=1.10, offset=60.0, noise_sd=55.0, lag_smear=1),
        "M3": ChannelBias(gain=1.08, offset=50.0, noise_sd=54.0, lag_smear=1),
        "M4": ChannelBias(gain=1.05, offset=55.0, noise_sd=52.0, lag_smear=1),
    }


@dataclass(frozen=True)
class ScenarioConfig:
    n_days: int = 93
    start_date: datetime.date = datetime.date(2014, 1, 1)
    target: str = "X0"
    neighbors: tuple[str, ...] = ("X1", "X2", "X3")
    peak_clear_ghi: float = 950.0
    cloud_persistence: float = 0.7   # hour-scale AR(1) coefficient
    cloud_depth: float = 0.8         # max fractional attenuation
    day_persistence: float = 0.9     # day-scale AR(1) coefficient
    day_weight: float = 0.8          # share of cloudiness driven by the day state
    local_sd: float = 0.25           # per-location deviation from the regional state
    noise_shared_fraction: float = 0.85  # channel-noise correlation across channels
    channel_biases: dict[str, ChannelBias] = field(default_factory=_default_biases)
    seed: int = 0

    @property
    def locations(self) -> tuple[str, ...]:
        return (self.target,) + tuple(self.neighbors)

    @property
    def channels(self) -> tuple[str, ...]:
        return tuple(c for c in CHANNELS if c in self.channel_biases)

    def validate(self) -> None:
        if self.n_days < 1:
            raise ConfigError("n_days", f"must be >= 1, got {self.n_days}")
        if self.peak_clear_ghi <= 0:
            raise ConfigError("peak_clear_ghi", f"must be > 0, got {self.peak_clear_ghi}")
        if not 0.0 <= self.cloud_persistence < 1.0:
            raise ConfigError("cloud_persistence", f"must be in [0, 1), got {self.cloud_persistence}")
        if not 0.0 <= self.cloud_depth <= 1.0:
            raise ConfigError("cloud_depth", f"must be in [0, 1], got {self.cloud_depth}")
        if not 0.0 <= self.day_persistence < 1.0:
            raise ConfigError("day_persistence", f"must be in [0, 1), got {self.day_persistence}")
        if not 0.0 <= self.day_weight <= 1.0:
            raise ConfigError("day_weight", f"must be in [0, 1], got {self.day_weight}")
        if self.local_sd < 0:
            raise ConfigError("local_sd", f"must be >= 0, got {self.local_sd}")
        if not 0.0 <= self.noise_shared_fraction <= 1.0:
            raise ConfigError("noise_shared_fraction",
                              f"must be in [0, 1], got {self.noise_shared_fraction}")
        if len(set(self.locations)) != len(self.locations):
            raise ConfigError("neighbors", "locations must be distinct")
        if len(self.neighbors) > 3:
            raise ConfigError("neighbors", "at most 3 neighbor locations")
        if not self.channel_biases:
            raise ConfigError("channel_biases", "at least one channel required")
        for ch, bias in self.channel_biases.items():
            if ch not in CHANNELS:
                raise ConfigError(f"channel_biases.{ch}", f"unknown channel, expected one of {CHANNELS}")
            if bias.gain <= 0:
                raise ConfigError(f"channel_biases.{ch}.gain", f"must be > 0, got {bias.gain}")
            if bias.noise_sd < 0:
                raise ConfigError(f"channel_biases.{ch}.noise_sd", f"must be >= 0, got {bias.noise_sd}")
            if bias.lag_smear not in (0, 1):
                raise ConfigError(f"channel_biases.{ch}.lag_smear", f"must be 0 or 1, got {bias.lag_smear}")


@dataclass(frozen=True)
class Scenario:
    config: ScenarioConfig
    met: dict[str, list[MetObservation]]
    nwp: dict[tuple[str, str], list[NwpOutput]]
    cloud_factor: dict[str, np.ndarray]
    clear_sky: np.ndarray  # one diurnal curve, indexed by hour 0..23

    @property
    def n_hours(self) -> int:
        return self.config.n_days * 24

    def all_met(self) -> list[MetObservation]:
        rows = []
        for loc in self.config.locations:
            rows.extend(self.met[loc])
        return rows

    def all_nwp(self) -> list[NwpOutput]:
        rows = []
        for ch in self.config.channels:
            for loc in self.config.locations:
                rows.extend(self.nwp[(ch, loc)])
        return rows


def clear_sky_ghi(hour_of_day: int, peak: float = 950.0) -> float:
    """Idealized clear-sky GHI: a half-sine over 7h-19h peaking at 13h."""
    if not 0 <= hour_of_day <= 23:
        raise ValueError(f"hour must be in [0, 23], got {hour_of_day}")
    if hour_of_day <= 7 or hour_of_day >= 19:
        return 0.0
    return peak * math.sin(math.pi * (hour_of_day - 7) / 12.0)


def _ar1(rng: np.random.Generator, n: int, rho: float) -> np.ndarray:
    """Stationary unit-variance AR(1) path of length n."""
    shocks = rng.standard_normal(n)
    out = np.empty(n)
    if n == 0:
        return out
    out[0] = shocks[0]
    scale = math.sqrt(max(0.0, 1.0 - rho * rho))
    for i in range(1, n):
        out[i] = rho * out[i - 1] + scale * shocks[i]
    return out


def generate_scenario(cfg: ScenarioConfig) -> Scenario:
    """Deterministically generate the met truth and every biased NWP series."""
    cfg.validate()
    rng = np.random.default_rng(int(cfg.seed) & 0xFFFFFFFFFFFFFFFF)
    n = cfg.n_days * 24
    locations = cfg.locations
    channels = cfg.channels

    hours = np.arange(n) % 24
    clear_curve = np.array([clear_sky_ghi(h, cfg.peak_clear_ghi) for h in range(24)])
    clear = clear_curve[hours]

    # cloudiness driver: shared day-scale state + shared hour-scale state
    # + a small independent wobble per location
    day_state = _ar1(rng, cfg.n_days, cfg.day_persistence)
    hour_state = _ar1(rng, n, cfg.cloud_persistence)
    w_day = cfg.day_weight
    w_hour = math.sqrt(max(0.0, 1.0 - w_day * w_day))
    regional = w_day * day_state[np.arange(n) // 24] + w_hour * hour_state

    met_vals: dict[str, dict[str, np.ndarray]] = {}
    cloud_factor: dict[str, np.ndarray] = {}
    diurnal = np.sin(2.0 * math.pi * (hours - 10) / 24.0)
    for loc in locations:
        local = cfg.local_sd * _ar1(rng, n, cfg.cloud_persistence)
        cloudiness = np.clip(0.5 + 0.35 * (regional + local), 0.0, 1.0)
        c = 1.0 - cfg.cloud_depth * cloudiness
        ghi = clear * c
        dhi = np.minimum(ghi, ghi * (0.25 + 0.6 * (1.0 - c)))
        temp = 26.0 + 4.0 * diurnal - 2.5 * cloudiness + 0.2 * rng.standard_normal(n)
        rh = np.clip(68.0 + 20.0 * cloudiness - 6.0 * diurnal + 0.5 * rng.standard_normal(n),
                     0.0, 100.0)
        met_vals[loc] = {"temperature": temp, "relative_humidity": rh,
                         "ghi": ghi, "dhi": dhi}
        cloud_factor[loc] = c

    # channel noise: one shared draw per (variable, location, hour) plus an
    # independent draw per channel, mixed by noise_shared_fraction
    w_sh = math.sqrt(cfg.noise_shared_fraction)
    w_in = math.sqrt(1.0 - cfg.noise_shared_fraction)
    noise_vars = ("ghi", "dhi", "temperature", "relative_humidity")
    shared = {(v, loc): rng.standard_normal(n) for v in noise_vars for loc in locations}
    indiv = {(v, ch, loc): rng.standard_normal(n)
             for v in noise_vars for ch in channels for loc in locations}

    def eps(var: str, ch: str, loc: str) -> np.ndarray:
        return w_sh * shared[(var, loc)] + w_in * indiv[(var, ch, loc)]

    nwp_vals: dict[tuple[str, str], dict[str, np.ndarray]] = {}
    for ch in channels:
        bias = cfg.channel_biases[ch]
        src = np.minimum(np.arange(n) + bias.lag_smear, n - 1)
        for loc in locations:
            m = met_vals[loc]
            ghi = np.maximum(
                0.0, bias.gain * m["ghi"][src] + bias.offset + bias.noise_sd * eps("ghi", ch, loc))
            dhi = np.clip(
                bias.gain * m["dhi"][src] + 0.4 * bias.offset + 0.5 * bias.noise_sd * eps("dhi", ch, loc),
                0.0, ghi)
            temp = m["temperature"][src] + 5.0 * (bias.gain - 1.0) \
                + 0.02 * bias.noise_sd * eps("temperature", ch, loc)
            rh = np.clip(
                m["relative_humidity"][src] + 12.0 * (1.0 - bias.gain)
                + 0.1 * bias.noise_sd * eps("relative_humidity", ch, loc),
                0.0, 100.0)
            nwp_vals[(ch, loc)] = {"temperature": temp, "relative_humidity": rh,
                                   "ghi": ghi, "dhi": dhi}

    dates = [cfg.start_date + datetime.timedelta(days=d) for d in range(cfg.n_days)]
    stamps = [HourStamp(i // 24, i % 24) for i in range(n)]

    met = {
        loc: [
            MetObservation(
                station_id=loc, date=dates[i // 24], time=stamps[i],
                temperature=float(v["temperature"][i]),
                relative_humidity=float(v["relative_humidity"][i]),
                ghi=float(v["ghi"][i]), dhi=float(v["dhi"][i]),
                di=max(0.0, float(v["ghi"][i]) - float(v["dhi"][i])),
            )
            for i in range(n)
        ]
        for loc, v in met_vals.items()
    }
    nwp = {
        (ch, loc): [
            NwpOutput(
                channel=ch, location_id=loc, date=dates[i // 24], time=stamps[i],
                temperature=float(v["temperature"][i]),
                relative_humidity=float(v["relative_humidity"][i]),
                ghi=float(v["ghi"][i]), dhi=float(v["dhi"][i]),
                di=max(0.0, float(v["ghi"][i]) - float(v["dhi"][i])),
            )
            for i in range(n)
        ]
        for (ch, loc), v in nwp_vals.items()
    }
    return Scenario(config=cfg, met=met, nwp=nwp,
                    cloud_factor=cloud_factor, clear_sky=clear_curve)


def scenario_to_csv(scenario: Scenario) -> tuple[bytes, bytes]:
    """Serialize to the met/NWP CSV schemas; parsing the bytes back must
    reproduce the in-memory records exactly."""
    return met_to_csv(scenario.all_met()), nwp_to_csv(scenario.all_nwp())


def scenario_config_from_dict(doc: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from a plain JSON-style dict, validating fields."""
    if not isinstance(doc, dict):
        raise ConfigError("scenario", "expected a JSON object")
    known = {
        "n_days", "start_date", "target", "neighbors", "peak_clear_ghi",
        "cloud_persistence", "cloud_depth", "day_persistence", "day_weight",
        "local_sd", "noise_shared_fraction", "channel_biases", "seed",
    }
    for key in doc:
        if key not in known:
            raise ConfigError(key, "unknown scenario field")
    kwargs = dict(doc)
    if "start_date" in kwargs:
        try:
            kwargs["start_date"] = datetime.date.fromisoformat(kwargs["start_date"])
        except (TypeError, ValueError):
            raise ConfigError("start_date", f"not an ISO date: {kwargs['start_date']!r}") from None
    if "neighbors" in kwargs:
        kwargs["neighbors"] = tuple(str(v) for v in kwargs["neighbors"])
    if "channel_biases" in kwargs:
        biases = {}
        raw = kwargs["channel_biases"]
        if not isinstance(raw, dict):
            raise ConfigError("channel_biases", "expected an object keyed by channel")
        for ch, spec in raw.items():
            if not isinstance(spec, dict):
                raise ConfigError(f"channel_biases.{ch}", "expected an object")
            extra = set(spec) - {"gain", "offset", "noise_sd", "lag_smear"}
            if extra:
                raise ConfigError(f"channel_biases.{ch}", f"unknown fields {sorted(extra)}")
            try:
                biases[ch] = ChannelBias(**{k: (int(v) if k == "lag_smear" else float(v))
                                            for k, v in spec.items()})
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"channel_biases.{ch}", str(exc)) from None
        kwargs["channel_biases"] = biases
    try:
        cfg = ScenarioConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError("scenario", str(exc)) from None
    cfg.validate()
    return cfg


def scenario_config_to_dict(cfg: ScenarioConfig) -> dict:
    return {
        "n_days": cfg.n_days,
        "start_date": cfg.start_date.isoformat(),
        "target": cfg.target,
        "neighbors": list(cfg.neighbors),
        "peak_clear_ghi": cfg.peak_clear_ghi,
        "cloud_persistence": cfg.cloud_persistence,
        "cloud_depth": cfg.cloud_depth,
        "day_persistence": cfg.day_persistence,
        "day_weight": cfg.day_weight,
        "local_sd": cfg.local_sd,
        "noise_shared_fraction": cfg.noise_shared_fraction,
        "channel_biases": {
            ch: {"gain": b.gain, "offset": b.offset,
                 "noise_sd": b.noise_sd, "lag_smear": b.lag_smear}
            for ch, b in sorted(cfg.channel_biases.items())
        },
        "seed": cfg.seed,
    }


def with_seed(cfg: ScenarioConfig, seed: int) -> ScenarioConfig:
    return replace(cfg, seed=seed)
