"""Hourly met-station and NWP point series: parsing, alignment, filtering.

CSV schemas (UTF-8, comma separated, header required):

    met: station_id,date,hour,temperature_c,rh_pct,ghi_wm2,dhi_wm2
    nwp: channel,location_id,date,hour,temperature_c,rh_pct,ghi_wm2,dhi_wm2

`date` is an ISO-8601 calendar date, `hour` an integer 0-23 in local time.
Floats may use plain decimal or scientific notation; a blank cell is an
error, never a silent null.
"""

from __future__ import annotations

import csv
import datetime
import io
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    BadNumeric,
    DuplicateTimestamp,
    EmptyIntersection,
    MissingColumn,
    NegativeInput,
    TooFewRows,
    UnknownChannel,
    UnknownLocation,
)

CHANNELS = ("M1", "M2", "M3", "M4")

#: dataset variable order used everywhere a 5-vector of readings appears
VARIABLES = ("temperature", "relative_humidity", "ghi", "dhi", "di")

MET_HEADER = ("station_id", "date", "hour", "temperature_c", "rh_pct", "ghi_wm2", "dhi_wm2")
NWP_HEADER = ("channel", "location_id", "date", "hour", "temperature_c", "rh_pct", "ghi_wm2", "dhi_wm2")

DAYLIGHT_FIRST_HOUR = 8
DAYLIGHT_LAST_HOUR = 19  # inclusive: 12 daylight hours per day


@dataclass(frozen=True, order=True)
class HourStamp:
    """Hour-resolution timestamp: days since the dataset epoch plus hour of day."""

    day_index: int
    hour_of_day: int

    def __post_init__(self):
        if not 0 <= self.hour_of_day <= 23:
            raise ValueError(f"hour_of_day must be in [0, 23], got {self.hour_of_day}")
        if self.day_index < 0:
            raise ValueError(f"day_index must be >= 0, got {self.day_index}")

    def shifted(self, hours: int) -> "HourStamp | None":
        """Stamp `hours` later (negative = earlier); None if before the epoch."""
        total = self.day_index * 24 + self.hour_of_day + hours
        if total < 0:
            return None
        return HourStamp(total // 24, total % 24)


@dataclass(frozen=True)
class MetObservation:
    station_id: str
    date: datetime.date
    time: HourStamp
    temperature: float
    relative_humidity: float
    ghi: float
    dhi: float
    di: float
    rh_clipped: bool = False
    di_clamped: bool = False


@dataclass(frozen=True)
class NwpOutput:
    channel: str
    location_id: str
    date: datetime.date
    time: HourStamp
    temperature: float
    relative_humidity: float
    ghi: float
    dhi: float
    di: float
    rh_clipped: bool = False
    di_clamped: bool = False


def derive_direct_irradiance(ghi: float, dhi: float) -> float:
    """Direct (beam) irradiance from global and diffuse, clamped at zero.

    Sensor noise can push DHI above GHI; physical direct irradiance cannot be
    negative, so the difference is clamped. Callers that need to surface the
    clamping flag the row (see the parsers).
    """
    if ghi < 0 or dhi < 0:
        raise NegativeInput(f"irradiance must be non-negative, got ghi={ghi}, dhi={dhi}")
    return max(0.0, ghi - dhi)


def _open_text(source) -> io.TextIOBase:
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8"))
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return io.StringIO(data)
    raise TypeError("source must be bytes or a readable stream")


def _header_index(row, required) -> dict:
    if row is None:
        raise MissingColumn(required[0])
    names = [c.strip() for c in row]
    index = {}
    for name in required:
        if name not in names:
            raise MissingColumn(name)
        index[name] = names.index(name)
    return index


def _cell(cells, idx, column: str, line: int) -> str:
    pos = idx[column]
    if pos >= len(cells):
        raise BadNumeric(line, column, "<missing cell>")
    return cells[pos]


def _parse_float(cell: str, line: int, column: str) -> float:
    cell = cell.strip()
    if not cell:
        raise BadNumeric(line, column, cell)
    try:
        value = float(cell)
    except ValueError:
        raise BadNumeric(line, column, cell) from None
    if not np.isfinite(value):
        raise BadNumeric(line, column, cell)
    return value


def _parse_date(cell: str, line: int) -> datetime.date:
    try:
        return datetime.date.fromisoformat(cell.strip())
    except ValueError:
        raise BadNumeric(line, "date", cell) from None


def _parse_hour(cell: str, line: int) -> int:
    cell = cell.strip()
    try:
        hour = int(cell)
    except ValueError:
        raise BadNumeric(line, "hour", cell) from None
    if not 0 <= hour <= 23:
        raise BadNumeric(line, "hour", cell)
    return hour


def _parse_common(cells, idx, line):
    """Parse the shared (date, hour, T, RH, GHI, DHI) tail of a row.

    RH slightly outside [0, 100] is clipped and flagged rather than rejected;
    DHI above GHI clamps the derived DI to zero and flags the row. Negative
    GHI/DHI raises NegativeInput with the offending line.
    """
    date = _parse_date(_cell(cells, idx, "date", line), line)
    hour = _parse_hour(_cell(cells, idx, "hour", line), line)
    temperature = _parse_float(_cell(cells, idx, "temperature_c", line), line, "temperature_c")
    rh = _parse_float(_cell(cells, idx, "rh_pct", line), line, "rh_pct")
    ghi = _parse_float(_cell(cells, idx, "ghi_wm2", line), line, "ghi_wm2")
    dhi = _parse_float(_cell(cells, idx, "dhi_wm2", line), line, "dhi_wm2")
    rh_clipped = rh < 0.0 or rh > 100.0
    rh = min(100.0, max(0.0, rh))
    if ghi < 0 or dhi < 0:
        raise NegativeInput(f"line {line}: negative irradiance (ghi={ghi}, dhi={dhi})")
    di = derive_direct_irradiance(ghi, dhi)
    di_clamped = dhi > ghi
    return date, hour, temperature, rh, ghi, dhi, di, rh_clipped, di_clamped


def parse_met_csv(source) -> list[MetObservation]:
    """Parse a met-station CSV byte stream into observations, file order kept.

    The HourStamp epoch is the earliest date in the file. Raises MissingColumn,
    BadNumeric (with 1-based file line), DuplicateTimestamp, NegativeInput.
    """
    reader = csv.reader(_open_text(source))
    idx = _header_index(next(reader, None), MET_HEADER)
    rows = []
    seen = set()
    for line, cells in enumerate(reader, start=2):
        if not cells or all(not c.strip() for c in cells):
            continue
        station = _cell(cells, idx, "station_id", line).strip()
        parsed = _parse_common(cells, idx, line)
        key = (station, parsed[0], parsed[1])
        if key in seen:
            raise DuplicateTimestamp(station, parsed[0], parsed[1])
        seen.add(key)
        rows.append((station, parsed))
    if not rows:
        return []
    epoch = min(p[0] for _, p in rows)
    return [
        MetObservation(
            station_id=station,
            date=date,
            time=HourStamp((date - epoch).days, hour),
            temperature=t, relative_humidity=rh, ghi=ghi, dhi=dhi, di=di,
            rh_clipped=rh_clip, di_clamped=di_clamp,
        )
        for station, (date, hour, t, rh, ghi, dhi, di, rh_clip, di_clamp) in rows
    ]


def parse_nwp_csv(source) -> list[NwpOutput]:
    """Parse an NWP CSV byte stream; like parse_met_csv plus channel validation."""
    reader = csv.reader(_open_text(source))
    idx = _header_index(next(reader, None), NWP_HEADER)
    rows = []
    seen = set()
    for line, cells in enumerate(reader, start=2):
        if not cells or all(not c.strip() for c in cells):
            continue
        channel = _cell(cells, idx, "channel", line).strip()
        if channel not in CHANNELS:
            raise UnknownChannel(channel, row=line)
        location = _cell(cells, idx, "location_id", line).strip()
        parsed = _parse_common(cells, idx, line)
        key = (channel, location, parsed[0], parsed[1])
        if key in seen:
            raise DuplicateTimestamp(f"{channel}/{location}", parsed[0], parsed[1])
        seen.add(key)
        rows.append((channel, location, parsed))
    if not rows:
        return []
    epoch = min(p[0] for _, _, p in rows)
    return [
        NwpOutput(
            channel=channel,
            location_id=location,
            date=date,
            time=HourStamp((date - epoch).days, hour),
            temperature=t, relative_humidity=rh, ghi=ghi, dhi=dhi, di=di,
            rh_clipped=rh_clip, di_clamped=di_clamp,
        )
        for channel, location, (date, hour, t, rh, ghi, dhi, di, rh_clip, di_clamp) in rows
    ]


def _format_float(v: float) -> str:
    return repr(float(v))


def met_to_csv(observations) -> bytes:
    """Serialize observations back to the met CSV schema (round-trip exact)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(MET_HEADER)
    for o in observations:
        writer.writerow([
            o.station_id, o.date.isoformat(), o.time.hour_of_day,
            _format_float(o.temperature), _format_float(o.relative_humidity),
            _format_float(o.ghi), _format_float(o.dhi),
        ])
    return out.getvalue().encode("utf-8")


def nwp_to_csv(outputs) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(NWP_HEADER)
    for o in outputs:
        writer.writerow([
            o.channel, o.location_id, o.date.isoformat(), o.time.hour_of_day,
            _format_float(o.temperature), _format_float(o.relative_humidity),
            _format_float(o.ghi), _format_float(o.dhi),
        ])
    return out.getvalue().encode("utf-8")


@dataclass(frozen=True)
class AlignedDataset:
    """Time-aligned target met series plus per-(channel, location) NWP series.

    Immutable after construction; every transform returns a new instance.
    `met_lookup` retains the full (unfiltered) target met series so lagged
    lookups can reach hours that the daylight filter removes from `times`.
    """

    target_location: str
    neighbor_locations: tuple[str, ...]
    channel_set: tuple[str, ...]
    epoch: datetime.date
    times: tuple[HourStamp, ...]
    met: dict[str, np.ndarray]
    nwp: dict[tuple[str, str], dict[str, np.ndarray]]
    met_lookup: dict[HourStamp, tuple[float, ...]]
    filtered: bool = False
    n_dropped: int = 0

    @property
    def n_rows(self) -> int:
        return len(self.times)

    @property
    def locations(self) -> tuple[str, ...]:
        return (self.target_location,) + self.neighbor_locations

    def date_of(self, stamp: HourStamp) -> datetime.date:
        return self.epoch + datetime.timedelta(days=stamp.day_index)

    def subset(self, indices) -> "AlignedDataset":
        indices = np.asarray(indices, dtype=int)
        return replace(
            self,
            times=tuple(self.times[i] for i in indices),
            met={v: a[indices] for v, a in self.met.items()},
            nwp={k: {v: a[indices] for v, a in series.items()} for k, series in self.nwp.items()},
        )


def _series_key(record) -> tuple:
    return (record.date, record.time.hour_of_day)


def align(met, nwp, target: str, neighbors=()) -> AlignedDataset:
    """Inner-join the target met series with every required NWP series.

    Joins on calendar (date, hour) so files with different start dates still
    line up; the dataset epoch is the earliest date present in any input.
    Timestamps missing from any required series are dropped and counted.
    """
    neighbors = tuple(neighbors)
    met_rows = [m for m in met if m.station_id == target]
    if not met_rows:
        raise UnknownLocation(target)

    channel_set = tuple(c for c in CHANNELS if any(o.channel == c for o in nwp))
    locations = (target,) + neighbors
    nwp_series: dict[tuple[str, str], dict] = {}
    for o in nwp:
        if o.location_id in locations and o.channel in channel_set:
            nwp_series.setdefault((o.channel, o.location_id), {})[_series_key(o)] = o
    for loc in locations:
        if not any(key[1] == loc for key in nwp_series):
            raise UnknownLocation(loc)

    met_by_key = {_series_key(m): m for m in met_rows}
    required = [set(met_by_key)]
    for ch in channel_set:
        for loc in locations:
            required.append(set(nwp_series.get((ch, loc), {})))
    common = set.intersection(*required)
    union = set.union(*required)
    if not common:
        raise EmptyIntersection("no timestamp shared by all required series")
    n_dropped = len(union) - len(common)

    all_dates = [m.date for m in met_rows] + [o.date for o in nwp]
    epoch = min(all_dates)
    keys = sorted(common)
    times = tuple(HourStamp((d - epoch).days, h) for d, h in keys)

    def pack(records_by_key) -> dict[str, np.ndarray]:
        recs = [records_by_key[k] for k in keys]
        return {v: np.array([getattr(r, v) for r in recs], dtype=float) for v in VARIABLES}

    met_arrays = pack(met_by_key)
    nwp_arrays = {
        (ch, loc): pack(nwp_series[(ch, loc)]) for ch in channel_set for loc in locations
    }
    met_lookup = {
        HourStamp((m.date - epoch).days, m.time.hour_of_day):
            (m.temperature, m.relative_humidity, m.ghi, m.dhi, m.di)
        for m in met_rows
    }
    return AlignedDataset(
        target_location=target,
        neighbor_locations=neighbors,
        channel_set=channel_set,
        epoch=epoch,
        times=times,
        met=met_arrays,
        nwp=nwp_arrays,
        met_lookup=met_lookup,
        filtered=False,
        n_dropped=n_dropped,
    )


def daylight_filter(ds: AlignedDataset) -> AlignedDataset:
    """Keep hours 8..19 inclusive (12 per day). Idempotent."""
    keep = [i for i, t in enumerate(ds.times)
            if DAYLIGHT_FIRST_HOUR <= t.hour_of_day <= DAYLIGHT_LAST_HOUR]
    return replace(ds.subset(keep), filtered=True)


def split_train_test(ds: AlignedDataset, test_fraction: float, seed: int,
                     mode: str = "random") -> tuple[AlignedDataset, AlignedDataset]:
    """Partition rows into train/test; both halves stay time ordered.

    random mode draws a seeded permutation; chronological mode holds out the
    final `test_fraction` of rows. Test size is round(test_fraction * n).
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    if mode not in ("random", "chronological"):
        raise ValueError(f"unknown split mode {mode!r}")
    n = ds.n_rows
    if n == 0:
        raise TooFewRows("cannot split an empty dataset")
    n_test = int(round(test_fraction * n))
    if n_test == 0 or n_test == n:
        raise TooFewRows(f"split of {n} rows at {test_fraction} leaves an empty side")
    if mode == "chronological":
        test_idx = np.arange(n - n_test, n)
        train_idx = np.arange(0, n - n_test)
    else:
        perm = np.random.default_rng(_normalize_seed(seed)).permutation(n)
        test_idx = np.sort(perm[:n_test])
        train_idx = np.sort(perm[n_test:])
    return ds.subset(train_idx), ds.subset(test_idx)


def _normalize_seed(seed: int) -> int:
    return int(seed) & 0xFFFFFFFFFFFFFFFF
