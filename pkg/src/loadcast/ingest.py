"""Load/weather CSV parsing, timezone reconciliation, and hourly alignment.

Timestamps live in fixed-offset Central Standard Time (UTC-6, no DST), so
hours stay bijective across the UTC conversion. Gaps are recorded and split
the aligned series into contiguous segments; they are never interpolated.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateTimestamp,
    DuplicateZoneHour,
    EmptyIntersection,
    MalformedRow,
    NonPhysical,
    NonPositiveLoad,
    UnknownZone,
)

N_ZONES = 8
CST_OFFSET_HOURS = 6

#: variable order of the per-zone columns, both in memory and in aligned.csv
ZONE_VARS = ("temp", "wind", "lwrad", "swrad")

LOAD_HEADER = ["timestamp_cst", "load_mw"]
WEATHER_HEADER = [
    "timestamp_utc", "zone_id", "temp_k", "wind_u_ms", "wind_v_ms",
    "lwrad_wm2", "swrad_wm2",
]


@dataclass(frozen=True, order=True)
class HourStamp:
    """A whole hour in a fixed-offset timeline (minutes/seconds always zero)."""

    year: int
    month: int
    day: int
    hour: int

    def __post_init__(self):
        datetime(self.year, self.month, self.day, self.hour)  # range check

    def add_hours(self, n: int) -> "HourStamp":
        dt = datetime(self.year, self.month, self.day, self.hour) + timedelta(hours=n)
        return HourStamp(dt.year, dt.month, dt.day, dt.hour)

    def day_of_week(self) -> int:
        """Monday=0 .. Sunday=6."""
        return datetime(self.year, self.month, self.day).weekday()

    def isoformat(self) -> str:
        return f"{self.year:04d}-{self.month:02d}-{self.day:02d}T{self.hour:02d}:00:00"

    def __str__(self) -> str:
        return self.isoformat()

    @classmethod
    def parse(cls, text: str) -> "HourStamp":
        dt = datetime.strptime(text, "%Y-%m-%dT%H:%M:%S")
        if dt.minute or dt.second:
            raise ValueError(f"not a whole hour: {text!r}")
        return cls(dt.year, dt.month, dt.day, dt.hour)


def hour_delta(a: HourStamp, b: HourStamp) -> int:
    """Whole hours from a to b (positive when b is later)."""
    da = datetime(a.year, a.month, a.day, a.hour)
    db = datetime(b.year, b.month, b.day, b.hour)
    return round((db - da).total_seconds() / 3600.0)


def utc_to_cst(stamp: HourStamp) -> HourStamp:
    """Fixed UTC-6 conversion; rolls over day/month/year as needed."""
    return stamp.add_hours(-CST_OFFSET_HOURS)


def cst_to_utc(stamp: HourStamp) -> HourStamp:
    return stamp.add_hours(CST_OFFSET_HOURS)


def combine_wind(u: float, v: float) -> float:
    """Combined speed from zonal and meridional components (root sum square)."""
    return math.hypot(u, v)


@dataclass(frozen=True)
class Gap:
    """A run of missing hours: `hours` missing stamps starting at `start`."""

    start: HourStamp
    hours: int


@dataclass(frozen=True)
class LoadSeries:
    stamps: tuple[HourStamp, ...]
    loads_mw: np.ndarray  # (n,), all > 0
    gaps: tuple[Gap, ...]

    def __len__(self) -> int:
        return len(self.stamps)


@dataclass(frozen=True)
class WeatherSample:
    zone_id: int
    temp_k: float
    wind_u_ms: float
    wind_v_ms: float
    lwrad_wm2: float
    swrad_wm2: float


@dataclass(frozen=True)
class AlignedSeries:
    """Hourly rows where load and all 8 zones are present.

    `weather[i, z, :]` holds (temp_k, wind_ms, lwrad_wm2, swrad_wm2) for zone z
    at row i, with wind already combined from its u/v components. `segments`
    lists (start_row, n_rows) runs of consecutive hours; they partition rows.
    """

    stamps: tuple[HourStamp, ...]
    load_mw: np.ndarray   # (n,)
    weather: np.ndarray   # (n, N_ZONES, len(ZONE_VARS))
    segments: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.stamps)

    def content_hash(self) -> str:
        """SHA-256 over timestamps and values; identifies the dataset."""
        digest = hashlib.sha256()
        for s in self.stamps:
            digest.update(s.isoformat().encode())
        digest.update(np.ascontiguousarray(self.load_mw, dtype="<f8").tobytes())
        digest.update(np.ascontiguousarray(self.weather, dtype="<f8").tobytes())
        return digest.hexdigest()


def _find_gaps(stamps: list[HourStamp]) -> tuple[Gap, ...]:
    gaps = []
    for a, b in zip(stamps, stamps[1:]):
        d = hour_delta(a, b)
        if d > 1:
            gaps.append(Gap(a.add_hours(1), d - 1))
    return tuple(gaps)


def compute_segments(stamps) -> tuple[tuple[int, int], ...]:
    """Runs of rows whose timestamps advance by exactly one hour."""
    if not stamps:
        return ()
    segments = []
    start = 0
    for i in range(1, len(stamps)):
        if hour_delta(stamps[i - 1], stamps[i]) != 1:
            segments.append((start, i - start))
            start = i
    segments.append((start, len(stamps) - start))
    return tuple(segments)


def _read_rows(path, expected_header):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected_header:
            raise MalformedRow(1, f"expected header {','.join(expected_header)!r}")
        yield from ((line_no, row) for line_no, row in enumerate(reader, start=2))


def _parse_float(text: str, line_no: int, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MalformedRow(line_no, f"bad {what}: {text!r}") from None
    if not math.isfinite(value):
        raise MalformedRow(line_no, f"non-finite {what}: {text!r}")
    return value


def parse_load_csv(path) -> LoadSeries:
    """Parse `timestamp_cst,load_mw` rows into a gap-annotated hourly series."""
    rows: list[tuple[HourStamp, float]] = []
    for line_no, row in _read_rows(path, LOAD_HEADER):
        if len(row) != 2:
            raise MalformedRow(line_no, f"expected 2 fields, got {len(row)}")
        try:
            stamp = HourStamp.parse(row[0])
        except ValueError as exc:
            raise MalformedRow(line_no, str(exc)) from None
        load = _parse_float(row[1], line_no, "load_mw")
        if load <= 0:
            raise NonPositiveLoad(stamp)
        rows.append((stamp, load))
    rows.sort(key=lambda r: r[0])
    for (a, _), (b, _) in zip(rows, rows[1:]):
        if a == b:
            raise DuplicateTimestamp(a)
    stamps = [s for s, _ in rows]
    loads = np.array([v for _, v in rows], dtype=np.float64)
    loads.setflags(write=False)
    return LoadSeries(tuple(stamps), loads, _find_gaps(stamps))


def parse_weather_csv(path) -> list[tuple[HourStamp, WeatherSample]]:
    """Parse per-zone weather rows keyed by UTC hour; units preserved as given."""
    out: list[tuple[HourStamp, WeatherSample]] = []
    seen: set[tuple[HourStamp, int]] = set()
    for line_no, row in _read_rows(path, WEATHER_HEADER):
        if len(row) != 7:
            raise MalformedRow(line_no, f"expected 7 fields, got {len(row)}")
        try:
            stamp = HourStamp.parse(row[0])
        except ValueError as exc:
            raise MalformedRow(line_no, str(exc)) from None
        try:
            zone = int(row[1])
        except ValueError:
            raise MalformedRow(line_no, f"bad zone_id: {row[1]!r}") from None
        if not 0 <= zone < N_ZONES:
            raise UnknownZone(zone)
        temp, u, v, lwrad, swrad = (
            _parse_float(row[i], line_no, WEATHER_HEADER[i]) for i in range(2, 7)
        )
        if temp <= 0:
            raise NonPhysical(f"temp_k {temp} <= 0 at {stamp} zone {zone}")
        if lwrad < 0 or swrad < 0:
            raise NonPhysical(f"negative radiation at {stamp} zone {zone}")
        if (stamp, zone) in seen:
            raise DuplicateZoneHour(stamp, zone)
        seen.add((stamp, zone))
        out.append((stamp, WeatherSample(zone, temp, u, v, lwrad, swrad)))
    out.sort(key=lambda r: (r[0], r[1].zone_id))
    return out


def align(load: LoadSeries, weather: list[tuple[HourStamp, WeatherSample]]) -> AlignedSeries:
    """Join load with per-zone weather on hours where everything is present.

    Weather timestamps must already be in CST. Hours missing the load or any
    of the 8 zones are dropped, splitting the result into segments.
    """
    by_hour: dict[HourStamp, dict[int, WeatherSample]] = {}
    for stamp, sample in weather:
        by_hour.setdefault(stamp, {})[sample.zone_id] = sample

    keep = [i for i, s in enumerate(load.stamps) if len(by_hour.get(s, ())) == N_ZONES]
    if not keep:
        raise EmptyIntersection("no hour has both load and all 8 weather zones")

    stamps = tuple(load.stamps[i] for i in keep)
    loads = np.asarray(load.loads_mw)[keep].copy()
    table = np.empty((len(keep), N_ZONES, len(ZONE_VARS)), dtype=np.float64)
    for r, s in enumerate(stamps):
        zones = by_hour[s]
        for z in range(N_ZONES):
            smp = zones[z]
            table[r, z] = (
                smp.temp_k,
                combine_wind(smp.wind_u_ms, smp.wind_v_ms),
                smp.lwrad_wm2,
                smp.swrad_wm2,
            )
    loads.setflags(write=False)
    table.setflags(write=False)
    return AlignedSeries(stamps, loads, table, compute_segments(stamps))


def load_and_align(load_path, weather_path) -> AlignedSeries:
    """Parse both files, convert weather UTC->CST, and align."""
    load = parse_load_csv(load_path)
    weather = parse_weather_csv(weather_path)
    weather_cst = [(utc_to_cst(s), smp) for s, smp in weather]
    return align(load, weather_cst)


def aligned_csv_header() -> list[str]:
    cols = ["timestamp_cst", "load_mw"]
    suffix = {"temp": "temp_k", "wind": "wind_ms", "lwrad": "lwrad_wm2", "swrad": "swrad_wm2"}
    for z in range(N_ZONES):
        cols.extend(f"z{z}_{suffix[v]}" for v in ZONE_VARS)
    return cols


def write_aligned_csv(series: AlignedSeries, path) -> None:
    """Serialize with shortest round-trip float formatting (exact re-parse)."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(aligned_csv_header())
        for i, stamp in enumerate(series.stamps):
            row = [stamp.isoformat(), repr(float(series.load_mw[i]))]
            row.extend(repr(float(x)) for x in series.weather[i].reshape(-1))
            writer.writerow(row)


def read_aligned_csv(path) -> AlignedSeries:
    expected = aligned_csv_header()
    stamps: list[HourStamp] = []
    loads: list[float] = []
    table: list[list[float]] = []
    for line_no, row in _read_rows(path, expected):
        if len(row) != len(expected):
            raise MalformedRow(line_no, f"expected {len(expected)} fields, got {len(row)}")
        try:
            stamp = HourStamp.parse(row[0])
        except ValueError as exc:
            raise MalformedRow(line_no, str(exc)) from None
        if stamps and stamp <= stamps[-1]:
            if stamp == stamps[-1]:
                raise DuplicateTimestamp(stamp)
            raise MalformedRow(line_no, "timestamps out of order")
        load = _parse_float(row[1], line_no, "load_mw")
        if load <= 0:
            raise NonPositiveLoad(stamp)
        stamps.append(stamp)
        loads.append(load)
        table.append([_parse_float(v, line_no, "weather value") for v in row[2:]])
    if not stamps:
        raise EmptyIntersection("aligned file has no rows")
    load_arr = np.array(loads, dtype=np.float64)
    weather = np.array(table, dtype=np.float64).reshape(len(stamps), N_ZONES, len(ZONE_VARS))
    load_arr.setflags(write=False)
    weather.setflags(write=False)
    return AlignedSeries(tuple(stamps), load_arr, weather, compute_segments(stamps))
