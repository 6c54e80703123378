"""Declarative feature selection and matrix assembly.

Channel order is fixed: optional load column first, then time features in
(hour, day_of_week, month) order, then weather features in (temp, swrad,
lwrad, wind) order, each expanded over the selected zones ascending.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySelector
from .ingest import N_ZONES, ZONE_VARS, AlignedSeries, HourStamp

TIME_FEATURES = ("hour", "day_of_week", "month")
WEATHER_FEATURES = ("temp", "swrad", "lwrad", "wind")
TIME_ENCODINGS = ("scalar", "cyclical")

_ZONE_COL = {name: ZONE_VARS.index(name) for name in WEATHER_FEATURES}


@dataclass(frozen=True)
class FeatureSelector:
    """Which channels enter the model input."""

    include_load: bool = True
    time_features: tuple[str, ...] = ()
    weather_features: tuple[str, ...] = ()
    zones: tuple[int, ...] = tuple(range(N_ZONES))
    time_encoding: str = "scalar"

    def __post_init__(self):
        for name in self.time_features:
            if name not in TIME_FEATURES:
                raise ValueError(f"unknown time feature {name!r}")
        for name in self.weather_features:
            if name not in WEATHER_FEATURES:
                raise ValueError(f"unknown weather feature {name!r}")
        for z in self.zones:
            if not 0 <= z < N_ZONES:
                raise ValueError(f"zone {z} outside 0-{N_ZONES - 1}")
        if self.time_encoding not in TIME_ENCODINGS:
            raise ValueError(f"time_encoding must be one of {TIME_ENCODINGS}")
        # canonical internal order, deduplicated, so channel names are deterministic
        object.__setattr__(
            self, "time_features",
            tuple(n for n in TIME_FEATURES if n in self.time_features))
        object.__setattr__(
            self, "weather_features",
            tuple(n for n in WEATHER_FEATURES if n in self.weather_features))
        object.__setattr__(self, "zones", tuple(sorted(set(self.zones))))

    @property
    def values_per_time_feature(self) -> int:
        return 2 if self.time_encoding == "cyclical" else 1

    @property
    def channel_count(self) -> int:
        return (
            (1 if self.include_load else 0)
            + len(self.time_features) * self.values_per_time_feature
            + len(self.weather_features) * len(self.zones)
        )

    def channel_names(self) -> tuple[str, ...]:
        names: list[str] = []
        if self.include_load:
            names.append("load")
        for t in self.time_features:
            if self.time_encoding == "cyclical":
                names.extend((f"{t}_sin", f"{t}_cos"))
            else:
                names.append(t)
        for w in self.weather_features:
            names.extend(f"z{z}_{w}" for z in self.zones)
        return tuple(names)

    def to_dict(self) -> dict:
        return {
            "include_load": self.include_load,
            "time_features": list(self.time_features),
            "weather_features": list(self.weather_features),
            "zones": list(self.zones),
            "time_encoding": self.time_encoding,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FeatureSelector":
        known = {"include_load", "time_features", "weather_features", "zones", "time_encoding"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown FeatureSelector keys: {sorted(unknown)}")
        kwargs = dict(doc)
        for key in ("time_features", "weather_features", "zones"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


def all_features(time_encoding: str = "scalar") -> FeatureSelector:
    """Load plus every time and weather feature over all 8 zones."""
    return FeatureSelector(
        time_features=TIME_FEATURES,
        weather_features=WEATHER_FEATURES,
        time_encoding=time_encoding,
    )


def encode_time(stamp: HourStamp, which: str, encoding: str = "scalar") -> tuple[float, ...]:
    """Encode one time feature of a stamp as 1 (scalar) or 2 (cyclical) values.

    Scalar maps onto [0, 1]: hour/23, day_of_week/6 (Monday=0), (month-1)/11.
    Cyclical returns (sin 2*pi*x, cos 2*pi*x) with x = hour/24, dow/7,
    (month-1)/12.
    """
    if which == "hour":
        value, span, period = float(stamp.hour), 23.0, 24.0
    elif which == "day_of_week":
        value, span, period = float(stamp.day_of_week()), 6.0, 7.0
    elif which == "month":
        value, span, period = float(stamp.month - 1), 11.0, 12.0
    else:
        raise ValueError(f"unknown time feature {which!r}")
    if encoding == "scalar":
        return (value / span,)
    if encoding == "cyclical":
        x = value / period
        return (math.sin(2.0 * math.pi * x), math.cos(2.0 * math.pi * x))
    raise ValueError(f"unknown encoding {encoding!r}")


@dataclass(frozen=True)
class FeatureMatrix:
    """Rows = aligned hours, columns = selected channels (raw units)."""

    values: np.ndarray  # (n, channels)
    channel_names: tuple[str, ...]
    load_channel: int | None = field(default=None)


def assemble(series: AlignedSeries, selector: FeatureSelector) -> FeatureMatrix:
    """Build the numeric feature matrix for every row of an aligned series."""
    if selector.channel_count == 0:
        raise EmptySelector("selector yields zero channels")
    n = len(series)
    columns: list[np.ndarray] = []
    load_channel = None
    if selector.include_load:
        load_channel = 0
        columns.append(np.asarray(series.load_mw, dtype=np.float64))
    for t in selector.time_features:
        encoded = np.array(
            [encode_time(s, t, selector.time_encoding) for s in series.stamps],
            dtype=np.float64,
        ).reshape(n, selector.values_per_time_feature)
        columns.extend(encoded[:, j] for j in range(encoded.shape[1]))
    for w in selector.weather_features:
        col = _ZONE_COL[w]
        for z in selector.zones:
            columns.append(series.weather[:, z, col])
    values = np.column_stack(columns) if columns else np.empty((n, 0))
    values.setflags(write=False)
    return FeatureMatrix(values, selector.channel_names(), load_channel)
