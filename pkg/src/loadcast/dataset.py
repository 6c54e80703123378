"""Sliding-window supervised samples with chronological splits and min-max
normalization fitted on the train split only."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySplit, EmptyTrainSplit, MissingLoadChannel, NotFitted, TooFewSamples
from .features import FeatureMatrix
from .ingest import HourStamp

DEFAULT_FRACTIONS = (0.45, 0.45, 0.10)
SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class WindowConfig:
    """Look-back (t1) and look-ahead (t2) lengths in hours."""

    t1: int = 6
    t2: int = 4

    def __post_init__(self):
        if self.t1 < 1 or self.t2 < 1:
            raise ValueError("t1 and t2 must be >= 1")

    @property
    def span(self) -> int:
        return self.t1 + self.t2


@dataclass(frozen=True)
class RawWindows:
    """Every admissible stride-1 window, in chronological order, raw units."""

    inputs: np.ndarray   # (n, t1, channels)
    targets: np.ndarray  # (n, t2) load in MW
    origins: tuple[HourStamp, ...]
    channel_names: tuple[str, ...]
    load_channel: int
    cfg: WindowConfig

    def __len__(self) -> int:
        return len(self.origins)


def build_windows(matrix: FeatureMatrix, segments, stamps, cfg: WindowConfig) -> RawWindows:
    """Cut overlapping (t1+t2)-hour windows that lie inside one segment each.

    A segment of length L yields max(0, L - (t1+t2) + 1) samples; windows never
    straddle a gap. Targets are the raw load channel of the last t2 hours.
    """
    if matrix.load_channel is None:
        raise MissingLoadChannel("selector excluded load; targets are undefined")
    span = cfg.span
    inputs: list[np.ndarray] = []
    targets: list[np.ndarray] = []
    origins: list[HourStamp] = []
    values = matrix.values
    load = values[:, matrix.load_channel]
    for start, length in segments:
        count = length - span + 1
        if count <= 0:
            continue
        block = values[start:start + length]
        windows = np.lib.stride_tricks.sliding_window_view(block, span, axis=0)
        # sliding_window_view puts the window axis last: (count, channels, span)
        windows = windows.transpose(0, 2, 1)
        inputs.append(windows[:, :cfg.t1, :])
        tgt = np.lib.stride_tricks.sliding_window_view(load[start:start + length], span)
        targets.append(tgt[:, cfg.t1:])
        origins.extend(stamps[start + i] for i in range(count))
    if inputs:
        inp = np.ascontiguousarray(np.concatenate(inputs, axis=0))
        tgt = np.ascontiguousarray(np.concatenate(targets, axis=0))
    else:
        inp = np.empty((0, cfg.t1, values.shape[1]))
        tgt = np.empty((0, cfg.t2))
    inp.setflags(write=False)
    tgt.setflags(write=False)
    return RawWindows(inp, tgt, tuple(origins), matrix.channel_names,
                      matrix.load_channel, cfg)


@dataclass(frozen=True)
class WindowedDataset:
    """RawWindows plus a chronological train/val/test assignment."""

    inputs: np.ndarray
    targets: np.ndarray
    origins: tuple[HourStamp, ...]
    channel_names: tuple[str, ...]
    load_channel: int
    cfg: WindowConfig
    fractions: tuple[float, float, float]
    n_train: int
    n_val: int

    def __len__(self) -> int:
        return len(self.origins)

    @property
    def n_test(self) -> int:
        return len(self) - self.n_train - self.n_val

    def split_slice(self, split: str) -> slice:
        if split == "train":
            return slice(0, self.n_train)
        if split == "val":
            return slice(self.n_train, self.n_train + self.n_val)
        if split == "test":
            return slice(self.n_train + self.n_val, len(self))
        raise ValueError(f"unknown split {split!r}; expected one of {SPLITS}")

    def split_arrays(self, split: str) -> tuple[np.ndarray, np.ndarray]:
        sl = self.split_slice(split)
        return self.inputs[sl], self.targets[sl]

    def split_origins(self, split: str) -> tuple[HourStamp, ...]:
        sl = self.split_slice(split)
        return self.origins[sl]


def chronological_split(raw: RawWindows,
                        fractions: tuple[float, float, float] = DEFAULT_FRACTIONS,
                        ) -> WindowedDataset:
    """Assign the earliest floor(f1*n) samples to train, next floor(f2*n) to
    validation, and the remainder to test."""
    if len(fractions) != 3 or any(f <= 0 for f in fractions):
        raise ValueError("fractions must be 3 positive numbers")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {sum(fractions)}")
    n = len(raw)
    if n < 3:
        raise TooFewSamples(f"need at least 3 windows, got {n}")
    order = sorted(range(n), key=lambda i: raw.origins[i])
    inputs = raw.inputs[order]
    targets = raw.targets[order]
    origins = tuple(raw.origins[i] for i in order)
    n_train = math.floor(fractions[0] * n)
    n_val = math.floor(fractions[1] * n)
    inputs.setflags(write=False)
    targets.setflags(write=False)
    return WindowedDataset(inputs, targets, origins, raw.channel_names,
                           raw.load_channel, raw.cfg, tuple(fractions), n_train, n_val)


@dataclass(frozen=True)
class Normalizer:
    """Per-channel min-max scaler fitted on train-split input rows, plus a
    separate (min, max) for the load target. Degenerate channels map to 0.5;
    out-of-range values pass through the linear map unclipped."""

    channel_min: np.ndarray | None = None
    channel_max: np.ndarray | None = None
    target_min: float | None = None
    target_max: float | None = None

    @classmethod
    def fit(cls, dataset: WindowedDataset) -> "Normalizer":
        if dataset.n_train == 0:
            raise EmptyTrainSplit("cannot fit a normalizer on an empty train split")
        x, y = dataset.split_arrays("train")
        cmin = x.min(axis=(0, 1))
        cmax = x.max(axis=(0, 1))
        return cls(cmin, cmax, float(y.min()), float(y.max()))

    def _require_fitted(self):
        if self.channel_min is None or self.channel_max is None:
            raise NotFitted("normalizer has not been fitted")

    def transform(self, x: np.ndarray) -> np.ndarray:
        """Map (..., channels) raw values to the unit scale per channel."""
        self._require_fitted()
        span = self.channel_max - self.channel_min
        degenerate = span == 0
        safe = np.where(degenerate, 1.0, span)
        out = (np.asarray(x, dtype=np.float64) - self.channel_min) / safe
        if degenerate.any():
            out = np.where(degenerate, 0.5, out)
        return out

    def transform_target(self, y: np.ndarray) -> np.ndarray:
        self._require_fitted()
        span = self.target_max - self.target_min
        if span == 0:
            return np.full_like(np.asarray(y, dtype=np.float64), 0.5)
        return (np.asarray(y, dtype=np.float64) - self.target_min) / span

    def inverse_transform_load(self, y: np.ndarray) -> np.ndarray:
        """Map normalized load predictions back to megawatts (exact inverse)."""
        self._require_fitted()
        span = self.target_max - self.target_min
        if span == 0:
            return np.full_like(np.asarray(y, dtype=np.float64), self.target_min)
        return np.asarray(y, dtype=np.float64) * span + self.target_min

    def to_dict(self) -> dict:
        self._require_fitted()
        return {
            "channel_min": [float(v) for v in self.channel_min],
            "channel_max": [float(v) for v in self.channel_max],
            "target_min": self.target_min,
            "target_max": self.target_max,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Normalizer":
        return cls(
            np.array(doc["channel_min"], dtype=np.float64),
            np.array(doc["channel_max"], dtype=np.float64),
            float(doc["target_min"]),
            float(doc["target_max"]),
        )


def fit_normalizer(dataset: WindowedDataset) -> Normalizer:
    return Normalizer.fit(dataset)


def require_split_nonempty(dataset: WindowedDataset, split: str) -> None:
    sl = dataset.split_slice(split)
    if sl.stop - sl.start <= 0:
        raise EmptySplit(f"{split} split is empty")
