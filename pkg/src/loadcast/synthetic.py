"""Seeded synthetic load/weather generator shaped like the real inputs.

Per-zone temperature is a seasonal plus diurnal sinusoid with AR(1) noise;
shortwave radiation is a clipped daylight curve scaled by season; longwave
radiation is affine in temperature; winds are AR(1) components. Load combines
a base level, a workday/weekend weekly pattern, a diurnal pattern, additive
noise, and a convex V-shaped response to population-weighted temperature
around a comfort point, so load correlates with |temp - comfort| the way real
cooling/heating demand does.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .errors import InvalidConfig
from .ingest import HourStamp, cst_to_utc

HOURS_PER_YEAR = 8760
START = HourStamp(2015, 1, 1, 0)

ZONE_TEMP_OFFSET = np.linspace(-4.0, 4.0, 8)
ZONE_WEIGHT = np.array([0.24, 0.16, 0.14, 0.12, 0.11, 0.09, 0.08, 0.06])
COMFORT_K = 291.0
BASE_LOAD_MW = 40000.0


def _ar1(rng: np.random.Generator, n: int, phi: float, sigma: float,
         series: int = 1) -> np.ndarray:
    shocks = rng.normal(0.0, sigma, size=(n, series))
    out = np.empty((n, series))
    state = np.zeros(series)
    for t in range(n):
        state = phi * state + shocks[t]
        out[t] = state
    return out


def simulate(n_hours: int, seed: int):
    """Generate (stamps, loads, temp, wind_u, wind_v, lwrad, swrad).

    Weather arrays have shape (n_hours, 8). Deterministic for a fixed seed.
    """
    if n_hours < 1:
        raise InvalidConfig(f"n_hours must be >= 1, got {n_hours}")
    rng = np.random.default_rng(seed)
    h = np.arange(n_hours)
    hod = h % 24
    seasonal = -np.cos(2.0 * math.pi * h / HOURS_PER_YEAR)      # -1 in winter
    diurnal_temp = np.cos(2.0 * math.pi * (hod - 15) / 24.0)    # peak at 15:00

    temp = (287.0 + ZONE_TEMP_OFFSET[None, :]
            + 12.0 * seasonal[:, None]
            + 5.0 * diurnal_temp[:, None]
            + _ar1(rng, n_hours, 0.95, 0.6, 8))

    daylight = np.maximum(0.0, np.cos(2.0 * math.pi * (hod - 13) / 24.0))
    sw_scale = 600.0 + 250.0 * seasonal
    swrad = np.maximum(
        0.0, sw_scale[:, None] * daylight[:, None] + rng.normal(0.0, 15.0, (n_hours, 8)))

    lwrad = np.maximum(0.0, 3.5 * (temp - 190.0) + rng.normal(0.0, 10.0, (n_hours, 8)))

    wind_u = 2.0 + _ar1(rng, n_hours, 0.97, 0.5, 8)
    wind_v = 1.0 + _ar1(rng, n_hours, 0.97, 0.5, 8)

    weighted_temp = temp @ ZONE_WEIGHT
    # weekday/weekend level with transitions smoothed over +-3 hours
    week_step = np.where(np.arange(168) // 24 >= 5, -2500.0, 1500.0)
    offsets = np.arange(-3, 4)
    week_profile = np.array(
        [week_step[(idx + offsets) % 168].mean() for idx in range(168)])
    weekly = week_profile[h % 168]
    diurnal_load = 4500.0 * np.cos(2.0 * math.pi * (hod - 17) / 24.0)
    comfort_gap = np.abs(weighted_temp - COMFORT_K)
    noise = _ar1(rng, n_hours, 0.85, 250.0, 1)[:, 0]
    loads = BASE_LOAD_MW + weekly + diurnal_load + 900.0 * comfort_gap + noise

    stamps = [START.add_hours(int(i)) for i in range(n_hours)]
    return stamps, loads, temp, wind_u, wind_v, lwrad, swrad


def generate_synthetic(years: float, seed: int, out_dir) -> tuple[Path, Path]:
    """Write load.csv and weather.csv under out_dir; returns their paths.

    One year produces exactly 8760 load rows and 8 * 8760 weather rows.
    Identical seeds produce byte-identical files.
    """
    if years <= 0:
        raise InvalidConfig(f"years must be positive, got {years}")
    n_hours = round(years * HOURS_PER_YEAR)
    stamps, loads, temp, wind_u, wind_v, lwrad, swrad = simulate(n_hours, seed)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    load_path = out_dir / "load.csv"
    weather_path = out_dir / "weather.csv"

    with open(load_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp_cst", "load_mw"])
        for i, stamp in enumerate(stamps):
            writer.writerow([stamp.isoformat(), repr(float(loads[i]))])

    with open(weather_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp_utc", "zone_id", "temp_k", "wind_u_ms",
                         "wind_v_ms", "lwrad_wm2", "swrad_wm2"])
        for i, stamp in enumerate(stamps):
            utc = cst_to_utc(stamp).isoformat()
            for z in range(8):
                writer.writerow([
                    utc, z,
                    repr(float(temp[i, z])), repr(float(wind_u[i, z])),
                    repr(float(wind_v[i, z])), repr(float(lwrad[i, z])),
                    repr(float(swrad[i, z])),
                ])
    return load_path, weather_path
