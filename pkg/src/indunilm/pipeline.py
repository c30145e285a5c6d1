"""Preprocessing: resampling, robust scaling, seq2point windowing, splits."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .sim_core import ApplianceTrace, FacilityDataset, WeatherTrace, sum_appliances

IQR_EPS = 1e-9
WINDOW_MAGIC = b"S2PW"


def resample(x: np.ndarray, period_in: int, period_out: int) -> np.ndarray:
    """Non-overlapping bin means; a trailing partial bin is dropped."""
    if period_out % period_in:
        raise ValueError(f"output period {period_out}s is not a multiple of {period_in}s")
    k = period_out // period_in
    n = len(x) // k
    x = np.asarray(x, dtype=np.float64)
    return x[: n * k].reshape(n, k).mean(axis=1)


def resample_dataset(ds: FacilityDataset, period_out: int) -> FacilityDataset:
    p = ds.sample_period
    k = period_out // p if period_out % p == 0 else None
    if k is None:
        raise ValueError(f"output period {period_out}s is not a multiple of {p}s")
    w = ds.weather
    n = len(ds) // k
    weather = WeatherTrace(
        w.timestamps[: n * k : k],
        resample(w.temperature, p, period_out),
        resample(w.diffuse_radiation, p, period_out),
        resample(w.direct_radiation, p, period_out),
        resample(w.solar_elevation, p, period_out),
    )
    apps = {
        kind: ApplianceTrace(kind, resample(t.values, p, period_out), t.peak)
        for kind, t in ds.appliances.items()
    }
    return FacilityDataset(
        config=ds.config,
        weather=weather,
        appliances=apps,
        aggregate=sum_appliances(apps),
        dataset_id=ds.dataset_id,
        sample_period=period_out,
    )


@dataclass(frozen=True)
class RobustScaleParams:
    median: float
    iqr: float
    signal_id: str = ""

    @property
    def divisor(self) -> float:
        return max(self.iqr, IQR_EPS)

    def to_dict(self) -> dict:
        return {"signal_id": self.signal_id, "median": self.median, "iqr": self.iqr}


def fit_scaler(x: np.ndarray, signal_id: str = "") -> RobustScaleParams:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("cannot fit a scaler on an empty trace")
    q1, med, q3 = np.percentile(x, [25, 50, 75])  # linear interpolation
    return RobustScaleParams(float(med), float(q3 - q1), signal_id)


def transform(params: RobustScaleParams, x: np.ndarray) -> np.ndarray:
    return (np.asarray(x, dtype=np.float64) - params.median) / params.divisor


def inverse(params: RobustScaleParams, z: np.ndarray) -> np.ndarray:
    return np.asarray(z, dtype=np.float64) * params.divisor + params.median


def write_scaler_manifest(scalers: dict[str, RobustScaleParams], path: str | Path, note: str = "") -> Path:
    path = Path(path)
    doc = {"scalers": {k: v.to_dict() for k, v in sorted(scalers.items())}, "note": note}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def read_scaler_manifest(path: str | Path) -> dict[str, RobustScaleParams]:
    doc = json.loads(Path(path).read_text())
    return {
        k: RobustScaleParams(v["median"], v["iqr"], v["signal_id"]) for k, v in doc["scalers"].items()
    }


@dataclass(frozen=True)
class WindowSpec:
    window_len: int = 288
    stride: int = 5
    center_index: int | None = None

    def __post_init__(self):
        if self.window_len < 1 or self.stride < 1:
            raise ValueError("window_len and stride must be >= 1")
        if not 0 <= self.center < self.window_len:
            raise ValueError("center_index must lie inside the window")

    @property
    def center(self) -> int:
        return self.window_len // 2 if self.center_index is None else self.center_index

    def count(self, n: int) -> int:
        return 0 if n < self.window_len else (n - self.window_len) // self.stride + 1


@dataclass(frozen=True)
class WindowedDataset:
    inputs: np.ndarray  # N x w
    targets: np.ndarray  # N
    index_map: np.ndarray  # source index of each window's center sample
    spec: WindowSpec

    def __len__(self) -> int:
        return len(self.targets)

    def subset(self, idx: np.ndarray) -> WindowedDataset:
        return WindowedDataset(self.inputs[idx], self.targets[idx], self.index_map[idx], self.spec)

    @staticmethod
    def concat(parts: list[WindowedDataset]) -> WindowedDataset:
        if not parts:
            raise ValueError("nothing to concatenate")
        return WindowedDataset(
            np.concatenate([p.inputs for p in parts]),
            np.concatenate([p.targets for p in parts]),
            np.concatenate([p.index_map for p in parts]),
            parts[0].spec,
        )


def window_starts(n: int, spec: WindowSpec) -> np.ndarray:
    return np.arange(spec.count(n)) * spec.stride


def make_windows(aggregate: np.ndarray, target: np.ndarray, spec: WindowSpec = WindowSpec()) -> WindowedDataset:
    aggregate = np.asarray(aggregate)
    target = np.asarray(target)
    if len(aggregate) != len(target):
        raise ValueError("aggregate and target must be aligned")
    if len(aggregate) < spec.window_len:
        raise ValueError(f"series of length {len(aggregate)} shorter than window {spec.window_len}")
    starts = window_starts(len(aggregate), spec)
    inputs = sliding_window_view(aggregate, spec.window_len)[:: spec.stride]
    centers = starts + spec.center
    return WindowedDataset(np.ascontiguousarray(inputs), target[centers].copy(), centers, spec)


def coverage_mask(n: int, starts: np.ndarray, window_len: int) -> np.ndarray:
    """Samples touched by at least one window starting at ``starts``."""
    diff = np.zeros(n + 1, dtype=np.int64)
    np.add.at(diff, starts, 1)
    np.add.at(diff, starts + window_len, -1)
    return np.cumsum(diff[:n]) > 0


def split(n: int | WindowedDataset, fractions, seed: int) -> tuple[np.ndarray, ...]:
    """Seeded random partition of ``n`` indices into consecutive-size groups.

    Group sizes are floor(f * n) with the remainder going to the first group.
    """
    if isinstance(n, WindowedDataset):
        n = len(n)
    fractions = np.asarray(fractions, dtype=np.float64)
    if np.any(fractions < 0) or abs(fractions.sum() - 1.0) > 1e-9:
        raise ValueError(f"fractions must be non-negative and sum to 1, got {fractions.tolist()}")
    sizes = np.floor(fractions * n + 1e-9).astype(int)
    sizes[0] += n - sizes.sum()
    perm = np.random.default_rng(seed).permutation(n)
    return tuple(np.sort(part) for part in np.split(perm, np.cumsum(sizes)[:-1]))


# --------------------------------------------------------------------------- #
# Flat binary layout:
#   magic "S2PW", then little-endian uint64 N, w, stride, center_index,
#   then N*w float32 inputs (row-major), N float32 targets, N int64 index_map.

def write_windows(ds: WindowedDataset, path: str | Path) -> Path:
    path = Path(path)
    n, w = ds.inputs.shape
    with path.open("wb") as fh:
        fh.write(WINDOW_MAGIC)
        fh.write(struct.pack("<4Q", n, w, ds.spec.stride, ds.spec.center))
        fh.write(np.ascontiguousarray(ds.inputs, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(ds.targets, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(ds.index_map, dtype="<i8").tobytes())
    return path


def read_windows(path: str | Path) -> WindowedDataset:
    raw = Path(path).read_bytes()
    if raw[:4] != WINDOW_MAGIC:
        raise ValueError(f"{path}: not a window file")
    n, w, stride, center = struct.unpack("<4Q", raw[4:36])
    off = 36
    inputs = np.frombuffer(raw, "<f4", n * w, off).reshape(n, w)
    off += 4 * n * w
    targets = np.frombuffer(raw, "<f4", n, off)
    off += 4 * n
    index_map = np.frombuffer(raw, "<i8", n, off)
    return WindowedDataset(inputs.copy(), targets.copy(), index_map.copy(), WindowSpec(w, stride, center))
