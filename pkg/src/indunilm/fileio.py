"""File formats: facility config files, facility CSV, run manifests."""

from __future__ import annotations

import configparser
import datetime as dt
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .sim_core import (
    APPLIANCES,
    PRODUCERS,
    TARGETABLE,
    ApplianceTrace,
    FacilityConfig,
    FacilityDataset,
    LocationParams,
    WeatherTrace,
    sum_appliances,
)

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "timestamp",
    "temperature_K",
    "diffuse_Wm2",
    "direct_Wm2",
    "aggregate_W",
    "evse_W",
    "pv_W",
    "cs_W",
    "chp_W",
    "ba_W",
)
APPLIANCE_COLUMNS = {k: f"{k.lower()}_W" for k in APPLIANCES}
OUTPUT_DIR_ENV = "INDUNILM_OUT"
AGGREGATE_RTOL = 1e-6


class SchemaError(ValueError):
    """File layout does not match the documented schema."""


class DataError(ValueError):
    """File content violates a dataset invariant."""


# --------------------------------------------------------------------------- #
# Config files

_LOCATION_FLOATS = ("latitude", "mean_temp", "seasonal_amp", "diurnal_amp", "seasonal_phase", "cloudiness")
_FACILITY_FLOATS = (
    "yearly_grid_demand",
    "evse_yearly_energy",
    "pv_power_per_m2",
    "pv_area",
    "cs_nominal_power",
    "cs_usage_hours",
    "chp_nominal_power",
    "ba_yearly_demand",
    "ba_server_power",
    "chp_efficiency",
)
_FACILITY_INTS = ("evse_chargers", "sample_period", "year_length", "seed")


def parse_config(text: str) -> FacilityConfig:
    cp = configparser.ConfigParser()
    cp.read_string(text)
    try:
        fac, loc = cp["facility"], cp["location"]
    except KeyError as exc:
        raise SchemaError(f"config missing section {exc}") from None
    try:
        location = _parse_location(loc)
        reference = _parse_location(cp["reference_location"]) if "reference_location" in cp else None
        kwargs = {k: fac.getfloat(k) for k in _FACILITY_FLOATS if k in fac}
        kwargs.update({k: fac.getint(k) for k in _FACILITY_INTS if k in fac})
        mult = {k: fac.getfloat(f"multiplier_{k.lower()}", 1.0) for k in APPLIANCES}
        targets = {}
        if "energy" in cp:
            for key, value in cp["energy"].items():
                kind = key.upper()
                if kind not in TARGETABLE:
                    raise SchemaError(f"[energy] key {key!r} is not one of {', '.join(t.lower() for t in TARGETABLE)}")
                targets[kind] = float(value)
        return FacilityConfig(
            facility_type=fac["facility_type"],
            location=location,
            server_cooling=fac.getboolean("server_cooling"),
            multipliers=mult,
            energy_targets=targets,
            reference_location=reference,
            **kwargs,
        )
    except KeyError as exc:
        raise SchemaError(f"config missing key {exc}") from None


def _parse_location(loc: configparser.SectionProxy) -> LocationParams:
    holidays = tuple(
        dt.date.fromisoformat(s.strip())
        for s in loc.get("holiday_calendar", "").split(",")
        if s.strip()
    )
    return LocationParams(
        name=loc["name"],
        workweek=loc.getint("workweek"),
        holiday_calendar=holidays,
        **{k: loc.getfloat(k) for k in _LOCATION_FLOATS},
    )


def _format_location(section: str, loc: LocationParams) -> list[str]:
    lines = ["", f"[{section}]", f"name = {loc.name}"]
    for k in _LOCATION_FLOATS:
        lines.append(f"{k} = {getattr(loc, k)!r}")
    lines.append(f"workweek = {loc.workweek}")
    lines.append("holiday_calendar = " + ",".join(d.isoformat() for d in loc.holiday_calendar))
    return lines


def format_config(cfg: FacilityConfig) -> str:
    lines = ["[facility]", f"facility_type = {cfg.facility_type}"]
    for k in _FACILITY_FLOATS + _FACILITY_INTS:
        lines.append(f"{k} = {getattr(cfg, k)!r}")
    lines.append(f"server_cooling = {'yes' if cfg.server_cooling else 'no'}")
    for k in APPLIANCES:
        lines.append(f"multiplier_{k.lower()} = {cfg.multipliers[k]!r}")
    lines += _format_location("location", cfg.location)
    if cfg.reference_location is not None:
        lines += _format_location("reference_location", cfg.reference_location)
    if cfg.energy_targets:
        lines += ["", "[energy]"]
        lines += [f"{k.lower()} = {v!r}" for k, v in sorted(cfg.energy_targets.items())]
    return "\n".join(lines) + "\n"


def read_config(path: str | Path) -> FacilityConfig:
    return parse_config(Path(path).read_text())


def preset_names() -> list[str]:
    root = resources.files("indunilm") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_preset(name: str, seed: int | None = None, **overrides) -> FacilityConfig:
    path = resources.files("indunilm") / "presets" / f"{name}.cfg"
    if not path.is_file():
        raise SchemaError(f"unknown preset {name!r}; available: {preset_names()}")
    cfg = parse_config(path.read_text())
    if seed is not None:
        overrides["seed"] = seed
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


# --------------------------------------------------------------------------- #
# Facility CSV

def _iso(timestamps: np.ndarray) -> np.ndarray:
    return np.datetime_as_string(timestamps.astype("datetime64[s]"), unit="s")


def write_facility_csv(ds: FacilityDataset, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    w = ds.weather
    frame = pd.DataFrame(
        {
            "timestamp": _iso(w.timestamps),
            "temperature_K": w.temperature,
            "diffuse_Wm2": w.diffuse_radiation,
            "direct_Wm2": w.direct_radiation,
            "aggregate_W": ds.aggregate,
            **{APPLIANCE_COLUMNS[k]: ds.column(k) for k in APPLIANCES},
        },
        columns=list(CSV_COLUMNS),
    )
    # repr-precision floats make write->read exact
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path


def read_facility_csv(
    path: str | Path,
    config: FacilityConfig | None = None,
    strict: bool = True,
) -> FacilityDataset:
    """Load and validate a facility CSV.

    Sign discipline and the aggregate identity are checked; violations raise
    :class:`DataError` when ``strict`` and are logged as warnings otherwise.
    """
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise SchemaError(f"{path.name}: missing column(s) {', '.join(missing)}")
    if header != list(CSV_COLUMNS):
        raise SchemaError(f"{path.name}: column order must be {', '.join(CSV_COLUMNS)}")
    frame = pd.read_csv(path, dtype={c: np.float64 for c in CSV_COLUMNS[1:]}, float_precision="round_trip")
    ts = pd.to_datetime(frame["timestamp"], format="ISO8601").to_numpy().astype("datetime64[s]").astype(np.int64)
    if len(ts) < 2:
        raise SchemaError(f"{path.name}: need at least two rows")
    steps = np.diff(ts)
    if np.any(steps != steps[0]) or steps[0] <= 0:
        raise DataError(f"{path.name}: timestamps are not on a uniform grid")
    period = int(steps[0])

    problems = []
    apps = {}
    for k in APPLIANCES:
        x = frame[APPLIANCE_COLUMNS[k]].to_numpy()
        bad = np.any(x > 0) if k in PRODUCERS else np.any(x < 0)
        if bad:
            problems.append(f"sign discipline violated for {k}")
        apps[k] = ApplianceTrace(k, x, float(np.max(np.abs(x))))
    aggregate = frame["aggregate_W"].to_numpy()
    total = sum_appliances(apps)
    scale = max(float(np.max(np.abs(aggregate))), 1e-12)
    if np.max(np.abs(aggregate - total)) > AGGREGATE_RTOL * scale:
        problems.append("aggregate differs from the sum of appliance columns")
    for msg in problems:
        if strict:
            raise DataError(f"{path.name}: {msg}")
        log.warning("%s: %s", path.name, msg)

    weather = WeatherTrace(
        ts,
        frame["temperature_K"].to_numpy(),
        frame["diffuse_Wm2"].to_numpy(),
        frame["direct_Wm2"].to_numpy(),
        np.full(len(ts), np.nan),
    )
    if config is None:
        # The CSV carries no facility parameters; callers that need them pass a config.
        config = load_preset("office-offenbach")
    return FacilityDataset(
        config=config,
        weather=weather,
        appliances=apps,
        aggregate=aggregate,
        dataset_id=path.stem,
        sample_period=period,
    )


# --------------------------------------------------------------------------- #
# Manifests

def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class RunManifest:
    command: list[str]
    config_digest: str
    seeds: list[int]
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    tool_version: str = __version__
    wall_clock_s: float | None = None

    def add_output(self, path: str | Path) -> None:
        path = Path(path)
        self.outputs[path.name] = sha256_file(path)

    def add_input(self, path: str | Path) -> None:
        path = Path(path)
        self.inputs[path.name] = sha256_file(path)

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        if not include_timing:
            d.pop("wall_clock_s")
        return d

    def write(self, path: str | Path, include_timing: bool = False) -> Path:
        """Write as sorted JSON. Wall-clock is omitted unless asked for, so
        re-runs with identical inputs produce byte-identical manifests."""
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def read(cls, path: str | Path) -> RunManifest:
        return cls(**json.loads(Path(path).read_text()))


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "out"))


def command_line() -> list[str]:
    return [Path(sys.argv[0]).name] + sys.argv[1:]
