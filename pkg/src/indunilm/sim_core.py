"""Parametric generator of synthetic industrial facility power data.

A facility-year consists of a weather trace (temperature, diffuse and direct
radiation) and five appliance traces. Producers (PV, CHP) are negative,
consumers (EVSE, CS, BA) positive, and the aggregate is their exact sum.
Amplitudes are calibrated so yearly energies match the facility presets.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import lfilter

APPLIANCES = ("EVSE", "PV", "CS", "CHP", "BA")
PRODUCERS = ("PV", "CHP")
CONSUMERS = ("EVSE", "CS", "BA")
FACILITY_TYPES = ("Office", "Dealer", "Logistics")
LOCATIONS = ("Offenbach", "LosAngeles", "Tokyo")

BASE_YEAR = 2021
YEAR_SECONDS = 365 * 86400
EPOCH_START = int(dt.datetime(BASE_YEAR, 1, 1, tzinfo=dt.timezone.utc).timestamp())

CHP_EFFICIENCY = 0.35
CHP_FLOOR_FRACTION = 0.05
CHP_T_REF = 295.15
CS_SETPOINT = 293.15
SERVER_COOLING_FRACTION = 0.5
DIFFUSE_FRACTION = 0.3
NOISE_FRACTION = 0.01
NOISE_CLIP = 3.0
THERMAL_LAG_S = 6 * 3600.0
EVSE_CHARGER_POWER_KW = 22.0

TARGETABLE = ("PV", "CS", "CHP")

CALIBRATION_TOL = 1e-3
CALIBRATION_MAX_ITER = 20
GRID_TOL = 0.05


class CalibrationError(RuntimeError):
    """Raised when amplitude calibration does not converge."""

    def __init__(self, message: str, residuals: dict[str, float]):
        super().__init__(f"{message}; residuals={residuals}")
        self.residuals = residuals


@dataclass(frozen=True)
class LocationParams:
    name: str
    latitude: float
    mean_temp: float
    seasonal_amp: float
    diurnal_amp: float
    seasonal_phase: float
    cloudiness: float
    workweek: int
    holiday_calendar: tuple[dt.date, ...] = ()
    temp_noise_sigma: float = 2.0
    temp_noise_tau_h: float = 36.0

    def __post_init__(self):
        if self.name not in LOCATIONS:
            raise ValueError(f"unknown location {self.name!r}")
        if not 0.0 <= self.cloudiness <= 1.0:
            raise ValueError("cloudiness must lie in [0, 1]")
        if min(self.seasonal_amp, self.diurnal_amp, self.temp_noise_sigma) < 0:
            raise ValueError("temperature amplitudes must be non-negative")
        if self.workweek not in (5, 6, 7):
            raise ValueError("workweek must be 5, 6 or 7 days")


@dataclass(frozen=True)
class FacilityConfig:
    facility_type: str
    location: LocationParams
    yearly_grid_demand: float  # MWh
    evse_yearly_energy: float  # MWh
    pv_power_per_m2: float  # W
    pv_area: float  # m2
    cs_nominal_power: float  # kW
    cs_usage_hours: float  # h/year
    chp_nominal_power: float  # kW
    ba_yearly_demand: float  # MWh
    ba_server_power: float  # kW
    server_cooling: bool
    chp_efficiency: float = CHP_EFFICIENCY
    evse_chargers: int = 6
    sample_period: int = 60
    year_length: int = 525_600
    seed: int = 0
    multipliers: dict[str, float] = field(
        default_factory=lambda: {k: 1.0 for k in APPLIANCES}
    )
    # yearly energy magnitudes (MWh) measured at the reference site, subset of PV/CS/CHP
    energy_targets: dict[str, float] = field(default_factory=dict)
    # when set, the installation was measured at this location instead
    reference_location: LocationParams | None = None
    # appliances whose multiplier calibration must not touch
    multipliers_fixed: tuple[str, ...] = ()

    def __post_init__(self):
        if self.facility_type not in FACILITY_TYPES:
            raise ValueError(f"unknown facility type {self.facility_type!r}")
        positive = {
            "yearly_grid_demand": self.yearly_grid_demand,
            "evse_yearly_energy": self.evse_yearly_energy,
            "pv_power_per_m2": self.pv_power_per_m2,
            "pv_area": self.pv_area,
            "cs_nominal_power": self.cs_nominal_power,
            "cs_usage_hours": self.cs_usage_hours,
            "chp_nominal_power": self.chp_nominal_power,
            "ba_yearly_demand": self.ba_yearly_demand,
            "ba_server_power": self.ba_server_power,
            "evse_chargers": self.evse_chargers,
            "sample_period": self.sample_period,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value}")
        if self.chp_efficiency != CHP_EFFICIENCY:
            raise ValueError("CHP electrical efficiency is fixed at 0.35")
        if self.year_length * self.sample_period != YEAR_SECONDS:
            raise ValueError("year_length x sample_period must span one non-leap year")
        missing = set(APPLIANCES) - set(self.multipliers)
        if missing:
            raise ValueError(f"multipliers missing for {sorted(missing)}")
        for kind, value in self.energy_targets.items():
            if kind not in TARGETABLE:
                raise ValueError(f"energy target for {kind} not supported; use {TARGETABLE}")
            if not value > 0:
                raise ValueError(f"energy target for {kind} must be strictly positive")

    @property
    def name(self) -> str:
        return preset_name(self.facility_type, self.location.name)

    @property
    def pv_peak_w(self) -> float:
        return self.pv_power_per_m2 * self.pv_area

    @property
    def evse_peak_w(self) -> float:
        return self.evse_chargers * EVSE_CHARGER_POWER_KW * 1e3

    @property
    def server_cooling_w(self) -> float:
        if not self.server_cooling:
            return 0.0
        return SERVER_COOLING_FRACTION * self.ba_server_power * 1e3

    def with_multipliers(self, **updates: float) -> FacilityConfig:
        mult = dict(self.multipliers)
        mult.update(updates)
        return replace(self, multipliers=mult)


@dataclass(frozen=True)
class WeatherTrace:
    timestamps: np.ndarray  # epoch seconds
    temperature: np.ndarray  # K
    diffuse_radiation: np.ndarray  # W/m2
    direct_radiation: np.ndarray  # W/m2
    solar_elevation: np.ndarray  # sin of elevation angle

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def total_radiation(self) -> np.ndarray:
        return self.diffuse_radiation + self.direct_radiation


@dataclass(frozen=True)
class ApplianceTrace:
    kind: str
    values: np.ndarray  # W, signed
    peak: float  # W, bound on |values|

    @property
    def role(self) -> str:
        return "producer" if self.kind in PRODUCERS else "consumer"


@dataclass(frozen=True)
class FacilityDataset:
    """One facility's traces on a shared timestamp grid.

    ``appliances`` maps kind to trace in canonical order. The dataset may be a
    slice of a year or an augmented copy; ``dataset_id`` records which.
    """

    config: FacilityConfig
    weather: WeatherTrace
    appliances: dict[str, ApplianceTrace]
    aggregate: np.ndarray
    dataset_id: str = ""
    sample_period: int = 60

    def __len__(self) -> int:
        return len(self.aggregate)

    @property
    def timestamps(self) -> np.ndarray:
        return self.weather.timestamps

    def column(self, kind: str) -> np.ndarray:
        return self.appliances[kind].values

    def energy_mwh(self, kind: str | None = None) -> float:
        """Rectangle-rule integral of one appliance (or the aggregate) in MWh."""
        x = self.aggregate if kind is None else self.column(kind)
        return float(np.sum(x, dtype=np.float64)) * self.sample_period / 3.6e9

    def with_values(self, values: dict[str, np.ndarray], dataset_id: str) -> FacilityDataset:
        """Return a copy with replaced appliance values and a recomputed aggregate."""
        apps = {}
        for kind, trace in self.appliances.items():
            new = values.get(kind, trace.values)
            peak = max(trace.peak, float(np.max(np.abs(new))) if len(new) else 0.0)
            apps[kind] = ApplianceTrace(kind, new, peak)
        return replace(
            self, appliances=apps, aggregate=sum_appliances(apps), dataset_id=dataset_id
        )

    def slice(self, start: int, stop: int) -> FacilityDataset:
        w = self.weather
        weather = WeatherTrace(
            w.timestamps[start:stop],
            w.temperature[start:stop],
            w.diffuse_radiation[start:stop],
            w.direct_radiation[start:stop],
            w.solar_elevation[start:stop],
        )
        apps = {
            k: ApplianceTrace(k, t.values[start:stop], t.peak)
            for k, t in self.appliances.items()
        }
        return replace(
            self,
            weather=weather,
            appliances=apps,
            aggregate=self.aggregate[start:stop],
            dataset_id=f"{self.dataset_id}[{start}:{stop}]",
        )


def sum_appliances(apps: dict[str, ApplianceTrace]) -> np.ndarray:
    total = np.zeros_like(next(iter(apps.values())).values, dtype=np.float64)
    for trace in apps.values():
        total += trace.values
    return total


def preset_name(facility_type: str, location: str) -> str:
    loc = {"Offenbach": "offenbach", "LosAngeles": "los-angeles", "Tokyo": "tokyo"}
    return f"{facility_type.lower()}-{loc[location]}"


# --------------------------------------------------------------------------- #
# Calendar helpers

def _time_axes(cfg: FacilityConfig):
    n = cfg.year_length
    seconds = np.arange(n, dtype=np.int64) * cfg.sample_period
    day = seconds // 86400
    hour = (seconds % 86400) / 3600.0
    return seconds, day, hour


def workday_mask(loc: LocationParams, n_days: int = 365) -> np.ndarray:
    """Boolean per day of the year; 7-day workweeks ignore holidays."""
    if loc.workweek == 7:
        return np.ones(n_days, dtype=bool)
    start = dt.date(BASE_YEAR, 1, 1)
    holidays = set(loc.holiday_calendar)
    out = np.zeros(n_days, dtype=bool)
    for d in range(n_days):
        date = start + dt.timedelta(days=d)
        out[d] = date.weekday() < loc.workweek and date not in holidays
    return out


def _rng(cfg: FacilityConfig, stream: str) -> np.random.Generator:
    key = APPLIANCES.index(stream) + 1 if stream in APPLIANCES else 0
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, key]))


def _running_mean(x: np.ndarray, width: int) -> np.ndarray:
    width = max(1, min(width, len(x)))
    c = np.concatenate(([0.0], np.cumsum(np.abs(x), dtype=np.float64)))
    half = width // 2
    idx = np.arange(len(x))
    lo = np.clip(idx - half, 0, len(x))
    hi = np.clip(idx - half + width, 0, len(x))
    return (c[hi] - c[lo]) / np.maximum(hi - lo, 1)


def _noise(x: np.ndarray, rng: np.random.Generator, samples_per_hour: int) -> np.ndarray:
    """Clipped Gaussian noise with sigma = 1% of the running mean magnitude."""
    sigma = NOISE_FRACTION * _running_mean(x, samples_per_hour)
    z = np.clip(rng.standard_normal(len(x)), -NOISE_CLIP, NOISE_CLIP)
    return sigma * z


def _lag(x: np.ndarray, tau_s: float, period: int) -> np.ndarray:
    """First-order low-pass filter (thermal inertia), started at x[0]."""
    a = math.exp(-period / tau_s)
    y, _ = lfilter([1 - a], [1, -a], x, zi=[a * x[0]])
    return y


# --------------------------------------------------------------------------- #
# Weather

def simulate_weather(loc: LocationParams, cfg: FacilityConfig) -> WeatherTrace:
    """Sinusoidal temperature with AR(1) noise and a clear-sky radiation model."""
    per_day = 86400 // cfg.sample_period
    if 86400 % cfg.sample_period or cfg.year_length % per_day:
        raise ValueError("year_length must be a whole number of days")
    rng = _rng(cfg, "weather")
    seconds, day, hour = _time_axes(cfg)
    doy = day + 1 + hour / 24.0

    seasonal = loc.seasonal_amp * np.cos(2 * np.pi * (doy - loc.seasonal_phase) / 365.0)
    diurnal = loc.diurnal_amp * np.cos(2 * np.pi * (hour - 15.0) / 24.0)
    phi = math.exp(-cfg.sample_period / (loc.temp_noise_tau_h * 3600.0))
    eps = rng.standard_normal(cfg.year_length) * loc.temp_noise_sigma * math.sqrt(1 - phi**2)
    ar, _ = lfilter([1.0], [1.0, -phi], eps, zi=[phi * loc.temp_noise_sigma * rng.standard_normal()])
    bound = 3.0 * loc.temp_noise_sigma
    temperature = loc.mean_temp + seasonal + diurnal + np.clip(ar, -bound, bound)

    decl = np.radians(23.44) * np.sin(2 * np.pi * (284 + doy) / 365.0)
    omega = np.radians(15.0 * (hour - 12.0))
    lat = math.radians(loc.latitude)
    sin_elev = math.sin(lat) * np.sin(decl) + math.cos(lat) * np.cos(decl) * np.cos(omega)
    clear = 1000.0 * np.clip(sin_elev, 0.0, None) ** 1.15

    # hourly cloud cover: AR(1) in logit space, interpolated to the sample grid
    n_hours = cfg.year_length * cfg.sample_period // 3600 + 1
    z = lfilter([1.0], [1.0, -0.93], rng.standard_normal(n_hours) * math.sqrt(1 - 0.93**2) * 1.6)
    base = math.log(loc.cloudiness / (1 - loc.cloudiness)) if 0 < loc.cloudiness < 1 else 0.0
    c_hour = 1.0 / (1.0 + np.exp(-(base + z)))
    if loc.cloudiness in (0.0, 1.0):
        c_hour = np.full(n_hours, loc.cloudiness)
    cloud = np.interp(seconds / 3600.0, np.arange(n_hours), c_hour)

    direct = clear * (1.0 - cloud)
    diffuse = DIFFUSE_FRACTION * clear * cloud
    timestamps = EPOCH_START + seconds
    return WeatherTrace(timestamps, temperature, diffuse, direct, sin_elev)


# --------------------------------------------------------------------------- #
# Appliances

def _check_weather(cfg: FacilityConfig, weather: WeatherTrace) -> None:
    if len(weather) != cfg.year_length:
        raise ValueError("weather length must equal cfg.year_length")


def simulate_pv(cfg: FacilityConfig, weather: WeatherTrace) -> ApplianceTrace:
    peak = cfg.pv_peak_w
    raw = peak * weather.total_radiation / 1000.0 * cfg.multipliers["PV"]
    raw = raw + _noise(raw, _rng(cfg, "PV"), 3600 // cfg.sample_period)
    values = -np.clip(raw, 0.0, peak)
    values[weather.solar_elevation <= 0] = 0.0
    return ApplianceTrace("PV", values, peak)


def simulate_chp(cfg: FacilityConfig, weather: WeatherTrace) -> ApplianceTrace:
    """Heat-led CHP: never off, output follows lagged heating demand."""
    nominal = cfg.chp_nominal_power * 1e3
    floor = CHP_FLOOR_FRACTION * nominal
    gain = cfg.multipliers["CHP"] * nominal / 10.0  # W per K below reference
    heat = np.maximum(0.0, CHP_T_REF - _lag(weather.temperature, THERMAL_LAG_S, cfg.sample_period))
    mag = np.clip(gain * heat, floor, nominal)
    mag = mag + _noise(mag, _rng(cfg, "CHP"), 3600 // cfg.sample_period)
    mag = np.clip(mag, 0.5 * floor, nominal)
    return ApplianceTrace("CHP", -mag, nominal)


def simulate_cs(cfg: FacilityConfig, weather: WeatherTrace) -> ApplianceTrace:
    nominal = cfg.cs_nominal_power * 1e3
    baseline = cfg.server_cooling_w
    _, day, hour = _time_axes(cfg)
    occupied = workday_mask(cfg.location)[day] & (hour >= 7) & (hour < 19)
    demand = np.maximum(0.0, _lag(weather.temperature, THERMAL_LAG_S, cfg.sample_period) - CS_SETPOINT)
    gain = cfg.multipliers["CS"] * nominal / 5.0
    cooling = np.minimum(nominal - baseline, gain * demand * np.where(occupied, 1.0, 0.6))
    cooling = cooling + _noise(cooling, _rng(cfg, "CS"), 3600 // cfg.sample_period)
    values = baseline + np.clip(cooling, 0.0, nominal - baseline)
    return ApplianceTrace("CS", values, nominal)


def simulate_evse(cfg: FacilityConfig, weather: WeatherTrace) -> ApplianceTrace:
    """One charging session per charger and workday at constant charger power."""
    rng = _rng(cfg, "EVSE")
    n, period = cfg.year_length, cfg.sample_period
    power = EVSE_CHARGER_POWER_KW * 1e3
    days = workday_mask(cfg.location)
    n_days = len(days)
    shape = (n_days, cfg.evse_chargers)
    present = rng.random(shape) < 0.8
    arrival_h = np.clip(rng.normal(8.5, 1.2, shape), 6.0, 13.0)
    weight = rng.lognormal(0.0, 0.35, shape)
    active = present & days[:, None]

    # nominal session energy so that the yearly target is met at multiplier 1
    per_session_j = cfg.evse_yearly_energy * 3.6e9 / max(np.sum(weight * active), 1e-12)
    duration_s = cfg.multipliers["EVSE"] * per_session_j * weight / power
    start_s = (np.arange(n_days)[:, None] * 86400 + arrival_h * 3600.0)
    end_s = np.minimum(start_s + duration_s, np.arange(n_days)[:, None] * 86400 + 86400 - period)
    start_s, end_s = start_s[active], end_s[active]

    # piecewise-constant power, exact fractional coverage of boundary samples
    diff = np.zeros(n + 2)
    for edge, sign in ((start_s, 1.0), (end_s, -1.0)):
        pos = edge / period
        idx = np.floor(pos).astype(np.int64)
        frac = pos - idx
        np.add.at(diff, idx, sign * (1.0 - frac))
        np.add.at(diff, idx + 1, sign * frac)
    occupancy = np.cumsum(diff)[:n]
    values = np.clip(occupancy * power, 0.0, cfg.evse_peak_w)
    return ApplianceTrace("EVSE", values, cfg.evse_peak_w)


def _ba_schedule(cfg: FacilityConfig) -> np.ndarray:
    _, day, hour = _time_axes(cfg)
    days = workday_mask(cfg.location)
    if cfg.location.workweek == 7:
        low, start, stop = 0.55, 5.0, 22.0
    else:
        low, start, stop = 0.3, 7.0, 18.5
    ramp = 1.0 / (1.0 + np.exp(-(hour - start) * 3.0)) - 1.0 / (1.0 + np.exp(-(hour - stop) * 3.0))
    active = np.where(days[day], ramp, 0.0)
    return low + (1.0 - low) * active


def simulate_ba(cfg: FacilityConfig, weather: WeatherTrace) -> ApplianceTrace:
    rng = _rng(cfg, "BA")
    period = cfg.sample_period
    server = cfg.ba_server_power * 1e3
    schedule = _ba_schedule(cfg)
    _, day, _ = _time_axes(cfg)
    day_factor = np.clip(rng.normal(1.0, 0.07, 365), 0.8, 1.2)[day]
    shape = schedule * day_factor
    target_j = cfg.ba_yearly_demand * 3.6e9 - server * cfg.year_length * period
    if target_j <= 0:
        raise ValueError("BA yearly demand must exceed the constant server load")
    amp = cfg.multipliers["BA"] * target_j / (np.sum(shape) * period)
    peak = 1.05 * (server + 1.2 * amp)
    raw = server + amp * shape
    values = np.clip(raw + _noise(raw, rng, 3600 // period), 0.0, peak)
    return ApplianceTrace("BA", values, peak)


_SIMULATORS = {
    "EVSE": simulate_evse,
    "PV": simulate_pv,
    "CS": simulate_cs,
    "CHP": simulate_chp,
    "BA": simulate_ba,
}


def simulate_appliance(kind: str, cfg: FacilityConfig, weather: WeatherTrace) -> ApplianceTrace:
    if kind not in _SIMULATORS:
        raise ValueError(f"unknown appliance kind {kind!r}")
    _check_weather(cfg, weather)
    return _SIMULATORS[kind](cfg, weather)


# --------------------------------------------------------------------------- #
# Calibration

def _energy_mwh(x: np.ndarray, period: int) -> float:
    return float(np.sum(x, dtype=np.float64)) * period / 3.6e9


def calibration_targets(cfg: FacilityConfig, energies: dict[str, float]) -> dict[str, float]:
    """Yearly energy targets (MWh, signed) given the current appliance energies.

    BA and EVSE come straight from the preset, PV/CS/CHP from
    ``energy_targets`` where given. Without a CS target, CS runs
    ``cs_usage_hours`` at nominal power on top of any server cooling. Without
    a CHP target, CHP closes the grid balance; when that would push it below
    1.5x its floor energy, CS absorbs the gap. PV has no target unless one is
    given and then keeps its current energy.
    """
    year_h = cfg.year_length * cfg.sample_period / 3600.0
    given = cfg.energy_targets
    targets = {"BA": cfg.ba_yearly_demand, "EVSE": cfg.evse_yearly_energy}
    if "PV" in given:
        targets["PV"] = -given["PV"]
    if "CS" in given:
        cs = given["CS"]
    elif "CS" in cfg.multipliers_fixed:
        cs = energies["CS"]
    else:
        cs = cfg.cs_nominal_power * cfg.cs_usage_hours / 1e3 + cfg.server_cooling_w * year_h / 1e9
    if "CHP" in given:
        chp = given["CHP"]
    else:
        pv = targets.get("PV", energies["PV"])
        chp_needed = targets["BA"] + targets["EVSE"] + cs + pv - cfg.yearly_grid_demand
        chp_min = 1.5 * CHP_FLOOR_FRACTION * cfg.chp_nominal_power * year_h / 1e3
        chp = max(chp_needed, chp_min)
        if "CS" not in given and "CS" not in cfg.multipliers_fixed:
            cs += chp - chp_needed
    if "CS" not in cfg.multipliers_fixed:
        targets["CS"] = cs
    targets["CHP"] = -chp
    return targets


def _calibrate(cfg: FacilityConfig, weather: WeatherTrace) -> FacilityConfig:
    mult = dict(cfg.multipliers)
    prev: dict[str, tuple[float, float]] = {}
    residuals: dict[str, float] = {}
    for _ in range(CALIBRATION_MAX_ITER):
        cur = cfg.with_multipliers(**mult)
        energies = {
            k: _energy_mwh(simulate_appliance(k, cur, weather).values, cfg.sample_period)
            for k in APPLIANCES
        }
        targets = calibration_targets(cur, energies)
        residuals = {k: energies[k] / targets[k] - 1.0 for k in targets}
        residuals["grid"] = sum(energies.values()) / cfg.yearly_grid_demand - 1.0
        if all(abs(residuals[k]) < CALIBRATION_TOL for k in targets):
            return cur
        for k in targets:
            if abs(residuals[k]) < CALIBRATION_TOL:
                continue
            ratio = targets[k] / energies[k]
            elasticity = 1.0
            if k in prev:
                m0, e0 = prev[k]
                if m0 != mult[k] and e0 != energies[k] and e0 * energies[k] > 0:
                    elasticity = math.log(energies[k] / e0) / math.log(mult[k] / m0)
                    elasticity = min(max(elasticity, 0.05), 1.0)
            prev[k] = (mult[k], energies[k])
            mult[k] = mult[k] * ratio ** (1.0 / elasticity)
    raise CalibrationError("calibration did not converge in 20 iterations", residuals)


def calibrate_facility(cfg: FacilityConfig, weather: WeatherTrace | None = None) -> FacilityConfig:
    """Fixed-point adjustment of amplitude multipliers to the yearly targets.

    Each multiplier is updated as ``m <- m * (target/actual) ** (1/e)`` where
    ``e`` is a secant estimate of the energy's elasticity in ``m``.

    With a ``reference_location`` the installation is first calibrated there
    against ``energy_targets``. At the actual location the PV multiplier is
    kept (same panels, different sun), CS keeps its yearly energy (usage
    hours are a property of the facility type) and CHP closes the grid
    balance.
    """
    weather = simulate_weather(cfg.location, cfg) if weather is None else weather
    if cfg.reference_location is None:
        return _calibrate(cfg, weather)
    ref = replace(cfg, location=replace(cfg.reference_location, workweek=cfg.location.workweek), reference_location=None)
    ref = _calibrate(ref, simulate_weather(ref.location, ref))
    here = replace(
        cfg,
        multipliers={**cfg.multipliers, "PV": ref.multipliers["PV"]},
        energy_targets={k: v for k, v in cfg.energy_targets.items() if k == "CS"},
        multipliers_fixed=("PV",),
    )
    out = _calibrate(here, weather)
    return replace(out, energy_targets=cfg.energy_targets, reference_location=cfg.reference_location, multipliers_fixed=())


def simulate_facility(cfg: FacilityConfig, calibrate: bool = True) -> FacilityDataset:
    weather = simulate_weather(cfg.location, cfg)
    if calibrate:
        cfg = calibrate_facility(cfg, weather)
    apps = {k: simulate_appliance(k, cfg, weather) for k in APPLIANCES}
    return FacilityDataset(
        config=cfg,
        weather=weather,
        appliances=apps,
        aggregate=sum_appliances(apps),
        dataset_id=f"{cfg.name}/seed{cfg.seed}",
        sample_period=cfg.sample_period,
    )
