"""End-to-end experiment protocols: appliance variation, facility variation,
distribution alignment.

Every scenario works on resampled slices of simulated facility-years. Each
training recipe is a list of members (a facility or an augmented copy of one).
Augmented copies reuse the train/val split of the facility they derive from.
Every member gets its own robust scalers, fitted on the samples covered by its
training windows, and test sets are scaled on their own statistics.
"""

from __future__ import annotations

import calendar
import configparser
import json
import time
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import fileio
from .augment import AugmentationPlan, amda_augment, rdm_augment
from .metrics import friedman_nemenyi, histogram_divergence, pca_project_2d, regression_metrics
from .models import ModelSpec, TrainOpts, build, predict, train
from .pipeline import (
    RobustScaleParams,
    WindowedDataset,
    WindowSpec,
    coverage_mask,
    fit_scaler,
    make_windows,
    resample_dataset,
    split,
)
from .sim_core import BASE_YEAR, FacilityDataset, simulate_facility

SCENARIOS = ("ApplianceVariation", "FacilityVariation", "DistributionAlignment")
FACILITY_RECIPES = ("Base", "Enlarged", "RDM", "Base*", "Enlarged*")
BA_SCALES = tuple(round(0.2 * i, 1) for i in range(11))
APPLIANCE_SPLIT = (0.7225, 0.1275, 0.15)
FACILITY_SPLIT = (0.8, 0.2)
MP_TEST_FRACTION = 0.2


class ExperimentError(ValueError):
    """Scenario configuration refers to something that does not exist."""


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "FacilityVariation"
    target_appliance: str = "CHP"
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    months: int = 2
    start_month: int = 1
    arch: str = "MLP"
    data_seed: int = 0
    sample_period: int = 300
    window_len: int = 288
    stride: int = 5
    max_epochs: int = 100
    patience: int = 10
    source_preset: str = "office-offenbach"
    extra_preset: str = "dealer-offenbach"
    test_preset: str = "logistics-los-angeles"
    s_facility: float = 1.73
    s_augment: tuple[float, ...] = (1.5, 4.0)
    ba_scales: tuple[float, ...] = BA_SCALES
    recipes: tuple[str, ...] = FACILITY_RECIPES

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ExperimentError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if len(self.seeds) < 2:
            raise ExperimentError("at least two seeds are needed for a standard deviation")
        if len(set(self.seeds)) != len(self.seeds):
            raise ExperimentError("seeds must be distinct")
        if not 1 <= self.start_month <= 12 or not 1 <= self.months <= 12:
            raise ExperimentError("start_month and months must lie in 1..12")
        if self.start_month + self.months - 1 > 12:
            raise ExperimentError("the data slice must end within the simulated year")
        for r in self.recipes:
            if r not in FACILITY_RECIPES:
                raise ExperimentError(f"unknown recipe {r!r}; expected a subset of {FACILITY_RECIPES}")
        if not self.recipes:
            raise ExperimentError("recipe list is empty")
        available = fileio.preset_names()
        for name in (self.source_preset, self.extra_preset, self.test_preset):
            if name not in available:
                raise ExperimentError(f"recipe references unavailable dataset {name!r}")

    @property
    def repetitions(self) -> int:
        return len(self.seeds)

    @property
    def window(self) -> WindowSpec:
        return WindowSpec(self.window_len, self.stride)

    def model_spec(self) -> ModelSpec:
        return ModelSpec(arch=self.arch, input_len=self.window_len)

    def train_opts(self, seed: int) -> TrainOpts:
        return TrainOpts(max_epochs=self.max_epochs, patience=self.patience, seed=seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    def digest(self) -> str:
        return fileio.sha256_text(json.dumps(self.to_dict(), sort_keys=True))


_TUPLE_FIELDS = {"seeds": int, "s_augment": float, "ba_scales": float, "recipes": str}
_INT_FIELDS = ("months", "start_month", "data_seed", "sample_period", "window_len", "stride", "max_epochs", "patience")


def parse_scenario(text: str, **overrides) -> ScenarioConfig:
    """Read a ``[scenario]`` section; list values are comma separated."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp.read_string(text)
    if "scenario" not in cp:
        raise ExperimentError("config has no [scenario] section")
    known = {f for f in ScenarioConfig.__dataclass_fields__}
    values: dict = {}
    for key, raw in cp["scenario"].items():
        if key not in known:
            raise ExperimentError(f"unknown scenario key {key!r}")
        if key in _TUPLE_FIELDS:
            values[key] = tuple(_TUPLE_FIELDS[key](v.strip()) for v in raw.split(",") if v.strip())
        elif key in _INT_FIELDS:
            values[key] = int(raw)
        elif key == "s_facility":
            values[key] = float(raw)
        else:
            values[key] = raw.strip()
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ScenarioConfig(**values)


def read_scenario(path: str | Path, **overrides) -> ScenarioConfig:
    return parse_scenario(Path(path).read_text(), **overrides)


# --------------------------------------------------------------------------- #
# Data preparation

def month_bounds(start_month: int, months: int, period: int) -> tuple[int, int]:
    """Sample indices [start, stop) of a month range within the base year."""
    days_before = sum(calendar.monthrange(BASE_YEAR, m)[1] for m in range(1, start_month))
    days = sum(calendar.monthrange(BASE_YEAR, m)[1] for m in range(start_month, start_month + months))
    per_day = 86400 // period
    return days_before * per_day, (days_before + days) * per_day


@lru_cache(maxsize=16)
def _facility_year(preset: str, data_seed: int) -> FacilityDataset:
    return simulate_facility(fileio.load_preset(preset, seed=data_seed))


def load_facility(cfg: ScenarioConfig, preset: str) -> FacilityDataset:
    """Simulated, calibrated facility resampled and cut to the configured months."""
    year = _facility_year(preset, cfg.data_seed)
    if cfg.target_appliance not in year.appliances:
        raise ExperimentError(f"{preset}: no {cfg.target_appliance} appliance")
    ds = resample_dataset(year, cfg.sample_period)
    return ds.slice(*month_bounds(cfg.start_month, cfg.months, cfg.sample_period))


@dataclass
class Member:
    """One facility (or augmented copy) inside a training recipe.

    Every member counts as its own configuration and is normalized with
    scalers fitted on the samples its training windows cover.
    """

    dataset: FacilityDataset
    train_idx: np.ndarray
    val_idx: np.ndarray
    plan: AugmentationPlan | None = None

    def train_mask(self, spec: WindowSpec) -> np.ndarray:
        starts = self.train_idx * spec.stride
        return coverage_mask(len(self.dataset), starts, spec.window_len)


@dataclass
class Recipe:
    name: str
    members: list[Member]

    @property
    def samples(self) -> int:
        return sum(len(m.dataset) for m in self.members)

    def train_windows(self) -> int:
        return sum(len(m.train_idx) for m in self.members)


@dataclass(frozen=True)
class ConfigScalers:
    aggregate: RobustScaleParams
    target: RobustScaleParams

    def to_dict(self) -> dict:
        return {"aggregate": self.aggregate.to_dict(), "target": self.target.to_dict()}


def fit_config_scalers(member: Member, target: str, spec: WindowSpec) -> ConfigScalers:
    """Aggregate and target scalers of one configuration, fitted on the
    samples its training windows cover."""
    mask = member.train_mask(spec)
    name = member.dataset.dataset_id
    return ConfigScalers(
        fit_scaler(member.dataset.aggregate[mask], f"{name}/aggregate"),
        fit_scaler(member.dataset.column(target)[mask], f"{name}/{target}"),
    )


def scaled_windows(ds: FacilityDataset, target: str, scalers: ConfigScalers, spec: WindowSpec) -> WindowedDataset:
    agg = ((ds.aggregate - scalers.aggregate.median) / scalers.aggregate.divisor).astype(np.float32)
    tgt = ((ds.column(target) - scalers.target.median) / scalers.target.divisor).astype(np.float32)
    return make_windows(agg, tgt, spec)


def recipe_sets(recipe: Recipe, target: str, spec: WindowSpec) -> tuple[WindowedDataset, WindowedDataset, dict[str, ConfigScalers]]:
    """Normalized train/val windows, each member scaled on its own statistics."""
    trains, vals = [], []
    scalers: dict[str, ConfigScalers] = {}
    for m in recipe.members:
        key = m.dataset.dataset_id
        scalers[key] = fit_config_scalers(m, target, spec)
        w = scaled_windows(m.dataset, target, scalers[key], spec)
        trains.append(w.subset(m.train_idx))
        vals.append(w.subset(m.val_idx))
    return WindowedDataset.concat(trains), WindowedDataset.concat(vals), scalers


def _amda_member(src: Member, s: float, spec: WindowSpec, seed: int) -> Member:
    ds, plan = amda_augment(src.dataset, s, mask=src.train_mask(spec), seed=seed)
    return Member(ds, src.train_idx, src.val_idx, plan)


def facility_recipes(cfg: ScenarioConfig, seed: int) -> tuple[dict[str, Recipe], Member]:
    """Training recipes for one repetition, plus the source member they derive from."""
    spec = cfg.window
    office = load_facility(cfg, cfg.source_preset)
    dealer = load_facility(cfg, cfg.extra_preset)
    n = spec.count(len(office))
    base = Member(office, *split(n, FACILITY_SPLIT, seed))
    extra = Member(dealer, *split(spec.count(len(dealer)), FACILITY_SPLIT, seed + 1))
    recipes = {}
    for name in cfg.recipes:
        if name == "Base":
            members = [base]
        elif name == "Enlarged":
            members = [base, extra]
        elif name == "RDM":
            members = [base] + [Member(ds, base.train_idx, base.val_idx, plan) for ds, plan in rdm_augment(office)]
        elif name == "Base*":
            members = [base, _amda_member(base, cfg.s_facility, spec, seed)]
        else:
            members = [base, extra, _amda_member(base, cfg.s_facility, spec, seed), _amda_member(extra, cfg.s_facility, spec, seed)]
        recipes[name] = Recipe(name, members)
    return recipes, base


# --------------------------------------------------------------------------- #
# Reports

def _mean_std(values: list[float]) -> tuple[float, float]:
    a = np.asarray(values, dtype=np.float64)
    return float(a.mean()), float(a.std(ddof=1))


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _tsv(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    lines = ["\t".join(cols)] + ["\t".join(_fmt(r[c]) for c in cols) for r in rows]
    return "\n".join(lines) + "\n"


@dataclass
class ScenarioReport:
    """Aggregated scenario output.

    ``runs`` holds one metric dict per (variant, seed); the summary tables
    are derived from it. ``timing`` is wall-clock seconds per training run and
    is kept out of the byte-reproducible files.
    """

    config: ScenarioConfig
    runs: list[dict] = field(default_factory=list)
    sizes: list[dict] = field(default_factory=list)
    curves: list[dict] = field(default_factory=list)
    divergences: list[dict] = field(default_factory=list)
    pca: list[dict] = field(default_factory=list)
    ranks: dict | None = None
    macs: dict[str, int] = field(default_factory=dict)
    scalers: dict = field(default_factory=dict)
    timing: list[dict] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def metric_table(self) -> list[dict]:
        """Mean and sample std over repetitions, per variant (MAE in MW, MSE in MW^2)."""
        variants = list(dict.fromkeys(r["variant"] for r in self.runs))
        rows = []
        for v in variants:
            rs = [r for r in self.runs if r["variant"] == v]
            row = {"variant": v, "repetitions": len(rs)}
            for key in ("mae_mw", "mse_mw2", "r2", "nde"):
                row[f"{key}_mean"], row[f"{key}_std"] = _mean_std([r[key] for r in rs])
            rows.append(row)
        return rows

    def mean_nde(self) -> dict[str, float]:
        return {r["variant"]: r["nde_mean"] for r in self.metric_table()}

    def files(self) -> dict[str, str]:
        out = {"config.json": json.dumps(self.config.to_dict(), indent=2, sort_keys=True) + "\n"}
        if self.runs:
            out["runs.tsv"] = _tsv(self.runs)
            out["metrics.tsv"] = _tsv(self.metric_table())
        if self.sizes:
            out["sizes.tsv"] = _tsv(self.sizes)
        if self.curves:
            out["curves.tsv"] = _tsv(self.curves)
        if self.divergences:
            out["divergence.tsv"] = _tsv(self.divergences)
        if self.pca:
            out["pca.tsv"] = _tsv(self.pca)
        if self.ranks is not None:
            out["ranks.json"] = json.dumps(self.ranks, indent=2, sort_keys=True) + "\n"
        if self.macs:
            out["macs.json"] = json.dumps(self.macs, indent=2, sort_keys=True) + "\n"
        if self.scalers:
            out["scalers.json"] = json.dumps(self.scalers, indent=2, sort_keys=True) + "\n"
        if self.notes:
            out["notes.json"] = json.dumps(self.notes, indent=2, sort_keys=True) + "\n"
        return out

    def write(self, out_dir: str | Path, command: list[str] | None = None) -> fileio.RunManifest:
        """Write every table plus ``manifest.json``; ``timing.json`` is written
        alongside but not digested since it changes from run to run."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        manifest = fileio.RunManifest(
            command=command or [],
            config_digest=self.config.digest(),
            seeds=list(self.config.seeds),
            extra={"scenario": self.config.scenario, "unhashed_outputs": ["timing.json"]},
        )
        for name, text in self.files().items():
            path = out_dir / name
            path.write_text(text)
            manifest.add_output(path)
        (out_dir / "timing.json").write_text(json.dumps(self.timing, indent=2, sort_keys=True) + "\n")
        manifest.wall_clock_s = float(sum(t["wall_clock_s"] for t in self.timing))
        manifest.write(out_dir / "manifest.json")
        return manifest


def _evaluate(model, test: WindowedDataset, scalers: ConfigScalers) -> dict:
    """Metrics after de-normalizing with the test configuration's target scaler."""
    pred = predict(model, test.inputs)
    y = test.targets.astype(np.float64) * scalers.target.divisor + scalers.target.median
    yhat = pred.astype(np.float64) * scalers.target.divisor + scalers.target.median
    m = regression_metrics(y, yhat)
    return {"mae_mw": m.mae / 1e6, "mse_mw2": m.mse / 1e12, "r2": m.r2, "nde": m.nde}


def _fit(cfg: ScenarioConfig, recipe: Recipe, seed: int, report: ScenarioReport):
    train_set, val_set, scalers = recipe_sets(recipe, cfg.target_appliance, cfg.window)
    model = train(cfg.model_spec(), train_set, val_set, cfg.train_opts(seed))
    report.timing.append({"variant": recipe.name, "seed": seed, "wall_clock_s": model.wall_clock_s, "best_epoch": model.best_epoch})
    if seed == cfg.seeds[0]:
        report.scalers.update({k: v.to_dict() for k, v in scalers.items()})
    return model, len(train_set)


# --------------------------------------------------------------------------- #
# Scenarios

def ba_scaled(ds: FacilityDataset, s: float) -> FacilityDataset:
    """Copy with the BA column multiplied by ``s`` and the aggregate recomputed."""
    if "BA" not in ds.appliances:
        raise ExperimentError(f"{ds.dataset_id}: no BA appliance")
    if s == 1.0:
        return ds
    return ds.with_values({"BA": s * ds.column("BA")}, f"{ds.dataset_id}*ba(x{s:g})")


def run_appliance_variation(cfg: ScenarioConfig) -> ScenarioReport:
    """Train with and without AMDA on one facility, test on BA-rescaled copies."""
    cfg = replace(cfg, scenario="ApplianceVariation")
    spec = cfg.window
    source = load_facility(cfg, cfg.source_preset)
    if "BA" not in source.appliances:
        raise ExperimentError(f"{cfg.source_preset}: no BA appliance")
    variants = [ba_scaled(source, s) for s in cfg.ba_scales]
    report = ScenarioReport(cfg, macs={cfg.arch: build(cfg.model_spec(), 0).macs()})
    report.notes = {"aggregate_recomputed_after_ba_scaling": True, "split": list(APPLIANCE_SPLIT), "denormalized_with": "target scaler"}
    for seed in cfg.seeds:
        tr, va, te = split(spec.count(len(source)), APPLIANCE_SPLIT, seed)
        base = Member(source, tr, va)
        # each rescaled variant is its own configuration, scaled on its training-covered samples
        tests = []
        for ds in variants:
            sc = fit_config_scalers(Member(ds, tr, va), cfg.target_appliance, spec)
            tests.append((scaled_windows(ds, cfg.target_appliance, sc, spec).subset(te), sc))
        recipes = [
            Recipe("non-AMDA", [base]),
            Recipe("AMDA", [base] + [_amda_member(base, s, spec, seed) for s in cfg.s_augment]),
        ]
        for recipe in recipes:
            model, n_train = _fit(cfg, recipe, seed, report)
            if seed == cfg.seeds[0]:
                report.sizes.append({"variant": recipe.name, "samples": recipe.samples, "train_windows": n_train})
            for s, (test, sc) in zip(cfg.ba_scales, tests):
                row = {"variant": recipe.name, "ba_scale": s, "seed": seed, **_evaluate(model, test, sc)}
                report.curves.append(row)
    for recipe in ("non-AMDA", "AMDA"):
        rs = [r for r in report.curves if r["variant"] == recipe]
        for seed in cfg.seeds:
            per = [r for r in rs if r["seed"] == seed]
            agg = {k: float(np.mean([r[k] for r in per])) for k in ("mae_mw", "mse_mw2", "r2", "nde")}
            report.runs.append({"variant": recipe, "seed": seed, **agg})
    report.curves = _curve_summary(report.curves)
    return report


def _curve_summary(rows: list[dict]) -> list[dict]:
    out = []
    for variant in dict.fromkeys(r["variant"] for r in rows):
        for s in dict.fromkeys(r["ba_scale"] for r in rows):
            vals = [r["nde"] for r in rows if r["variant"] == variant and r["ba_scale"] == s]
            mean, std = _mean_std(vals)
            out.append({"variant": variant, "ba_scale": s, "nde_mean": mean, "nde_std": std, "repetitions": len(vals)})
    return out


def mp_split(n: int, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Held-out test windows of the target facility plus the MP train/val split of the rest."""
    pool, test = split(n, (1 - MP_TEST_FRACTION, MP_TEST_FRACTION), seed)
    tr, va = split(len(pool), FACILITY_SPLIT, seed + 1)
    return pool[tr], pool[va], test


def run_facility_variation(cfg: ScenarioConfig) -> ScenarioReport:
    """Train each recipe on source facilities, test on the unseen target facility."""
    cfg = replace(cfg, scenario="FacilityVariation")
    spec = cfg.window
    target = load_facility(cfg, cfg.test_preset)
    report = ScenarioReport(cfg, macs={cfg.arch: build(cfg.model_spec(), 0).macs()})
    report.notes = {"split": list(FACILITY_SPLIT), "mp_test_fraction": MP_TEST_FRACTION, "s": cfg.s_facility, "denormalized_with": "target scaler"}
    for seed in cfg.seeds:
        recipes, base = facility_recipes(cfg, seed)
        mp_tr, mp_va, test_idx = mp_split(spec.count(len(target)), seed)
        target_member = Member(target, mp_tr, mp_va)
        recipes["MP"] = Recipe("MP", [target_member])
        # the target configuration is scaled with statistics of its MP training portion
        test_scalers = fit_config_scalers(target_member, cfg.target_appliance, spec)
        test = scaled_windows(target, cfg.target_appliance, test_scalers, spec).subset(test_idx)
        for name, recipe in recipes.items():
            model, n_train = _fit(cfg, recipe, seed, report)
            report.runs.append({"variant": name, "seed": seed, **_evaluate(model, test, test_scalers)})
            if seed == cfg.seeds[0]:
                base_n = base.dataset.aggregate.size
                report.sizes.append({
                    "variant": name,
                    "samples": recipe.samples,
                    "train_windows": n_train,
                    "relative_increase_pct": 100.0 * (recipe.samples - base_n) / base_n,
                })
    ranked = [r for r in cfg.recipes]
    scores = np.array([[r["nde"] for r in report.runs if r["variant"] == v] for v in ranked])
    if len(ranked) >= 3:
        rr = friedman_nemenyi(scores, ranked)
        report.ranks = {
            "metric": "nde",
            "friedman_chi2": rr.friedman_statistic,
            "p_value": rr.p_value,
            "critical_difference": rr.critical_difference,
            "n_blocks": rr.n_blocks,
            "alpha": rr.alpha,
            "records": rr.records(),
        }
    return report


def recipe_target_values(recipe: Recipe, target: str, spec: WindowSpec) -> np.ndarray:
    """Target-appliance samples seen in training, pooled over members."""
    if not recipe.members:
        raise ExperimentError(f"recipe {recipe.name} is empty")
    return np.concatenate([m.dataset.column(target)[m.train_mask(spec)] for m in recipe.members])


PCA_STRIDE = 10


def run_distribution_alignment(cfg: ScenarioConfig) -> ScenarioReport:
    """Histogram divergences between each recipe's training target values and
    the target facility, plus 2-D principal components of the windows."""
    cfg = replace(cfg, scenario="DistributionAlignment")
    spec = cfg.window
    target = load_facility(cfg, cfg.test_preset)
    test_values = target.column(cfg.target_appliance)
    report = ScenarioReport(cfg)
    per_seed: dict[str, list] = {}
    for seed in cfg.seeds:
        recipes, _ = facility_recipes(cfg, seed)
        for name, recipe in recipes.items():
            d = histogram_divergence(recipe_target_values(recipe, cfg.target_appliance, spec), test_values)
            per_seed.setdefault(name, []).append(d)
    base = per_seed.get("Base")
    for name, ds in per_seed.items():
        kl, kl_rev, js = (_mean_std([getattr(d, a) for d in ds]) for a in ("kl", "kl_reverse", "js"))
        row = {
            "variant": name,
            "kl": kl[0], "kl_std": kl[1],
            "kl_reverse": kl_rev[0],
            "js": js[0], "js_std": js[1],
        }
        if base is not None:
            kl_b = float(np.mean([d.kl for d in base]))
            js_b = float(np.mean([d.js for d in base]))
            row["kl_reduction_pct"] = 100.0 * (kl_b - kl[0]) / kl_b
            row["js_reduction_pct"] = 100.0 * (js_b - js[0]) / js_b
        report.divergences.append(row)
    report.notes = {
        "divergence": "KL(train || test) in nats on 100 shared equal-width bins, eps 1e-8; kl_reverse is KL(test || train)",
        "pca_window_stride": PCA_STRIDE,
    }
    report.pca = _pca_rows(cfg, facility_recipes(cfg, cfg.seeds[0])[0], target)
    return report


def _pca_rows(cfg: ScenarioConfig, recipes: dict[str, Recipe], target: FacilityDataset) -> list[dict]:
    """Raw aggregate windows (kW) of every recipe and the target, projected on
    the principal axes of their union; every PCA_STRIDE-th window is kept."""
    spec = cfg.window
    blocks: list[tuple[str, np.ndarray]] = []
    for name, recipe in recipes.items():
        parts = [make_windows(m.dataset.aggregate / 1e3, m.dataset.aggregate, spec).inputs[m.train_idx] for m in recipe.members]
        blocks.append((name, np.concatenate(parts)[::PCA_STRIDE]))
    blocks.append(("test", make_windows(target.aggregate / 1e3, target.aggregate, spec).inputs[::PCA_STRIDE]))
    coords = pca_project_2d(np.concatenate([b for _, b in blocks]))
    rows, off = [], 0
    for name, b in blocks:
        for i in range(len(b)):
            rows.append({"set": name, "pc1": float(coords[off + i, 0]), "pc2": float(coords[off + i, 1])})
        off += len(b)
    return rows


RUNNERS = {
    "appliance-variation": run_appliance_variation,
    "facility-variation": run_facility_variation,
    "alignment": run_distribution_alignment,
}
