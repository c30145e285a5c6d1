"""Acceptance criteria, each at its stated tolerance and runtime budget.

One PASS/FAIL line per criterion is printed in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from conftest import record_criterion, trapezoid_mwh
from indunilm.augment import amda_scale_factors, relative_contributions
from indunilm.experiments import (
    ScenarioConfig,
    run_appliance_variation,
    run_distribution_alignment,
    run_facility_variation,
)
from indunilm.fileio import load_preset, preset_names
from indunilm.metrics import histogram_divergence, kl_divergence, nemenyi_cd, regression_metrics
from indunilm.models import ModelSpec, TrainOpts, gradient_check, least_squares_linear, train
from indunilm.pipeline import WindowedDataset, WindowSpec, fit_scaler, inverse, make_windows, resample, split, transform
from indunilm.sim_core import simulate_facility

ORDER_AMDA_RECIPES = ("Base*", "Enlarged*")


def _check(number, conditions: dict[str, bool], detail: str, elapsed: float | None = None, budget: float | None = None):
    if budget is not None:
        conditions[f"runtime {elapsed:.1f}s < {budget:g}s"] = elapsed < budget
    failed = [k for k, ok in conditions.items() if not ok]
    passed = not failed
    msg = detail + ("" if passed else " | failed: " + "; ".join(failed))
    record_criterion(number, passed, msg)
    assert passed, msg


# --------------------------------------------------------------------------- #
# shared runs

@pytest.fixture(scope="module")
def nine_facilities():
    t0 = time.perf_counter()
    out = {name: simulate_facility(load_preset(name)) for name in preset_names()}
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def appliance_report():
    t0 = time.perf_counter()
    r = run_appliance_variation(ScenarioConfig(scenario="ApplianceVariation"))
    return r, time.perf_counter() - t0


@pytest.fixture(scope="module")
def facility_report():
    t0 = time.perf_counter()
    r = run_facility_variation(ScenarioConfig())
    return r, time.perf_counter() - t0


@pytest.fixture(scope="module")
def alignment_report(facility_report):
    # runs after the facility scenario so the simulated datasets are cached
    t0 = time.perf_counter()
    r = run_distribution_alignment(ScenarioConfig(scenario="DistributionAlignment"))
    return r, time.perf_counter() - t0


# --------------------------------------------------------------------------- #

def test_criterion_01_amda_formula():
    t0 = time.perf_counter()
    a = amda_scale_factors({"X": 0.25}, 1.5).factors["X"]
    b = amda_scale_factors({"BA": 0.601}, 1.5).factors["BA"]
    elapsed = time.perf_counter() - t0
    _check(1, {
        "S(0.25, 1.5) = 1.125": abs(a - 1.125) <= 5e-4,
        "S(0.601, 1.5) = 0.5985": abs(b - 0.5985) <= 5e-4,
    }, f"S(0.25,1.5)={a:.6f}, S(0.601,1.5)={b:.6f}", elapsed, 1.0)


def test_criterion_03_calibration(nine_facilities):
    facilities, elapsed = nine_facilities
    rows, ok = [], {}
    for name, ds in facilities.items():
        got = trapezoid_mwh(ds.aggregate, ds.sample_period)
        target = ds.config.yearly_grid_demand
        ok[f"{name} {got:.1f}/{target:g} MWh"] = abs(got / target - 1) <= 0.05
        rows.append(f"{name} {100 * (got / target - 1):+.2f}%")
    ok["nine presets"] = len(facilities) == 9
    _check(3, ok, "grid deviation: " + ", ".join(rows), elapsed, 120.0)


def test_criterion_02_contributions(nine_facilities):
    facilities, _ = nine_facilities
    t0 = time.perf_counter()
    sums = {name: sum(relative_contributions(ds).p.values()) for name, ds in facilities.items()}
    ranking = relative_contributions(facilities["office-offenbach"]).ranking()
    elapsed = time.perf_counter() - t0
    worst = max(abs(v - 1) for v in sums.values())
    _check(2, {
        "sum p = 1 for every facility": worst <= 1e-9,
        "Office ordering BA > CHP > PV > CS > EVSE": ranking == ["BA", "CHP", "PV", "CS", "EVSE"],
    }, f"max |sum p - 1| = {worst:.2e}; Office ordering {' > '.join(ranking)}", elapsed, 10.0)


def test_criterion_04_pipeline_identities():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 2000))
        x = rng.normal(rng.normal(0, 1e4), 10 ** rng.uniform(-2, 5), n)
        p = fit_scaler(x)
        rel = np.max(np.abs(inverse(p, transform(p, x)) - x)) / max(np.max(np.abs(x)), 1e-300)
        worst = max(worst, float(rel))
    mismatches = 0
    for _ in range(500):
        w = int(rng.integers(1, 300))
        stride = int(rng.integers(1, 50))
        t = w + int(rng.integers(0, 5000))
        brute = len(range(0, t - w + 1, stride))
        mismatches += WindowSpec(w, stride).count(t) != brute
    n_resampled = len(resample(np.zeros(525_600), 60, 300))
    _check(4, {
        "scaler round trip < 1e-9": worst < 1e-9,
        "window counts": mismatches == 0,
        "525600 -> 105120": n_resampled == 105_120,
    }, f"round-trip max rel err {worst:.1e}; {mismatches} window-count mismatches in 500; resampled {n_resampled}")


def test_criterion_05_model_numerics():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    x = rng.normal(size=(4, 288))
    y = rng.normal(size=4)
    checks = {arch: gradient_check(ModelSpec(arch), x, y) for arch in ("Linear", "MLP", "DilatedConv")}
    # 500-window toy problem with a known linear map
    series = rng.normal(size=500 + 287)
    coef = rng.normal(size=288) / math.sqrt(288)
    ds = make_windows(series.astype(np.float32), np.zeros(len(series), np.float32), WindowSpec(288, 1))
    ds = WindowedDataset(ds.inputs, (ds.inputs @ coef + 0.3 + 0.01 * rng.normal(size=500)).astype(np.float32), ds.index_map, ds.spec)
    tr, va = split(500, (0.8, 0.2), 0)
    model = train(ModelSpec("Linear"), ds.subset(tr), ds.subset(va), TrainOpts(learning_rate=1e-2, max_epochs=200, patience=20))
    theta = model.theta.astype(np.float64)
    oracle = least_squares_linear(ds.subset(tr))
    cos = float(theta @ oracle / np.linalg.norm(theta) / np.linalg.norm(oracle))
    elapsed = time.perf_counter() - t0
    ok = {f"{a} grad rel err < 1e-4": g.max_rel_error < 1e-4 for a, g in checks.items()}
    ok["Linear vs normal equations cosine > 0.999"] = cos > 0.999
    detail = ", ".join(f"{a} {g.max_rel_error:.1e} ({g.n_skipped}/{g.n_params} kink-skipped)" for a, g in checks.items())
    _check(5, ok, f"grad check {detail}; cosine {cos:.6f}", elapsed, 60.0)


def test_criterion_06_metric_oracles():
    y = np.array([1.0, 2.0, 3.0])
    nde_zero = regression_metrics(y, np.zeros(3)).nde
    nde_hand = regression_metrics(y, np.full(3, 2.0)).nde
    js = histogram_divergence(np.zeros(100), np.ones(100)).js
    kl = kl_divergence([0.75, 0.25], [0.5, 0.5])
    cd = nemenyi_cd(5, 10)
    _check(6, {
        "NDE(y, 0) = 1": nde_zero == 1.0,
        "NDE hand case 2/14": abs(nde_hand - 2 / 14) <= 1e-12,
        "JS <= ln 2 disjoint": js <= math.log(2),
        "two-bin KL 0.1308": abs(kl - 0.130812035941137) <= 1e-6,
        "CD(5, 10) = 1.929": abs(cd - 1.929) <= 1e-3,
    }, f"NDE0={nde_zero}, NDE={nde_hand:.12f}, JS={js:.6f}<=ln2, KL={kl:.7f}, CD={cd:.4f}")


def test_criterion_07_appliance_variation(appliance_report):
    report, elapsed = appliance_report
    curve = {(c["variant"], c["ba_scale"]): c["nde_mean"] for c in report.curves}
    scales = sorted({s for _, s in curve})
    worse = [s for s in scales if curve[("AMDA", s)] > curve[("non-AMDA", s)]]
    mean_amda = float(np.mean([curve[("AMDA", s)] for s in scales]))
    mean_plain = float(np.mean([curve[("non-AMDA", s)] for s in scales]))
    pairs = ", ".join(f"s={s:g}: {curve[('AMDA', s)]:.4f}/{curve[('non-AMDA', s)]:.4f}" for s in scales)
    _check(7, {
        "eleven s values, five seeds": len(scales) == 11 and report.config.repetitions == 5,
        f"AMDA <= non-AMDA at every s (violated at {worse})": not worse,
        "strict improvement over the grid": mean_amda < mean_plain,
    }, f"mean NDE AMDA/non-AMDA {pairs}; grid mean {mean_amda:.4f}/{mean_plain:.4f}", elapsed, 900.0)


def test_criterion_08_facility_variation(facility_report):
    report, elapsed = facility_report
    nde = {row["variant"]: row["nde_mean"] for row in report.metric_table()}
    sizes = {s["variant"]: s["samples"] for s in report.sizes}
    others = [v for v in nde if v != "MP"]
    ok = {
        "Enlarged* < Base*": nde["Enlarged*"] < nde["Base*"],
        "Base* < RDM": nde["Base*"] < nde["RDM"],
        "RDM <= Enlarged": nde["RDM"] <= nde["Enlarged"],
        "Enlarged < Base": nde["Enlarged"] < nde["Base"],
        "MP <= all": all(nde["MP"] <= nde[v] for v in others),
        "Enlarged = 2x Base samples": sizes["Enlarged"] == 2 * sizes["Base"],
        "RDM = 15x source pool": sizes["RDM"] == 15 * sizes["Base"],
    }
    detail = ", ".join(f"{v} {nde[v]:.4f}" for v in ("Enlarged*", "Base*", "RDM", "Enlarged", "Base", "MP"))
    detail += f"; samples Base {sizes['Base']}, Enlarged {sizes['Enlarged']}, RDM {sizes['RDM']}"
    _check(8, ok, "mean NDE " + detail, elapsed, 900.0)


def test_criterion_09_alignment(alignment_report):
    report, elapsed = alignment_report
    rows = {d["variant"]: d for d in report.divergences}
    ok = {}
    for v in ORDER_AMDA_RECIPES:
        ok[f"KL {v} < Base"] = rows[v]["kl"] < rows["Base"]["kl"]
        ok[f"JS {v} < Base"] = rows[v]["js"] < rows["Base"]["js"]
    ok["KL lowest for Enlarged*"] = all(rows["Enlarged*"]["kl"] <= d["kl"] for d in rows.values())
    ok["JS lowest for Enlarged*"] = all(rows["Enlarged*"]["js"] <= d["js"] for d in rows.values())
    detail = ", ".join(f"{v} KL {d['kl']:.4f} JS {d['js']:.4f}" for v, d in rows.items())
    _check(9, ok, detail, elapsed, 120.0)


def test_criterion_10_determinism(appliance_report, facility_report, alignment_report, tmp_path):
    runners = {
        "appliance": (appliance_report[0], run_appliance_variation),
        "facility": (facility_report[0], run_facility_variation),
        "alignment": (alignment_report[0], run_distribution_alignment),
    }
    ok = {}
    for name, (first, runner) in runners.items():
        second = runner(first.config)
        m1 = first.write(tmp_path / name / "a", ["acceptance"])
        m2 = second.write(tmp_path / name / "b", ["acceptance"])
        same_files = all(
            (tmp_path / name / "a" / f).read_bytes() == (tmp_path / name / "b" / f).read_bytes()
            for f in list(m1.outputs) + ["manifest.json"]
        )
        ok[f"{name} reports and manifests byte-identical"] = same_files and m1.outputs == m2.outputs
    _check(10, ok, f"re-ran {', '.join(runners)} with identical seeds")
