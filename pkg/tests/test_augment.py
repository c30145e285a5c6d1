from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import hourly_facility
from indunilm.augment import (
    DEFAULT_S_RANGE,
    RDM_FACTORS,
    UndefinedContributionError,
    amda_augment,
    amda_scale_factors,
    compose_training_set,
    draw_s,
    rdm_augment,
    relative_contributions,
)
from indunilm.sim_core import APPLIANCES, ApplianceTrace

# Office Offenbach yearly totals in kW-samples as tabulated alongside the shares
OFFICE_TOTAL_CHP = 37_185.0
OFFICE_TOTAL_PV = 22_800.0


def test_worked_factor_values():
    assert amda_scale_factors({"X": 0.25}, 1.5).factors["X"] == pytest.approx(1.125, abs=1e-12)
    assert amda_scale_factors({"BA": 0.601}, 1.5).factors["BA"] == pytest.approx(0.5985, abs=5e-4)


def test_zero_s_gives_zero_factors():
    plan = amda_scale_factors({k: 0.2 for k in APPLIANCES}, 0.0)
    assert all(v == 0.0 for v in plan.factors.values())


def test_negative_s_rejected():
    with pytest.raises(ValueError):
        amda_scale_factors({"BA": 1.0}, -0.1)


def test_ordering_can_flip_under_scaling():
    plan = amda_scale_factors({"CHP": 0.186, "PV": 0.114}, 1.5)
    chp = OFFICE_TOTAL_CHP * plan.factors["CHP"]
    pv = OFFICE_TOTAL_PV * plan.factors["PV"]
    assert chp == pytest.approx(45_402.885, abs=1e-6)
    assert pv == pytest.approx(30_301.2, abs=1e-6)
    assert chp > pv


def test_office_contributions_sum_and_ordering(office):
    c = relative_contributions(office)
    assert sum(c.p.values()) == pytest.approx(1.0, abs=1e-9)
    assert c.ranking() == ["BA", "CHP", "PV", "CS", "EVSE"]


def test_contributions_match_streaming_oracle(office):
    c = relative_contributions(office)
    sums = dict.fromkeys(APPLIANCES, 0.0)
    for start in range(0, len(office), 4096):
        for k in APPLIANCES:
            for v in office.column(k)[start : start + 4096].tolist():
                sums[k] += abs(v)
    total = sum(sums.values())
    for k in APPLIANCES:
        assert c.p[k] == pytest.approx(sums[k] / total, abs=1e-12)


def test_single_appliance_has_full_share(hourly):
    solo = replace(hourly, appliances={"BA": hourly.appliances["BA"]})
    assert relative_contributions(solo).p == {"BA": 1.0}


def test_all_zero_signals_rejected(hourly):
    zero = {k: ApplianceTrace(k, np.zeros(len(hourly)), 1.0) for k in APPLIANCES}
    with pytest.raises(UndefinedContributionError):
        relative_contributions(replace(hourly, appliances=zero))


def test_masked_contributions_ignore_unselected_samples(hourly):
    mask = np.zeros(len(hourly), dtype=bool)
    mask[:1000] = True
    assert relative_contributions(hourly, mask).p == relative_contributions(hourly.slice(0, 1000)).p


def test_augmented_ba_column_is_exact_multiple(office):
    aug, plan = amda_augment(office, 1.5)
    assert np.array_equal(aug.column("BA"), plan.factors["BA"] * office.column("BA"))


def test_s_173_aggregate_is_sum_of_scaled_columns(office):
    aug, plan = amda_augment(office, 1.73)
    oracle = np.zeros(len(office))
    for k in APPLIANCES:
        oracle += plan.factors[k] * office.column(k)
    assert np.max(np.abs(aug.aggregate - oracle)) <= 1e-9 * np.max(np.abs(oracle))


def test_renormalized_aggregate_keeps_energy(hourly):
    aug, plan = amda_augment(hourly, 2.5, renormalize_aggregate=True)
    assert plan.renormalized
    assert aug.aggregate.sum() == pytest.approx(hourly.aggregate.sum(), rel=1e-9)
    ratios = {k: plan.factors[k] / (2.5 * (1 - plan.contributions[k])) for k in APPLIANCES}
    assert max(ratios.values()) == pytest.approx(min(ratios.values()), rel=1e-12)


def test_plan_provenance(hourly):
    _, plan = amda_augment(hourly, 1.73, seed=11)
    d = plan.to_dict()
    assert d["method"] == "AMDA" and d["s"] == 1.73 and d["seed"] == 11
    assert d["source"] == hourly.dataset_id
    assert set(d["factors"]) == set(APPLIANCES)


@settings(max_examples=50, deadline=None)
@given(s=st.floats(0.0, 10.0))
def test_amda_is_linear_and_sign_preserving(s):
    ds = hourly_facility()
    aug, plan = amda_augment(ds, s)
    for k in APPLIANCES:
        x, y = ds.column(k), aug.column(k)
        nz = x != 0
        assert np.allclose(y[nz] / x[nz], plan.factors[k], rtol=1e-12, atol=0)
        assert np.all((np.sign(y) == np.sign(x)) | (y == 0))


@settings(max_examples=100, deadline=None)
@given(
    shares=st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6).filter(lambda v: sum(v) > 0),
    s=st.floats(0.0, 10.0),
)
def test_factors_are_anticorrelated_with_shares(shares, s):
    total = sum(shares)
    p = {f"a{i}": v / total for i, v in enumerate(shares)}
    f = amda_scale_factors(p, s).factors
    for k in p:
        assert f[k] == pytest.approx(s * (1 - p[k]), abs=1e-12)
    keys = sorted(p, key=p.get)
    assert all(f[a] >= f[b] - 1e-12 for a, b in zip(keys, keys[1:]))


def test_draw_s_is_seeded_and_in_range():
    assert draw_s(5) == draw_s(5)
    lo, hi = DEFAULT_S_RANGE
    assert all(lo <= draw_s(i) <= hi for i in range(50))
    with pytest.raises(ValueError):
        draw_s(0, (3.0, 1.0))


def test_rdm_defaults_to_fourteen_log_spaced_copies(hourly):
    assert len(RDM_FACTORS) == 14
    assert RDM_FACTORS[0] == pytest.approx(0.2) and RDM_FACTORS[-1] == pytest.approx(10.0)
    assert np.allclose(np.diff(np.log(RDM_FACTORS)), np.log(50.0) / 13)
    copies = rdm_augment(hourly)
    composed = compose_training_set([(hourly, None)] + copies, base_samples=len(hourly))
    assert composed.total_samples == 15 * len(hourly)
    assert composed.relative_increase == pytest.approx(1400.0)


def test_rdm_identity_and_fifth_copies(hourly):
    (same, _), (fifth, plan) = rdm_augment(hourly, [1.0, 0.2])
    for k in APPLIANCES:
        assert np.array_equal(same.column(k), hourly.column(k))
        assert np.array_equal(fifth.column(k), 0.2 * hourly.column(k))
    assert np.array_equal(same.aggregate, hourly.aggregate)
    assert plan.factors == {k: 0.2 for k in APPLIANCES}


def test_rdm_rejects_bad_factors(hourly):
    with pytest.raises(ValueError):
        rdm_augment(hourly, [])
    with pytest.raises(ValueError):
        rdm_augment(hourly, [-1.0])


def test_composition_counts(hourly):
    dealer = hourly_facility("dealer-offenbach")
    enlarged = compose_training_set([(hourly, None), (dealer, None)], base_samples=len(hourly))
    assert enlarged.total_samples == 2 * len(hourly)
    assert enlarged.relative_increase == pytest.approx(100.0)
    twice = compose_training_set([(hourly, None), (hourly, None)])
    assert twice.total_samples == 2 * len(hourly)
    assert twice.relative_increase is None
    with pytest.raises(ValueError):
        compose_training_set([])


def test_composition_rejects_mixed_periods(hourly, office):
    with pytest.raises(ValueError):
        compose_training_set([(hourly, None), (office, None)])


def test_augmented_bytes_scale_with_copies(hourly):
    copies = rdm_augment(hourly, [0.5, 2.0, 3.0])
    src = sum(hourly.column(k).nbytes for k in APPLIANCES) + hourly.aggregate.nbytes
    out = sum(sum(c.column(k).nbytes for k in APPLIANCES) + c.aggregate.nbytes for c, _ in copies)
    assert out == 3 * src
