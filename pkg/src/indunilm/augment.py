"""Appliance-modulated augmentation, random scaling baseline, training-set composition."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .sim_core import FacilityDataset

DEFAULT_S_RANGE = (1.0, 5.0)
RDM_FACTORS = tuple(float(f) for f in np.geomspace(0.2, 10.0, 14))


class UndefinedContributionError(ValueError):
    """All appliance signals are zero, so relative contributions are undefined."""


@dataclass(frozen=True)
class ContributionVector:
    p: dict[str, float]
    totals: dict[str, float]  # sum of |x| per appliance, watt-samples
    total: float

    def ranking(self) -> list[str]:
        """Appliance kinds ordered by decreasing contribution."""
        return sorted(self.p, key=lambda k: -self.p[k])


@dataclass(frozen=True)
class AugmentationPlan:
    method: str  # "AMDA" or "RDM"
    s: float
    factors: dict[str, float]
    source_dataset_id: str
    seed: int | None = None
    contributions: dict[str, float] | None = None
    renormalized: bool = False

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "s": self.s,
            "factors": self.factors,
            "source": self.source_dataset_id,
            "seed": self.seed,
            "contributions": self.contributions,
            "renormalize_aggregate": self.renormalized,
        }

    def write_manifest(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path


def relative_contributions(ds: FacilityDataset, mask: np.ndarray | None = None) -> ContributionVector:
    """Share of total absolute energy per appliance.

    ``mask`` restricts the sums to selected samples (e.g. those covered by
    training windows) so no held-out data leaks into the statistics.
    """
    totals = {}
    for kind, trace in ds.appliances.items():
        x = trace.values if mask is None else trace.values[mask]
        totals[kind] = float(np.sum(np.abs(x), dtype=np.float64))
    total = sum(totals.values())
    if not total > 0:
        raise UndefinedContributionError(f"{ds.dataset_id}: all appliance signals are zero")
    return ContributionVector({k: v / total for k, v in totals.items()}, totals, total)


def amda_scale_factors(p: ContributionVector | dict[str, float], s: float, source: str = "") -> AugmentationPlan:
    if s < 0:
        raise ValueError(f"s must be non-negative, got {s}")
    shares = p.p if isinstance(p, ContributionVector) else dict(p)
    factors = {k: s * (1.0 - pk) for k, pk in shares.items()}
    return AugmentationPlan("AMDA", float(s), factors, source, contributions=shares)


def apply_plan(ds: FacilityDataset, plan: AugmentationPlan) -> FacilityDataset:
    values = {k: plan.factors[k] * ds.column(k) for k in ds.appliances}
    tag = f"{plan.method.lower()}(s={plan.s:g})" if plan.method == "AMDA" else f"rdm(x{plan.s:g})"
    return ds.with_values(values, f"{ds.dataset_id}*{tag}")


def amda_augment(
    ds: FacilityDataset,
    s: float,
    renormalize_aggregate: bool = False,
    mask: np.ndarray | None = None,
    seed: int | None = None,
) -> tuple[FacilityDataset, AugmentationPlan]:
    """Scale each appliance by ``s * (1 - p_i)`` and rebuild the aggregate.

    With ``renormalize_aggregate`` every factor is multiplied by one common
    constant so the augmented aggregate energy equals the source's.
    """
    plan = amda_scale_factors(relative_contributions(ds, mask), s, ds.dataset_id)
    plan = AugmentationPlan(plan.method, plan.s, plan.factors, plan.source_dataset_id, seed, plan.contributions)
    if renormalize_aggregate:
        scaled = sum(plan.factors[k] * float(np.sum(ds.column(k))) for k in ds.appliances)
        source = float(np.sum(ds.aggregate))
        if scaled == 0:
            raise UndefinedContributionError("scaled aggregate energy is zero; cannot renormalize")
        c = source / scaled
        plan = AugmentationPlan(
            "AMDA", plan.s, {k: c * v for k, v in plan.factors.items()},
            plan.source_dataset_id, seed, plan.contributions, renormalized=True,
        )
    return apply_plan(ds, plan), plan


def draw_s(seed: int, s_range: tuple[float, float] = DEFAULT_S_RANGE) -> float:
    lo, hi = s_range
    if not 0 <= lo <= hi:
        raise ValueError(f"bad s range {s_range}")
    return float(np.random.default_rng(seed).uniform(lo, hi))


def rdm_augment(
    ds: FacilityDataset, factors: tuple[float, ...] | list[float] = RDM_FACTORS
) -> list[tuple[FacilityDataset, AugmentationPlan]]:
    """One copy per factor, every appliance of a copy scaled by that factor."""
    if len(factors) == 0:
        raise ValueError("factor list is empty")
    out = []
    for f in factors:
        if f < 0:
            raise ValueError(f"scale factors must be non-negative, got {f}")
        plan = AugmentationPlan("RDM", float(f), {k: float(f) for k in ds.appliances}, ds.dataset_id)
        out.append((apply_plan(ds, plan), plan))
    return out


@dataclass
class ComposedTrainingSet:
    members: list[tuple[FacilityDataset, AugmentationPlan | None]]
    base_samples: int | None = None
    provenance: list[dict] = field(default_factory=list)

    @property
    def total_samples(self) -> int:
        return sum(len(ds) for ds, _ in self.members)

    @property
    def relative_increase(self) -> float | None:
        """Percent increase of total samples over the declared base."""
        if not self.base_samples:
            return None
        return 100.0 * (self.total_samples - self.base_samples) / self.base_samples


def compose_training_set(
    members: list[tuple[FacilityDataset, AugmentationPlan | None]],
    base_samples: int | None = None,
) -> ComposedTrainingSet:
    if not members:
        raise ValueError("cannot compose an empty training set")
    period = members[0][0].sample_period
    schema = tuple(members[0][0].appliances)
    for ds, _ in members:
        if ds.sample_period != period:
            raise ValueError(f"{ds.dataset_id}: sample period {ds.sample_period} != {period}")
        if tuple(ds.appliances) != schema:
            raise ValueError(f"{ds.dataset_id}: appliance schema {tuple(ds.appliances)} != {schema}")
    prov = [
        {"dataset_id": ds.dataset_id, "samples": len(ds), "plan": None if plan is None else plan.to_dict()}
        for ds, plan in members
    ]
    return ComposedTrainingSet(list(members), base_samples, prov)
