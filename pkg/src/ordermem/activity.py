"""Fund activity ratios and equal-population quantile grouping.

For asset alpha in quarter q, with fund positions W_i and traded dollar
volume V(q):

    r(q) = sum_i [W_i(q) - W_i(q-1)] / V(q)     directional net ratio
    R(q) = |r(q)|                               directional magnitude
    S(q) = sum_i |W_i(q) - W_i(q-1)| / V(q)     absolute (gross) ratio

S >= R always, with equality when every fund traded the same way.
Assets are then ranked by such a ratio and split into G equal-population
groups for downstream detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .errors import DataError
from .validation import check_int

#: Number of equal-population groups used throughout the study.
DEFAULT_GROUPS = 20


@dataclass(frozen=True)
class ActivityRatios:
    """Directional and absolute fund-activity ratios for one asset-quarter."""

    asset_id: str
    quarter: int
    r: float
    R: float
    S: float

    def __post_init__(self) -> None:
        if not math.isclose(self.R, abs(self.r), rel_tol=0.0, abs_tol=1e-12):
            raise DataError("R must equal |r|")
        if self.S < self.R - 1e-12:
            raise DataError("S must be >= R")


def _deltas(panel, asset: str, quarter: int) -> np.ndarray:
    """Per-fund position changes W_i(q) - W_i(q-1) over all involved funds."""
    quarters = panel.quarters
    if not quarters:
        raise DataError("empty panel")
    if quarter - 1 < quarters[0] or quarter > quarters[-1]:
        raise DataError(f"no prior quarter in panel range for quarter {quarter}")
    now = panel.holders(asset, quarter)
    before = panel.holders(asset, quarter - 1)
    funds = sorted(set(now) | set(before))
    return np.array([now.get(f, 0.0) - before.get(f, 0.0) for f in funds], dtype=np.float64)


def directional_ratio(panel, asset: str, quarter: int) -> float:
    """Net fund flow r = sum_i [W_i(q) - W_i(q-1)] / V(q)."""
    d = _deltas(panel, asset, quarter)
    return float(d.sum()) / panel.volume(asset, quarter)


def absolute_ratio(panel, asset: str, quarter: int) -> float:
    """Gross fund flow S = sum_i |W_i(q) - W_i(q-1)| / V(q)."""
    d = _deltas(panel, asset, quarter)
    return float(np.abs(d).sum()) / panel.volume(asset, quarter)


def activity_ratios(panel, asset: str, quarter: int) -> ActivityRatios:
    """r, R, S for one asset-quarter in a single pass over the funds."""
    d = _deltas(panel, asset, quarter)
    v = panel.volume(asset, quarter)
    r = float(d.sum()) / v
    s = float(np.abs(d).sum()) / v
    return ActivityRatios(asset_id=asset, quarter=quarter, r=r, R=abs(r), S=s)


# --------------------------------------------------------------------------
# quantile grouping
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupAssignment:
    """Equal-population group index (1..n_groups) per asset for one quarter."""

    quarter: int
    groups: Mapping[str, int]
    n_groups: int

    def __post_init__(self) -> None:
        check_int("n_groups", self.n_groups, lo=1)
        for asset, g in self.groups.items():
            if not 1 <= g <= self.n_groups:
                raise DataError(f"group for {asset} out of range: {g}")

    def members(self, group: int) -> list[str]:
        return sorted(a for a, g in self.groups.items() if g == group)


def quantile_groups(
    values: Mapping[str, float],
    n_groups: int = DEFAULT_GROUPS,
    quarter: int = 0,
) -> GroupAssignment:
    """Split assets into n_groups equal-population groups by value rank.

    Rank i (ascending, 1-based) lands in group ceil(i * G / n), so group
    g covers ranks in ((g-1) n / G, g n / G]; group 1 holds the smallest
    values.  Ties are broken by ascending asset id, which keeps the
    assignment deterministic.
    """
    n_groups = check_int("n_groups", n_groups, lo=1)
    n = len(values)
    if n < n_groups:
        raise DataError(f"need at least {n_groups} assets for {n_groups} groups, got {n}")
    for asset, v in values.items():
        if not math.isfinite(v):
            raise DataError(f"non-finite value for {asset}: {v!r}")
    ranked = sorted(values, key=lambda a: (values[a], a))
    groups = {asset: -(-(i + 1) * n_groups // n) for i, asset in enumerate(ranked)}
    return GroupAssignment(quarter=quarter, groups=groups, n_groups=n_groups)


class GroupAverage(NamedTuple):
    value: float
    skipped: int


def group_metric_average(
    assignment: GroupAssignment,
    metrics: Mapping[str, float],
    group: int,
) -> GroupAverage:
    """Mean metric over one group's members.

    Members without a metric value are skipped and counted; a group with
    no members, or none carrying a metric, is an error.
    """
    group = check_int("group", group, lo=1, hi=assignment.n_groups)
    members = assignment.members(group)
    if not members:
        raise DataError(f"group {group} has no members")
    present = [metrics[a] for a in members if a in metrics]
    if not present:
        raise DataError(f"group {group}: no metric values among {len(members)} members")
    return GroupAverage(value=float(np.mean(present)), skipped=len(members) - len(present))
