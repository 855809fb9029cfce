"""Detection quality of a memory metric against activity-based labels.

Assets below or at a group cut keep label 0, the rest label 1; a metric
is swept as a score threshold to trace the parametric ROC curve, and the
area under it (trapezoidal, equal to the tie-aware concordant-pair
fraction) summarizes how well the metric separates the two sides.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .activity import GroupAssignment
from .errors import DataError
from .validation import check_int

#: Metrics whose scores the detection pipeline negates before scoring, so
#: that AUC > 0.5 means "memory weakens as fund activity rises": heavy
#: activity shortens runs (pi), lowers the amplitude a, and shortens the
#: absolute memory length tau_star.  b and the scaled length keep their
#: raw sign.
NEGATED_METRICS = frozenset({"pi10", "a", "tau"})


def oriented_scores(metric: str, scores: Mapping[str, float]) -> dict[str, float]:
    """Flip the sign of metrics that fall with rising activity."""
    if metric in NEGATED_METRICS:
        return {k: -v for k, v in scores.items()}
    return dict(scores)


@dataclass(frozen=True)
class RocResult:
    """Parametric ROC curve and its area.

    ``points`` has one (false_positive_rate, true_positive_rate) row per
    threshold, starting at (0, 0) and ending at (1, 1), both coordinates
    non-decreasing.  ``auc`` is the trapezoidal integral of the curve.
    """

    points: np.ndarray
    auc: float

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise DataError("points must be an (k, 2) array")
        object.__setattr__(self, "points", pts)


def labels_from_cut(assignment: GroupAssignment, k_cut: int) -> dict[str, int]:
    """0/1 labels: group <= k_cut gets 0, the rest 1.

    k_cut must leave both sides non-empty as a *possible* outcome, i.e.
    1 <= k_cut <= n_groups - 1.
    """
    if assignment.n_groups < 2:
        raise DataError("need at least 2 groups to cut")
    k_cut = check_int("k_cut", k_cut, lo=1, hi=assignment.n_groups - 1)
    return {asset: (0 if g <= k_cut else 1) for asset, g in assignment.groups.items()}


def roc_auc(scores: Mapping[str, float], labels: Mapping[str, int]) -> RocResult:
    """Threshold-swept ROC curve and trapezoidal AUC.

    Assets are predicted positive when score >= threshold; sweeping the
    threshold over the distinct scores traces the curve.  Tied scores
    move the point diagonally, which the trapezoid counts as half,
    matching the rank-statistic (concordant-pair) definition of AUC.
    """
    if set(scores) != set(labels):
        raise DataError("scores and labels must cover the same assets")
    if not scores:
        raise DataError("empty input")
    keys = sorted(scores)
    s = np.array([scores[k] for k in keys], dtype=np.float64)
    y = np.array([labels[k] for k in keys])
    if not np.isfinite(s).all():
        raise DataError("scores must be finite")
    if not np.isin(y, (0, 1)).all():
        raise DataError("labels must be 0 or 1")
    n1 = int(y.sum())
    n0 = y.size - n1
    if n0 == 0 or n1 == 0:
        raise DataError("single-class labels: need at least one 0 and one 1")

    order = np.argsort(-s, kind="stable")
    ss = s[order]
    yy = y[order]
    tp = np.cumsum(yy)
    fp = np.cumsum(1 - yy)
    # keep only the last row of each tied-score block
    last = np.flatnonzero(np.diff(ss) != 0)
    idx = np.concatenate((last, [ss.size - 1]))
    xs = np.concatenate(([0.0], fp[idx] / n0))
    ys = np.concatenate(([0.0], tp[idx] / n1))
    auc = float(np.sum((xs[1:] - xs[:-1]) * (ys[1:] + ys[:-1]) * 0.5))
    return RocResult(points=np.column_stack((xs, ys)), auc=auc)


class CutAuc(NamedTuple):
    mean: float
    by_quarter: dict[int, float]


def _per_quarter(obj, what: str) -> dict[int, Mapping]:
    """Normalize 'one quarter' vs 'dict keyed by quarter' inputs."""
    if isinstance(obj, GroupAssignment):
        return {obj.quarter: obj}
    if isinstance(obj, Mapping) and obj and all(isinstance(k, int) for k in obj):
        return dict(obj)
    if isinstance(obj, Mapping):
        return {0: obj}
    raise DataError(f"cannot interpret {what} input of type {type(obj).__name__}")


def auc_by_cut(metrics, assignments) -> dict[int, CutAuc]:
    """AUC for every feasible cut k_cut = 1..G-1, averaged over quarters.

    ``metrics`` is {asset: score} for one quarter or {quarter: {asset:
    score}}; ``assignments`` a GroupAssignment or {quarter:
    GroupAssignment}.  Within each quarter, only assets carrying both a
    score and a group enter the curve.  Quarters where a cut leaves one
    side empty propagate as errors.
    """
    asg = _per_quarter(assignments, "assignments")
    mets = _per_quarter(metrics, "metrics")
    if set(asg) != set(mets):
        # single-quarter metric dict paired with a single assignment
        if len(asg) == 1 and len(mets) == 1:
            q = next(iter(asg))
            mets = {q: next(iter(mets.values()))}
        else:
            raise DataError(f"quarters differ: metrics {sorted(mets)} vs assignments {sorted(asg)}")
    sizes = {a.n_groups for a in asg.values()}
    if len(sizes) != 1:
        raise DataError(f"inconsistent group counts across quarters: {sorted(sizes)}")
    n_groups = sizes.pop()

    out: dict[int, CutAuc] = {}
    for k_cut in range(1, n_groups):
        by_quarter: dict[int, float] = {}
        for q in sorted(asg):
            labels = labels_from_cut(asg[q], k_cut)
            scores = mets[q]
            common = sorted(set(labels) & set(scores))
            if not common:
                raise DataError(f"quarter {q}: no assets carry both a score and a group")
            res = roc_auc({a: scores[a] for a in common}, {a: labels[a] for a in common})
            by_quarter[q] = res.auc
        out[k_cut] = CutAuc(mean=float(np.mean(list(by_quarter.values()))), by_quarter=by_quarter)
    return out
