"""End-to-end measurement flows shared by the command line front end.

Covers window slicing of sign series, per-window memory metrics, the
window -> quarter aggregation feeding the detection step, and the fully
synthetic ground-truth panel (simulated assets with known participation
levels, scored by every metric at every group cut).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import classify
from .activity import GroupAssignment, quantile_groups
from .errors import DataError
from .simulator import SimConfig, simulate
from .memory import MemoryMetrics, compute_metrics
from .validation import check_int

log = logging.getLogger(__name__)

#: Metric columns produced per window, in output order.
METRIC_NAMES = ("pi10", "a", "b", "tau", "tau_scaled")


def pi10_score(metrics: MemoryMetrics) -> float:
    """Run-probability score at kappa = 10: mean over both signs."""
    try:
        return 0.5 * (metrics.pi[(1, 10)] + metrics.pi[(-1, 10)])
    except KeyError:
        raise DataError(
            "pi10 needs run probabilities up to kappa = 10; compute metrics with kappa_max >= 10"
        ) from None


# --------------------------------------------------------------------------
# windowing
# --------------------------------------------------------------------------

def slice_windows(
    signs: np.ndarray,
    window_size: int = 0,
    week: np.ndarray | None = None,
) -> list[tuple[int, np.ndarray]]:
    """Split a sign series into measurement windows.

    window_size = 0 keeps the whole series as window 1.  With a positive
    window_size, consecutive chunks of that many signs become windows
    1, 2, ...; a shorter final remainder is kept as its own window.
    When a week annotation is given, windows follow the distinct week
    values instead (in ascending week order).
    """
    if week is not None:
        week = np.asarray(week)
        if week.shape != signs.shape:
            raise DataError("week annotation must align with signs")
        return [(int(w), signs[week == w]) for w in np.unique(week)]
    window_size = check_int("window_size", window_size, lo=0)
    if window_size == 0 or window_size >= signs.size:
        return [(1, signs)]
    return [
        (i + 1, signs[start : start + window_size])
        for i, start in enumerate(range(0, signs.size, window_size))
    ]


# --------------------------------------------------------------------------
# per-window metric rows
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class WindowMetrics:
    asset_id: str
    window: int
    metrics: MemoryMetrics | None
    #: set when the window was measurable but the power-law fit had no support
    fit_failed: bool = False


def _window_metrics(asset_id, window_id, chunk, kappa_max, tau_max, fit_min, fit_max, plus_one):
    min_len = max(kappa_max + (1 if plus_one else 0), 2)
    if chunk.size < min_len:
        log.warning("skipping %s window %s: %d signs < %d", asset_id, window_id, chunk.size, min_len)
        return WindowMetrics(asset_id, window_id, None)
    if abs(int(chunk.sum(dtype=np.int64))) == chunk.size:
        log.warning("skipping %s window %s: constant sign series", asset_id, window_id)
        return WindowMetrics(asset_id, window_id, None)
    m = compute_metrics(
        chunk,
        kappa_max=kappa_max,
        tau_max=tau_max,
        fit_min=fit_min,
        fit_max=fit_max,
        plus_one=plus_one,
        nan_on_fit_failure=True,
    )
    fit_failed = math.isnan(m.a)
    if fit_failed:
        # fit had no positive support; the measurable parts are kept
        log.warning("power-law fit failed for %s window %s", asset_id, window_id)
    return WindowMetrics(asset_id, window_id, m, fit_failed=fit_failed)


def memory_table(
    series: Mapping[str, np.ndarray],
    *,
    kappa_max: int = 10,
    tau_max: int = 1000,
    fit_min: int = 1,
    fit_max: int | None = None,
    window_size: int = 0,
    weeks: Mapping[str, np.ndarray] | None = None,
    plus_one: bool = False,
    threads: int = 1,
) -> list[WindowMetrics]:
    """Per-asset, per-window memory metrics, sorted by (asset, window).

    Windows too short to measure are skipped with a warning; windows
    where the power-law fit has no positive support are reported with
    empty metric fields rather than aborting the whole run.
    """
    tasks = []
    for asset in sorted(series):
        wk = weeks.get(asset) if weeks else None
        for wid, chunk in slice_windows(np.asarray(series[asset]), window_size, wk):
            tasks.append((asset, wid, chunk))

    def run(task):
        asset, wid, chunk = task
        return _window_metrics(asset, wid, chunk, kappa_max, tau_max, fit_min, fit_max, plus_one)

    threads = check_int("threads", threads, lo=1)
    if threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, tasks))
    else:
        rows = [run(t) for t in tasks]
    rows = [r for r in rows if r.metrics is not None]
    return sorted(rows, key=lambda r: (r.asset_id, r.window))


# --------------------------------------------------------------------------
# window -> quarter aggregation
# --------------------------------------------------------------------------

def windows_to_quarters(
    rows: Iterable[tuple[str, int, float]],
    windows_per_quarter: int = 13,
) -> dict[int, dict[str, float]]:
    """Average per-window metric values into per-quarter values.

    Window w belongs to quarter (w - 1) // windows_per_quarter + 1, so
    with the default 13 weekly windows per quarter, windows 1..13 feed
    quarter 1.  windows_per_quarter = 1 is the identity mapping.
    """
    wpq = check_int("windows_per_quarter", windows_per_quarter, lo=1)
    acc: dict[int, dict[str, list[float]]] = {}
    for asset, window, value in rows:
        q = (int(window) - 1) // wpq + 1
        acc.setdefault(q, {}).setdefault(asset, []).append(float(value))
    return {
        q: {a: float(np.mean(vs)) for a, vs in per_asset.items()}
        for q, per_asset in acc.items()
    }


# --------------------------------------------------------------------------
# synthetic ground-truth panel
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PanelResult:
    """Synthetic-panel outcome: detection AUC per metric and group cut.

    ``auc`` maps (metric, k_cut) to the activity-oriented AUC and
    ``auc_raw`` to the unoriented one; ``m_by_asset`` records the true
    participation level behind each simulated asset and ``assignment``
    the grouping the labels came from.
    """

    auc: Mapping[tuple[str, int], float]
    auc_raw: Mapping[tuple[str, int], float]
    m_by_asset: Mapping[str, int]
    assignment: GroupAssignment
    metric_values: Mapping[str, Mapping[str, float]]


def synthetic_panel(
    n_assets: int,
    m_levels: Sequence[int],
    beta: float,
    n: int,
    seed: int,
    *,
    n_groups: int = 20,
    kappa_max: int = 10,
    tau_max: int = 2000,
    threads: int = 1,
) -> PanelResult:
    """Simulate a panel of assets and score every metric at every cut.

    Assets are split evenly over the participation levels ``m_levels``
    (at least two entries; equal values give a null panel where every
    AUC should hover near 0.5).  Each asset gets an independent child
    stream of ``seed``; its whole series forms one measurement window.
    The truth grouping ranks assets by their participation level M (ties
    broken by asset id), and each metric is scored against the labels
    from every cut k_cut = 1..n_groups-1.
    """
    n_assets = check_int("n_assets", n_assets, lo=1)
    if kappa_max < 10:
        raise DataError("panel scores pi10, so kappa_max must be >= 10")
    if len(m_levels) < 2:
        raise DataError("need at least 2 participation levels (repeat one for a null panel)")
    levels = [check_int("m_level", m, lo=1) for m in m_levels]
    if n_assets < max(len(levels), n_groups):
        raise DataError(f"need at least {max(len(levels), n_groups)} assets")
    check_int("n", n, lo=2)

    per_level = n_assets // len(levels)
    children = np.random.SeedSequence(seed).spawn(n_assets)
    assets = [f"A{i:04d}" for i in range(n_assets)]
    m_by_asset = {
        assets[i]: levels[min(i // max(per_level, 1), len(levels) - 1)]
        for i in range(n_assets)
    }

    def run(i: int) -> tuple[str, MemoryMetrics]:
        child_seed = int(children[i].generate_state(1)[0])
        sim = simulate(
            SimConfig(m=m_by_asset[assets[i]], beta=beta, n=n, seed=child_seed),
            include_log=False,
            include_choices=False,
        )
        return assets[i], compute_metrics(
            sim.signs.signs, kappa_max=kappa_max, tau_max=tau_max
        )

    threads = check_int("threads", threads, lo=1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            computed = dict(pool.map(run, range(n_assets)))
    else:
        computed = dict(run(i) for i in range(n_assets))

    metric_values: dict[str, dict[str, float]] = {
        "pi10": {a: pi10_score(m) for a, m in computed.items()},
        "a": {a: m.a for a, m in computed.items()},
        "b": {a: m.b for a, m in computed.items()},
        "tau": {a: float(m.tau_star) for a, m in computed.items()},
        "tau_scaled": {a: m.tau_star_scaled for a, m in computed.items()},
    }

    assignment = quantile_groups(
        {a: float(m) for a, m in m_by_asset.items()}, n_groups=n_groups
    )
    auc: dict[tuple[str, int], float] = {}
    auc_raw: dict[tuple[str, int], float] = {}
    for name in METRIC_NAMES:
        table = classify.auc_by_cut(classify.oriented_scores(name, metric_values[name]), assignment)
        raw = classify.auc_by_cut(metric_values[name], assignment)
        for k_cut, cell in table.items():
            auc[(name, k_cut)] = cell.mean
            auc_raw[(name, k_cut)] = raw[k_cut].mean
    return PanelResult(
        auc=auc,
        auc_raw=auc_raw,
        m_by_asset=m_by_asset,
        assignment=assignment,
        metric_values=metric_values,
    )
