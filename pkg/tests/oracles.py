"""Independent reference implementations used as test oracles.

Each function here recomputes a quantity by the most literal method
available (direct summation, sliding windows, pair counting, hand
loops), deliberately avoiding the package's own algorithms.
"""

from __future__ import annotations

import numpy as np


def acf_direct(x, tau_max: int) -> np.ndarray:
    """Direct-summation autocorrelation: one dot product per lag."""
    x = np.asarray(x, dtype=np.float64)
    d = x - x.mean()
    denom = float(np.dot(d, d))
    return np.array([float(np.dot(d[: d.size - t], d[t:])) for t in range(1, tau_max + 1)]) / denom


def run_prob_naive(signs, kappa: int, s: int, *, plus_one: bool = False) -> float:
    """Sliding-window run probability, one window at a time."""
    x = list(signs)
    width = kappa + 1 if plus_one else kappa
    wins = [x[i : i + width] for i in range(len(x) - width + 1)]
    hits = sum(1 for w in wins if all(v == s for v in w))
    return hits / len(wins)


def auc_concordant(scores: dict, labels: dict) -> float:
    """Concordant-pair AUC: fraction of (positive, negative) pairs where
    the positive scores higher, ties counted half."""
    pos = np.array([v for k, v in scores.items() if labels[k] == 1], dtype=np.float64)
    neg = np.array([v for k, v in scores.items() if labels[k] == 0], dtype=np.float64)
    gt = (pos[:, None] > neg[None, :]).sum()
    eq = (pos[:, None] == neg[None, :]).sum()
    return float((gt + 0.5 * eq) / (pos.size * neg.size))


def activity_hand(positions: dict, volume: float, asset: str, quarter: int):
    """Hand-summed activity ratios from a {(fund, asset, quarter): W} dict.

    Returns (r, R, S).
    """
    funds = {f for (f, a, q) in positions if a == asset and q in (quarter, quarter - 1)}
    net = 0.0
    gross = 0.0
    for f in sorted(funds):
        before = positions.get((f, asset, quarter - 1), 0.0)
        now = positions.get((f, asset, quarter), 0.0)
        net += now - before
        gross += abs(now - before)
    return net / volume, abs(net) / volume, gross / volume


def powerlaw_curve(a: float, b: float, tau_max: int) -> np.ndarray:
    tau = np.arange(1, tau_max + 1, dtype=np.float64)
    return a * tau ** -b


def tau_star_scan(values, noise: float) -> int:
    """Brute-force memory length: walk lags until one dips to the noise."""
    for i, c in enumerate(values):
        if c <= noise:
            return i
    return len(values)
