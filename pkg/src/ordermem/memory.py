"""Long-memory measures for market-order sign series.

Implements the run (persistence) probabilities pi(s, kappa), the biased
sample autocorrelation of the sign series, the log-log power-law fit
C(tau) ~ a * tau**-b, and the effective memory length tau_star (the last
lag before the autocorrelation first dips to the 2/sqrt(N) noise level).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .errors import DataError, DegenerateSeriesError, InsufficientSupportError
from .validation import as_sign_array, check_int

# Above this length the lagged products are accumulated block by block so
# the FFT work space stays flat in memory; both paths carry out the same
# linear (non-circular) correlation arithmetic.
_FULL_FFT_MAX_N = 1 << 23


# --------------------------------------------------------------------------
# run probabilities
# --------------------------------------------------------------------------

def sign_run_lengths(signs) -> tuple[np.ndarray, np.ndarray]:
    """Run-length encode a sign series.

    Returns ``(values, lengths)`` where values[i] is the sign of run i and
    lengths[i] its length; ``np.repeat(values, lengths)`` reproduces the
    input.
    """
    x = as_sign_array(signs)
    if x.size == 0:
        return np.empty(0, np.int8), np.empty(0, np.int64)
    breaks = np.flatnonzero(x[1:] != x[:-1])
    starts = np.concatenate(([0], breaks + 1))
    bounds = np.concatenate((starts, [x.size]))
    return x[starts], np.diff(bounds).astype(np.int64)


def run_probability(signs, kappa: int, s: int, *, plus_one: bool = False) -> float:
    """Probability that ``kappa`` consecutive signs all equal ``s``.

    Counts sliding windows of ``kappa`` signs (all N - kappa + 1 of them)
    in which every sign equals ``s``.  With ``plus_one=True`` the window
    is widened to kappa + 1 signs, the alternative reading in which the
    kappa later signs must repeat an initial one.
    """
    x = as_sign_array(signs)
    if s not in (-1, 1):
        raise DataError(f"s must be -1 or +1, got {s!r}")
    kappa = check_int("kappa", kappa, lo=1)
    width = kappa + 1 if plus_one else kappa
    if x.size == 0:
        raise DataError("empty sign series")
    if x.size < width:
        raise DataError(f"series of length {x.size} has no window of {width} signs")
    values, lengths = sign_run_lengths(x)
    inside = lengths[values == s] - width + 1
    count = int(inside[inside > 0].sum())
    return count / (x.size - width + 1)


def pi_table(
    signs,
    kappa_max: int = 10,
    *,
    kappa_min: int = 2,
    plus_one: bool = False,
) -> dict[tuple[int, int], float]:
    """Run probabilities for both signs over kappa = kappa_min..kappa_max.

    Returns a dict keyed by (s, kappa).  A single run-length encoding is
    shared across all entries.
    """
    x = as_sign_array(signs)
    kappa_max = check_int("kappa_max", kappa_max, lo=1)
    kappa_min = check_int("kappa_min", kappa_min, lo=1, hi=kappa_max)
    widest = kappa_max + 1 if plus_one else kappa_max
    if x.size < widest:
        raise DataError(f"series of length {x.size} has no window of {widest} signs")
    values, lengths = sign_run_lengths(x)
    out: dict[tuple[int, int], float] = {}
    for s in (-1, 1):
        lens = lengths[values == s]
        for kappa in range(kappa_min, kappa_max + 1):
            width = kappa + 1 if plus_one else kappa
            inside = lens - width + 1
            count = int(inside[inside > 0].sum())
            out[(s, kappa)] = count / (x.size - width + 1)
    return out


# --------------------------------------------------------------------------
# autocorrelation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AcfCurve:
    """Sample autocorrelation C(tau) for tau = 1..tau_max of an N-sign series.

    ``values[i]`` is C(i + 1), normalized by the full-series sum of squared
    deviations (the biased estimator), so every entry lies in [-1, 1].
    ``noise_level`` is the 2/sqrt(N) zero-autocorrelation scale used to
    declare lags indistinguishable from noise.
    """

    values: np.ndarray
    n: int

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size == 0:
            raise DataError("autocorrelation values must form a non-empty 1-D array")
        object.__setattr__(self, "values", vals)
        if self.n < 2:
            raise DataError("n must be >= 2")

    @property
    def noise_level(self) -> float:
        return 2.0 / float(np.sqrt(self.n))

    @property
    def tau_max(self) -> int:
        return int(self.values.size)

    def value(self, tau: int) -> float:
        tau = check_int("tau", tau, lo=1, hi=self.values.size)
        return float(self.values[tau - 1])

    def __len__(self) -> int:
        return int(self.values.size)


def _next_pow2(m: int) -> int:
    return 1 << (max(m, 1) - 1).bit_length()


def _lagged_products_full(x: np.ndarray, mean: float, tau_max: int) -> np.ndarray:
    """Sum_t d_t * d_{t+tau} for tau = 0..tau_max via one zero-padded FFT."""
    d = x.astype(np.float64)
    d -= mean
    size = _next_pow2(2 * d.size)
    f = np.fft.rfft(d, size)
    np.multiply(f, f.conj(), out=f)
    return np.fft.irfft(f, size)[: tau_max + 1]


def _lagged_products_blocked(
    x: np.ndarray, mean: float, tau_max: int, block: int = 1 << 22
) -> np.ndarray:
    """Blockwise accumulation of the lagged products for long series.

    Each block is cross-correlated against itself extended by tau_max
    trailing elements, so every ordered pair (t, t + tau) with t inside
    the block is counted exactly once and none wrap around.
    """
    n = x.size
    block = max(block, _next_pow2(4 * tau_max))
    size = _next_pow2(block + tau_max)
    acc = np.zeros(tau_max + 1, dtype=np.float64)
    for start in range(0, n, block):
        stop = min(start + block, n)
        xb = x[start:stop].astype(np.float64)
        xb -= mean
        yb = x[start:min(stop + tau_max, n)].astype(np.float64)
        yb -= mean
        fx = np.fft.rfft(xb, size)
        fy = np.fft.rfft(yb, size)
        np.multiply(fx.conj(), fy, out=fy)
        acc += np.fft.irfft(fy, size)[: tau_max + 1]
    return acc


def autocorrelation(signs, tau_max: int) -> AcfCurve:
    """Biased sample autocorrelation of a sign series for lags 1..tau_max.

        C(tau) = sum_{t=1}^{N-tau} (s_t - sbar)(s_{t+tau} - sbar)
                 / sum_{t=1}^{N} (s_t - sbar)^2

    Computed spectrally with zero padding, which agrees with the direct
    summation to within accumulated rounding (<= 1e-9 per lag).
    """
    x = as_sign_array(signs)
    n = x.size
    if n < 2:
        raise DataError(f"autocorrelation needs at least 2 signs, got {n}")
    tau_max = check_int("tau_max", tau_max, lo=1, hi=n - 1)
    total = int(x.sum(dtype=np.int64))
    if abs(total) == n:
        raise DegenerateSeriesError("degenerate series: all signs equal")
    mean = total / n
    if n <= _FULL_FFT_MAX_N:
        num = _lagged_products_full(x, mean, tau_max)
    else:
        num = _lagged_products_blocked(x, mean, tau_max)
    return AcfCurve(values=num[1:] / num[0], n=n)


# --------------------------------------------------------------------------
# power-law fit and memory length
# --------------------------------------------------------------------------

class PowerLawFit(NamedTuple):
    a: float
    b: float


def fit_power_law(curve, fit_min: int = 1, fit_max: int | None = None) -> PowerLawFit:
    """Fit C(tau) ~ a * tau**-b by OLS of log C on log tau.

    Only lags inside [fit_min, fit_max] with strictly positive C enter the
    regression; fewer than 3 such lags raises InsufficientSupportError.
    """
    values = curve.values if isinstance(curve, AcfCurve) else np.asarray(curve, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise DataError("curve must be a non-empty 1-D array of C(tau) values")
    if fit_max is None:
        fit_max = values.size
    fit_min = check_int("fit_min", fit_min, lo=1)
    fit_max = check_int("fit_max", fit_max, lo=fit_min, hi=values.size)
    tau = np.arange(1, values.size + 1)
    mask = (tau >= fit_min) & (tau <= fit_max) & (values > 0)
    if int(mask.sum()) < 3:
        raise InsufficientSupportError(
            f"insufficient positive support: {int(mask.sum())} positive lags in "
            f"[{fit_min}, {fit_max}], need >= 3"
        )
    slope, intercept = np.polyfit(np.log(tau[mask]), np.log(values[mask]), 1)
    return PowerLawFit(a=float(np.exp(intercept)), b=float(-slope))


def memory_length(curve: AcfCurve) -> int:
    """Largest tau_star such that C(tau) > 2/sqrt(N) for every tau <= tau_star.

    Returns 0 when already C(1) <= noise, and tau_max when the curve never
    reaches the noise level inside the computed range.
    """
    if not isinstance(curve, AcfCurve):
        raise DataError("memory_length expects an AcfCurve")
    below = np.flatnonzero(curve.values <= curve.noise_level)
    return int(below[0]) if below.size else int(curve.values.size)


# --------------------------------------------------------------------------
# combined metrics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MemoryMetrics:
    """All per-window memory measures for one sign series.

    ``pi`` maps (s, kappa) to the run probability; a and b are the
    power-law amplitude and decay exponent; tau_star is the effective
    memory length in market-order events and tau_star_scaled is tau_star
    divided by the series length n.
    """

    pi: Mapping[tuple[int, int], float]
    a: float
    b: float
    tau_star: int
    tau_star_scaled: float
    n: int

    def pi_value(self, s: int, kappa: int) -> float:
        return self.pi[(s, kappa)]


def _positive_lags(values: np.ndarray, fit_min: int, fit_max: int) -> int:
    if fit_max < fit_min:
        return 0
    window = values[fit_min - 1 : fit_max]
    return int((window > 0).sum())


def compute_metrics(
    signs,
    *,
    kappa_max: int = 10,
    tau_max: int = 1000,
    fit_min: int = 1,
    fit_max: int | None = None,
    plus_one: bool = False,
    nan_on_fit_failure: bool = False,
) -> MemoryMetrics:
    """Run probabilities, power-law fit, and memory length in one pass.

    The default fit range is [fit_min, min(tau_star, 1000)] so the fit
    stays above the noise floor; if that window holds fewer than 3
    positive lags (short-memory series) it falls back to
    [fit_min, min(tau_max, 1000)].  Pass fit_max to pin the range
    explicitly.

    A fit with no positive support raises InsufficientSupportError;
    with nan_on_fit_failure the run probabilities and memory length are
    returned anyway and a, b come back as nan.
    """
    x = as_sign_array(signs)
    n = x.size
    if n < 2:
        raise DataError(f"need at least 2 signs, got {n}")
    tau_hi = min(check_int("tau_max", tau_max, lo=1), n - 1)
    curve = autocorrelation(x, tau_hi)
    tau_star = memory_length(curve)
    pi = pi_table(x, kappa_max, plus_one=plus_one)
    if fit_max is None:
        fit_hi = min(tau_star, 1000)
        if _positive_lags(curve.values, fit_min, fit_hi) < 3:
            fit_hi = min(curve.tau_max, 1000)
    else:
        fit_hi = fit_max
    try:
        a, b = fit_power_law(curve, fit_min=fit_min, fit_max=fit_hi)
    except InsufficientSupportError:
        if not nan_on_fit_failure:
            raise
        a = b = float("nan")
    return MemoryMetrics(
        pi=pi,
        a=a,
        b=b,
        tau_star=tau_star,
        tau_star_scaled=tau_star / n,
        n=n,
    )
