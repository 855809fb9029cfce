"""Meta-order splitting simulator.

M hidden meta-orders run concurrently; each has a heavy-tailed size
(discretized Pareto, P(L > l) ~ l**-beta) and an equiprobable +/-1 sign.
At every step one of the M slots is chosen uniformly at random and emits
the next child order of its meta-order; an exhausted meta-order is
immediately replaced by a fresh one.  For beta in (1, 2) the emitted sign
series has an asymptotic autocorrelation

    C(tau) ~ (M**(beta-2) / beta) * tau**-(beta-1),

so the decay exponent reflects the size-tail exponent and the amplitude
falls as participation M rises.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DataError
from .signs import SignSeries
from .validation import check_int, check_positive, ensure_rng

#: Bit generator behind every simulation; recorded in run metadata so a
#: published run can name the exact stream algorithm.
RNG_NAME = "numpy-pcg64"

# Cap applied before float -> int64 conversion of sampled sizes; only
# reachable for beta << 1 draws where the continuous tail escapes the
# int64 range.
_MAX_LENGTH = np.int64(2) ** 62


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one simulation run.

    m       number of concurrent meta-order slots (>= 1)
    beta    size-tail exponent (> 1 so sizes have finite mean)
    n       number of emitted child orders (>= 1)
    seed    integer seed for the pcg64 stream
    l_min   minimum meta-order size (>= 1)
    """

    m: int
    beta: float
    n: int
    seed: int
    l_min: int = 1

    def __post_init__(self) -> None:
        check_int("m", self.m, lo=1)
        if not self.beta > 1:
            raise DataError(f"beta must be > 1 for a finite mean size, got {self.beta}")
        check_positive("beta", self.beta)
        check_int("n", self.n, lo=1)
        check_int("seed", self.seed)
        check_int("l_min", self.l_min, lo=1)


class MetaOrder(NamedTuple):
    start: int
    length: int
    sign: int
    slot: int
    truncated: bool


@dataclass(frozen=True)
class MetaOrderLog:
    """Column-oriented log of every meta-order that emitted at least once.

    ``start`` is the global step index of the first child order,
    ``length`` the number of child orders actually emitted (not the
    sampled size when the run ends mid-order, in which case ``truncated``
    is set), ``sign`` the meta-order direction, and ``slot`` the slot it
    occupied.  Entries are sorted by start.
    """

    start: np.ndarray
    length: np.ndarray
    sign: np.ndarray
    slot: np.ndarray
    truncated: np.ndarray

    def __len__(self) -> int:
        return int(self.start.size)

    def __getitem__(self, i: int) -> MetaOrder:
        return MetaOrder(
            start=int(self.start[i]),
            length=int(self.length[i]),
            sign=int(self.sign[i]),
            slot=int(self.slot[i]),
            truncated=bool(self.truncated[i]),
        )


@dataclass(frozen=True)
class SimOutput:
    """Simulation result: the sign series plus enough state to replay it.

    ``slot_choices[t]`` is the slot that emitted step t; together with the
    per-slot meta-order log it reconstructs the series exactly.
    """

    signs: SignSeries
    metaorders: MetaOrderLog | None
    slot_choices: np.ndarray | None
    config: SimConfig
    rng_name: str = RNG_NAME


def sample_length(beta: float, l_min: int = 1, rng=None, size=None):
    """Draw meta-order sizes with tail P(L > l) ~ l**-beta and L >= l_min.

    A continuous Pareto variate X on [l_min, inf) with survival
    (x / l_min)**-beta is discretized downward, which keeps the minimum
    size reachable (as beta grows, L collapses onto l_min) while
    preserving the tail exponent: P(L > l) = ((l + 1) / l_min)**-beta.
    """
    beta = check_positive("beta", beta)
    l_min = check_int("l_min", l_min, lo=1)
    rng = ensure_rng(rng)
    u = rng.random(size)
    x = l_min * (1.0 - u) ** (-1.0 / beta)
    out = np.floor(np.minimum(x, float(_MAX_LENGTH))).astype(np.int64)
    return out if size is not None else int(out)


def _draw_lengths(rng, beta: float, l_min: int, target: int) -> tuple[np.ndarray, bool]:
    """Sample sizes until they cover ``target`` emissions, then truncate.

    Returns the emitted lengths (summing exactly to target) and whether
    the final meta-order was cut short of its sampled size.
    """
    mean_est = l_min * beta / (beta - 1.0)  # continuous mean, batching heuristic only
    chunks: list[np.ndarray] = []
    total = 0
    while total < target:
        need = int((target - total) / mean_est * 1.2) + 16
        draw = sample_length(beta, l_min, rng, size=need)
        chunks.append(draw)
        total += int(draw.sum())
    lengths = chunks[0] if len(chunks) == 1 else np.concatenate(chunks)
    cum = np.cumsum(lengths)
    cut = int(np.searchsorted(cum, target, side="left"))
    emitted = lengths[: cut + 1].copy()
    overshoot = int(cum[cut]) - target
    emitted[-1] -= overshoot
    return emitted, overshoot > 0


def simulate(
    config: SimConfig,
    *,
    asset_id: str = "sim",
    include_log: bool = True,
    include_choices: bool = True,
) -> SimOutput:
    """Run the splitting model and return the emitted sign series.

    The per-step description (pick a slot uniformly, emit its next child
    order, replace on exhaustion) is executed slot by slot: conditional on
    the slot-choice sequence, each slot's emissions form an independent
    renewal stream of sign runs, so drawing every slot's run lengths and
    signs in one vectorized pass produces the same process law as the
    step-by-step loop.
    """
    if not isinstance(config, SimConfig):
        config = SimConfig(**config)
    rng = np.random.default_rng(config.seed)
    n, m = config.n, config.m

    choices = rng.integers(0, m, size=n, dtype=np.int32)
    order = np.argsort(choices, kind="stable")
    counts = np.bincount(choices, minlength=m)

    out = np.empty(n, dtype=np.int8)
    log_parts: list[tuple[np.ndarray, ...]] = []
    offset = 0
    for j in range(m):
        visits = int(counts[j])
        pos = order[offset : offset + visits]
        offset += visits
        if visits == 0:
            continue
        emitted, last_truncated = _draw_lengths(rng, config.beta, config.l_min, visits)
        runs = emitted.size
        run_signs = (rng.integers(0, 2, size=runs, dtype=np.int8) << 1) - 1
        out[pos] = np.repeat(run_signs, emitted)
        if include_log:
            local_starts = np.concatenate(([0], np.cumsum(emitted[:-1])))
            truncated = np.zeros(runs, dtype=bool)
            truncated[-1] = last_truncated
            log_parts.append(
                (pos[local_starts], emitted, run_signs,
                 np.full(runs, j, dtype=np.int32), truncated)
            )

    log = None
    if include_log:
        start = np.concatenate([p[0] for p in log_parts])
        by_start = np.argsort(start, kind="stable")
        log = MetaOrderLog(
            start=start[by_start].astype(np.int64),
            length=np.concatenate([p[1] for p in log_parts])[by_start],
            sign=np.concatenate([p[2] for p in log_parts])[by_start],
            slot=np.concatenate([p[3] for p in log_parts])[by_start],
            truncated=np.concatenate([p[4] for p in log_parts])[by_start],
        )
    return SimOutput(
        signs=SignSeries(asset_id=asset_id, signs=out, dropped_count=0),
        metaorders=log,
        slot_choices=choices if include_choices else None,
        config=config,
    )


def replay(sim: SimOutput) -> np.ndarray:
    """Rebuild the emitted sign series from the log and the slot choices.

    Bit-identical to ``sim.signs.signs``; used to check that the logged
    meta-orders fully explain the series.
    """
    if sim.metaorders is None or sim.slot_choices is None:
        raise DataError("replay needs both the meta-order log and the slot choices")
    choices = sim.slot_choices
    n = choices.size
    out = np.empty(n, dtype=np.int8)
    order = np.argsort(choices, kind="stable")
    counts = np.bincount(choices, minlength=sim.config.m)
    log = sim.metaorders
    offset = 0
    for j in range(sim.config.m):
        visits = int(counts[j])
        pos = order[offset : offset + visits]
        offset += visits
        if visits == 0:
            continue
        mask = log.slot == j
        # log is start-sorted, which within one slot is emission order
        stream = np.repeat(log.sign[mask], log.length[mask])
        if stream.size != visits:
            raise DataError(f"log for slot {j} covers {stream.size} steps, expected {visits}")
        out[pos] = stream
    return out


def theoretical_acf(m: int, beta: float, tau):
    """Asymptotic autocorrelation (M**(beta-2)/beta) * tau**-(beta-1).

    Valid for beta in (1, 2); accepts scalar or array tau >= 1.
    """
    m = check_int("m", m, lo=1)
    beta = check_positive("beta", beta)
    if not 1.0 < beta < 2.0:
        raise DataError(f"the asymptotic form holds for beta in (1, 2), got {beta}")
    tau_arr = np.asarray(tau, dtype=np.float64)
    if tau_arr.size == 0 or tau_arr.min() < 1:
        raise DataError("tau must be >= 1")
    out = (m ** (beta - 2.0) / beta) * tau_arr ** (-(beta - 1.0))
    return float(out) if np.isscalar(tau) else out
