"""Trade-sign extraction.

Each market order is classified by comparing its transaction price to the
prevailing mid-quote: above the mid is buyer-initiated (+1), below is
seller-initiated (-1), and trades exactly at the mid carry no direction
and are dropped.  Event time is the resulting market-order counter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

#: Tolerance for the price == mid comparison on binary floats.  Prices are
#: tick-quantized, so any epsilon far below half a tick is equivalent to
#: exact decimal comparison.
MID_EPS = 1e-9


@dataclass(frozen=True)
class SignSeries:
    """Ordered -1/+1 market-order signs for one asset over one window.

    ``dropped_count`` is the number of input trades discarded because the
    price sat exactly on the mid-quote.  ``seq`` optionally keeps the
    original trade sequence index of each retained sign.
    """

    asset_id: str
    signs: np.ndarray
    dropped_count: int = 0
    seq: np.ndarray | None = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.signs)
        if arr.ndim != 1:
            raise DataError(f"signs must be 1-D, got shape {arr.shape}")
        if arr.size and not np.isin(arr, (-1, 1)).all():
            raise DataError("signs may contain only -1 and +1")
        object.__setattr__(self, "signs", arr.astype(np.int8, copy=False))
        if self.dropped_count < 0:
            raise DataError("dropped_count must be >= 0")
        if self.seq is not None:
            seq = np.asarray(self.seq, dtype=np.int64)
            if seq.shape != self.signs.shape:
                raise DataError("seq must align one-to-one with signs")
            object.__setattr__(self, "seq", seq)

    def __len__(self) -> int:
        return int(self.signs.size)


def mid_price(bid: float, ask: float) -> float:
    """Mid-quote (bid + ask) / 2 after validating the quote pair."""
    bid = float(bid)
    ask = float(ask)
    if not (np.isfinite(bid) and np.isfinite(ask)):
        raise DataError("bid/ask must be finite")
    if bid <= 0 or ask <= 0:
        raise DataError(f"quotes must be positive, got bid={bid} ask={ask}")
    if bid > ask:
        raise DataError(f"crossed quote: bid={bid} > ask={ask}")
    return (bid + ask) / 2.0


def signs_from_quotes(
    price: np.ndarray,
    bid: np.ndarray,
    ask: np.ndarray,
    *,
    eps: float = MID_EPS,
) -> tuple[np.ndarray, int]:
    """Vectorized sign classification for aligned price/bid/ask arrays.

    Returns ``(signs, dropped_count)`` where signs is int8 and trades with
    ``|price - mid| <= eps`` have been removed.
    """
    price = np.asarray(price, dtype=np.float64)
    bid = np.asarray(bid, dtype=np.float64)
    ask = np.asarray(ask, dtype=np.float64)
    if not (price.shape == bid.shape == ask.shape) or price.ndim != 1:
        raise DataError("price, bid, ask must be aligned 1-D arrays")
    for name, arr in (("price", price), ("bid", bid), ("ask", ask)):
        if arr.size and (not np.isfinite(arr).all() or arr.min(initial=np.inf) <= 0):
            raise DataError(f"{name} values must be finite and positive")
    if np.any(bid > ask):
        raise DataError("crossed quote: bid > ask")
    diff = price - (bid + ask) / 2.0
    keep = np.abs(diff) > eps
    out = np.where(diff[keep] > 0, 1, -1).astype(np.int8)
    return out, int(price.size - out.size)


def extract_signs(trades, asset_id: str | None = None, *, eps: float = MID_EPS) -> SignSeries:
    """Extract the sign series from an ordered sequence of trade events.

    ``trades`` is any iterable of records with price/bid/ask/seq
    attributes (see ingest.TradeEvent).  Output order follows input
    order; the returned series keeps the seq index of each retained
    trade.
    """
    trades = list(trades)
    if asset_id is None:
        asset_id = trades[0].asset_id if trades else ""
    if not trades:
        return SignSeries(asset_id=asset_id, signs=np.empty(0, np.int8), dropped_count=0,
                          seq=np.empty(0, np.int64))
    price = np.array([t.price for t in trades], dtype=np.float64)
    bid = np.array([t.bid for t in trades], dtype=np.float64)
    ask = np.array([t.ask for t in trades], dtype=np.float64)
    seq = np.array([t.seq for t in trades], dtype=np.int64)
    diff = price - (bid + ask) / 2.0
    keep = np.abs(diff) > eps
    signs = np.where(diff[keep] > 0, 1, -1).astype(np.int8)
    return SignSeries(asset_id=asset_id, signs=signs,
                      dropped_count=int(price.size - signs.size), seq=seq[keep])
