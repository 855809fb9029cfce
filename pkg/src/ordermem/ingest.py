"""Parsers and serializers for the flat input files.

All files are UTF-8, comma separated, one header row.  Formats:

    trades:    asset,seq,price,bid,ask
    positions: fund,asset,quarter,position_usd
    volumes:   asset,quarter,volume_usd

Trade rows that violate a row-level contract (bad field count, non
numeric fields, non positive price or quotes, crossed quote, non
monotone seq) are rejected and reported with their line number; the
ownership files are small reference data and any malformed row there is
a hard error.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from typing import IO, Mapping, Sequence

from .errors import DataError

TRADES_HEADER = ("asset", "seq", "price", "bid", "ask")
POSITIONS_HEADER = ("fund", "asset", "quarter", "position_usd")
VOLUMES_HEADER = ("asset", "quarter", "volume_usd")


# --------------------------------------------------------------------------
# record types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TradeEvent:
    """One market order: traded price plus the prevailing quote pair."""

    asset_id: str
    seq: int
    price: float
    bid: float
    ask: float

    def __post_init__(self) -> None:
        if not self.asset_id:
            raise DataError("asset_id must be non-empty")
        for name in ("price", "bid", "ask"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and v == v and v != float("inf")):
                raise DataError(f"{name} must be a positive finite number, got {v!r}")
        if self.bid > self.ask:
            raise DataError(f"crossed quote: bid={self.bid} > ask={self.ask}")
        if int(self.seq) != self.seq:
            raise DataError(f"seq must be an integer, got {self.seq!r}")


@dataclass(frozen=True)
class RejectedRow:
    line: int
    reason: str
    raw: str


@dataclass(frozen=True)
class TradesParse:
    """Result of parsing a trades file: accepted events plus a reject log."""

    events: dict[str, list[TradeEvent]]
    rejected: list[RejectedRow] = field(default_factory=list)

    @property
    def accepted_count(self) -> int:
        return sum(len(v) for v in self.events.values())

    @property
    def rejected_count(self) -> int:
        return len(self.rejected)


# --------------------------------------------------------------------------
# stream plumbing
# --------------------------------------------------------------------------

def _as_text(source) -> IO[str]:
    """Open a path, or wrap an already-open binary/text stream."""
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8"))
    if hasattr(source, "read"):
        probe = source.read(0)
        if isinstance(probe, bytes):
            return io.TextIOWrapper(source, encoding="utf-8", newline="")
        return source
    raise DataError(f"unsupported input source {type(source).__name__}")


def _check_header(row: Sequence[str] | None, expected: tuple[str, ...], what: str) -> None:
    if row is None:
        return  # empty stream: empty result, not an error
    if tuple(h.strip() for h in row) != expected:
        raise DataError(
            f"{what} header must be {','.join(expected)!r}, got {','.join(row)!r}"
        )


# --------------------------------------------------------------------------
# trades
# --------------------------------------------------------------------------

def parse_trades(source) -> TradesParse:
    """Parse a trades file, grouping accepted events by asset.

    Per-asset event order follows the file; the seq index must be
    strictly increasing within an asset, and a row that breaks the
    monotone order (or any other row contract) is rejected, not fatal.
    An empty stream yields an empty result.
    """
    fh = _as_text(source)
    reader = csv.reader(fh)
    header = next(reader, None)
    _check_header(header, TRADES_HEADER, "trades")

    events: dict[str, list[TradeEvent]] = {}
    rejected: list[RejectedRow] = []
    last_seq: dict[str, int] = {}

    for line_no, row in enumerate(reader, start=2):
        raw = ",".join(row)
        if len(row) != 5:
            rejected.append(RejectedRow(line_no, "bad-field-count", raw))
            continue
        asset = row[0].strip()
        if not asset:
            rejected.append(RejectedRow(line_no, "bad-field-count", raw))
            continue
        try:
            seq = int(row[1])
            price, bid, ask = float(row[2]), float(row[3]), float(row[4])
        except ValueError:
            rejected.append(RejectedRow(line_no, "non-numeric", raw))
            continue
        if not all(v > 0 and v == v and v != float("inf") for v in (price, bid, ask)):
            rejected.append(RejectedRow(line_no, "non-positive", raw))
            continue
        if bid > ask:
            rejected.append(RejectedRow(line_no, "crossed-quote", raw))
            continue
        if asset in last_seq and seq <= last_seq[asset]:
            rejected.append(RejectedRow(line_no, "non-monotone-seq", raw))
            continue
        last_seq[asset] = seq
        events.setdefault(asset, []).append(
            TradeEvent(asset_id=asset, seq=seq, price=price, bid=bid, ask=ask)
        )
    return TradesParse(events=events, rejected=rejected)


def _fmt(value: float) -> str:
    """Shortest round-trip decimal form of a float (canonical)."""
    return repr(float(value))


def serialize_trades(events: Mapping[str, Sequence[TradeEvent]]) -> str:
    """Canonical text form: header, then rows sorted by (asset, seq)."""
    lines = [",".join(TRADES_HEADER)]
    for asset in sorted(events):
        for t in events[asset]:
            lines.append(f"{t.asset_id},{t.seq},{_fmt(t.price)},{_fmt(t.bid)},{_fmt(t.ask)}")
    return "\n".join(lines) + "\n"


def filter_assets(
    events: Mapping[str, Sequence[TradeEvent]],
    *,
    min_days: int = 200,
    min_trades_per_day: int = 200,
    days_by_asset: Mapping[str, int] | None = None,
) -> dict[str, list[TradeEvent]]:
    """Drop thinly traded assets.

    When per-asset trading-day counts are supplied, an asset survives if
    it covers at least ``min_days`` days AND averages at least
    ``min_trades_per_day`` trades per day.  The trades format itself
    carries no calendar, so without day counts the two thresholds
    collapse to their implied floor on total events,
    ``min_days * min_trades_per_day``.
    """
    out: dict[str, list[TradeEvent]] = {}
    for asset in sorted(events):
        rows = list(events[asset])
        if days_by_asset is not None:
            days = int(days_by_asset.get(asset, 0))
            if days >= min_days and days > 0 and len(rows) / days >= min_trades_per_day:
                out[asset] = rows
        elif len(rows) >= min_days * min_trades_per_day:
            out[asset] = rows
    return out


# --------------------------------------------------------------------------
# ownership panel
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class OwnershipPanel:
    """Quarterly fund positions plus per-asset traded dollar volume.

    ``positions`` maps (fund, asset, quarter) to the dollar position; a
    missing key means the fund held nothing.  ``volumes`` maps
    (asset, quarter) to the total traded dollar volume, always positive.
    """

    positions: Mapping[tuple[str, str, int], float]
    volumes: Mapping[tuple[str, int], float]

    def __post_init__(self) -> None:
        for (asset, quarter), v in self.volumes.items():
            if not v > 0:
                raise DataError(f"volume for ({asset}, {quarter}) must be positive, got {v}")
        holders: dict[tuple[str, int], dict[str, float]] = {}
        quarters: set[int] = set()
        for (fund, asset, quarter), w in self.positions.items():
            holders.setdefault((asset, quarter), {})[fund] = w
            quarters.add(quarter)
        quarters.update(q for _, q in self.volumes)
        object.__setattr__(self, "_holders", holders)
        object.__setattr__(self, "_quarters", tuple(sorted(quarters)))

    # -- lookups ----------------------------------------------------------

    def position(self, fund: str, asset: str, quarter: int) -> float:
        return float(self.positions.get((fund, asset, quarter), 0.0))

    def volume(self, asset: str, quarter: int) -> float:
        try:
            return float(self.volumes[(asset, quarter)])
        except KeyError:
            raise DataError(f"missing volume for ({asset}, {quarter})") from None

    def holders(self, asset: str, quarter: int) -> Mapping[str, float]:
        """Funds with a recorded position on (asset, quarter)."""
        return self._holders.get((asset, quarter), {})

    @property
    def quarters(self) -> tuple[int, ...]:
        return self._quarters

    def assets(self) -> list[str]:
        seen = {a for _, a, _ in self.positions}
        seen.update(a for a, _ in self.volumes)
        return sorted(seen)

    def funds(self) -> list[str]:
        return sorted({f for f, _, _ in self.positions})


def parse_ownership(positions_source, volumes_source) -> OwnershipPanel:
    """Parse the positions and volume files into one panel.

    Duplicate (fund, asset, quarter) or (asset, quarter) keys, malformed
    numbers, and non positive volumes are hard errors reported with line
    numbers.
    """
    positions: dict[tuple[str, str, int], float] = {}
    fh = _as_text(positions_source)
    reader = csv.reader(fh)
    _check_header(next(reader, None), POSITIONS_HEADER, "positions")
    for line_no, row in enumerate(reader, start=2):
        if len(row) != 4:
            raise DataError(f"positions line {line_no}: expected 4 fields, got {len(row)}")
        fund, asset = row[0].strip(), row[1].strip()
        if not fund or not asset:
            raise DataError(f"positions line {line_no}: empty fund or asset id")
        try:
            quarter = int(row[2])
            w = float(row[3])
        except ValueError as e:
            raise DataError(f"positions line {line_no}: {e}") from None
        if w != w or w in (float("inf"), float("-inf")):
            raise DataError(f"positions line {line_no}: non-finite position")
        key = (fund, asset, quarter)
        if key in positions:
            raise DataError(f"positions line {line_no}: duplicate key {key}")
        positions[key] = w

    volumes: dict[tuple[str, int], float] = {}
    fh = _as_text(volumes_source)
    reader = csv.reader(fh)
    _check_header(next(reader, None), VOLUMES_HEADER, "volumes")
    for line_no, row in enumerate(reader, start=2):
        if len(row) != 3:
            raise DataError(f"volumes line {line_no}: expected 3 fields, got {len(row)}")
        asset = row[0].strip()
        if not asset:
            raise DataError(f"volumes line {line_no}: empty asset id")
        try:
            quarter = int(row[1])
            v = float(row[2])
        except ValueError as e:
            raise DataError(f"volumes line {line_no}: {e}") from None
        if not v > 0 or v == float("inf"):
            raise DataError(f"volumes line {line_no}: volume must be positive and finite, got {row[2]}")
        key2 = (asset, quarter)
        if key2 in volumes:
            raise DataError(f"volumes line {line_no}: duplicate key {key2}")
        volumes[key2] = v

    return OwnershipPanel(positions=positions, volumes=volumes)


def serialize_ownership(panel: OwnershipPanel) -> tuple[str, str]:
    """Canonical (positions_text, volumes_text) pair, rows sorted by key."""
    pos_lines = [",".join(POSITIONS_HEADER)]
    for (fund, asset, quarter) in sorted(panel.positions):
        pos_lines.append(f"{fund},{asset},{quarter},{_fmt(panel.positions[(fund, asset, quarter)])}")
    vol_lines = [",".join(VOLUMES_HEADER)]
    for (asset, quarter) in sorted(panel.volumes):
        vol_lines.append(f"{asset},{quarter},{_fmt(panel.volumes[(asset, quarter)])}")
    return "\n".join(pos_lines) + "\n", "\n".join(vol_lines) + "\n"


def filter_small_funds(
    panel: OwnershipPanel,
    min_invested: float,
    *,
    scope: str = "portfolio",
) -> OwnershipPanel:
    """Drop positions of funds below an invested-dollar threshold.

    scope="portfolio" removes a fund's whole quarter when the sum of its
    absolute positions that quarter is below the threshold;
    scope="per_security" removes individual (fund, asset, quarter)
    entries below it.  Volumes are untouched.
    """
    if scope not in ("portfolio", "per_security"):
        raise DataError(f"scope must be 'portfolio' or 'per_security', got {scope!r}")
    if scope == "per_security":
        kept = {k: w for k, w in panel.positions.items() if abs(w) >= min_invested}
    else:
        totals: dict[tuple[str, int], float] = {}
        for (fund, _, quarter), w in panel.positions.items():
            totals[(fund, quarter)] = totals.get((fund, quarter), 0.0) + abs(w)
        kept = {
            (fund, asset, quarter): w
            for (fund, asset, quarter), w in panel.positions.items()
            if totals[(fund, quarter)] >= min_invested
        }
    return OwnershipPanel(positions=kept, volumes=dict(panel.volumes))
