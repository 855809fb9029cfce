import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ordermem import DataError, SignSeries, extract_signs, mid_price, signs_from_quotes
from ordermem.ingest import TradeEvent


def _trade(price, bid=100.0, ask=101.0, seq=1, asset="X"):
    return TradeEvent(asset_id=asset, seq=seq, price=price, bid=bid, ask=ask)


class TestMidPrice:
    def test_simple(self):
        assert mid_price(100.0, 101.0) == 100.5

    def test_locked_quote(self):
        assert mid_price(100.0, 100.0) == 100.0

    def test_crossed_quote_rejected(self):
        with pytest.raises(DataError):
            mid_price(101.0, 100.0)

    @pytest.mark.parametrize("bid,ask", [(0.0, 1.0), (-1.0, 1.0), (1.0, float("inf"))])
    def test_bad_quotes(self, bid, ask):
        with pytest.raises(DataError):
            mid_price(bid, ask)


class TestExtractSigns:
    def test_above_below_and_at_mid(self):
        # mid is 100.5: above -> +1, at -> dropped, below -> -1
        trades = [_trade(101.0, seq=1), _trade(100.5, seq=2), _trade(100.0, seq=3)]
        out = extract_signs(trades)
        assert out.signs.tolist() == [1, -1]
        assert out.dropped_count == 1
        assert out.seq.tolist() == [1, 3]
        assert len(out) + out.dropped_count == len(trades)

    def test_empty(self):
        out = extract_signs([], asset_id="E")
        assert len(out) == 0 and out.dropped_count == 0 and out.asset_id == "E"

    def test_asset_id_from_first_trade(self):
        out = extract_signs([_trade(101.0, asset="ZZZ")])
        assert out.asset_id == "ZZZ"

    def test_eps_boundary(self):
        # half a tick away is kept, a rounding-error away is dropped
        signs, dropped = signs_from_quotes(
            np.array([100.5 + 1e-6, 100.5 + 1e-10]),
            np.array([100.0, 100.0]),
            np.array([101.0, 101.0]),
        )
        assert signs.tolist() == [1]
        assert dropped == 1

    def test_crossed_quote_raises(self):
        with pytest.raises(DataError):
            signs_from_quotes(np.array([1.0]), np.array([2.0]), np.array([1.0]))

    def test_non_positive_price_raises(self):
        with pytest.raises(DataError):
            signs_from_quotes(np.array([0.0]), np.array([1.0]), np.array([2.0]))


# tick-grid strategy keeps every price at least half a tick from the mid
_ticks = st.integers(min_value=1, max_value=400)


@given(
    data=st.lists(st.tuples(_ticks, _ticks, st.booleans()), min_size=1, max_size=50),
    scale=st.sampled_from([0.01, 0.1, 1.0, 25.0]),
)
@settings(max_examples=60, deadline=None)
def test_scale_invariance_and_reflection(data, scale):
    """Scaling all prices by c > 0 keeps signs; mirroring around the mid flips them."""
    bid = np.array([200.0 + b for b, _, _ in data])
    ask = bid + np.array([2.0 * w for _, w, _ in data])  # even width, integer mid
    mid = (bid + ask) / 2
    offset = np.array([w if up else -w for _, w, up in data], dtype=np.float64)
    price = mid + offset

    base, dropped = signs_from_quotes(price, bid, ask)
    assert dropped == 0
    expected = np.where(offset > 0, 1, -1)
    assert np.array_equal(base, expected.astype(np.int8))

    scaled, _ = signs_from_quotes(price * scale, bid * scale, ask * scale)
    assert np.array_equal(base, scaled)

    mirrored, _ = signs_from_quotes(mid - offset, bid, ask)
    assert np.array_equal(mirrored, -base)


class TestSignSeries:
    def test_rejects_non_sign_values(self):
        with pytest.raises(DataError):
            SignSeries(asset_id="X", signs=np.array([1, 0, -1]))

    def test_rejects_misaligned_seq(self):
        with pytest.raises(DataError):
            SignSeries(asset_id="X", signs=np.array([1, -1]), seq=np.array([1]))

    def test_rejects_negative_dropped(self):
        with pytest.raises(DataError):
            SignSeries(asset_id="X", signs=np.array([1]), dropped_count=-1)
