import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ordermem import (
    DataError,
    SimConfig,
    RNG_NAME,
    autocorrelation,
    replay,
    sample_length,
    simulate,
    theoretical_acf,
)


class TestSampleLength:
    def test_support_starts_at_l_min(self):
        rng = np.random.default_rng(0)
        draws = sample_length(1.5, l_min=1, rng=rng, size=200_000)
        assert draws.min() >= 1
        draws3 = sample_length(1.5, l_min=3, rng=rng, size=50_000)
        assert draws3.min() >= 3
        # l_min must actually be hit, not just bounded below
        assert (draws3 == 3).any()

    def test_huge_beta_collapses_to_minimum(self):
        rng = np.random.default_rng(1)
        draws = sample_length(100.0, l_min=1, rng=rng, size=100_000)
        assert (draws == 1).mean() > 0.99

    def test_tail_exponent(self):
        # log-log slope of the empirical survival function ~ -beta
        rng = np.random.default_rng(2)
        draws = sample_length(1.5, rng=rng, size=1_000_000)
        grid = np.unique(np.logspace(0.5, 2.5, 24).astype(np.int64))
        ccdf = np.array([(draws > g).mean() for g in grid])
        slope = np.polyfit(np.log(grid), np.log(ccdf), 1)[0]
        assert slope == pytest.approx(-1.5, abs=0.1)

    def test_scalar_and_deterministic(self):
        a = sample_length(1.5, rng=np.random.default_rng(42))
        b = sample_length(1.5, rng=np.random.default_rng(42))
        assert isinstance(a, int)
        assert a == b

    def test_bad_args(self):
        with pytest.raises(DataError):
            sample_length(-1.0)
        with pytest.raises(DataError):
            sample_length(1.5, l_min=0)


class TestConfig:
    def test_validation(self):
        with pytest.raises(DataError):
            SimConfig(m=0, beta=1.5, n=10, seed=0)
        with pytest.raises(DataError):
            SimConfig(m=1, beta=1.0, n=10, seed=0)
        with pytest.raises(DataError):
            SimConfig(m=1, beta=1.5, n=0, seed=0)
        with pytest.raises(DataError):
            SimConfig(m=1, beta=1.5, n=10, seed=0, l_min=0)

    def test_frozen(self):
        cfg = SimConfig(m=2, beta=1.5, n=10, seed=0)
        with pytest.raises(Exception):
            cfg.m = 3


class TestSimulate:
    def test_shapes_and_values(self):
        cfg = SimConfig(m=4, beta=1.5, n=5000, seed=3)
        sim = simulate(cfg)
        s = sim.signs.signs
        assert s.shape == (5000,)
        assert s.dtype == np.int8
        assert set(np.unique(s)) <= {-1, 1}
        assert sim.signs.dropped_count == 0
        assert sim.rng_name == RNG_NAME
        assert sim.slot_choices.shape == (5000,)
        assert sim.slot_choices.min() >= 0
        assert sim.slot_choices.max() < 4

    def test_deterministic(self):
        cfg = SimConfig(m=3, beta=1.4, n=20_000, seed=11)
        a, b = simulate(cfg), simulate(cfg)
        assert np.array_equal(a.signs.signs, b.signs.signs)
        assert np.array_equal(a.slot_choices, b.slot_choices)
        assert np.array_equal(a.metaorders.length, b.metaorders.length)

    def test_log_explains_series_single_slot(self):
        cfg = SimConfig(m=1, beta=1.5, n=5000, seed=7)
        sim = simulate(cfg)
        log = sim.metaorders
        assert int(log.length.sum()) == 5000
        assert log.start[0] == 0
        # starts are the running total of preceding lengths
        assert np.array_equal(log.start, np.concatenate(([0], np.cumsum(log.length[:-1]))))
        rebuilt = np.repeat(log.sign, log.length)
        assert np.array_equal(rebuilt, sim.signs.signs)

    def test_log_invariants_multi_slot(self):
        cfg = SimConfig(m=3, beta=1.3, n=8000, seed=9)
        sim = simulate(cfg)
        log = sim.metaorders
        assert int(log.length.sum()) == 8000
        assert (np.diff(log.start) >= 0).all()
        assert set(np.unique(log.slot)) <= {0, 1, 2}
        assert set(np.unique(log.sign)) <= {-1, 1}
        for j in range(3):
            trunc = log.truncated[log.slot == j]
            if trunc.size:
                # only the slot's final meta-order may be cut short
                assert not trunc[:-1].any()

    def test_replay_identity(self):
        cfg = SimConfig(m=5, beta=1.5, n=30_000, seed=13)
        sim = simulate(cfg)
        assert np.array_equal(replay(sim), sim.signs.signs)

    def test_replay_needs_state(self):
        cfg = SimConfig(m=2, beta=1.5, n=100, seed=0)
        with pytest.raises(DataError, match="replay needs"):
            replay(simulate(cfg, include_log=False))
        with pytest.raises(DataError, match="replay needs"):
            replay(simulate(cfg, include_choices=False))

    def test_single_step(self):
        sim = simulate(SimConfig(m=2, beta=1.5, n=1, seed=0))
        assert sim.signs.signs.shape == (1,)
        assert len(sim.metaorders) == 1
        assert sim.metaorders[0].start == 0

    def test_dict_config_accepted(self):
        sim = simulate({"m": 1, "beta": 1.5, "n": 50, "seed": 4})
        assert sim.config == SimConfig(m=1, beta=1.5, n=50, seed=4)

    def test_high_beta_single_slot_is_near_iid(self):
        # beta = 100 makes nearly every meta-order a single child order,
        # so successive signs are almost independent coin flips
        sim = simulate(SimConfig(m=1, beta=100.0, n=100_000, seed=21))
        curve = autocorrelation(sim.signs.signs, tau_max=5)
        assert abs(curve.value(1)) < 0.02

    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_log_totals_cover_series(self, m, seed):
        cfg = SimConfig(m=m, beta=1.5, n=2000, seed=seed)
        sim = simulate(cfg)
        log = sim.metaorders
        assert int(log.length.sum()) == 2000
        assert (log.length >= 1).all()
        assert np.array_equal(replay(sim), sim.signs.signs)


class TestTheory:
    def test_closed_form_value(self):
        # m**(beta-2)/beta at tau=1: 10**-0.5 / 1.5
        assert theoretical_acf(10, 1.5, 1) == pytest.approx(10**-0.5 / 1.5, rel=1e-12)

    def test_decreasing_in_m_and_tau(self):
        assert theoretical_acf(2, 1.5, 1) > theoretical_acf(50, 1.5, 1)
        taus = np.arange(1, 100)
        vals = theoretical_acf(5, 1.5, taus)
        assert vals.shape == (99,)
        assert (np.diff(vals) < 0).all()

    def test_beta_range_enforced(self):
        for bad in (0.5, 1.0, 2.0, 2.5):
            with pytest.raises(DataError):
                theoretical_acf(5, bad, 1)
        with pytest.raises(DataError):
            theoretical_acf(5, 1.5, 0)
