import math

import numpy as np
import pytest

from market_sim.config import preset, with_overrides
from market_sim.dynamics import consultation_round
from market_sim.errors import ConfigError, SimulationError
from market_sim.initializer import init_simulation
from market_sim.market import (
    OrderBookRound,
    advance_fundamental,
    check_balances,
    form_price,
    market_activity,
    run_decision_round,
    settle_trades,
)
from market_sim.state import AgentState, MarketState


def make_agents(cash, shares):
    n = len(cash)
    return AgentState(
        spins=np.zeros(n, dtype=np.int8),
        thresholds=np.ones(n),
        noise=np.zeros(n),
        cash=np.asarray(cash, dtype=float),
        shares=np.asarray(shares, dtype=np.int64),
    )


def make_market(maker_cash=10240.0, maker_shares=10240):
    return MarketState(
        price=2.0,
        fundamental=2.0,
        activity_coeff=0.01,
        fundamental_growth=0.0,
        maker_cash=maker_cash,
        maker_shares=maker_shares,
    )


class TestFormPrice:
    def test_balanced_book(self):
        assert form_price(1.7, 300, 300, 1024, 0.01) == 1.7

    @pytest.mark.parametrize("demand, supply", [(1, 500), (700, 3), (10, 10)])
    def test_zero_activity(self, demand, supply):
        assert form_price(1.7, demand, supply, 1024, 0.0) == 1.7

    def test_reference_value(self):
        assert market_activity(512, 256, 1024, 0.01) == pytest.approx(0.0075)
        assert abs(form_price(1.0, 512, 256, 1024, 0.01) - 2**0.0075) < 1e-12
        assert form_price(1.0, 512, 256, 1024, 0.01) == pytest.approx(1.0052122, abs=1e-7)

    @pytest.mark.parametrize("demand, supply", [(0, 10), (10, 0), (0, 0)])
    def test_one_sided_book_holds_price(self, demand, supply):
        assert form_price(3.0, demand, supply, 1024, 0.01) == 3.0

    def test_direction_follows_imbalance(self):
        assert form_price(1.0, 400, 200, 1024, 0.01) > 1.0
        assert form_price(1.0, 200, 400, 1024, 0.01) < 1.0

    def test_swapping_sides_inverts_ratio(self):
        up = form_price(1.0, 400, 200, 1024, 0.01)
        down = form_price(1.0, 200, 400, 1024, 0.01)
        assert up * down == pytest.approx(1.0, abs=1e-14)

    def test_nonpositive_previous_price(self):
        with pytest.raises(SimulationError):
            form_price(0.0, 5, 5, 16, 0.01)


class TestAdvanceFundamental:
    def test_no_growth(self):
        assert advance_fundamental(1.0, 0.0) == 1.0

    def test_one_round(self):
        assert advance_fundamental(1.0, 1.05 / 1500) == pytest.approx(1.0007)

    def test_compounding(self):
        fundamental = 1.0
        for _ in range(1500):
            fundamental = advance_fundamental(fundamental, 1.05 / 1500)
        assert fundamental == pytest.approx(math.exp(1.05), rel=1e-3)
        assert fundamental == pytest.approx(2.857, abs=2e-3)

    def test_invalid_growth(self):
        with pytest.raises(ConfigError):
            advance_fundamental(1.0, -1.0)


class TestSettleTrades:
    def test_single_pair(self):
        agents = make_agents([100.0, 0.0], [0, 1])
        market = make_market()
        report = settle_trades(OrderBookRound([0], [1]), 2.0, agents, market, np.random.default_rng(0))
        assert report.matched == 1
        assert report.maker_filled == 0
        assert agents.cash.tolist() == [98.0, 2.0]
        assert agents.shares.tolist() == [1, 0]
        assert agents.total_cash() == 100.0
        assert agents.total_shares() == 1

    def test_broke_buyer_dropped(self):
        agents = make_agents([0.0, 50.0], [5, 5])
        market = make_market()
        report = settle_trades(OrderBookRound([0], []), 2.0, agents, market, np.random.default_rng(0))
        assert report.dropped == 1
        assert report.matched == report.maker_filled == 0
        assert agents.cash.tolist() == [0.0, 50.0]
        assert agents.shares.tolist() == [5, 5]
        assert market.maker_shares == 10240

    def test_seller_without_shares_dropped(self):
        agents = make_agents([10.0], [0])
        report = settle_trades(OrderBookRound([], [0]), 1.0, agents, make_market(), np.random.default_rng(0))
        assert report.dropped == 1
        assert agents.shares.tolist() == [0]

    def test_maker_fills_then_lapses(self):
        agents = make_agents([100.0, 100.0, 100.0, 100.0], [0, 0, 0, 10])
        market = make_market(maker_shares=1)
        report = settle_trades(OrderBookRound([0, 1, 2], [3]), 2.0, agents, market, np.random.default_rng(4))
        assert (report.matched, report.maker_filled, report.lapsed) == (1, 1, 1)
        assert report.maker_exhausted
        assert market.maker_shares == 0
        assert market.maker_cash == pytest.approx(10242.0)
        assert sorted(agents.shares[:3].tolist()) == [0, 1, 1]

    def test_maker_buys_excess_supply(self):
        agents = make_agents([0.0] * 3, [1, 1, 1])
        market = make_market(maker_cash=4.0, maker_shares=0)
        report = settle_trades(OrderBookRound([], [0, 1, 2]), 2.0, agents, market, np.random.default_rng(1))
        assert (report.maker_filled, report.lapsed) == (2, 1)
        assert market.maker_cash == 0.0
        assert market.maker_shares == 2

    def test_conservation(self):
        rng = np.random.default_rng(11)
        n = 200
        agents = make_agents(rng.uniform(0, 5, n), rng.integers(0, 3, n))
        market = make_market(maker_cash=30.0, maker_shares=7)
        spins = rng.integers(-1, 2, n)
        cash = agents.total_cash() + market.maker_cash
        shares = agents.total_shares() + market.maker_shares
        settle_trades(OrderBookRound.from_spins(spins), 1.37, agents, market, rng)
        assert agents.total_shares() + market.maker_shares == shares
        assert agents.total_cash() + market.maker_cash == pytest.approx(cash, rel=1e-12)
        assert (agents.cash >= 0).all() and (agents.shares >= 0).all()
        assert market.maker_cash >= 0 and market.maker_shares >= 0

    def test_agent_on_both_sides_rejected(self):
        with pytest.raises(SimulationError):
            OrderBookRound([1, 2], [2])


class TestDecisionRound:
    def test_silent_market(self, tiny_state):
        tiny_state.agents.spins[:] = 0
        tiny_state.market.fundamental = tiny_state.market.price  # inside the band
        price = tiny_state.market.price
        cash = tiny_state.agents.cash.copy()
        record = run_decision_round(tiny_state, 1)
        assert (record.demand, record.supply) == (0, 0)
        assert record.price == price
        assert record.matched == record.maker_filled == record.volume == 0
        assert np.array_equal(tiny_state.agents.cash, cash)
        assert tiny_state.diagnostics.degenerate_price_rounds == 1

    def test_advances_memory_and_thresholds(self, tiny_state):
        thresholds = tiny_state.agents.thresholds.copy()
        price_prev = tiny_state.market.price
        record = run_decision_round(tiny_state, 1)
        assert tiny_state.t == 1
        assert tiny_state.history.prices[-1] == record.price
        assert np.array_equal(tiny_state.history.spins[:, -1], tiny_state.agents.spins)
        assert np.allclose(tiny_state.agents.thresholds, thresholds * record.price / price_prev)
        assert tiny_state.market.price_history == [price_prev, record.price]

    def test_first_round_of_simulation_a(self):
        config = with_overrides(preset("A"), seed=42, rounds=1, log_every=0)
        state = init_simulation(config)
        price0, fundamental0 = state.market.price, state.market.fundamental
        consultation = consultation_round(state, 1)
        demand = int((state.agents.spins == 1).sum())
        supply = int((state.agents.spins == -1).sum())
        record = run_decision_round(state, 1, consultation)

        kappa = 0.01 * (demand + supply) / 1024
        assert (record.t, record.demand, record.supply) == (1, demand, supply)
        # F(0) = P(0) keeps the price inside the fundamental band
        assert record.fundamental_buys == record.fundamental_sells == 0
        assert record.kappa == pytest.approx(kappa)
        assert record.price == pytest.approx(price0 * (demand / supply) ** kappa, rel=1e-12)
        assert record.fundamental == pytest.approx(fundamental0 * (1 + 1.05 / 1500), rel=1e-12)
        assert record.volume == record.matched == min(demand, supply)
        assert record.maker_filled == abs(demand - supply)
        assert record.lapsed == record.dropped == 0
        assert record.sweeps == consultation.sweeps

        replay = init_simulation(config)
        assert run_decision_round(replay, 1, consultation_round(replay, 1)) == record

    def test_check_balances_catches_leak(self, tiny_state):
        cash, shares = tiny_state.total_cash(), tiny_state.total_shares()
        tiny_state.agents.shares[0] += 1
        with pytest.raises(SimulationError) as exc:
            check_balances(tiny_state, cash, shares, 12)
        assert exc.value.round_index == 12
