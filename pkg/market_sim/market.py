"""
Market maker price formation, one-share order settlement and the decision round.
"""
import logging
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .dynamics import ConsultationResult, FundamentalPolicy, apply_fundamental, update_threshold
from .errors import ConfigError, SimulationError
from .state import AgentState, MarketState, SimulationState

logger = logging.getLogger(__name__)

CASH_TOLERANCE = 1e-9


@dataclass
class OrderBookRound:
    """One-share orders of a decision round; an agent is on at most one side."""

    buyers: np.ndarray
    sellers: np.ndarray

    @classmethod
    def from_spins(cls, spins: np.ndarray) -> "OrderBookRound":
        return cls(buyers=np.flatnonzero(spins == 1), sellers=np.flatnonzero(spins == -1))

    def __post_init__(self):
        self.buyers = np.asarray(self.buyers, dtype=np.int64)
        self.sellers = np.asarray(self.sellers, dtype=np.int64)
        ids = np.concatenate([self.buyers, self.sellers])
        if np.unique(ids).size != ids.size:
            raise SimulationError("an agent appears more than once in the order book")


@dataclass
class SettlementReport:
    matched: int = 0
    maker_filled: int = 0
    lapsed: int = 0
    dropped: int = 0
    maker_exhausted: bool = False


@dataclass
class RoundRecord:
    t: int
    price: float
    fundamental: float
    demand: int
    supply: int
    kappa: float
    volume: int
    matched: int
    maker_filled: int
    lapsed: int
    dropped: int
    sweeps: int
    fundamental_buys: int
    fundamental_sells: int

    def as_dict(self) -> dict:
        return asdict(self)


def market_activity(demand: int, supply: int, n: int, alpha: float) -> float:
    """kappa = alpha * (D + S) / n, the exponent of the price update."""
    return alpha * (demand + supply) / n


def form_price(price_prev: float, demand: int, supply: int, n: int, alpha: float) -> float:
    """P(t) = P(t-1) * (D/S) ** kappa; unchanged when either side is empty."""
    if not price_prev > 0:
        raise SimulationError(f"previous price must be positive, got {price_prev}")
    if demand == 0 or supply == 0:
        return price_prev
    kappa = market_activity(demand, supply, n, alpha)
    return price_prev * (demand / supply) ** kappa


def advance_fundamental(fundamental: float, growth: float) -> float:
    """One round of multiplicative growth, F * (1 + g)."""
    if not 1 + growth > 0:
        raise ConfigError(f"1 + g must be positive, got g={growth}", field="fundamental_growth")
    return fundamental * (1 + growth)


def settle_trades(
    orders: OrderBookRound,
    price: float,
    agents: AgentState,
    market: MarketState,
    rng: np.random.Generator,
) -> SettlementReport:
    """Settle one-share orders at `price`: agent pairs first, then the maker for the imbalance."""
    report = SettlementReport()

    buyers = orders.buyers[agents.cash[orders.buyers] >= price]
    sellers = orders.sellers[agents.shares[orders.sellers] >= 1]
    report.dropped = (orders.buyers.size - buyers.size) + (orders.sellers.size - sellers.size)

    buyers = rng.permutation(buyers)
    sellers = rng.permutation(sellers)
    pairs = min(buyers.size, sellers.size)
    if pairs:
        b, s = buyers[:pairs], sellers[:pairs]
        agents.cash[b] -= price
        agents.shares[b] += 1
        agents.cash[s] += price
        agents.shares[s] -= 1
    report.matched = pairs

    excess_buyers = buyers[pairs:]
    excess_sellers = sellers[pairs:]

    if excess_buyers.size:
        fills = min(excess_buyers.size, market.maker_shares)
        filled = excess_buyers[:fills]
        agents.cash[filled] -= price
        agents.shares[filled] += 1
        market.maker_cash += fills * price
        market.maker_shares -= fills
        report.maker_filled = fills
        report.lapsed = excess_buyers.size - fills
    elif excess_sellers.size:
        affordable = int(market.maker_cash // price)
        while affordable > 0 and affordable * price > market.maker_cash:
            affordable -= 1
        fills = min(excess_sellers.size, affordable)
        filled = excess_sellers[:fills]
        agents.cash[filled] += price
        agents.shares[filled] -= 1
        market.maker_cash -= fills * price
        market.maker_shares += fills
        report.maker_filled = fills
        report.lapsed = excess_sellers.size - fills

    report.maker_exhausted = report.lapsed > 0
    return report


def check_balances(state: SimulationState, cash_before: float, shares_before: int, t: int) -> None:
    """Raise SimulationError if settlement broke nonnegativity or conservation.

    Share totals must match exactly; cash totals within a relative CASH_TOLERANCE.
    """
    agents, market = state.agents, state.market
    if np.any(agents.cash < 0) or market.maker_cash < 0:
        raise SimulationError("negative cash balance after settlement", round_index=t)
    if np.any(agents.shares < 0) or market.maker_shares < 0:
        raise SimulationError("negative share inventory after settlement", round_index=t)
    shares_after = state.total_shares()
    if shares_after != shares_before:
        raise SimulationError(f"share total changed from {shares_before} to {shares_after}", round_index=t)
    cash_after = state.total_cash()
    if abs(cash_after - cash_before) > CASH_TOLERANCE * max(abs(cash_before), 1.0):
        raise SimulationError(f"cash total changed from {cash_before!r} to {cash_after!r}", round_index=t)


def run_decision_round(
    state: SimulationState,
    t: int,
    consultation: Optional[ConsultationResult] = None,
    policy: Optional[FundamentalPolicy] = None,
) -> RoundRecord:
    """Trade on the relaxed spins of round t and advance prices, thresholds and memory."""
    config, market, agents = state.config, state.market, state.agents
    policy = policy or FundamentalPolicy.from_config(config)

    fundamental_buys, fundamental_sells = apply_fundamental(state, t, policy)

    orders = OrderBookRound.from_spins(agents.spins)
    demand, supply = int(orders.buyers.size), int(orders.sellers.size)
    price_prev = market.price
    price = form_price(price_prev, demand, supply, config.n, market.activity_coeff)
    kappa = market_activity(demand, supply, config.n, market.activity_coeff)
    if demand == 0 or supply == 0:
        state.diagnostics.degenerate_price_rounds += 1
        logger.debug(f"Round {t}: D={demand}, S={supply}; price held at {price_prev:.6g}")

    cash_before, shares_before = state.total_cash(), state.total_shares()
    report = settle_trades(orders, price, agents, market, state.random.matching)
    if config.check_invariants:
        check_balances(state, cash_before, shares_before, t)

    state.diagnostics.lapsed_orders += report.lapsed
    state.diagnostics.dropped_orders += report.dropped
    if report.maker_exhausted:
        state.diagnostics.maker_exhausted_rounds += 1
        logger.debug(f"Round {t}: market maker exhausted, {report.lapsed} orders lapsed")

    agents.thresholds = update_threshold(agents.thresholds, price, price_prev)
    market.fundamental = advance_fundamental(market.fundamental, market.fundamental_growth)
    market.price = price
    market.price_history.append(price)
    market.demand, market.supply, market.kappa = demand, supply, kappa
    state.history.push(agents.spins, price)
    state.t = t

    return RoundRecord(
        t=t,
        price=price,
        fundamental=market.fundamental,
        demand=demand,
        supply=supply,
        kappa=kappa,
        volume=min(demand, supply),
        matched=report.matched,
        maker_filled=report.maker_filled,
        lapsed=report.lapsed,
        dropped=report.dropped,
        sweeps=consultation.sweeps if consultation is not None else 0,
        fundamental_buys=fundamental_buys,
        fundamental_sells=fundamental_sells,
    )
