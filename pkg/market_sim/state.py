"""
State containers for one simulation: agents, couplings, memory, market.

Agent and coupling state are stored as parallel numpy arrays indexed by agent id.
"""
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .config import ScenarioConfig
from .errors import SimulationError
from .lattice import LatticeTopology
from .rng import RandomSource


@dataclass
class AgentState:
    """One row per lattice agent."""

    spins: np.ndarray  # int8 in {-1, 0, +1}
    thresholds: np.ndarray  # float, > 0
    noise: np.ndarray  # float, last noise drawn for each agent
    cash: np.ndarray  # float, >= 0
    shares: np.ndarray  # int64, >= 0

    @property
    def n(self) -> int:
        return self.spins.shape[0]

    def total_cash(self) -> float:
        return float(self.cash.sum())

    def total_shares(self) -> int:
        return int(self.shares.sum())


@dataclass
class CouplingState:
    """Per directed pair (i, slot) where slot indexes the neighbour table row of i."""

    background: np.ndarray  # (n, 4) W_ij on (-2, 2), drawn once
    initial_force: np.ndarray  # (n, 4) J_ij(0) in {0, 1}
    connect_probability: float


@dataclass
class HistoryBuffer:
    """Spin and price memory.

    At the start of decision round t the buffer holds spins sigma(t-tau .. t-1)
    and prices P(t-1-tau .. t-1), oldest first.
    """

    spins: np.ndarray  # (n, tau) int8
    prices: np.ndarray  # (tau + 1,) float

    def price_window(self) -> np.ndarray:
        """Prices P(t-tau .. t-1) paired with the spin columns."""
        return self.prices[1:]

    def push(self, spins: np.ndarray, price: float) -> None:
        if not price > 0:
            raise SimulationError(f"refusing to store nonpositive price {price}")
        self.spins[:, :-1] = self.spins[:, 1:]
        self.spins[:, -1] = spins
        self.prices[:-1] = self.prices[1:]
        self.prices[-1] = price


@dataclass
class MarketState:
    price: float
    fundamental: float
    activity_coeff: float
    fundamental_growth: float
    maker_cash: float
    maker_shares: int
    price_history: List[float] = field(default_factory=list)
    demand: int = 0
    supply: int = 0
    kappa: float = 0.0


@dataclass
class Diagnostics:
    degenerate_price_rounds: int = 0
    max_sweep_hits: int = 0
    total_sweeps: int = 0
    lapsed_orders: int = 0
    dropped_orders: int = 0
    maker_exhausted_rounds: int = 0
    fundamental_rounds: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SimulationState:
    config: ScenarioConfig
    topology: LatticeTopology
    agents: AgentState
    coupling: CouplingState
    history: HistoryBuffer
    market: MarketState
    random: RandomSource
    initial_field: np.ndarray  # Y_i(0)
    t: int = 0
    diagnostics: Diagnostics = field(default_factory=Diagnostics)

    def total_cash(self) -> float:
        return self.agents.total_cash() + self.market.maker_cash

    def total_shares(self) -> int:
        return self.agents.total_shares() + self.market.maker_shares
