"""
Agent update rules: trust-memory coupling forces, local field, three-state
spin decision, threshold rescaling, the consultation (relaxation) round and
the fundamental-behaviour trigger.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

from .config import ScenarioConfig
from .errors import ConfigError, SimulationError
from .lattice import LatticeTopology
from .state import CouplingState, HistoryBuffer, SimulationState

logger = logging.getLogger(__name__)


class FundamentalAction(str, Enum):
    SELL = "sell-at-market"
    BUY = "buy-at-market"
    NONE = "none"


@dataclass(frozen=True)
class FundamentalPolicy:
    sell_factor: float  # a
    buy_factor: float  # b
    obey_probability: float  # pi
    base_period: int  # K
    jitter_range: int  # k_max
    window: int  # rho

    def __post_init__(self):
        if not self.sell_factor > 1:
            raise ConfigError(f"must be > 1, got {self.sell_factor}", field="sell_factor")
        if not 0 < self.buy_factor < 1:
            raise ConfigError(f"must lie in (0, 1), got {self.buy_factor}", field="buy_factor")
        if not 0 <= self.obey_probability <= 1:
            raise ConfigError(f"must lie in [0, 1], got {self.obey_probability}", field="obey_probability")
        if self.jitter_range < 1:
            raise ConfigError(f"must be >= 1, got {self.jitter_range}", field="jitter_range")
        if not self.window < self.base_period + 1:
            raise ConfigError(f"must not exceed base_period, got {self.window}", field="window")

    @classmethod
    def from_config(cls, config: ScenarioConfig) -> "FundamentalPolicy":
        return cls(
            sell_factor=config.sell_factor,
            buy_factor=config.buy_factor,
            obey_probability=config.obey_probability,
            base_period=config.base_period,
            jitter_range=config.jitter_range,
            window=config.window,
        )


@dataclass(frozen=True)
class LocalField:
    value: float
    contributions: Tuple[float, float, float, float]
    noise: float


@dataclass
class ConsultationResult:
    spins: np.ndarray
    sweeps: int
    changes: np.ndarray  # spin changes per executed sweep
    hit_cap: bool
    updated_agents: np.ndarray  # agents drawn at least once
    last_noise: np.ndarray  # noise of each updated agent's final draw


def _check_prices(prices: np.ndarray) -> None:
    if not np.all(prices > 0):
        bad = int(np.flatnonzero(~(prices > 0))[0])
        raise SimulationError(f"nonpositive stored price {prices[bad]} at history slot {bad}")


def coupling_force(background: float, spin_window: Sequence[int], price_window: Sequence[float]) -> float:
    """Force of neighbour j on agent i.

    spin_window and price_window hold sigma_j(tau') and P(tau') for
    tau' = t - tau .. t - 1, oldest first; the last price is P(t - 1).
    """
    prices = np.asarray(price_window, dtype=float)
    _check_prices(prices)
    spins = np.asarray(spin_window, dtype=float)
    log_ratios = np.log(prices[-1]) - np.log(prices)
    return float(background + np.dot(spins, log_ratios))


def memory_field(spin_window: np.ndarray, price_window: np.ndarray) -> np.ndarray:
    """Memory sum of every agent as a neighbour: (n, tau) spins x (tau,) prices -> (n,)."""
    _check_prices(price_window)
    log_ratios = np.log(price_window[-1]) - np.log(price_window)
    return spin_window.astype(float) @ log_ratios


def coupling_forces(history: HistoryBuffer, coupling: CouplingState, topology: LatticeTopology) -> np.ndarray:
    """(n, 4) forces J_ij(t) for the round whose history is stored in `history`."""
    memory = memory_field(history.spins, history.price_window())
    return coupling.background + memory[topology.neighbours]


def local_field(forces: Sequence[float], noise: float) -> LocalField:
    """Sum of the four neighbour forces plus this update's noise draw."""
    f1, f2, f3, f4 = (float(f) for f in forces)
    return LocalField(value=f1 + f2 + f3 + f4 + noise, contributions=(f1, f2, f3, f4), noise=float(noise))


def decide_spin(field_value: float, threshold: float) -> int:
    """Three-state rule: buy (+1) at or above the threshold, sell (-1) at or below
    its negative, otherwise stay out (0).
    """
    if not threshold > 0:
        raise SimulationError(f"threshold must be positive, got {threshold}")
    if field_value >= threshold:
        return 1
    if field_value <= -threshold:
        return -1
    return 0


def decide_spins(field_values: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Vectorised decide_spin. Thresholds are assumed positive."""
    buy = field_values >= thresholds
    sell = field_values <= -thresholds
    return (buy.astype(np.int8) - sell.astype(np.int8)).astype(np.int8)


def update_threshold(threshold_prev, price_now: float, price_prev: float):
    """Rescale thresholds by the price ratio; works on scalars and arrays."""
    if not (price_now > 0 and price_prev > 0):
        raise SimulationError(f"price ratio needs positive prices, got {price_now} / {price_prev}")
    if not np.all(np.asarray(threshold_prev) > 0):
        raise SimulationError("threshold must be positive")
    return threshold_prev * (price_now / price_prev)


def relax_spins(
    base_field: np.ndarray,
    thresholds: np.ndarray,
    spins: np.ndarray,
    picks: np.ndarray,
    noise: np.ndarray,
) -> ConsultationResult:
    """Serial random-agent relaxation evaluated in bulk.

    picks and noise have shape (max_sweeps, n): draw k of sweep s updates
    agent picks[s, k] with field base_field[i] + noise[s, k]. Fields depend
    only on last round's history, never on spins changed during this round,
    so each draw's outcome is independent of the ones before it; only the
    change counting and the final state need the draw order.
    """
    cap, n = picks.shape
    flat = picks.ravel()
    flat_noise = noise.ravel()
    proposed = decide_spins(base_field[flat] + flat_noise, thresholds[flat])

    # Group draws by agent, keeping draw order inside each group.
    order = np.argsort(flat, kind="stable")
    agents_sorted = flat[order]
    proposed_sorted = proposed[order]
    previous_sorted = spins[agents_sorted]
    repeat = agents_sorted[1:] == agents_sorted[:-1]
    previous_sorted[1:][repeat] = proposed_sorted[:-1][repeat]

    changed = np.empty(flat.size, dtype=bool)
    changed[order] = proposed_sorted != previous_sorted
    per_sweep = changed.reshape(cap, n).sum(axis=1)

    quiet = np.flatnonzero(per_sweep == 0)
    hit_cap = quiet.size == 0
    sweeps = cap if hit_cap else int(quiet[0]) + 1
    limit = sweeps * n

    used = order[order < limit]
    used_agents = flat[used]
    last = np.ones(used.size, dtype=bool)
    last[:-1] = used_agents[:-1] != used_agents[1:]
    final_positions = used[last]
    updated = flat[final_positions]

    final = spins.copy()
    final[updated] = proposed[final_positions]
    return ConsultationResult(
        spins=final,
        sweeps=sweeps,
        changes=per_sweep[:sweeps].copy(),
        hit_cap=hit_cap,
        updated_agents=updated,
        last_noise=flat_noise[final_positions],
    )


def consultation_round(state: SimulationState, t: int) -> ConsultationResult:
    """Relax spins for round t; cash and shares are not touched."""
    config = state.config
    n = state.agents.n
    forces = coupling_forces(state.history, state.coupling, state.topology)

    if config.debug_memoryless and config.tau == 1 and not np.array_equal(forces, state.coupling.background):
        raise SimulationError("memoryless run produced forces different from the background", round_index=t)

    base_field = forces.sum(axis=1)
    picks = state.random.selection.integers(0, n, size=(config.max_sweeps, n))
    noise = state.random.noise.standard_normal((config.max_sweeps, n)) * config.noise_sigma

    result = relax_spins(base_field, state.agents.thresholds, state.agents.spins, picks, noise)
    state.agents.spins = result.spins
    state.agents.noise[result.updated_agents] = result.last_noise

    state.diagnostics.total_sweeps += result.sweeps
    if result.hit_cap:
        state.diagnostics.max_sweep_hits += 1
        logger.debug(f"Round {t}: consultation hit max_sweeps={config.max_sweeps} "
                     f"({int(result.changes[-1])} changes in last sweep)")
    return result


def fundamental_window_open(t: int, policy: FundamentalPolicy, k: int) -> bool:
    """True while the remainder of t modulo m = K + k is below the window length."""
    m = policy.base_period + k
    remainder = t - (t // m) * m
    return remainder < policy.window


def _band_action(price: float, fundamental: float, policy: FundamentalPolicy) -> FundamentalAction:
    if price > policy.sell_factor * fundamental:
        return FundamentalAction.SELL
    if price < policy.buy_factor * fundamental:
        return FundamentalAction.BUY
    return FundamentalAction.NONE


def fundamental_trigger(
    t: int,
    policy: FundamentalPolicy,
    k: int,
    price: float,
    fundamental: float,
    coin: float,
) -> FundamentalAction:
    if not fundamental_window_open(t, policy, k) or not coin < policy.obey_probability:
        return FundamentalAction.NONE
    return _band_action(price, fundamental, policy)


def apply_fundamental(state: SimulationState, t: int, policy: FundamentalPolicy) -> Tuple[int, int]:
    """Override this round's decisions of agents who act on the fundamental price.

    Returns (fundamental buys, fundamental sells).
    """
    k = int(state.random.fundamental_k.integers(1, policy.jitter_range + 1))
    if not fundamental_window_open(t, policy, k):
        return 0, 0

    coins = state.random.fundamental_coin.random(state.agents.n)
    action = _band_action(state.market.price, state.market.fundamental, policy)
    state.diagnostics.fundamental_rounds += 1
    if action is FundamentalAction.NONE:
        return 0, 0

    obeying = coins < policy.obey_probability
    state.agents.spins[obeying] = 1 if action is FundamentalAction.BUY else -1
    count = int(obeying.sum())
    logger.debug(f"Round {t}: {count} agents {action.value} (m={policy.base_period + k})")
    if action is FundamentalAction.BUY:
        return count, 0
    return 0, count
