"""
Initial part of a run: draw the pre-history, couplings, thresholds and
noise, endow agents and the market maker, and compute the t=0 field.
"""
import logging
from typing import Optional

import numpy as np

from .config import ScenarioConfig
from .dynamics import decide_spins, memory_field
from .lattice import build_lattice
from .rng import RandomSource
from .state import AgentState, CouplingState, HistoryBuffer, MarketState, SimulationState

logger = logging.getLogger(__name__)

# Lower bound for draws on the open unit interval.
_TINY = np.nextafter(0.0, 1.0)


def _open_unit(rng: np.random.Generator, size=None):
    return rng.uniform(_TINY, 1.0, size=size)


def init_simulation(config: ScenarioConfig, seed: Optional[int] = None) -> SimulationState:
    """Prepare a simulation at t = 0. Draw order from the init stream is fixed."""
    seed = config.seed if seed is None else seed
    random = RandomSource(seed)
    rng = random.init
    topology = build_lattice(config.n)
    n, tau = config.n, config.tau

    past_spins = rng.integers(-1, 2, size=(n, tau)).astype(np.int8)
    past_prices = _open_unit(rng, size=tau)
    background = rng.uniform(-2.0, 2.0, size=(n, 4))
    initial_force = (rng.random(size=(n, 4)) < config.connect_probability).astype(np.int8)
    thresholds = np.abs(rng.standard_normal(n))
    thresholds[thresholds == 0] = _TINY
    noise = rng.standard_normal(n) * config.noise_sigma
    price0 = float(_open_unit(rng))

    if config.initial_force_mode == "bernoulli":
        forces0 = initial_force.astype(float)
    else:
        forces0 = background + memory_field(past_spins, past_prices)[topology.neighbours]
    field0 = forces0.sum(axis=1) + noise
    spins0 = decide_spins(field0, thresholds)

    history = HistoryBuffer(
        spins=np.concatenate([past_spins[:, 1:], spins0[:, None]], axis=1),
        prices=np.append(past_prices, price0),
    )
    agents = AgentState(
        spins=spins0.copy(),
        thresholds=thresholds,
        noise=noise,
        cash=np.full(n, float(config.endowment_cash)),
        shares=np.full(n, config.endowment_shares, dtype=np.int64),
    )
    market = MarketState(
        price=price0,
        fundamental=price0,
        activity_coeff=config.alpha,
        fundamental_growth=config.fundamental_growth,
        maker_cash=float(config.maker_cash),
        maker_shares=int(config.maker_shares),
        price_history=[price0],
    )
    state = SimulationState(
        config=config,
        topology=topology,
        agents=agents,
        coupling=CouplingState(
            background=background,
            initial_force=initial_force,
            connect_probability=config.connect_probability,
        ),
        history=history,
        market=market,
        random=random,
        initial_field=field0,
    )
    logger.info(
        f"Initialised '{config.name}': n={n}, tau={tau}, seed={seed}, P(0)={price0:.6f}, "
        f"active={int(np.count_nonzero(spins0))}"
    )
    return state
