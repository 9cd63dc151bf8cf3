"""
Whole-run orchestration: initialise, alternate consultation and decision
rounds, then push the price series through the statistics pipeline.
"""
import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .config import ScenarioConfig
from .dynamics import FundamentalPolicy, consultation_round
from .errors import SimulationError
from .initializer import init_simulation
from .market import RoundRecord, run_decision_round
from .stats import StylizedFactsReport, analyze_prices, volume_volatility_correlation

logger = logging.getLogger(__name__)

ROUND_COLUMNS = list(RoundRecord.__dataclass_fields__)


@dataclass
class RunArtifact:
    config: ScenarioConfig
    initial_price: float
    prices: np.ndarray  # P(1..L)
    records: List[RoundRecord]
    facts: StylizedFactsReport
    diagnostics: Dict[str, float]

    def rounds_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.as_dict() for r in self.records], columns=ROUND_COLUMNS)


class MarketSimulation:
    """Steps one simulation state through its decision rounds."""

    def __init__(self, config: ScenarioConfig, seed: Optional[int] = None):
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.state = init_simulation(config, seed)
        self.policy = FundamentalPolicy.from_config(config)
        self.records: List[RoundRecord] = []

    def step(self) -> RoundRecord:
        t = self.state.t + 1
        try:
            consultation = consultation_round(self.state, t)
            record = run_decision_round(self.state, t, consultation, self.policy)
        except SimulationError as e:
            if e.round_index is None:
                raise SimulationError(str(e), round_index=t) from e
            raise
        self.records.append(record)
        return record

    def run(self, round_callback: Optional[Callable[["MarketSimulation", RoundRecord], None]] = None) -> List[RoundRecord]:
        total = self.config.rounds
        every = self.config.log_every
        while self.state.t < total:
            record = self.step()
            if round_callback is not None:
                round_callback(self, record)
            if every and record.t % every == 0:
                self.logger.info(
                    f"Round {record.t}/{total}: P={record.price:.6g} F={record.fundamental:.6g} "
                    f"D={record.demand} S={record.supply} sweeps={record.sweeps}"
                )

        diag = self.state.diagnostics
        if diag.max_sweep_hits:
            self.logger.warning(f"{diag.max_sweep_hits} of {total} consultation rounds hit max_sweeps={self.config.max_sweeps}")
        if diag.degenerate_price_rounds:
            self.logger.warning(
                f"{diag.degenerate_price_rounds} of {total} rounds had an empty book side; price held "
                f"({diag.degenerate_price_rounds / total:.1%})"
            )
        if diag.maker_exhausted_rounds:
            self.logger.warning(
                f"Market maker ran out in {diag.maker_exhausted_rounds} rounds ({diag.lapsed_orders} orders lapsed)"
            )
        return self.records

    def diagnostics(self) -> Dict[str, float]:
        diag = self.state.diagnostics.as_dict()
        rounds = max(len(self.records), 1)
        diag["rounds"] = len(self.records)
        diag["mean_sweeps"] = diag["total_sweeps"] / rounds
        diag["max_sweep_fraction"] = diag["max_sweep_hits"] / rounds
        diag["empty_book_fraction"] = diag["degenerate_price_rounds"] / rounds
        return diag

    def artifact(self) -> RunArtifact:
        config = self.config
        history = np.asarray(self.state.market.price_history, dtype=float)
        prices = history[1:]
        facts = analyze_prices(
            prices,
            rounds_per_day=config.rounds_per_day,
            max_lag=config.max_lag,
            fit_range=config.fit_range,
            bins=config.histogram_bins,
        )
        diag = self.diagnostics()
        volume = np.array([r.volume for r in self.records], dtype=float)
        diag["volume_volatility_corr"] = volume_volatility_correlation(np.abs(np.diff(np.log(history))), volume)
        return RunArtifact(
            config=config,
            initial_price=float(history[0]),
            prices=prices,
            records=list(self.records),
            facts=facts,
            diagnostics=diag,
        )


def run(config: ScenarioConfig) -> RunArtifact:
    simulation = MarketSimulation(config)
    simulation.run()
    artifact = simulation.artifact()
    logger.info(f"Finished '{config.name}' seed={config.seed}: {config.rounds} rounds, P(L)={artifact.prices[-1]:.6g}")
    return artifact


def run_batch(configs: Sequence[ScenarioConfig], workers: Optional[int] = None) -> List[RunArtifact]:
    """Run independent scenarios in parallel, one process per state; results keep input order."""
    if len(configs) == 1 or workers == 1:
        return [run(c) for c in configs]

    workers = workers or min(len(configs), os.cpu_count() or 1)
    results: List[Optional[RunArtifact]] = [None] * len(configs)
    with ProcessPoolExecutor(max_workers=workers) as executor:
        future_to_index = {executor.submit(run, c): i for i, c in enumerate(configs)}
        for future in as_completed(future_to_index):
            index = future_to_index[future]
            results[index] = future.result()
            cfg = configs[index]
            logger.info(f"Completed '{cfg.name}' seed={cfg.seed}")
    return results
