"""
Error categories for the market simulator.

Every category carries the process exit code the controller uses for it.
"""
from typing import Optional


class MarketSimError(Exception):
    """Base class for all simulator errors."""

    exit_code = 1


class ConfigError(MarketSimError):
    exit_code = 2

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class DataError(MarketSimError):
    exit_code = 3


class StatisticsError(MarketSimError):
    exit_code = 4


class SimulationError(MarketSimError):
    """Internal invariant violation; aborts the run."""

    exit_code = 5

    def __init__(self, message: str, round_index: Optional[int] = None):
        self.round_index = round_index
        prefix = f"round {round_index}: " if round_index is not None else ""
        super().__init__(prefix + message)
