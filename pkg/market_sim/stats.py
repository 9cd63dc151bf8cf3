"""
Stylized-fact statistics over price series: log-returns, daily aggregation,
autocorrelation, power-law decay fits, histograms and variograms.

Simulated and ingested series go through the same `analyze_prices` pipeline.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import stats as sp_stats

from .errors import DataError, StatisticsError

logger = logging.getLogger(__name__)

RAW_ACF_WINDOW = (20, 100)


@dataclass
class ReturnSeries:
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise DataError("return series contains non-finite values")

    def __len__(self) -> int:
        return self.values.size

    def absolute(self) -> "ReturnSeries":
        return ReturnSeries(np.abs(self.values))

    def squared(self) -> "ReturnSeries":
        return ReturnSeries(self.values**2)


@dataclass
class PowerLawFit:
    gamma: float
    prefactor: float
    fit_range: Tuple[int, int]
    residual: float  # RMS of the log-log residuals
    r_squared: float
    truncated: bool  # range shrunk to the positive prefix


@dataclass
class AcfReport:
    lags: np.ndarray
    values: np.ndarray
    variance: float
    fit: Optional[PowerLawFit] = None
    degenerate: bool = False  # zero-variance input; values are NaN

    @property
    def fitted_gamma(self) -> Optional[float]:
        return self.fit.gamma if self.fit is not None else None

    def at(self, lag: int) -> float:
        return float(self.values[lag])


@dataclass
class HistogramReport:
    bin_edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    gaussian_counts: np.ndarray  # expected counts under a fitted normal law
    excess_kurtosis: float
    normalization: str = "counts"
    degenerate: bool = False


@dataclass
class VariogramReport:
    time_course: np.ndarray
    lags: np.ndarray
    semivariance: np.ndarray


@dataclass
class StylizedFactsReport:
    daily_prices: np.ndarray
    returns: ReturnSeries
    raw_acf: AcfReport
    abs_acf: AcfReport
    squared_acf: AcfReport
    histogram: HistogramReport
    variogram: VariogramReport
    mean_abs_raw_acf: float  # mean |C(lag)| over RAW_ACF_WINDOW

    @property
    def gamma(self) -> Optional[float]:
        """None when the absolute-return ACF has no positive prefix to fit."""
        return self.abs_acf.fitted_gamma

    @property
    def excess_kurtosis(self) -> float:
        return self.histogram.excess_kurtosis

    @property
    def zero_return_fraction(self) -> float:
        """Share of daily returns that are exactly zero (days with a held price)."""
        return float(np.mean(self.returns.values == 0))


def log_returns(prices: Sequence[float], lag: int = 1) -> ReturnSeries:
    prices = np.asarray(prices, dtype=float)
    if prices.size == 0:
        raise DataError("empty price series")
    bad = np.flatnonzero(~(prices > 0))
    if bad.size:
        raise DataError(f"nonpositive price {prices[bad[0]]} at index {int(bad[0])}")
    if lag < 1 or lag >= prices.size:
        raise DataError(f"lag must lie in [1, {prices.size - 1}], got {lag}")
    return ReturnSeries(np.log(prices[lag:] / prices[:-lag]))


def aggregate_daily(round_prices: Sequence[float], rounds_per_day: int) -> np.ndarray:
    """Close of every full day; a trailing partial day is dropped."""
    prices = np.asarray(round_prices, dtype=float)
    if prices.size == 0:
        raise DataError("empty price series")
    if rounds_per_day < 1:
        raise DataError(f"rounds_per_day must be >= 1, got {rounds_per_day}")
    return prices[rounds_per_day - 1 :: rounds_per_day].copy()


def acf(returns: ReturnSeries, max_lag: int, normalization: str = "pairs") -> AcfReport:
    """Normalised autocorrelation for lags 0..max_lag.

    Full-sample mean and variance. With normalization="pairs" the lagged
    products are averaged over the N - lag available pairs; "biased" divides
    by N instead.
    """
    x = returns.values
    size = x.size
    if size <= max_lag + 1:
        raise StatisticsError(f"series of length {size} too short for max_lag={max_lag}")
    if np.ptp(x) == 0:
        raise StatisticsError("degenerate series: zero variance")
    if normalization not in ("pairs", "biased"):
        raise ValueError(f"unknown normalization '{normalization}'")

    d = x - x.mean()
    variance = np.dot(d, d) / size
    values = np.empty(max_lag + 1)
    for lag in range(max_lag + 1):
        pairs = size - lag if normalization == "pairs" else size
        values[lag] = np.dot(d[lag:], d[: size - lag]) / pairs / variance
    return AcfReport(lags=np.arange(max_lag + 1), values=values, variance=float(variance))


def fit_power_law(lags: Sequence[float], values: Sequence[float], fit_range: Tuple[int, int]) -> PowerLawFit:
    """Least-squares line through ln(value) vs ln(lag) over fit_range (inclusive)."""
    lags = np.asarray(lags, dtype=float)
    values = np.asarray(values, dtype=float)
    lo, hi = fit_range
    in_range = (lags >= lo) & (lags <= hi)
    x, y = lags[in_range], values[in_range]

    truncated = False
    nonpositive = np.flatnonzero(~(y > 0))
    if nonpositive.size:
        x, y = x[: nonpositive[0]], y[: nonpositive[0]]
        truncated = True

    if x.size < 2:
        raise StatisticsError(f"empty power-law fit range {fit_range} (positive prefix has {x.size} points)")
    if truncated:
        logger.warning(f"Fit range {fit_range} shrunk to lags {int(x[0])}..{int(x[-1])} (nonpositive values)")

    log_x, log_y = np.log(x), np.log(y)
    line = sp_stats.linregress(log_x, log_y)
    residuals = log_y - (line.intercept + line.slope * log_x)
    return PowerLawFit(
        gamma=float(-line.slope),
        prefactor=float(np.exp(line.intercept)),
        fit_range=(int(x[0]), int(x[-1])),
        residual=float(np.sqrt(np.mean(residuals**2))),
        r_squared=float(line.rvalue**2),
        truncated=truncated,
    )


def abs_acf_power_fit(
    returns: ReturnSeries, fit_range: Tuple[int, int] = (1, 100), max_lag: Optional[int] = None
) -> AcfReport:
    max_lag = max(fit_range[1], max_lag or 0)
    report = acf(returns.absolute(), max_lag)
    report.fit = fit_power_law(report.lags, report.values, fit_range)
    if not report.fit.gamma > 0:
        logger.warning(f"Absolute-return ACF does not decay over {report.fit.fit_range}: gamma={report.fit.gamma:.4f}")
    return report


def histogram(returns: ReturnSeries, bins: int) -> HistogramReport:
    x = returns.values
    if bins < 2:
        raise StatisticsError(f"need at least 2 bins, got {bins}")
    if x.size == 0:
        raise StatisticsError("empty sample")

    if np.ptp(x) == 0:
        logger.warning("All returns are equal; histogram has a single degenerate bin")
        edges = np.array([x[0] - 0.5, x[0] + 0.5])
        counts = np.array([x.size])
        return HistogramReport(
            bin_edges=edges,
            counts=counts,
            density=counts / x.size,
            gaussian_counts=np.array([float(x.size)]),
            excess_kurtosis=float("nan"),
            degenerate=True,
        )

    counts, edges = np.histogram(x, bins=bins, range=(x.min(), x.max()))
    widths = np.diff(edges)
    reference = sp_stats.norm(loc=x.mean(), scale=x.std())
    return HistogramReport(
        bin_edges=edges,
        counts=counts,
        density=counts / (x.size * widths),
        gaussian_counts=x.size * np.diff(reference.cdf(edges)),
        excess_kurtosis=float(sp_stats.kurtosis(x, fisher=True, bias=True)),
    )


def variogram(returns: ReturnSeries, max_lag: int = 100) -> VariogramReport:
    """Return time course plus the classical semivariogram 0.5 <(r(t+lag) - r(t))^2>."""
    x = returns.values
    top = min(max_lag, x.size - 1)
    lags = np.arange(1, top + 1)
    semivariance = np.array([0.5 * np.mean((x[lag:] - x[:-lag]) ** 2) for lag in lags], dtype=float)
    return VariogramReport(time_course=x.copy(), lags=lags, semivariance=semivariance)


def volume_volatility_correlation(abs_returns: Sequence[float], volume: Sequence[float]) -> float:
    """Pearson correlation of per-round absolute log-return and traded volume."""
    a = np.asarray(abs_returns, dtype=float)
    v = np.asarray(volume, dtype=float)
    if a.size != v.size:
        raise StatisticsError(f"length mismatch: {a.size} returns vs {v.size} volumes")
    if a.size < 2 or np.ptp(a) == 0 or np.ptp(v) == 0:
        return float("nan")
    return float(sp_stats.pearsonr(a, v)[0])


def mean_abs_acf(report: AcfReport, lag_range: Tuple[int, int] = RAW_ACF_WINDOW) -> float:
    lo, hi = lag_range
    mask = (report.lags >= lo) & (report.lags <= hi)
    if not mask.any():
        return float("nan")
    return float(np.mean(np.abs(report.values[mask])))


def _acf_or_nan(returns: ReturnSeries, max_lag: int, label: str) -> AcfReport:
    if np.ptp(returns.values) > 0:
        return acf(returns, max_lag)
    logger.warning(f"{label.capitalize()} returns are constant; their autocorrelation is undefined")
    return AcfReport(
        lags=np.arange(max_lag + 1),
        values=np.full(max_lag + 1, np.nan),
        variance=0.0,
        degenerate=True,
    )


def analyze_prices(
    prices: Sequence[float],
    rounds_per_day: int = 1,
    max_lag: int = 100,
    fit_range: Tuple[int, int] = (1, 100),
    bins: int = 50,
) -> StylizedFactsReport:
    """Full stylized-facts pipeline over a price series sampled once per round."""
    daily = aggregate_daily(prices, rounds_per_day)
    if daily.size < 2:
        raise StatisticsError(f"need at least 2 daily closes, got {daily.size}")
    returns = log_returns(daily, lag=1)
    if len(returns) < 4:
        raise StatisticsError(f"need at least 4 daily returns, got {len(returns)}")

    lag_cap = min(max(max_lag, fit_range[1]), len(returns) - 2)
    fit_hi = min(fit_range[1], lag_cap)
    if fit_hi < fit_range[1]:
        logger.warning(f"Series of {len(returns)} returns; fit range clipped to {fit_range[0]}..{fit_hi}")

    raw = _acf_or_nan(returns, lag_cap, "raw")
    try:
        abs_report = abs_acf_power_fit(returns, (fit_range[0], fit_hi), max_lag=lag_cap)
    except StatisticsError as e:
        logger.warning(f"No power-law fit for absolute returns: {e}")
        abs_report = _acf_or_nan(returns.absolute(), lag_cap, "absolute")

    report = StylizedFactsReport(
        daily_prices=daily,
        returns=returns,
        raw_acf=raw,
        abs_acf=abs_report,
        squared_acf=_acf_or_nan(returns.squared(), lag_cap, "squared"),
        histogram=histogram(returns, bins),
        variogram=variogram(returns, lag_cap),
        mean_abs_raw_acf=mean_abs_acf(raw),
    )
    gamma = "n/a" if report.gamma is None else f"{report.gamma:.4f}"
    logger.info(
        f"Analysed {len(returns)} returns: gamma={gamma}, "
        f"excess kurtosis={report.excess_kurtosis:.3f}"
    )
    return report


def compare_tails(report: StylizedFactsReport, baseline: StylizedFactsReport) -> float:
    """Excess-kurtosis difference between two runs (positive: `report` has fatter tails)."""
    return report.excess_kurtosis - baseline.excess_kurtosis
