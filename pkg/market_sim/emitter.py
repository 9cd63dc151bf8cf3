"""
Write a run (or an analysis of an ingested series) as delimited tables plus
a JSON summary. Output is byte-stable for a fixed artifact.
"""
import json
import logging
import math
import os
from typing import Any, Dict, Optional

import pandas as pd

from .config import dump_config
from .runner import RunArtifact
from .stats import PowerLawFit, StylizedFactsReport

logger = logging.getLogger(__name__)


def _clean(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item"):
        return _clean(value.item())
    return value


def _write_csv(df: pd.DataFrame, path: str) -> str:
    df.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    return path


GAMMA_COLUMNS = ["series", "gamma", "prefactor", "fit_lo", "fit_hi", "residual", "r_squared", "truncated"]


def _gamma_row(fit: Optional[PowerLawFit]) -> Dict[str, Any]:
    if fit is None:
        return {"series": "abs_returns", "truncated": True}
    return {
        "series": "abs_returns",
        "gamma": fit.gamma,
        "prefactor": fit.prefactor,
        "fit_lo": fit.fit_range[0],
        "fit_hi": fit.fit_range[1],
        "residual": fit.residual,
        "r_squared": fit.r_squared,
        "truncated": fit.truncated,
    }


def _facts_tables(facts: StylizedFactsReport) -> Dict[str, pd.DataFrame]:
    returns = facts.returns.values
    hist = facts.histogram
    fit = facts.abs_acf.fit
    return {
        "daily_returns.csv": pd.DataFrame(
            {
                "day": range(1, returns.size + 1),
                "close": facts.daily_prices[1:],
                "log_return": returns,
                "abs_return": abs(returns),
            }
        ),
        "acf.csv": pd.DataFrame(
            {
                "lag": facts.raw_acf.lags,
                "C": facts.raw_acf.values,
                "R": facts.abs_acf.values[: facts.raw_acf.lags.size],
                "C_squared": facts.squared_acf.values,
            }
        ),
        "histogram.csv": pd.DataFrame(
            {
                "bin_left": hist.bin_edges[:-1],
                "bin_right": hist.bin_edges[1:],
                "count": hist.counts,
                "density": hist.density,
                "gaussian_count": hist.gaussian_counts,
            }
        ),
        "variogram.csv": pd.DataFrame({"lag": facts.variogram.lags, "semivariance": facts.variogram.semivariance}),
        "gamma.csv": pd.DataFrame([_gamma_row(fit)], columns=GAMMA_COLUMNS),
    }


def _facts_summary(facts: StylizedFactsReport) -> Dict[str, Any]:
    row = _gamma_row(facts.abs_acf.fit)
    return {
        "daily_returns": len(facts.returns),
        "gamma": row.get("gamma"),
        "gamma_fit_range": [row.get("fit_lo"), row.get("fit_hi")],
        "gamma_residual": row.get("residual"),
        "gamma_r_squared": row.get("r_squared"),
        "gamma_truncated": row["truncated"],
        "excess_kurtosis": facts.excess_kurtosis,
        "zero_return_fraction": facts.zero_return_fraction,
        "mean_abs_raw_acf_20_100": facts.mean_abs_raw_acf,
        "return_variance": facts.raw_acf.variance,
    }


def _write_summary(summary: Dict[str, Any], path: str) -> str:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(_clean(summary), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def emit_facts(facts: StylizedFactsReport, out_dir: str, extra: Optional[Dict[str, Any]] = None) -> Dict[str, str]:
    """Write the statistics tables and summary.json; `extra` keys are merged into the summary."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {name: _write_csv(df, os.path.join(out_dir, name)) for name, df in _facts_tables(facts).items()}
    summary = _facts_summary(facts)
    summary.update(extra or {})
    paths["summary.json"] = _write_summary(summary, os.path.join(out_dir, "summary.json"))
    return paths


def emit(artifact: RunArtifact, out_dir: str) -> Dict[str, str]:
    """Write every table of a run into out_dir; returns file name -> path."""
    os.makedirs(out_dir, exist_ok=True)
    paths: Dict[str, str] = {}

    config_path = os.path.join(out_dir, "config.yaml")
    with open(config_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dump_config(artifact.config))
    paths["config.yaml"] = config_path

    paths["rounds.csv"] = _write_csv(artifact.rounds_frame(), os.path.join(out_dir, "rounds.csv"))
    diagnostics = pd.DataFrame(
        {"key": list(artifact.diagnostics), "value": [artifact.diagnostics[k] for k in artifact.diagnostics]}
    )
    paths["diagnostics.csv"] = _write_csv(diagnostics, os.path.join(out_dir, "diagnostics.csv"))

    extra = {
        "scenario": artifact.config.name,
        "seed": artifact.config.seed,
        "rounds": len(artifact.records),
        "initial_price": artifact.initial_price,
        "final_price": float(artifact.prices[-1]),
        "diagnostics": artifact.diagnostics,
    }
    paths.update(emit_facts(artifact.facts, out_dir, extra))
    logger.info(f"Emitted {len(paths)} files to {out_dir}")
    return paths
