"""
Daily close ingestion from delimited text (e.g. index history exports).
"""
import logging
import os
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from .errors import DataError

logger = logging.getLogger(__name__)

CLOSE_COLUMNS = ("close", "adj close", "adj_close", "zamkniecie")
DATE_COLUMNS = ("date", "data", "timestamp", "time")


@dataclass
class IngestedSeries:
    closes: np.ndarray
    source: str
    dates: Optional[np.ndarray] = None
    rejected: List[Tuple[int, str]] = field(default_factory=list)  # (line number, reason)


def _find_column(columns, candidates) -> Optional[str]:
    normalized = {str(c).strip().lower(): c for c in columns}
    for name in candidates:
        if name in normalized:
            return normalized[name]
    return None


def ingest_prices(path: str, sep: Optional[str] = None) -> IngestedSeries:
    """Read positive close prices in date order; bad rows are rejected with their line number."""
    if not os.path.exists(path):
        raise DataError(f"price file not found: {path}")
    try:
        df = pd.read_csv(path, sep=sep, engine="python", dtype=str, skip_blank_lines=False, skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f"could not read {path}: {e}") from None

    close_col = _find_column(df.columns, CLOSE_COLUMNS)
    if close_col is None:
        raise DataError(f"{path}: no close column in header {list(df.columns)}")
    date_col = _find_column(df.columns, DATE_COLUMNS)

    blank = df.isna().all(axis=1)
    closes = pd.to_numeric(df[close_col].str.strip(), errors="coerce")

    rejected: List[Tuple[int, str]] = []
    keep = []
    for row, (value, raw, is_blank) in enumerate(zip(closes, df[close_col], blank)):
        line = row + 2  # header is line 1
        if is_blank:
            continue
        if pd.isna(value):
            rejected.append((line, f"unparseable close {raw!r}"))
        elif not value > 0:
            rejected.append((line, f"nonpositive close {value}"))
        else:
            keep.append(row)

    for line, reason in rejected:
        logger.warning(f"{path}:{line}: rejected row, {reason}")

    if len(keep) < 2:
        raise DataError(f"{path}: need at least 2 valid close rows, got {len(keep)}")

    valid = df.iloc[keep]
    values = closes.iloc[keep].to_numpy(dtype=float)
    dates = None
    if date_col is not None:
        parsed = pd.to_datetime(valid[date_col], errors="coerce")
        if parsed.notna().all():
            order = np.argsort(parsed.to_numpy(), kind="stable")
            values = values[order]
            dates = parsed.to_numpy()[order]

    logger.info(f"Ingested {values.size} closes from {path} ({len(rejected)} rejected)")
    return IngestedSeries(closes=values, source=path, dates=dates, rejected=rejected)
