import math

import numpy as np
import pandas as pd
import pytest

from market_sim.emitter import emit_facts
from market_sim.errors import DataError
from market_sim.ingest import ingest_prices
from market_sim.stats import analyze_prices, log_returns


def write(tmp_path, text, name="prices.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestIngestPrices:
    def test_two_rows_give_one_return(self, tmp_path):
        series = ingest_prices(write(tmp_path, "Date,Close\n2020-01-02,100\n2020-01-03,110\n"))
        assert series.closes.tolist() == [100.0, 110.0]
        returns = log_returns(series.closes).values
        assert returns.size == 1
        assert returns[0] == pytest.approx(math.log(1.1))

    def test_bad_rows_rejected_with_line_numbers(self, tmp_path):
        text = "Date,Open,Close\n2020-01-02,1,100\n2020-01-03,1,-5\n2020-01-06,1,n/a\n2020-01-07,1,101\n2020-01-08,1,0\n"
        series = ingest_prices(write(tmp_path, text))
        assert series.closes.tolist() == [100.0, 101.0]
        assert [line for line, _ in series.rejected] == [3, 4, 6]
        assert "nonpositive" in series.rejected[0][1]
        assert "unparseable" in series.rejected[1][1]

    def test_sorted_by_date(self, tmp_path):
        series = ingest_prices(write(tmp_path, "date,close\n2020-01-03,2\n2020-01-01,1\n2020-01-02,3\n"))
        assert series.closes.tolist() == [1.0, 3.0, 2.0]
        assert series.dates is not None

    def test_semicolon_export_with_adjusted_close(self, tmp_path):
        text = "Data;Otwarcie;Zamkniecie\n2020-01-02;1;2400.5\n2020-01-03;1;2410.0\n2020-01-06;1;2395.25\n"
        series = ingest_prices(write(tmp_path, text))
        assert series.closes.tolist() == [2400.5, 2410.0, 2395.25]

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            ingest_prices(str(tmp_path / "absent.csv"))

    def test_no_close_column(self, tmp_path):
        with pytest.raises(DataError, match="no close column"):
            ingest_prices(write(tmp_path, "Date,Open\n2020-01-02,1\n2020-01-03,2\n"))

    def test_fewer_than_two_valid_rows(self, tmp_path):
        with pytest.raises(DataError):
            ingest_prices(write(tmp_path, "Date,Close\n2020-01-02,100\n2020-01-03,-1\n"))

    def test_same_pipeline_as_simulated_series(self, tmp_path):
        rng = np.random.default_rng(8)
        closes = np.round(2000 * np.exp(np.cumsum(rng.normal(scale=0.01, size=400))), 6)
        rows = "\n".join(f"{i},{float(c):.6f}" for i, c in enumerate(closes))
        series = ingest_prices(write(tmp_path, "day,close\n" + rows + "\n"))
        assert np.allclose(series.closes, closes, rtol=1e-12)

        ingested = analyze_prices(series.closes, max_lag=30, fit_range=(1, 30))
        simulated = analyze_prices(closes, max_lag=30, fit_range=(1, 30))
        assert np.allclose(ingested.raw_acf.values, simulated.raw_acf.values)
        assert np.allclose(ingested.abs_acf.values, simulated.abs_acf.values)
        assert ingested.excess_kurtosis == pytest.approx(simulated.excess_kurtosis)

        written = emit_facts(ingested, str(tmp_path / "ingested"))
        reference = emit_facts(simulated, str(tmp_path / "simulated"))
        assert sorted(written) == sorted(reference)
        for name in written:
            if name.endswith(".csv"):
                assert pd.read_csv(written[name]).columns.tolist() == pd.read_csv(reference[name]).columns.tolist()
