#!/usr/bin/env python3

import argparse
import json
import os
import sys
from datetime import datetime

import pandas as pd
from jinja2 import Template


def load_summary(run_dir: str) -> dict:
    """Load summary.json from an emitted directory."""
    path = os.path.join(run_dir, "summary.json")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        print(f"Error loading summary: {e}")
        sys.exit(3)


def load_table(run_dir: str, name: str) -> pd.DataFrame:
    path = os.path.join(run_dir, name)
    if not os.path.exists(path):
        return pd.DataFrame()
    df = pd.read_csv(path, encoding="utf-8")
    print(f"Loaded {len(df)} rows from {name}")
    return df


def acf_rows(acf: pd.DataFrame, lags=(1, 2, 5, 10, 20, 50, 100)) -> list:
    """ACF values at a handful of landmark lags."""
    if acf.empty:
        return []
    picked = acf[acf["lag"].isin(lags)]
    return picked.to_dict(orient="records")


def tail_rows(histogram: pd.DataFrame) -> list:
    """Histogram bins where the observed count exceeds the Gaussian reference."""
    if histogram.empty:
        return []
    fat = histogram[histogram["count"] > histogram["gaussian_count"].round()]
    return fat.to_dict(orient="records")


def create_html_report(run_dir: str, summary: dict, gamma: pd.DataFrame, diagnostics: pd.DataFrame,
                       acf: pd.DataFrame, histogram: pd.DataFrame) -> str:
    """Create the HTML report of one run or analysis."""

    html_template = """
<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <meta name="viewport" content="width=device-width, initial-scale=1.0">
    <title>Market Simulation Report - {{ title }}</title>
    <style>
        body { font-family: Arial, sans-serif; margin: 40px; background: #f5f5f5; }
        .container { max-width: 1000px; margin: 0 auto; background: white; padding: 30px; border-radius: 8px; box-shadow: 0 2px 10px rgba(0,0,0,0.1); }
        h1 { color: #333; border-bottom: 3px solid #007acc; padding-bottom: 10px; }
        h2 { color: #444; border-bottom: 1px solid #ddd; padding-bottom: 5px; margin-top: 30px; }
        .summary { background: #f9f9f9; padding: 20px; border-radius: 6px; margin: 20px 0; }
        .warn { color: #dc3545; font-weight: bold; }
        table { width: 100%; border-collapse: collapse; margin: 15px 0; }
        th, td { padding: 8px; text-align: left; border-bottom: 1px solid #ddd; }
        th { background: #f8f9fa; font-weight: bold; }
    </style>
</head>
<body>
    <div class="container">
        <h1>Market Simulation Report</h1>

        <div class="summary">
            <h2>Summary</h2>
            <p><strong>Source:</strong> {{ title }}</p>
            {% if summary.seed is not none %}<p><strong>Seed:</strong> {{ summary.seed }}</p>{% endif %}
            {% if summary.rounds is not none %}<p><strong>Decision rounds:</strong> {{ summary.rounds }}</p>{% endif %}
            <p><strong>Daily returns:</strong> {{ summary.daily_returns }}</p>
            <p><strong>Excess kurtosis:</strong> {{ fmt(summary.excess_kurtosis) }}</p>
            <p><strong>Mean |raw ACF|, lags 20-100:</strong> {{ fmt(summary.mean_abs_raw_acf_20_100) }}</p>
            <p><strong>Generated:</strong> {{ datetime.now().strftime('%Y-%m-%d %H:%M:%S') }}</p>
        </div>

        <h2>Volatility Clustering</h2>
        <table>
            <tr><th>Series</th><th>Decay exponent</th><th>Prefactor</th><th>Lags</th><th>R&sup2;</th><th>Residual</th></tr>
            {% for row in gamma %}
            <tr>
                <td>{{ row.series }}</td>
                <td>{{ fmt(row.gamma) }}</td>
                <td>{{ fmt(row.prefactor) }}</td>
                <td>{{ row.fit_lo }}-{{ row.fit_hi }}{% if row.truncated %} <span class="warn">(truncated)</span>{% endif %}</td>
                <td>{{ fmt(row.r_squared) }}</td>
                <td>{{ fmt(row.residual) }}</td>
            </tr>
            {% endfor %}
        </table>

        <h2>Autocorrelation</h2>
        <table>
            <tr><th>Lag</th><th>Raw returns</th><th>Absolute returns</th><th>Squared returns</th></tr>
            {% for row in acf %}
            <tr><td>{{ row.lag }}</td><td>{{ fmt(row.C) }}</td><td>{{ fmt(row.R) }}</td><td>{{ fmt(row.C_squared) }}</td></tr>
            {% endfor %}
        </table>

        <h2>Fat Tails</h2>
        {% if tails %}
        <p>Bins holding more returns than a Gaussian of the same mean and variance:</p>
        <table>
            <tr><th>Bin</th><th>Observed</th><th>Gaussian</th></tr>
            {% for row in tails %}
            <tr><td>[{{ fmt(row.bin_left) }}, {{ fmt(row.bin_right) }})</td><td>{{ row.count }}</td><td>{{ "%.1f"|format(row.gaussian_count) }}</td></tr>
            {% endfor %}
        </table>
        {% else %}
        <p>No bin exceeds the Gaussian reference.</p>
        {% endif %}

        {% if diagnostics %}
        <h2>Diagnostics</h2>
        <table>
            <tr><th>Counter</th><th>Value</th></tr>
            {% for row in diagnostics %}
            <tr><td>{{ row.key }}</td><td>{{ row.value }}</td></tr>
            {% endfor %}
        </table>
        {% endif %}
    </div>
</body>
</html>
    """

    def fmt(value) -> str:
        if value is None or (isinstance(value, float) and value != value):
            return "n/a"
        return f"{value:.4f}"

    template = Template(html_template)
    return template.render(
        title=summary.get("scenario") or summary.get("source") or os.path.basename(os.path.normpath(run_dir)),
        summary={"seed": None, "rounds": None, **summary},
        gamma=gamma.to_dict(orient="records"),
        diagnostics=diagnostics.to_dict(orient="records"),
        acf=acf_rows(acf),
        tails=tail_rows(histogram),
        fmt=fmt,
        datetime=datetime,
    )


def main():
    parser = argparse.ArgumentParser(description="Generate an HTML report for a simulation or analysis directory")
    parser.add_argument("--run-dir", required=True, help="Directory written by run_market_simulation.py")
    parser.add_argument("--output", help="Report path (default <run-dir>/report.html)")
    args = parser.parse_args()

    if not os.path.isdir(args.run_dir):
        print(f"Error: run directory not found: {args.run_dir}")
        sys.exit(3)

    summary = load_summary(args.run_dir)
    html = create_html_report(
        args.run_dir,
        summary,
        load_table(args.run_dir, "gamma.csv"),
        load_table(args.run_dir, "diagnostics.csv"),
        load_table(args.run_dir, "acf.csv"),
        load_table(args.run_dir, "histogram.csv"),
    )

    report_path = args.output or os.path.join(args.run_dir, "report.html")
    try:
        with open(report_path, "w", encoding="utf-8") as f:
            f.write(html)
    except OSError as e:
        print(f"Error saving report: {e}")
        sys.exit(1)
    print(f"Report saved to: {report_path}")


if __name__ == "__main__":
    main()
