#!/usr/bin/env python3

import argparse
import logging
import os
import subprocess
import sys
import time
from typing import List

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

from market_sim.config import ScenarioConfig, list_presets, load_config, preset, with_overrides
from market_sim.emitter import emit, emit_facts
from market_sim.errors import ConfigError, MarketSimError
from market_sim.ingest import ingest_prices
from market_sim.runner import run_batch
from market_sim.stats import analyze_prices, compare_tails

DEFAULT_CONFIG = "config.yaml"


def setup_logging() -> None:
    level = os.getenv("MARKET_SIM_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def output_root(args) -> str:
    return args.out or os.getenv("MARKET_SIM_OUTPUT_DIR", "./results")


def parse_seeds(text: str) -> List[int]:
    try:
        return [int(s.strip()) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"expects comma-separated integers, got '{text}'", field="--seeds")


def resolve_configs(args) -> List[ScenarioConfig]:
    """Expand --preset/--config and --seed/--seeds into one config per run."""
    if args.config and args.preset:
        raise ConfigError("use either --config or --preset, not both")

    if args.config:
        bases = [load_config(args.config)]
    elif args.preset:
        bases = [preset(name) for name in args.preset]
    elif os.path.exists(DEFAULT_CONFIG):
        bases = [load_config(DEFAULT_CONFIG)]
    else:
        bases = [preset("A-small")]

    overrides = {}
    if args.rounds is not None:
        overrides["rounds"] = args.rounds
    if overrides:
        bases = [with_overrides(c, **overrides) for c in bases]

    if args.seeds:
        seeds = parse_seeds(args.seeds)
    elif args.seed is not None:
        seeds = [args.seed]
    else:
        seeds = [None]

    configs = []
    for base in bases:
        for seed in seeds:
            configs.append(base if seed is None else with_overrides(base, seed=seed))
    return configs


def describe_facts(facts) -> str:
    fit = facts.abs_acf.fit
    if fit is None:
        gamma = "gamma=n/a (no positive ACF prefix)"
    else:
        gamma = f"gamma={fit.gamma:.4f} (lags {fit.fit_range[0]}-{fit.fit_range[1]}, R^2={fit.r_squared:.3f})"
    return f"{gamma}, excess kurtosis={facts.excess_kurtosis:.3f}"


def generate_report(run_dir: str) -> None:
    """Render the HTML report for an emitted directory."""
    report_script = os.path.join(os.path.dirname(os.path.abspath(__file__)), "scripts", "generate_report.py")
    cmd = [sys.executable, report_script, "--run-dir", run_dir]
    result = subprocess.run(cmd, capture_output=True, text=True, encoding="utf-8")
    if result.returncode == 0:
        print(result.stdout.strip())
    else:
        print(f"⚠️ Report generation failed for {run_dir}:")
        print(result.stderr)


def run_action(args) -> None:
    configs = resolve_configs(args)
    print(f"Running {len(configs)} simulation(s): "
          + ", ".join(f"{c.name} (seed {c.seed}, n={c.n}, L={c.rounds})" for c in configs))

    artifacts = run_batch(configs, workers=args.workers)

    root = output_root(args)
    for artifact in artifacts:
        cfg = artifact.config
        run_dir = os.path.join(root, f"{cfg.name}_seed{cfg.seed}")
        emit(artifact, run_dir)
        print(f"[{cfg.name} seed {cfg.seed}] {describe_facts(artifact.facts)}, "
              f"max-sweep rounds={artifact.diagnostics['max_sweep_hits']}")
        print(f"Saved to: {run_dir}")
        if args.report:
            generate_report(run_dir)

    # Memory effect: compare every scenario against the memoryless one at the same seed.
    baselines = {a.config.seed: a for a in artifacts if a.config.tau == 1}
    for artifact in artifacts:
        baseline = baselines.get(artifact.config.seed)
        if baseline is not None and artifact is not baseline:
            diff = compare_tails(artifact.facts, baseline.facts)
            print(f"Excess kurtosis {artifact.config.name} - {baseline.config.name} "
                  f"(seed {artifact.config.seed}): {diff:+.3f}")


def analyze_action(args) -> None:
    if not args.prices:
        raise MarketSimError("--prices is required for the analyze action")

    series = ingest_prices(args.prices)
    print(f"Loaded {series.closes.size} closes from {args.prices} ({len(series.rejected)} rows rejected)")
    for line, reason in series.rejected:
        print(f"  line {line}: {reason}")

    facts = analyze_prices(series.closes, rounds_per_day=1, max_lag=args.max_lag,
                           fit_range=(args.fit_lo, args.fit_hi), bins=args.bins)
    name = os.path.splitext(os.path.basename(args.prices))[0]
    out_dir = os.path.join(output_root(args), f"analysis_{name}")
    emit_facts(facts, out_dir, {"source": os.path.basename(args.prices), "rejected_rows": len(series.rejected)})
    print(describe_facts(facts))
    print(f"Saved to: {out_dir}")
    if args.report:
        generate_report(out_dir)


def presets_action() -> None:
    print("Available presets:")
    for name in list_presets():
        cfg = preset(name)
        print(f"  {name:<16} n={cfg.n:<5} L={cfg.rounds:<6} tau={cfg.tau:<3} K={cfg.base_period:<4} "
              f"k_max={cfg.jitter_range:<3} rho={cfg.window:<3} pi={cfg.obey_probability}")


def main():
    parser = argparse.ArgumentParser(description="Trust-in-foreseeing-neighbours market simulator")
    parser.add_argument("--action", choices=["run", "analyze", "presets"], default="run",
                        help="run simulations, analyze an ingested price file, or list presets")
    parser.add_argument("--preset", action="append", help="Preset name (repeatable); default config.yaml, else A-small")
    parser.add_argument("--config", help="Path to a scenario YAML file")
    parser.add_argument("--seed", type=int, help="Master seed (overrides the config)")
    parser.add_argument("--seeds", help="Comma-separated seeds for a batch of runs")
    parser.add_argument("--rounds", type=int, help="Override the number of decision rounds")
    parser.add_argument("--workers", type=int, help="Parallel worker processes for batches")
    parser.add_argument("--out", help="Output directory (default $MARKET_SIM_OUTPUT_DIR or ./results)")
    parser.add_argument("--prices", help="Delimited price file with date and close columns (analyze)")
    parser.add_argument("--max-lag", type=int, default=100, help="ACF lags for analyze")
    parser.add_argument("--fit-lo", type=int, default=1, help="First lag of the power-law fit (analyze)")
    parser.add_argument("--fit-hi", type=int, default=100, help="Last lag of the power-law fit (analyze)")
    parser.add_argument("--bins", type=int, default=50, help="Histogram bins for analyze")
    parser.add_argument("--report", action="store_true", help="Render an HTML report for each output")

    args = parser.parse_args()
    setup_logging()

    start_time = time.time()
    try:
        if args.action == "presets":
            presets_action()
            return
        if args.action == "analyze":
            analyze_action(args)
        else:
            run_action(args)
    except MarketSimError as e:
        print(f"Error: {e}")
        sys.exit(e.exit_code)

    total_time = time.time() - start_time
    print(f"\n{'='*80}")
    print(f"{args.action.upper()} COMPLETED in {total_time:.1f} seconds ({total_time/60:.1f} minutes)")
    print(f"{'='*80}")


if __name__ == "__main__":
    main()
