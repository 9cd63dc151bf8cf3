"""Full-scale stylized-fact checks. Each run takes minutes; enable with --runslow."""
import time

import pytest

from market_sim.config import preset, with_overrides
from market_sim.runner import run_batch
from market_sim.stats import mean_abs_acf

pytestmark = pytest.mark.slow

SEEDS = (1, 2, 3)
GAMMA_BOUNDS = {"A": (0.40, 0.75), "B": (0.35, 0.70), "no-esteem": (0.35, 0.70)}

# The compounding fundamental lifts the price and, through it, every threshold; most
# late rounds then have an empty book side and a held price (see DESIGN.md).
HELD_PRICE = pytest.mark.xfail(reason="price held in most rounds once thresholds outgrow the field", strict=False)


def runs(name, seeds):
    return run_batch([with_overrides(preset(name), seed=s, log_every=0) for s in seeds])


@pytest.mark.parametrize("name", ["A", "B", pytest.param("no-esteem", marks=HELD_PRICE)])
def test_absolute_return_decay_exponent(name):
    lo, hi = GAMMA_BOUNDS[name]
    gammas = [a.facts.gamma for a in runs(name, SEEDS)]
    hits = sum(1 for g in gammas if g is not None and lo <= g <= hi)
    assert hits >= 2, f"gammas {gammas} outside [{lo}, {hi}]"


@HELD_PRICE
def test_memory_fattens_tails():
    seeds = (11, 12, 13, 14, 15)
    with_memory = runs("A", seeds)
    without = runs("no-esteem", seeds)
    fatter = sum(1 for a, b in zip(with_memory, without) if a.facts.excess_kurtosis > b.facts.excess_kurtosis)
    assert fatter >= 4
    assert sum(1 for a in with_memory if a.facts.excess_kurtosis > 0.5) >= 4


def test_raw_returns_forget_absolute_returns_remember():
    (artifact,) = runs("A", (21,))
    facts = artifact.facts
    assert mean_abs_acf(facts.raw_acf, (20, 100)) < 0.1
    assert (facts.abs_acf.values[1:101] > 0).all()
    assert facts.abs_acf.fit is not None and facts.abs_acf.fit.r_squared > 0.7


def test_small_preset_finishes_quickly():
    start = time.perf_counter()
    runs("A-small", (42,))
    assert time.perf_counter() - start < 10
