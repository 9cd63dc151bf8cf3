import numpy as np
import pytest

from market_sim.rng import STREAM_NAMES, RandomSource


class TestRandomSource:
    def test_same_seed_same_draws(self):
        a, b = RandomSource(42), RandomSource(42)
        for name in STREAM_NAMES:
            assert np.array_equal(a.stream(name).random(10), b.stream(name).random(10))

    def test_different_seeds_differ(self):
        assert not np.array_equal(RandomSource(1).noise.random(10), RandomSource(2).noise.random(10))

    def test_streams_are_isolated(self):
        undisturbed = RandomSource(7)
        disturbed = RandomSource(7)
        disturbed.selection.integers(0, 100, size=10_000)
        disturbed.matching.permutation(50)
        assert np.array_equal(undisturbed.noise.standard_normal(5), disturbed.noise.standard_normal(5))
        assert np.array_equal(undisturbed.fundamental_k.integers(1, 16, 5), disturbed.fundamental_k.integers(1, 16, 5))

    def test_streams_are_distinct(self):
        source = RandomSource(3)
        draws = [source.stream(name).random() for name in STREAM_NAMES]
        assert len(set(draws)) == len(STREAM_NAMES)

    def test_unknown_stream(self):
        with pytest.raises(KeyError):
            RandomSource(0).stream("weather")

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_seed_must_fit_64_bits(self, seed):
        with pytest.raises(ValueError):
            RandomSource(seed)
