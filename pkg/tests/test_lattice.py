import numpy as np
import pytest

from market_sim.errors import ConfigError
from market_sim.lattice import MIN_AGENTS, build_lattice


class TestBuildLattice:
    def test_full_scale_torus(self):
        topology = build_lattice(1024)
        assert topology.side_length == 32
        assert topology.n == 1024
        assert topology.neighbours.shape == (1024, 4)

    @pytest.mark.parametrize("n", [16, 25, 64, 1024])
    def test_four_distinct_neighbours_never_self(self, n):
        neighbours = build_lattice(n).neighbours
        for agent, row in enumerate(neighbours):
            assert len(set(row.tolist())) == 4
            assert agent not in row

    def test_neighbourhood_is_symmetric(self):
        neighbours = build_lattice(36).neighbours
        for agent, row in enumerate(neighbours):
            for other in row:
                assert agent in neighbours[other]

    def test_wraps_around_edges(self):
        neighbours = build_lattice(16).neighbours
        # agent 0 sits at (0, 0): up wraps to row 3, left wraps to column 3
        assert neighbours[0].tolist() == [12, 4, 3, 1]

    def test_neighbour_table_is_read_only(self):
        topology = build_lattice(16)
        with pytest.raises(ValueError):
            topology.neighbours[0, 0] = 5

    def test_deterministic(self):
        assert np.array_equal(build_lattice(64).neighbours, build_lattice(64).neighbours)

    @pytest.mark.parametrize("n", [4, 9, MIN_AGENTS - 1, 20, 1000])
    def test_rejects_small_or_non_square(self, n):
        with pytest.raises(ConfigError) as exc:
            build_lattice(n)
        assert exc.value.field == "n"
