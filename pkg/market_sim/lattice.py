import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

MIN_AGENTS = 16

# Neighbour slot order: up, down, left, right.
_OFFSETS = ((-1, 0), (1, 0), (0, -1), (0, 1))


@dataclass(frozen=True)
class LatticeTopology:
    """Periodic square lattice with von Neumann neighbourhoods."""

    side_length: int
    neighbours: np.ndarray  # (n, 4) agent ids

    @property
    def n(self) -> int:
        return self.side_length * self.side_length


def build_lattice(n: int) -> LatticeTopology:
    """Build an n-agent torus; agent id = row * side + col."""
    if n < MIN_AGENTS:
        raise ConfigError(f"lattice needs at least {MIN_AGENTS} agents, got {n}", field="n")
    side = math.isqrt(n)
    if side * side != n:
        raise ConfigError(f"lattice size must be a perfect square, got {n}", field="n")

    rows, cols = np.divmod(np.arange(n), side)
    neighbours = np.empty((n, 4), dtype=np.int64)
    for slot, (dr, dc) in enumerate(_OFFSETS):
        neighbours[:, slot] = ((rows + dr) % side) * side + (cols + dc) % side
    neighbours.setflags(write=False)
    return LatticeTopology(side_length=side, neighbours=neighbours)
