from dataclasses import dataclass
from typing import Tuple

import numpy as np

LENGTH_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Grid:
    """Periodic Cartesian grid with spacing eps, which is also the time step."""

    dimension: int
    shape: Tuple[int, ...]
    eps: float
    origin: Tuple[float, ...]
    lengths: Tuple[float, ...]

    def __post_init__(self) -> None:
        assert self.dimension in (1, 2, 3), self.dimension
        assert len(self.shape) == len(self.origin) == len(self.lengths)
        assert len(self.shape) == self.dimension
        assert all(n >= 1 for n in self.shape), self.shape
        assert self.eps > 0, self.eps
        for n, length in zip(self.shape, self.lengths):
            if abs(self.eps * n - length) > LENGTH_TOLERANCE * max(1.0, length):
                raise ValueError(
                    f"eps*N = {self.eps * n} does not wrap the periodic length {length}"
                )

    @classmethod
    def periodic(
        cls, dimension: int, n: int, length: float = 1.0, origin: float = 0.0
    ) -> "Grid":
        return cls(
            dimension=dimension,
            shape=(n,) * dimension,
            eps=length / n,
            origin=(origin,) * dimension,
            lengths=(length,) * dimension,
        )

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.shape))

    def axis(self, d: int) -> np.ndarray:
        """Node coordinates origin + j*eps along axis d."""
        return self.origin[d] + self.eps * np.arange(self.shape[d])

    def coordinates(self) -> Tuple[np.ndarray, ...]:
        return tuple(
            np.meshgrid(*(self.axis(d) for d in range(self.dimension)), indexing="ij")
        )

    def coarsened(self, factor: int) -> "Grid":
        assert all(n % factor == 0 for n in self.shape), (self.shape, factor)
        return Grid(
            dimension=self.dimension,
            shape=tuple(n // factor for n in self.shape),
            eps=self.eps * factor,
            origin=self.origin,
            lengths=self.lengths,
        )
