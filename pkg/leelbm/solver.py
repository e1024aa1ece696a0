"""
Collide-and-stream time stepping on a periodic grid with acoustic scaling.

Populations are stored site-major: ``data[site, i]``. One step computes

    g_i(t + eps, x + eps c_i) = (1 - 1/tau) g_i(t, x) + (1/tau) g_eq_i(t, x)

as a single fused pass that pulls from the upstream site x - c_i and applies
row i of the collision matrix H(tau) to that site's populations, writing into
a second buffer. H(tau) is assembled from equilibrium(moments(e_j)), so the
collision uses the moments of the pre-collision state.
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numba
import numpy as np

from leelbm import kinetic
from leelbm.errors import ShapeMismatch, ZeroTau
from leelbm.grid import Grid
from leelbm.lattice import VelocitySet
from leelbm.reference import MacroField

log = logging.getLogger(__name__)

MAX_DENSE_OPERATOR = 8192

__all__ = [
    "Grid",
    "PopulationField",
    "initialize_equilibrium",
    "step",
    "run",
    "set_threads",
    "assemble_operator",
]


@dataclass
class PopulationField:
    grid: Grid
    velocity_set: VelocitySet
    data: np.ndarray

    def __post_init__(self) -> None:
        expected = (self.grid.n_sites, self.velocity_set.n)
        if self.data.shape != expected:
            raise ShapeMismatch(f"population data {self.data.shape} != {expected}")
        assert self.grid.dimension == self.velocity_set.dimension

    def sites(self) -> np.ndarray:
        """Populations reshaped to (*grid.shape, n), sharing memory."""
        return self.data.reshape(self.grid.shape + (self.velocity_set.n,))

    def copy(self) -> "PopulationField":
        return PopulationField(self.grid, self.velocity_set, self.data.copy())

    def macro(self) -> MacroField:
        rho, u, theta = kinetic.moments_arrays(self.velocity_set, self.sites())
        return MacroField(self.grid, rho, u, theta)


Observer = Callable[[int, float, PopulationField], None]


def initialize_equilibrium(
    grid: Grid, velocity_set: VelocitySet, f: MacroField
) -> PopulationField:
    if f.grid != grid:
        raise ShapeMismatch(f"initial field lives on {f.grid}, not {grid}")
    g = kinetic.equilibrium_arrays(velocity_set, f.rho, f.u, f.theta)
    data = np.ascontiguousarray(g.reshape(grid.n_sites, velocity_set.n))
    return PopulationField(grid, velocity_set, data)


def collision_matrix(velocity_set: VelocitySet, tau: float) -> np.ndarray:
    if tau == 0:
        raise ZeroTau("tau must be nonzero")
    e = kinetic.equilibrium_projector(velocity_set)
    return (1 - 1 / tau) * np.eye(velocity_set.n) + e / tau


def upstream_sites(grid: Grid, velocity_set: VelocitySet) -> np.ndarray:
    """upstream[site, i] is the flat index of site - c_i with periodic wrap."""
    index = np.arange(grid.n_sites).reshape(grid.shape)
    axes = tuple(range(grid.dimension))
    columns = [
        np.roll(index, tuple(int(x) for x in c), axis=axes).ravel()
        for c in velocity_set.velocities
    ]
    return np.ascontiguousarray(np.stack(columns, axis=1))


@numba.njit(parallel=True, cache=True)
def _collide_stream(
    src: np.ndarray, dst: np.ndarray, h: np.ndarray, upstream: np.ndarray
) -> None:
    n_sites, n = src.shape
    for site in numba.prange(n_sites):
        for i in range(n):
            s = upstream[site, i]
            acc = 0.0
            for j in range(n):
                acc += h[i, j] * src[s, j]
            dst[site, i] = acc


def set_threads(threads: Optional[int]) -> int:
    """Set the kernel worker count, clamped to what numba was started with."""
    available = numba.config.NUMBA_NUM_THREADS
    if threads is None:
        threads = available
    if threads > available:
        log.warning("requested %d threads, only %d available", threads, available)
        threads = available
    assert threads >= 1, threads
    numba.set_num_threads(threads)
    return threads


def step(field: PopulationField, tau: float = 0.5) -> PopulationField:
    h = collision_matrix(field.velocity_set, tau)
    upstream = upstream_sites(field.grid, field.velocity_set)
    out = np.empty_like(field.data)
    _collide_stream(field.data, out, h, upstream)
    return PopulationField(field.grid, field.velocity_set, out)


def run(
    field: PopulationField,
    n_steps: int,
    tau: float = 0.5,
    observer: Optional[Observer] = None,
) -> PopulationField:
    """
    Advance n_steps steps. The observer sees (step, time, field) after every
    step; the field it receives is a view of a buffer that the next step
    overwrites.
    """
    assert n_steps >= 0, n_steps
    if tau != 0.5:
        log.debug("tau=%s: second-order consistency needs tau=1/2", tau)
    h = collision_matrix(field.velocity_set, tau)
    upstream = upstream_sites(field.grid, field.velocity_set)
    src = field.data.copy()
    dst = np.empty_like(src)
    started = time.perf_counter()
    for k in range(1, n_steps + 1):
        _collide_stream(src, dst, h, upstream)
        src, dst = dst, src
        if observer is not None:
            view = PopulationField(field.grid, field.velocity_set, src)
            observer(k, k * field.grid.eps, view)
    elapsed = time.perf_counter() - started
    if n_steps and elapsed > 0:
        log.info(
            "%s: %d steps on %s sites, %.1f MLUPS",
            field.velocity_set.name,
            n_steps,
            field.grid.shape,
            field.grid.n_sites * n_steps / elapsed / 1e6,
        )
    return PopulationField(field.grid, field.velocity_set, src)


def assemble_operator(grid: Grid, velocity_set: VelocitySet, tau: float) -> np.ndarray:
    """
    Dense global update matrix (shift after blockdiag H) acting on the flat
    site-major population vector. Only meant for small grids.
    """
    n = velocity_set.n
    size = grid.n_sites * n
    assert size <= MAX_DENSE_OPERATOR, size
    h = collision_matrix(velocity_set, tau)
    collide = np.kron(np.eye(grid.n_sites), h)
    shift = np.zeros((size, size))
    coords = np.array(np.unravel_index(np.arange(grid.n_sites), grid.shape))
    for i, c in enumerate(velocity_set.velocities):
        source = np.ravel_multi_index(
            tuple((coords - c[:, None]) % np.array(grid.shape)[:, None]), grid.shape
        )
        shift[np.arange(grid.n_sites) * n + i, source * n + i] = 1.0
    result: np.ndarray = shift @ collide
    return result
