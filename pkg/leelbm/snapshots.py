"""
Snapshot CSV files, also accepted as initial conditions.

    # t=<time>
    x,y,rho,u_x,u_y,theta
    <one row per node, C order, 17 significant digits>
"""

import logging
from pathlib import Path
from typing import List, Tuple

import numpy as np

from leelbm.errors import InvalidInitialCondition
from leelbm.grid import Grid
from leelbm.reference import AXIS_NAMES, MacroField
from leelbm.solver import PopulationField

log = logging.getLogger(__name__)

TIME_PREFIX = "# t="


def write_snapshot(path: Path, t: float, f: MacroField) -> None:
    names = list(AXIS_NAMES[: f.grid.dimension])
    variables = f.variables()
    columns = [x.ravel() for x in f.grid.coordinates()]
    columns += [v.ravel() for v in variables.values()]
    header = ",".join(names + list(variables))
    np.savetxt(
        path,
        np.stack(columns, axis=1),
        fmt="%.17g",
        delimiter=",",
        header=f"t={t:.17g}\n{header}",
        comments="# ",
    )


def _axis_grid(values: np.ndarray) -> Tuple[int, float, float]:
    nodes = np.unique(values)
    if len(nodes) < 2:
        raise InvalidInitialCondition("need at least two nodes per axis")
    spacing = np.diff(nodes)
    if np.ptp(spacing) > 1e-9 * spacing.mean():
        raise InvalidInitialCondition("nodes are not uniformly spaced")
    return len(nodes), float(spacing.mean()), float(nodes[0])


def read_snapshot(path: Path) -> Tuple[float, MacroField]:
    with open(path) as f:
        first = f.readline().strip()
        header = f.readline().lstrip("#").strip().split(",")
    if not first.startswith(TIME_PREFIX):
        raise InvalidInitialCondition(f"{path}: first line must be '{TIME_PREFIX}...'")
    t = float(first[len(TIME_PREFIX) :])
    dim = sum(1 for name in header if name in AXIS_NAMES)
    expected = list(AXIS_NAMES[:dim]) + ["rho"]
    expected += [f"u_{a}" for a in AXIS_NAMES[:dim]] + ["theta"]
    if dim == 0 or header != expected:
        raise InvalidInitialCondition(f"{path}: columns {header}, expected {expected}")
    data = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)

    axes = [_axis_grid(data[:, d]) for d in range(dim)]
    eps = axes[0][1]
    if any(abs(h - eps) > 1e-9 * eps for _, h, _ in axes):
        raise InvalidInitialCondition(f"{path}: axes have different spacings")
    grid = Grid(
        dimension=dim,
        shape=tuple(n for n, _, _ in axes),
        eps=eps,
        origin=tuple(o for _, _, o in axes),
        lengths=tuple(n * eps for n, _, _ in axes),
    )
    if data.shape[0] != grid.n_sites:
        raise InvalidInitialCondition(f"{path}: {data.shape[0]} rows for {grid.shape}")
    coords = np.stack([x.ravel() for x in grid.coordinates()], axis=1)
    if np.abs(coords - data[:, :dim]).max() > 1e-9 * max(grid.lengths):
        raise InvalidInitialCondition(f"{path}: rows are not in grid order")

    values = data[:, dim:].T.reshape((dim + 2,) + grid.shape)
    rho, u, theta = values[0].copy(), values[1 : dim + 1].copy(), values[-1].copy()
    return t, MacroField(grid, rho, u, theta)


class SnapshotWriter:
    """Run observer writing every `every`-th step to out_dir."""

    def __init__(self, out_dir: Path, every: int, last_step: int) -> None:
        assert every >= 1, every
        self.out_dir = out_dir
        self.every = every
        self.last_step = last_step
        self.written: List[Path] = []
        out_dir.mkdir(parents=True, exist_ok=True)

    def path_for(self, k: int) -> Path:
        return self.out_dir / f"snapshot_{k:06d}.csv"

    def write(self, k: int, t: float, f: MacroField) -> None:
        path = self.path_for(k)
        write_snapshot(path, t, f)
        self.written.append(path)
        log.debug("wrote %s", path)

    def __call__(self, k: int, t: float, f: PopulationField) -> None:
        if k % self.every == 0 or k == self.last_step:
            self.write(k, t, f.macro())
