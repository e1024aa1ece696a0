"""
Reference solutions and initial data for the linearized Euler equations

    d_t rho' + rho0 div u' = 0
    rho0 d_t u' + rho0 grad theta' + theta0 grad rho' = 0
    rho0/(gamma - 1) d_t theta' + rho0 theta0 div u' = 0

without background velocity, plus the conversion between dimensional and
nondimensional variables.
"""

import math
from dataclasses import dataclass
from typing import Dict, Mapping, NamedTuple, Optional

import numpy as np
from numpy.typing import ArrayLike

from leelbm.errors import DomainMismatch, InconsistentUnits
from leelbm.grid import Grid

UNIT_TOLERANCE = 1e-12
INTEGER_SHIFT_TOLERANCE = 1e-9

AXIS_NAMES = ("x", "y", "z")


@dataclass
class MacroField:
    """rho' and theta' of shape grid.shape, u' of shape (D, *grid.shape)."""

    grid: Grid
    rho: np.ndarray
    u: np.ndarray
    theta: np.ndarray

    def __post_init__(self) -> None:
        shape = self.grid.shape
        assert self.rho.shape == shape, (self.rho.shape, shape)
        assert self.theta.shape == shape, (self.theta.shape, shape)
        assert self.u.shape == (self.grid.dimension,) + shape, self.u.shape

    @classmethod
    def zeros(cls, grid: Grid) -> "MacroField":
        return cls(
            grid,
            np.zeros(grid.shape),
            np.zeros((grid.dimension,) + grid.shape),
            np.zeros(grid.shape),
        )

    def variables(self) -> Dict[str, np.ndarray]:
        out = {"rho": self.rho}
        for d in range(self.grid.dimension):
            out[f"u_{AXIS_NAMES[d]}"] = self.u[d]
        out["theta"] = self.theta
        return out

    def pressure(self, rho0: float, theta0: float) -> np.ndarray:
        result: np.ndarray = rho0 * self.theta + theta0 * self.rho
        return result

    def __sub__(self, other: "MacroField") -> "MacroField":
        assert self.grid.shape == other.grid.shape
        return MacroField(
            self.grid, self.rho - other.rho, self.u - other.u, self.theta - other.theta
        )

    def restrict(self, factor: int) -> "MacroField":
        """Pointwise samples at every factor-th node along each axis."""
        picks = (slice(None, None, factor),) * self.grid.dimension
        return MacroField(
            self.grid.coarsened(factor),
            self.rho[picks].copy(),
            self.u[(slice(None),) + picks].copy(),
            self.theta[picks].copy(),
        )


def flux_matrix(
    rho0: float, theta0: float, gamma: float, direction: ArrayLike
) -> np.ndarray:
    """Directional flux matrix for the state (rho', u', theta')."""
    n = np.asarray(direction, dtype=float)
    dim = n.shape[0]
    a = np.zeros((dim + 2, dim + 2))
    a[0, 1 : dim + 1] = rho0 * n
    a[1 : dim + 1, 0] = theta0 / rho0 * n
    a[1 : dim + 1, dim + 1] = n
    a[dim + 1, 1 : dim + 1] = (gamma - 1) * theta0 * n
    return a


class Characteristics(NamedTuple):
    speeds: np.ndarray
    right: np.ndarray
    left: np.ndarray


def lee_characteristics(
    rho0: float, theta0: float, gamma: float, direction: ArrayLike
) -> Characteristics:
    """
    Speeds ordered (-c, 0, ..., 0, +c) with c = sqrt(gamma theta0). Columns of
    right are eigenvectors; rows of left are the dual basis.
    """
    assert rho0 > 0 and theta0 > 0 and gamma > 1
    n = np.asarray(direction, dtype=float)
    assert abs(np.linalg.norm(n) - 1) < 1e-12, n
    dim = n.shape[0]
    c = math.sqrt(gamma * theta0)

    def acoustic(sign: float) -> np.ndarray:
        return np.concatenate([[rho0], sign * c * n, [(gamma - 1) * theta0]])

    columns = [acoustic(-1.0), np.concatenate([[rho0], np.zeros(dim), [-theta0]])]
    if dim > 1:
        tangents = np.linalg.svd(n[None, :])[2][1:]
        columns += [np.concatenate([[0.0], t, [0.0]]) for t in tangents]
    columns.append(acoustic(1.0))
    right = np.stack(columns, axis=1)
    speeds = np.array([-c] + [0.0] * dim + [c])
    return Characteristics(speeds, right, np.linalg.inv(right))


def periodic_shift(values: np.ndarray, cells: float) -> np.ndarray:
    """values(x - cells*dx) on a periodic 1D grid; trigonometric for fractions."""
    whole = int(round(float(cells)))
    if abs(cells - whole) <= INTEGER_SHIFT_TOLERANCE:
        return np.roll(values, whole)
    n = values.shape[0]
    wavenumbers = np.fft.fftfreq(n) * n
    phase = np.exp(-2j * np.pi * wavenumbers * cells / n)
    return np.real(np.fft.ifft(np.fft.fft(values) * phase))


def analytic_solution_1d(
    ic: MacroField, t: float, rho0: float, theta0: float, gamma: float
) -> MacroField:
    assert ic.grid.dimension == 1, ic.grid.dimension
    assert t >= 0, t
    char = lee_characteristics(rho0, theta0, gamma, [1.0])
    w = char.left @ np.stack([ic.rho, ic.u[0], ic.theta])
    shifted = np.stack(
        [
            periodic_shift(w[k], speed * t / ic.grid.eps)
            for k, speed in enumerate(char.speeds)
        ]
    )
    q = char.right @ shifted
    return MacroField(ic.grid, q[0], q[1:2], q[2])


class PulseShape(NamedTuple):
    width: float
    center: float
    length: float


GAUSS_PULSES = {
    1: PulseShape(width=100.0, center=0.5, length=1.0),
    2: PulseShape(width=7.0, center=1.0, length=2.0),
    3: PulseShape(width=15.0, center=1.0, length=2.0),
}


def pulse_density(dimension: int, *coords: ArrayLike) -> np.ndarray:
    shape = GAUSS_PULSES[dimension]
    r2 = sum((np.asarray(x, dtype=float) - shape.center) ** 2 for x in coords)
    result: np.ndarray = np.exp(-shape.width * r2)
    return result


@dataclass(frozen=True)
class UnitSystem:
    """Reference scales: dimensional = scale * nondimensional."""

    rho0_star: float
    theta0_star: float
    x_star: float
    t_star: float
    u_star: float

    def __post_init__(self) -> None:
        scales = (self.rho0_star, self.theta0_star, self.x_star, self.t_star)
        if min(scales + (self.u_star,)) <= 0:
            raise InconsistentUnits("all reference scales must be positive")
        if abs(self.u_star - self.x_star / self.t_star) > UNIT_TOLERANCE * max(
            1.0, self.u_star
        ):
            raise InconsistentUnits(f"u*={self.u_star} != x*/t*")
        if abs(self.u_star**2 - self.theta0_star) > UNIT_TOLERANCE * max(
            1.0, self.theta0_star
        ):
            raise InconsistentUnits(f"u*^2={self.u_star ** 2} != theta0*")

    @classmethod
    def identity(cls) -> "UnitSystem":
        return cls(1.0, 1.0, 1.0, 1.0, 1.0)

    @classmethod
    def matching(
        cls,
        theta0_dimensional: float,
        theta0: float,
        rho0_dimensional: float = 1.0,
        rho0: float = 1.0,
        x_star: float = 1.0,
    ) -> "UnitSystem":
        """Scales that map a dimensional background onto a lattice's background."""
        theta0_star = theta0_dimensional / theta0
        u_star = math.sqrt(theta0_star)
        return cls(
            rho0_star=rho0_dimensional / rho0,
            theta0_star=theta0_star,
            x_star=x_star,
            t_star=x_star / u_star,
            u_star=u_star,
        )

    def scale(self, quantity: str) -> float:
        scales = {
            "rho": self.rho0_star,
            "u": self.u_star,
            "theta": self.theta0_star,
            "x": self.x_star,
            "t": self.t_star,
        }
        if quantity not in scales:
            raise KeyError(f"no reference scale for {quantity!r}")
        return scales[quantity]


def dedimensionalize(
    units: UnitSystem, quantities: Mapping[str, ArrayLike]
) -> Dict[str, np.ndarray]:
    """Keys: rho (incl. rho0), u, theta (incl. theta0), x, t."""
    return {
        k: np.asarray(v, dtype=float) / units.scale(k) for k, v in quantities.items()
    }


def redimensionalize(
    units: UnitSystem, quantities: Mapping[str, ArrayLike]
) -> Dict[str, np.ndarray]:
    return {
        k: np.asarray(v, dtype=float) * units.scale(k) for k, v in quantities.items()
    }


def gauss_pulse(
    dimension: int,
    grid: Grid,
    units: Optional[UnitSystem] = None,
    check_domain: bool = True,
) -> MacroField:
    """
    Gauss pulse in rho' with zero velocity and temperature, sampled at the grid
    nodes. With units, the pulse is the dimensional one evaluated at x* x and
    scaled back by rho0*.
    """
    if grid.dimension != dimension:
        raise DomainMismatch(f"{dimension}D pulse on a {grid.dimension}D grid")
    units = units or UnitSystem.identity()
    if check_domain:
        canonical = GAUSS_PULSES[dimension].length
        lengths = [units.x_star * length for length in grid.lengths]
        if any(abs(x) > 1e-12 for x in grid.origin) or any(
            abs(length - canonical) > 1e-12 for length in lengths
        ):
            raise DomainMismatch(
                f"{dimension}D pulse lives on [0, {canonical})^{dimension}, "
                f"grid spans {tuple(lengths)} from {grid.origin}"
            )
    coords = [units.x_star * x for x in grid.coordinates()]
    field = MacroField.zeros(grid)
    field.rho[...] = pulse_density(dimension, *coords) / units.rho0_star
    return field
