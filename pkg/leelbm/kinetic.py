"""
Maps between macroscopic fluctuations (rho', u', theta') and populations g_i.

The array variants work on whole fields: macroscopic arrays of shape S (and
(D, *S) for the velocity) against populations of shape (*S, n). The
single-state functions are thin wrappers around them.
"""

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from leelbm.lattice import VelocitySet

CONSTRAINT_TOLERANCE = 1e-12
IDENTITY_TOLERANCE = 1e-13

# Populations of one site, ordered like VelocitySet.velocities.
Populations = np.ndarray


@dataclass(frozen=True)
class MacroState:
    rho_p: float
    u_p: np.ndarray
    theta_p: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "u_p", np.atleast_1d(np.asarray(self.u_p, float)))
        assert np.all(np.isfinite(self.u_p)), self.u_p
        assert np.isfinite(self.rho_p) and np.isfinite(self.theta_p)

    def pressure(self, velocity_set: VelocitySet) -> float:
        return velocity_set.rho0 * self.theta_p + velocity_set.theta0 * self.rho_p


def equilibrium_arrays(
    velocity_set: VelocitySet, rho: np.ndarray, u: np.ndarray, theta: np.ndarray
) -> np.ndarray:
    a1, a2, b, c1, c2 = velocity_set.coeffs
    c = velocity_set.velocities.astype(float)
    half_c2 = 0.5 * np.sum(c * c, axis=1)
    rho = np.asarray(rho, dtype=float)[..., None]
    theta = np.asarray(theta, dtype=float)[..., None]
    cu = np.einsum("d...,id->...i", np.asarray(u, dtype=float), c)
    return (
        a1 * rho + a2 * theta + b * cu + half_c2 * (c1 * rho + c2 * theta)
    ) * velocity_set.weights


def moments_arrays(
    velocity_set: VelocitySet, g: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    c = velocity_set.velocities.astype(float)
    rho = g.sum(axis=-1)
    u = np.einsum("...i,id->d...", g, c) / velocity_set.rho0
    energy = g @ velocity_set.energy_weights
    theta = (
        (velocity_set.gamma - 1) * energy - velocity_set.theta0 * rho
    ) / velocity_set.rho0
    return rho, u, theta


def equilibrium(velocity_set: VelocitySet, m: MacroState) -> Populations:
    assert m.u_p.shape == (velocity_set.dimension,), m.u_p.shape
    return equilibrium_arrays(velocity_set, m.rho_p, m.u_p, m.theta_p)


def moments(velocity_set: VelocitySet, g: Populations) -> MacroState:
    g = np.asarray(g, dtype=float)
    assert g.shape == (velocity_set.n,), g.shape
    rho, u, theta = moments_arrays(velocity_set, g)
    return MacroState(float(rho), u, float(theta))


def equilibrium_projector(velocity_set: VelocitySet) -> np.ndarray:
    """Matrix E with E g = equilibrium(moments(g)); column j is E e_j."""
    rho, u, theta = moments_arrays(velocity_set, np.eye(velocity_set.n))
    return equilibrium_arrays(velocity_set, rho, u, theta).T


def random_states(
    velocity_set: VelocitySet, trials: int, seed: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Components drawn uniformly from [-1, 1]."""
    rng = np.random.default_rng(seed)
    rho = rng.uniform(-1, 1, trials)
    u = rng.uniform(-1, 1, (velocity_set.dimension, trials))
    theta = rng.uniform(-1, 1, trials)
    return rho, u, theta


@dataclass(frozen=True)
class ConstraintReport:
    set_name: str
    trials: int
    seed: int
    max_defects: Dict[str, float] = field(default_factory=dict)
    tolerance: float = CONSTRAINT_TOLERANCE

    @property
    def passed(self) -> bool:
        return all(d <= self.tolerance for d in self.max_defects.values())

    def as_dict(self) -> Dict[str, object]:
        return {
            "set": self.set_name,
            "trials": self.trials,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "max_defects": dict(self.max_defects),
            "passed": self.passed,
        }


def verify_polyatomic_constraints(
    velocity_set: VelocitySet,
    trials: int,
    seed: int,
    tolerance: float = CONSTRAINT_TOLERANCE,
) -> ConstraintReport:
    assert trials >= 1, trials
    vs = velocity_set
    c = vs.velocities.astype(float)
    e = vs.energy_weights
    gm1 = vs.gamma - 1
    rho, u, theta = random_states(vs, trials, seed)
    g = equilibrium_arrays(vs, rho, u, theta)
    pressure = vs.rho0 * theta + vs.theta0 * rho

    second = np.einsum("ti,ia,ib->tab", g, c, c)
    identity = np.eye(vs.dimension)
    defects = {
        "mass": np.abs(g.sum(axis=1) - rho),
        "momentum": np.abs(g @ c - vs.rho0 * u.T),
        "energy_density": np.abs(g @ e - pressure / gm1),
        "momentum_flux": np.abs(second - pressure[:, None, None] * identity),
        "energy_flux": np.abs(
            (g * e) @ c - vs.gamma / gm1 * vs.rho0 * vs.theta0 * u.T
        ),
        "background_density": np.abs(np.array([vs.weights.sum() - vs.rho0])),
        "background_energy": np.abs(
            np.array([e @ vs.weights - vs.rho0 * vs.theta0 / gm1])
        ),
    }
    return ConstraintReport(
        vs.name,
        trials,
        seed,
        {name: float(d.max()) for name, d in defects.items()},
        tolerance,
    )


@dataclass(frozen=True)
class FluxReport:
    second_moment: np.ndarray
    target: np.ndarray
    third_moment: np.ndarray

    @property
    def defect(self) -> float:
        return float(np.abs(self.second_moment - self.target).max())


def verify_flux_moments(velocity_set: VelocitySet, m: MacroState) -> FluxReport:
    c = velocity_set.velocities.astype(float)
    g = equilibrium(velocity_set, m)
    return FluxReport(
        second_moment=np.einsum("i,ia,ib->ab", g, c, c),
        target=m.pressure(velocity_set) * np.eye(velocity_set.dimension),
        third_moment=np.einsum("i,ia,ib,ic->abc", g, c, c, c),
    )
