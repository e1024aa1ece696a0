"""
Velocity sets for lattice Boltzmann schemes of the linearized Euler equations.

Every set carries its weights f*, per-velocity internal energies beta, the
background state (rho0, theta0), the adiabatic exponent and the coefficients
(a1, a2, b, c1, c2) of the equilibrium

    g_eq_i = (a1 rho' + a2 theta' + b c_i.u' + |c_i|^2/2 (c1 rho' + c2 theta')) f*_i

Monoatomic sets use a1 = 1/rho0, a2 = -D/(2 theta0), b = 1/theta0, c1 = 0,
c2 = 1/theta0^2, beta = 0 and gamma = (D+2)/D, which is the classical
Maxwellian-derived equilibrium written in the same form.

Weights are built from exact rationals and converted to floats once.
Velocity ordering: rest velocity first, then -x, +x, -y, +y, -z, +z, then the
face diagonals and finally the corners.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from leelbm.errors import (
    InvalidVelocitySet,
    NegativeWeight,
    NonPositiveF1,
    NotMonoatomic,
    UnknownLattice,
)

log = logging.getLogger(__name__)

Exact = Union[int, float, str, Fraction]

INVARIANT_TOLERANCE = 1e-12
COMPATIBILITY_TOLERANCE = 1e-12
PRUNE_TOLERANCE = Fraction(1, 10**15)


class EquilibriumCoefficients(NamedTuple):
    a1: float
    a2: float
    b: float
    c1: float
    c2: float


@dataclass(frozen=True, eq=False)
class VelocitySet:
    name: str
    velocities: np.ndarray
    weights: np.ndarray
    beta: np.ndarray
    rho0: float
    theta0: float
    gamma: float
    coeffs: EquilibriumCoefficients

    def __post_init__(self) -> None:
        for arr in (self.velocities, self.weights, self.beta):
            arr.setflags(write=False)
        n = len(self.weights)
        assert self.velocities.shape[0] == n and self.beta.shape == (n,)
        self._check_invariants()

    @property
    def dimension(self) -> int:
        return int(self.velocities.shape[1])

    @property
    def n(self) -> int:
        return int(self.velocities.shape[0])

    @property
    def is_monoatomic(self) -> bool:
        return not np.any(self.beta)

    @property
    def sound_speed(self) -> float:
        return float(np.sqrt(self.gamma * self.theta0))

    @property
    def energy_weights(self) -> np.ndarray:
        """(|c_i|^2 + beta_i) / 2, the energy carried per unit of g_i."""
        return 0.5 * (np.sum(self.velocities**2, axis=1) + self.beta)

    def opposite(self) -> np.ndarray:
        """Index of -c_i for every i."""
        index = {tuple(c): i for i, c in enumerate(self.velocities.tolist())}
        return np.array(
            [index[tuple(-x for x in c)] for c in self.velocities.tolist()]
        )

    def symmetry_classes(self) -> np.ndarray:
        """Class label per velocity: same sorted |components| and same beta."""
        keys: Dict[Tuple[Tuple[int, ...], float], int] = {}
        labels = []
        for c, beta in zip(self.velocities.tolist(), self.beta.tolist()):
            key = (tuple(sorted(abs(x) for x in c)), beta)
            labels.append(keys.setdefault(key, len(keys)))
        return np.array(labels)

    def _check_invariants(self) -> None:
        if np.any(self.weights < 0) or np.any(self.beta < 0):
            raise InvalidVelocitySet(f"{self.name}: negative weight or beta")
        try:
            mirror = self.opposite()
        except KeyError as err:
            raise InvalidVelocitySet(f"{self.name}: {err} has no opposite") from err
        if not (
            np.array_equal(self.weights, self.weights[mirror])
            and np.array_equal(self.beta, self.beta[mirror])
        ):
            raise InvalidVelocitySet(f"{self.name}: weights are not even")
        scale = max(1.0, self.rho0)
        if abs(self.weights.sum() - self.rho0) > INVARIANT_TOLERANCE * scale:
            raise InvalidVelocitySet(f"{self.name}: sum of weights != rho0")
        energy = self.energy_weights @ self.weights
        target = self.rho0 * self.theta0 / (self.gamma - 1)
        if abs(energy - target) > INVARIANT_TOLERANCE * max(1.0, target):
            raise InvalidVelocitySet(
                f"{self.name}: background energy {energy} != {target}"
            )


def _exact(value: Exact) -> Fraction:
    if isinstance(value, float):
        # shortest decimal repr, so that 0.2 becomes 1/5
        return Fraction(repr(value))
    return Fraction(value)


def monoatomic_coefficients(
    dimension: int, rho0: Fraction, theta0: Fraction
) -> Tuple[Fraction, Fraction, Fraction, Fraction, Fraction]:
    return (
        1 / rho0,
        -Fraction(dimension) / (2 * theta0),
        1 / theta0,
        Fraction(0),
        1 / theta0**2,
    )


def _build(
    name: str,
    velocities: Sequence[Sequence[int]],
    weights: Sequence[Fraction],
    beta: Sequence[Fraction],
    rho0: Fraction,
    theta0: Fraction,
    gamma: Fraction,
    coeffs: Sequence[Fraction],
) -> VelocitySet:
    assert sum(weights) == rho0, (name, sum(weights), rho0)
    return VelocitySet(
        name=name,
        velocities=np.array(velocities, dtype=np.int64),
        weights=np.array([float(w) for w in weights]),
        beta=np.array([float(b) for b in beta]),
        rho0=float(rho0),
        theta0=float(theta0),
        gamma=float(gamma),
        coeffs=EquilibriumCoefficients(*(float(k) for k in coeffs)),
    )


def _axis_velocities(dimension: int) -> List[Tuple[int, ...]]:
    out = []
    for d in range(dimension):
        for sign in (-1, 1):
            c = [0] * dimension
            c[d] = sign
            out.append(tuple(c))
    return out


def _face_diagonals() -> List[Tuple[int, ...]]:
    out = []
    for a, b in ((0, 1), (0, 2), (1, 2)):
        for sa, sb in itertools.product((-1, 1), repeat=2):
            c = [0, 0, 0]
            c[a], c[b] = sa, sb
            out.append(tuple(c))
    return out


def _corners() -> List[Tuple[int, ...]]:
    return [tuple(c) for c in itertools.product((-1, 1), repeat=3)]


def build_d1q3() -> VelocitySet:
    rho0, theta0 = Fraction(1), Fraction(1, 3)
    return _build(
        "D1Q3",
        [(0,), (-1,), (1,)],
        [Fraction(2, 3), Fraction(1, 6), Fraction(1, 6)],
        [Fraction(0)] * 3,
        rho0,
        theta0,
        Fraction(3),
        monoatomic_coefficients(1, rho0, theta0),
    )


def build_d2q5_mono() -> VelocitySet:
    rho0, theta0 = Fraction(1), Fraction(1, 4)
    return _build(
        "D2Q5",
        [(0, 0)] + _axis_velocities(2),
        [Fraction(1, 2)] + [Fraction(1, 8)] * 4,
        [Fraction(0)] * 5,
        rho0,
        theta0,
        Fraction(2),
        monoatomic_coefficients(2, rho0, theta0),
    )


def build_d2q5_diatomic() -> VelocitySet:
    rho0, theta0 = Fraction(20, 3), Fraction(3, 10)
    return _build(
        "D2Q5-diatomic",
        [(0, 0)] + _axis_velocities(2),
        [Fraction(8, 3)] + [Fraction(1)] * 4,
        [Fraction(0)] + [Fraction(1, 2)] * 4,
        rho0,
        theta0,
        Fraction(5, 3),
        (1 / rho0, Fraction(-5), 1 / theta0, Fraction(0), 5 / theta0),
    )


def d3q_family_weights(
    rho0: Exact, theta0: Exact, alpha: Exact
) -> Dict[str, Fraction]:
    """Weights of the rest, axis, face-diagonal and corner classes."""
    r, t, a = _exact(rho0), _exact(theta0), _exact(alpha)
    return {
        "rest": r * t * (15 * t - 9) / 2 + r - 8 * a,
        "axis": r * t * (2 - 5 * t) / 2 + 4 * a,
        "face": r * t * (5 * t - 1) / 8 - 2 * a,
        "corner": a,
    }


def build_d3q_family(rho0: Exact, theta0: Exact, alpha: Exact) -> VelocitySet:
    r, t = _exact(rho0), _exact(theta0)
    if r <= 0 or t <= 0:
        raise InvalidVelocitySet(f"rho0={rho0} and theta0={theta0} must be positive")
    classes = d3q_family_weights(r, t, alpha)
    for weight_class, w in classes.items():
        if w < 0:
            raise NegativeWeight(weight_class, float(w))
    members = {
        "rest": [(0, 0, 0)],
        "axis": _axis_velocities(3),
        "face": _face_diagonals(),
        "corner": _corners(),
    }
    velocities: List[Tuple[int, ...]] = []
    weights: List[Fraction] = []
    for weight_class, w in classes.items():
        if abs(w) <= PRUNE_TOLERANCE:
            log.debug("pruning %s velocities (weight %s)", weight_class, w)
            continue
        velocities.extend(members[weight_class])
        weights.extend([w] * len(members[weight_class]))
    return _build(
        f"D3Q{len(velocities)}",
        velocities,
        weights,
        [Fraction(0)] * len(velocities),
        r,
        t,
        Fraction(5, 3),
        monoatomic_coefficients(3, r, t),
    )


def build_d3q7_diatomic(f1: Exact) -> VelocitySet:
    f = _exact(f1)
    if f <= 0:
        raise NonPositiveF1(float(f))
    rho0, theta0 = Fraction(42, 5) * f, Fraction(5, 21)
    return _build(
        "D3Q7-diatomic",
        [(0, 0, 0)] + _axis_velocities(3),
        [Fraction(12, 5) * f] + [f] * 6,
        [Fraction(0)] + [Fraction(2, 3)] * 6,
        rho0,
        theta0,
        Fraction(7, 5),
        (1 / rho0, Fraction(-21, 2), Fraction(21, 5), Fraction(0), Fraction(147, 5)),
    )


BUILTIN_FAMILY_PARAMETERS = {
    "d3q7": (1, Fraction(1, 5), 0),
    "d3q9": (1, Fraction(3, 5), Fraction(3, 40)),
    "d3q13": (1, Fraction(2, 5), 0),
    "d3q19": (1, Fraction(3, 10), 0),
}

LATTICE_NAMES = (
    "d1q3",
    "d2q5",
    "d2q5-diatomic",
    "d3q7",
    "d3q9",
    "d3q13",
    "d3q19",
    "d3q7-diatomic",
    "d3q-family",
)


def by_name(
    name: str,
    rho0: Optional[Exact] = None,
    theta0: Optional[Exact] = None,
    alpha: Optional[Exact] = None,
) -> VelocitySet:
    key = name.lower()
    if key == "d1q3":
        return build_d1q3()
    if key == "d2q5":
        return build_d2q5_mono()
    if key == "d2q5-diatomic":
        return build_d2q5_diatomic()
    if key == "d3q7-diatomic":
        return build_d3q7_diatomic(Fraction(5, 42))
    if key in BUILTIN_FAMILY_PARAMETERS:
        return build_d3q_family(*BUILTIN_FAMILY_PARAMETERS[key])
    if key == "d3q-family":
        if rho0 is None or theta0 is None or alpha is None:
            raise UnknownLattice("d3q-family needs rho0, theta0 and alpha")
        return build_d3q_family(rho0, theta0, alpha)
    raise UnknownLattice(f"unknown lattice {name!r}; choose from {LATTICE_NAMES}")


def builtin_sets() -> List[VelocitySet]:
    return [by_name(name) for name in LATTICE_NAMES if name != "d3q-family"]


@dataclass(frozen=True)
class MomentCheck:
    condition: str
    discrete: float
    continuous: float

    @property
    def defect(self) -> float:
        return abs(self.discrete - self.continuous)


@dataclass(frozen=True)
class CompatibilityReport:
    set_name: str
    checks: Tuple[MomentCheck, ...]
    tolerance: float

    @property
    def max_defect(self) -> float:
        return max(check.defect for check in self.checks)

    @property
    def passed(self) -> bool:
        return all(check.defect <= self.tolerance for check in self.checks)

    def failed(self) -> List[MomentCheck]:
        return [check for check in self.checks if check.defect > self.tolerance]


def check_moment_compatibility(
    velocity_set: VelocitySet, tolerance: float = COMPATIBILITY_TOLERANCE
) -> CompatibilityReport:
    """Compare discrete moments of f* with Gaussian moments of the Maxwellian."""
    if not velocity_set.is_monoatomic:
        raise NotMonoatomic(
            f"{velocity_set.name} has internal energies; "
            "use kinetic.verify_polyatomic_constraints"
        )
    dim = velocity_set.dimension
    c = velocity_set.velocities.astype(float)
    f = velocity_set.weights
    rho0, theta0 = velocity_set.rho0, velocity_set.theta0
    c2 = np.sum(c * c, axis=1)

    checks = [
        MomentCheck("1", float(f.sum()), rho0),
        MomentCheck("|v|^2/2", float(0.5 * c2 @ f), dim / 2 * rho0 * theta0),
    ]
    for a, b in itertools.product(range(dim), repeat=2):
        delta = 1.0 if a == b else 0.0
        checks.append(
            MomentCheck(
                f"v{a}v{b}", float(c[:, a] * c[:, b] @ f), rho0 * theta0 * delta
            )
        )
    for a, b in itertools.product(range(dim), repeat=2):
        delta = 1.0 if a == b else 0.0
        checks.append(
            MomentCheck(
                f"|v|^2 v{a}v{b}/2",
                float(0.5 * c2 * c[:, a] * c[:, b] @ f),
                (dim + 2) / 2 * rho0 * theta0**2 * delta,
            )
        )
    checks.append(
        MomentCheck(
            "|v|^4/4", float(0.25 * c2**2 @ f), dim * (dim + 2) / 4 * rho0 * theta0**2
        )
    )
    return CompatibilityReport(velocity_set.name, tuple(checks), tolerance)
