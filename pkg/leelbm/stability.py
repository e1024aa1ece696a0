"""
Von Neumann analysis of the linear lattice Boltzmann update.

One step in Fourier space is Gamma(k eps) = D(k eps) H(1/2) with
D_mm = exp(-i k eps . c_m). The scan checks on a uniform k eps grid over
[-pi, pi]^D that Gamma is regular, has spectral radius at most one and has a
bounded eigenvector condition number; a unitary Gamma passes all three.

Sets whose Gamma is not unitary can still carry a stability structure: a
positive diagonal A0 with A0 H(1/2) symmetric and H(1) a projection.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from leelbm import kinetic, solver
from leelbm.errors import EigenFailure, NoStructureFound, OutOfRangeWaveNumber
from leelbm.lattice import VelocitySet
from leelbm.settings import DEFAULT_KAPPA_CAP, DEFAULT_PERTURBATION

log = logging.getLogger(__name__)

UNITARY_TOLERANCE = 1e-12
SPECTRAL_TOLERANCE = 1e-12
SINGULAR_TOLERANCE = 1e-12
PROJECTION_TOLERANCE = 1e-12
SPECTRUM_TOLERANCE = 1e-10
SYMMETRY_TOLERANCE = 1e-10
DEFECTIVE_CLUSTER = 1e-8
DEFECTIVE_KAPPA = 1e8
CHUNK = 4096

# Stability structure of D3Q19 for the rest / axis / face-diagonal classes.
D3Q19_A0_CLASSES = (3.0, 13.0, 52.0)


@dataclass(frozen=True)
class CollisionMatrix:
    matrix: np.ndarray
    tau: float
    set_name: str
    velocities: np.ndarray

    def collision_operator(self) -> np.ndarray:
        """H(tau) - I, the increment of one collision."""
        result: np.ndarray = self.matrix - np.eye(self.matrix.shape[0])
        return result


@dataclass(frozen=True)
class AmplificationMatrix:
    matrix: np.ndarray
    keps: Tuple[float, ...]


def build_H(velocity_set: VelocitySet, tau: float) -> CollisionMatrix:
    h = solver.collision_matrix(velocity_set, tau)
    return CollisionMatrix(h, tau, velocity_set.name, velocity_set.velocities)


def _check_range(keps: np.ndarray) -> None:
    if np.any(np.abs(keps) > np.pi * (1 + 1e-15)):
        raise OutOfRangeWaveNumber(keps.ravel().tolist())


def _gammas(h: np.ndarray, velocities: np.ndarray, keps: np.ndarray) -> np.ndarray:
    """Gamma for a batch of wave numbers keps of shape (S, D)."""
    phase = np.exp(-1j * keps @ velocities.T.astype(float))
    result: np.ndarray = phase[:, :, None] * h[None, :, :]
    return result


def build_gamma(h: CollisionMatrix, keps: Sequence[float]) -> AmplificationMatrix:
    k = np.atleast_1d(np.asarray(keps, dtype=float))
    assert k.shape == (h.velocities.shape[1],), k.shape
    _check_range(k)
    return AmplificationMatrix(_gammas(h.matrix, h.velocities, k[None])[0], tuple(k))


def unitary_defects(gammas: np.ndarray) -> np.ndarray:
    n = gammas.shape[-1]
    product = np.conj(np.swapaxes(gammas, -1, -2)) @ gammas
    result: np.ndarray = np.abs(product - np.eye(n)).max(axis=(-1, -2))
    return result


def wave_number_grid(dimension: int, resolution: int) -> np.ndarray:
    """Uniform samples of [-pi, pi]^D including both ends, shape (r^D, D)."""
    assert resolution >= 2, resolution
    axis = np.linspace(-np.pi, np.pi, resolution)
    if resolution % 2:
        axis[resolution // 2] = 0.0
    return np.array(list(itertools.product(axis, repeat=dimension)))


@dataclass(frozen=True)
class SampleRecord:
    keps: Tuple[float, ...]
    unitary_defect: float
    rho: float
    kappa: float
    min_singular: float
    flags: Tuple[str, ...] = ()

    @property
    def determinate(self) -> bool:
        return "indeterminate" not in self.flags

    def pseudospectral_bound(self, alpha: float) -> float:
        """Bauer-Fike bound on the alpha-pseudospectral radius."""
        return self.rho + self.kappa * alpha

    def as_dict(self) -> Dict[str, Any]:
        return {
            "keps": list(self.keps),
            "unitary_defect": self.unitary_defect,
            "rho": _finite_or_none(self.rho),
            "kappa": _finite_or_none(self.kappa),
            "flags": list(self.flags),
        }


def _finite_or_none(value: float) -> Optional[float]:
    return value if np.isfinite(value) else None


@dataclass(frozen=True)
class StructureReport:
    set_name: str
    projection_defect: float
    eigen_multiplicities: Dict[str, int]
    a0: Tuple[float, ...]
    a0_source: str
    symmetry_defect: float
    weighted_unitary_defect: Optional[float] = None

    @property
    def projection_ok(self) -> bool:
        return self.projection_defect <= PROJECTION_TOLERANCE

    @property
    def spectrum_ok(self) -> bool:
        return self.eigen_multiplicities.get("other", 0) == 0

    @property
    def symmetric(self) -> bool:
        return self.symmetry_defect <= SYMMETRY_TOLERANCE

    @property
    def passed(self) -> bool:
        weighted_ok = (
            self.weighted_unitary_defect is None
            or self.weighted_unitary_defect <= SYMMETRY_TOLERANCE
        )
        structural = self.projection_ok and self.spectrum_ok and self.symmetric
        return structural and weighted_ok

    def as_dict(self) -> Dict[str, Any]:
        return {
            "projection_defect": self.projection_defect,
            "symmetry_defect": self.symmetry_defect,
            "eigen_multiplicities": dict(self.eigen_multiplicities),
            "a0": list(self.a0),
            "a0_source": self.a0_source,
            "weighted_unitary_defect": self.weighted_unitary_defect,
            "passed": self.passed,
        }


@dataclass
class StabilityReport:
    set_name: str
    tau: float
    resolution: int
    kappa_cap: float
    alpha: float = DEFAULT_PERTURBATION
    samples: List[SampleRecord] = field(default_factory=list)
    structure: Optional[StructureReport] = None

    @property
    def determinate_samples(self) -> List[SampleRecord]:
        return [s for s in self.samples if s.determinate]

    @property
    def max_unitary_defect(self) -> float:
        return max(s.unitary_defect for s in self.samples)

    @property
    def unitary(self) -> bool:
        return all("unitary" in s.flags for s in self.samples)

    @property
    def regular(self) -> bool:
        return all(s.min_singular > SINGULAR_TOLERANCE for s in self.samples)

    @property
    def spectral(self) -> bool:
        return all(s.rho <= 1 + SPECTRAL_TOLERANCE for s in self.determinate_samples)

    @property
    def kappa_max(self) -> float:
        """Largest eigenvector condition number; inf when no sample has one."""
        return max((s.kappa for s in self.determinate_samples), default=np.inf)

    @property
    def conditioned(self) -> bool:
        return self.kappa_max <= self.kappa_cap

    def pseudospectral_bound(self, alpha: Optional[float] = None) -> float:
        alpha = self.alpha if alpha is None else alpha
        return max(
            (s.pseudospectral_bound(alpha) for s in self.determinate_samples),
            default=np.inf,
        )

    @property
    def verdict(self) -> str:
        # singular samples are unstable even when their eigen solve failed
        if self.unitary:
            return "stable"
        if not (self.regular and self.spectral):
            return "unstable"
        return "indeterminate"

    def as_dict(self) -> Dict[str, Any]:
        return {
            "set": self.set_name,
            "tau": self.tau,
            "resolution": self.resolution,
            "samples": [s.as_dict() for s in self.samples],
            "conditions": {
                "regular": self.regular,
                "spectral_radius": self.spectral,
                "eigenvector_condition": self.conditioned,
                "C": _finite_or_none(self.kappa_max),
                "alpha": self.alpha,
                "pseudospectral_bound": _finite_or_none(self.pseudospectral_bound()),
            },
            "indeterminate_samples": len(self.samples) - len(self.determinate_samples),
            "verdict": self.verdict,
            "structure": self.structure.as_dict() if self.structure else None,
        }


def _eigen_sample(gamma: np.ndarray, keps: np.ndarray) -> Tuple[float, float, bool]:
    try:
        values, vectors = np.linalg.eig(gamma)
        kappa = float(np.linalg.cond(vectors))
    except np.linalg.LinAlgError as err:
        raise EigenFailure(keps.tolist()) from err
    gaps = np.abs(values[:, None] - values[None, :])
    np.fill_diagonal(gaps, np.inf)
    defective = bool(gaps.min() < DEFECTIVE_CLUSTER and kappa > DEFECTIVE_KAPPA)
    return float(np.abs(values).max()), kappa, defective


def _scan_chunk(
    gammas: np.ndarray, keps: np.ndarray, records: List[SampleRecord]
) -> None:
    defects = unitary_defects(gammas)
    singular = np.linalg.svd(gammas, compute_uv=False).min(axis=-1)
    for gamma, k, defect, smin in zip(gammas, keps, defects, singular):
        key = tuple(float(x) for x in k)
        if defect <= UNITARY_TOLERANCE:
            record = SampleRecord(key, float(defect), 1.0, 1.0, 1.0, ("unitary",))
            records.append(record)
            continue
        try:
            rho, kappa, defective = _eigen_sample(gamma, k)
        except EigenFailure as err:
            log.warning("%s", err)
            records.append(
                SampleRecord(
                    key, float(defect), np.nan, np.inf, float(smin), ("indeterminate",)
                )
            )
            continue
        flags = ("possibly_non_diagonalizable",) if defective else ()
        records.append(SampleRecord(key, float(defect), rho, kappa, float(smin), flags))


def scan_theorem1(
    velocity_set: VelocitySet,
    resolution: int,
    tau: float = 0.5,
    kappa_cap: float = DEFAULT_KAPPA_CAP,
    alpha: float = DEFAULT_PERTURBATION,
) -> StabilityReport:
    h = build_H(velocity_set, tau)
    keps = wave_number_grid(velocity_set.dimension, resolution)
    report = StabilityReport(velocity_set.name, tau, resolution, kappa_cap, alpha)
    for start in range(0, len(keps), CHUNK):
        chunk = keps[start : start + CHUNK]
        _scan_chunk(_gammas(h.matrix, h.velocities, chunk), chunk, report.samples)
    log.info(
        "%s: %d samples, max unitary defect %.3g, verdict %s",
        velocity_set.name,
        len(report.samples),
        report.max_unitary_defect,
        report.verdict,
    )
    return report


def _symmetry_defect(a0: np.ndarray, h: np.ndarray) -> float:
    weighted = a0[:, None] * h
    return float(np.abs(weighted - weighted.T).max())


def search_structure(h: np.ndarray, classes: np.ndarray) -> np.ndarray:
    """
    Positive diagonal, constant on velocity classes, that symmetrizes h in the
    least-squares sense. Normalized to a smallest entry of one.
    """
    n_classes = int(classes.max()) + 1
    rows = []
    for i, j in itertools.combinations(range(h.shape[0]), 2):
        row = np.zeros(n_classes)
        row[classes[i]] += h[i, j]
        row[classes[j]] -= h[j, i]
        if np.abs(row).max() > SYMMETRY_TOLERANCE:
            rows.append(row)
    if not rows:
        # h is already symmetric
        return np.ones(h.shape[0])
    null = np.linalg.svd(np.array(rows))[2][-1]
    null = null * np.sign(null[np.argmax(np.abs(null))])
    if np.any(null <= 0):
        raise NoStructureFound(f"class weights {null} are not all positive")
    a0 = null[classes] / null.min()
    if _symmetry_defect(a0, h) > SYMMETRY_TOLERANCE * a0.max():
        raise NoStructureFound(
            f"best class-constant diagonal leaves defect {_symmetry_defect(a0, h)}"
        )
    return a0


def _multiplicities(values: np.ndarray) -> Dict[str, int]:
    zero = np.abs(values) <= SPECTRUM_TOLERANCE
    minus_two = np.abs(values + 2) <= SPECTRUM_TOLERANCE
    return {
        "0": int(zero.sum()),
        "-2": int(minus_two.sum()),
        "other": int((~zero & ~minus_two).sum()),
    }


def weighted_unitary_defect(
    a0: np.ndarray, h: np.ndarray, velocities: np.ndarray, resolution: int
) -> float:
    """Max unitarity defect of A0^(1/2) Gamma A0^(-1/2) over a k eps scan."""
    root = np.sqrt(a0)
    similar = root[:, None] * h / root[None, :]
    keps = wave_number_grid(velocities.shape[1], resolution)
    worst = 0.0
    for start in range(0, len(keps), CHUNK):
        chunk = keps[start : start + CHUNK]
        defects = unitary_defects(_gammas(similar, velocities, chunk))
        worst = max(worst, float(defects.max()))
    return worst


def check_stability_structure(
    velocity_set: VelocitySet,
    a0: Optional[Sequence[float]] = None,
    projector: Optional[np.ndarray] = None,
    resolution: Optional[int] = None,
) -> StructureReport:
    """
    Check that H(1) is a projection, that the collision increment H(1/2) - I
    has spectrum {0, -2}, and that A0 H(1/2) is symmetric. Without an explicit
    a0 the D3Q19 diagonal is used for D3Q19 and a class-constant search for
    everything else.
    """
    e = kinetic.equilibrium_projector(velocity_set) if projector is None else projector
    n = velocity_set.n
    h_half = 2 * e - np.eye(n)
    projection_defect = float(np.abs(e @ e - e).max())
    increment = np.linalg.eigvals(h_half - np.eye(n))
    classes = velocity_set.symmetry_classes()
    if a0 is not None:
        diag, source = np.asarray(a0, dtype=float), "given"
    elif velocity_set.name == "D3Q19":
        diag, source = np.array(D3Q19_A0_CLASSES)[classes], "built-in"
    else:
        diag, source = search_structure(h_half, classes), "search"
    assert diag.shape == (n,), diag.shape
    weighted = None
    if resolution is not None:
        weighted = weighted_unitary_defect(
            diag, h_half, velocity_set.velocities, resolution
        )
    report = StructureReport(
        set_name=velocity_set.name,
        projection_defect=projection_defect,
        eigen_multiplicities=_multiplicities(increment),
        a0=tuple(float(x) for x in diag),
        a0_source=source,
        symmetry_defect=_symmetry_defect(diag, h_half),
        weighted_unitary_defect=weighted,
    )
    log.info(
        "%s structure: projection %.3g, symmetry %.3g, spectrum %s",
        velocity_set.name,
        report.projection_defect,
        report.symmetry_defect,
        report.eigen_multiplicities,
    )
    return report
