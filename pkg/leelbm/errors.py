from typing import Sequence


class LeeLbmError(Exception):
    pass


class InvalidVelocitySet(LeeLbmError):
    pass


class NegativeWeight(InvalidVelocitySet):
    def __init__(self, weight_class: str, value: float) -> None:
        super().__init__(f"weight class {weight_class!r} is negative ({value})")
        self.weight_class = weight_class
        self.value = value


class NonPositiveF1(InvalidVelocitySet):
    def __init__(self, f1: float) -> None:
        super().__init__(f"f1 must be positive, got {f1}")
        self.f1 = f1


class NotMonoatomic(LeeLbmError):
    pass


class UnknownLattice(LeeLbmError):
    pass


class ShapeMismatch(LeeLbmError):
    pass


class ZeroTau(LeeLbmError):
    pass


class OutOfRangeWaveNumber(LeeLbmError):
    def __init__(self, keps: Sequence[float]) -> None:
        super().__init__(f"k*eps {tuple(keps)} leaves [-pi, pi]")
        self.keps = tuple(keps)


class EigenFailure(LeeLbmError):
    def __init__(self, keps: Sequence[float]) -> None:
        super().__init__(f"eigen decomposition did not converge at k*eps={tuple(keps)}")
        self.keps = tuple(keps)


class NoStructureFound(LeeLbmError):
    pass


class DomainMismatch(LeeLbmError):
    pass


class InconsistentUnits(LeeLbmError):
    pass


class InvalidInitialCondition(LeeLbmError):
    pass


class EmptySeries(LeeLbmError):
    pass


class NonNestedResolutions(LeeLbmError):
    def __init__(self, resolution: int, fine_resolution: int) -> None:
        super().__init__(
            f"resolution {resolution} does not divide fine resolution {fine_resolution}"
        )
        self.resolution = resolution
        self.fine_resolution = fine_resolution


class UnorderedResolutions(LeeLbmError):
    def __init__(self, resolutions: Sequence[int]) -> None:
        super().__init__(f"resolutions {list(resolutions)} are not strictly increasing")
        self.resolutions = list(resolutions)
