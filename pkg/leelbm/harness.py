"""
Error norms and convergence studies.

Space-time norm over the steps t_1..t_K of a run:

    ||eta|| = sqrt(sum_i sum_j |eta(t_i, p_j)|^2 dt^(D+1))

and the space norm at the end time with dt^D instead.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import IO, Callable, Dict, List, Optional, Sequence

from leelbm import solver
from leelbm.errors import EmptySeries, NonNestedResolutions, UnorderedResolutions
from leelbm.grid import Grid
from leelbm.lattice import VelocitySet
from leelbm.reference import GAUSS_PULSES, MacroField, analytic_solution_1d

log = logging.getLogger(__name__)

InitialCondition = Callable[[Grid], MacroField]


def _squares(f: MacroField) -> Dict[str, float]:
    return {name: float((v * v).sum()) for name, v in f.variables().items()}


def l2_space_time(series: Sequence[MacroField], dt: float) -> Dict[str, float]:
    if not series:
        raise EmptySeries("no time levels to take a norm over")
    scale = dt ** (series[0].grid.dimension + 1)
    totals = _squares(series[0])
    for f in series[1:]:
        for name, s in _squares(f).items():
            totals[name] += s
    return {name: math.sqrt(s * scale) for name, s in totals.items()}


def l2_space(f: MacroField, dt: float) -> Dict[str, float]:
    scale = dt**f.grid.dimension
    return {name: math.sqrt(s * scale) for name, s in _squares(f).items()}


def steps_for(end_time: float, eps: float) -> int:
    """round(T/eps) with halves rounded up."""
    return int(math.floor(end_time / eps + 0.5))


@dataclass(frozen=True)
class ConvergenceRow:
    resolution: int
    eps: float
    steps: int
    end_time: float
    errors: Dict[str, float]
    orders: Dict[str, Optional[float]] = field(default_factory=dict)


def observed_order(
    coarse_error: float, fine_error: float, coarse_n: int, fine_n: int
) -> Optional[float]:
    if coarse_error <= 0 or fine_error <= 0:
        return None
    return math.log(coarse_error / fine_error) / math.log(fine_n / coarse_n)


@dataclass
class ConvergenceTable:
    set_name: str
    norm: str
    rows: List[ConvergenceRow] = field(default_factory=list)

    def add(
        self, resolution: int, eps: float, steps: int, errors: Dict[str, float]
    ) -> ConvergenceRow:
        orders: Dict[str, Optional[float]] = {}
        if self.rows:
            previous = self.rows[-1]
            if resolution <= previous.resolution:
                raise UnorderedResolutions([previous.resolution, resolution])
            orders = {
                name: observed_order(
                    previous.errors[name], e, previous.resolution, resolution
                )
                for name, e in errors.items()
            }
        row = ConvergenceRow(resolution, eps, steps, steps * eps, errors, orders)
        self.rows.append(row)
        log.info("%s N=%d: %s", self.set_name, resolution, errors)
        return row

    @property
    def variables(self) -> List[str]:
        return list(self.rows[0].errors) if self.rows else []

    def order(self, variable: str, row: int = -1) -> Optional[float]:
        return self.rows[row].orders.get(variable)

    def write_csv(self, out: IO[str]) -> None:
        names = self.variables
        header = ["N", "eps", "steps", "end_time"]
        header += [f"err_{n}" for n in names] + [f"order_{n}" for n in names]
        out.write(",".join(header) + "\n")
        for row in self.rows:
            cells = [str(row.resolution), "%.17g" % row.eps, str(row.steps)]
            cells.append("%.17g" % row.end_time)
            cells += ["%.17g" % row.errors[n] for n in names]
            for n in names:
                order = row.orders.get(n)
                cells.append("" if order is None else "%.17g" % order)
            out.write(",".join(cells) + "\n")


def _domain_length(dimension: int, length: Optional[float]) -> float:
    """None selects the periodic domain the Gauss pulse of that dimension lives on."""
    return GAUSS_PULSES[dimension].length if length is None else length


def _check_increasing(resolutions: Sequence[int]) -> None:
    if not resolutions or any(a >= b for a, b in zip(resolutions, resolutions[1:])):
        raise UnorderedResolutions(resolutions)


def convergence_vs_analytic(
    velocity_set: VelocitySet,
    ic: InitialCondition,
    resolutions: Sequence[int],
    end_time: float,
    tau: float = 0.5,
    length: Optional[float] = None,
) -> ConvergenceTable:
    """Space-time error of 1D runs against the characteristic oracle."""
    assert velocity_set.dimension == 1, velocity_set.name
    _check_increasing(resolutions)
    vs = velocity_set
    length = _domain_length(1, length)
    table = ConvergenceTable(vs.name, "space-time")
    for n in resolutions:
        grid = Grid.periodic(1, n, length)
        initial = ic(grid)
        errors: List[MacroField] = []

        def compare(k: int, t: float, f: solver.PopulationField) -> None:
            exact = analytic_solution_1d(initial, t, vs.rho0, vs.theta0, vs.gamma)
            errors.append(f.macro() - exact)

        steps = steps_for(end_time, grid.eps)
        populations = solver.initialize_equilibrium(grid, vs, initial)
        solver.run(populations, steps, tau, compare)
        if not errors:
            errors.append(initial - initial)
        table.add(n, grid.eps, steps, l2_space_time(errors, grid.eps))
    return table


def convergence_self(
    velocity_set: VelocitySet,
    ic: InitialCondition,
    resolutions: Sequence[int],
    fine_n: int,
    end_time: float,
    tau: float = 0.5,
    length: Optional[float] = None,
) -> ConvergenceTable:
    """
    End-time error of coarse runs against one fine run, compared at the
    coarse nodes. Each coarse run reaches k*eps_c, which is a whole number of
    fine steps, and the fine run is sampled exactly there.
    """
    _check_increasing(resolutions)
    for n in resolutions:
        if fine_n % n:
            raise NonNestedResolutions(n, fine_n)
    vs = velocity_set
    dim = vs.dimension
    length = _domain_length(dim, length)
    fine_grid = Grid.periodic(dim, fine_n, length)
    coarse_steps = {n: steps_for(end_time, length / n) for n in resolutions}
    wanted = {steps * (fine_n // n) for n, steps in coarse_steps.items()}
    captured: Dict[int, MacroField] = {}

    def capture(k: int, t: float, f: solver.PopulationField) -> None:
        if k in wanted:
            captured[k] = f.macro()

    fine_initial = ic(fine_grid)
    if 0 in wanted:
        captured[0] = fine_initial
    solver.run(
        solver.initialize_equilibrium(fine_grid, vs, fine_initial),
        max(wanted),
        tau,
        capture,
    )

    table = ConvergenceTable(vs.name, "space")
    for n in resolutions:
        factor = fine_n // n
        grid = Grid.periodic(dim, n, length)
        steps = coarse_steps[n]
        populations = solver.initialize_equilibrium(grid, vs, ic(grid))
        final = solver.run(populations, steps, tau)
        reference = captured[steps * factor].restrict(factor)
        error = final.macro() - reference
        table.add(n, grid.eps, steps, l2_space(error, grid.eps))
    return table


@dataclass(frozen=True)
class EndTimeRow:
    resolution: int
    eps: float
    steps: int
    achieved: float
    gap: float


def end_time_table(
    end_time: float, length: float, resolutions: Sequence[int]
) -> List[EndTimeRow]:
    """Target minus achieved end time for each resolution."""
    rows = []
    for n in resolutions:
        eps = length / n
        steps = steps_for(end_time, eps)
        rows.append(EndTimeRow(n, eps, steps, steps * eps, end_time - steps * eps))
    return rows


def write_end_times(rows: Sequence[EndTimeRow], out: IO[str]) -> None:
    out.write("N,eps,steps,achieved,gap\n")
    for r in rows:
        cells = (r.resolution, r.eps, r.steps, r.achieved, r.gap)
        out.write("%d,%.17g,%d,%.17g,%.17g\n" % cells)
