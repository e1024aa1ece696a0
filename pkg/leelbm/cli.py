import io
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import click

from leelbm import harness, kinetic, lattice, settings, solver, stability
from leelbm.errors import (
    DomainMismatch,
    InvalidInitialCondition,
    LeeLbmError,
    NoStructureFound,
)
from leelbm.grid import Grid
from leelbm.reference import GAUSS_PULSES, MacroField, gauss_pulse
from leelbm.snapshots import SnapshotWriter, read_snapshot

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _resolutions(
    ctx: click.Context, param: click.Parameter, value: Optional[str]
) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma separated integers, got {value!r}")


def _exact(value: Optional[str], name: str) -> Optional[Fraction]:
    if value is None:
        return None
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter(
            f"expected a number or fraction, got {value!r}", param_hint=name
        )


def _velocity_set(
    name: str, rho0: Optional[str], theta0: Optional[str], alpha: Optional[str]
) -> lattice.VelocitySet:
    if name != "d3q-family" and any(v is not None for v in (rho0, theta0, alpha)):
        log.warning("--rho0/--theta0/--alpha only apply to --lattice d3q-family")
    return lattice.by_name(
        name,
        _exact(rho0, "--rho0"),
        _exact(theta0, "--theta0"),
        _exact(alpha, "--alpha"),
    )


def _initial_condition(
    ic: str, dimension: int
) -> Tuple[harness.InitialCondition, float, Optional[MacroField]]:
    """(grid -> field, canonical length, field read from file if any)."""
    if ic.startswith("file:"):
        _, loaded = read_snapshot(Path(ic[len("file:") :]))
        if loaded.grid.dimension != dimension:
            raise DomainMismatch(
                f"{loaded.grid.dimension}D file for a {dimension}D lattice"
            )

        def from_file(grid: Grid) -> MacroField:
            if grid != loaded.grid:
                raise InvalidInitialCondition("file initial conditions fix the grid")
            return loaded

        return from_file, loaded.grid.lengths[0], loaded
    pulses = {f"gauss{d}d": d for d in GAUSS_PULSES}
    if ic not in pulses:
        raise InvalidInitialCondition(
            f"unknown initial condition {ic!r}; use {sorted(pulses)} or file:<path>"
        )
    d = pulses[ic]
    if d != dimension:
        raise DomainMismatch(f"{ic} on a {dimension}D lattice")
    return (lambda grid: gauss_pulse(d, grid)), GAUSS_PULSES[d].length, None


def _warn_tau(tau: float) -> None:
    if tau != settings.DEFAULT_TAU:
        log.warning("tau=%s: the scheme is only second-order consistent at 1/2", tau)


def _threads(value: Optional[int]) -> None:
    solver.set_threads(value if value is not None else settings.default_threads())


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)


lattice_option = click.option(
    "--lattice", type=click.Choice(lattice.LATTICE_NAMES, case_sensitive=False)
)
family_options = [
    click.option("--rho0", help="Background density of a custom 3D set."),
    click.option("--theta0", help="Background temperature of a custom 3D set."),
    click.option("--alpha", help="Corner weight of a custom 3D set."),
]


def with_family(f: Any) -> Any:
    for option in reversed(family_options):
        f = option(f)
    return f


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log at DEBUG level.")
@click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False),
    help="JSON file with one settings object per subcommand.",
)
@click.pass_context
def cli(ctx: click.Context, verbose: bool, config: Optional[str]) -> None:
    """Lattice Boltzmann schemes for the linearized Euler equations."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else settings.default_log_level(),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    ctx.obj = settings.load_config(config)


@cli.command()
@lattice_option
@with_family
@click.option("--ic", help="gauss1d, gauss2d, gauss3d or file:<path>.")
@click.option("-N", "n", type=int, help="Nodes per axis.")
@click.option("--length", type=float, help="Periodic domain length per axis.")
@click.option("--end-time", type=float)
@click.option("--tau", type=float)
@click.option("--snapshot-every", type=int, help="Write every k-th step (0: end only).")
@click.option("--output", type=click.Choice(["csv"]))
@click.option("--out", help="Snapshot directory.")
@click.option("--threads", type=int)
@click.pass_obj
def run(
    config: Dict[str, Any], rho0: Any, theta0: Any, alpha: Any, **flags: Any
) -> int:
    """Advance an initial condition and write snapshots."""
    s = settings.merged(settings.RUN_DEFAULTS, config, "run", flags)
    vs = _velocity_set(s["lattice"], rho0, theta0, alpha)
    ic, canonical_length, loaded = _initial_condition(s["ic"], vs.dimension)
    if loaded is not None:
        grid = loaded.grid
        if flags["n"] is not None and flags["n"] != grid.shape[0]:
            log.warning("-N %d ignored, the file fixes %s", flags["n"], grid.shape)
    else:
        length = s["length"] if s["length"] is not None else canonical_length
        grid = Grid.periodic(vs.dimension, s["n"], length)
    if s["snapshot_every"] < 0:
        raise click.BadParameter(
            f"must be >= 0, got {s['snapshot_every']}", param_hint="--snapshot-every"
        )
    _warn_tau(s["tau"])
    _threads(s["threads"])
    steps = harness.steps_for(s["end_time"], grid.eps)
    writer = SnapshotWriter(Path(s["out"]), s["snapshot_every"] or max(steps, 1), steps)
    initial = ic(grid)
    writer.write(0, 0.0, initial)
    field = solver.initialize_equilibrium(grid, vs, initial)
    solver.run(field, steps, s["tau"], writer)
    t = steps * grid.eps
    click.echo(f"{len(writer.written)} snapshots in {s['out']} (t={t:.17g})")
    return EXIT_OK


@cli.command("stability")
@lattice_option
@with_family
@click.option("--resolution", type=int, help="Samples per axis of k*eps.")
@click.option("--tau", type=float)
@click.option("--kappa-cap", type=float)
@click.option(
    "--perturbation", type=float, help="alpha of the pseudospectral radius bound."
)
@click.option("--out", help="JSON report path (default: stdout).")
@click.pass_obj
def stability_command(
    config: Dict[str, Any], rho0: Any, theta0: Any, alpha: Any, **flags: Any
) -> int:
    """Scan the amplification matrix over k*eps and report a verdict."""
    s = settings.merged(settings.STABILITY_DEFAULTS, config, "stability", flags)
    vs = _velocity_set(s["lattice"], rho0, theta0, alpha)
    _warn_tau(s["tau"])
    report = stability.scan_theorem1(
        vs, s["resolution"], s["tau"], s["kappa_cap"], s["perturbation"]
    )
    if report.verdict == "indeterminate" and s["tau"] == settings.DEFAULT_TAU:
        try:
            report.structure = stability.check_stability_structure(
                vs, resolution=s["resolution"]
            )
        except NoStructureFound as e:
            log.warning("%s: %s", vs.name, e)
    _emit(json.dumps(report.as_dict(), indent=2) + "\n", s["out"])
    certified = report.structure is not None and report.structure.passed
    return EXIT_OK if report.verdict == "stable" or certified else EXIT_FAILED


@cli.command()
@lattice_option
@with_family
@click.option("--ic")
@click.option("--resolutions", callback=_resolutions, help="Comma separated N.")
@click.option("--fine-n", type=int, help="Compare against an LBM run at this N.")
@click.option("--length", type=float)
@click.option("--end-time", type=float)
@click.option("--tau", type=float)
@click.option("--out", help="CSV table path (default: stdout).")
@click.option("--threads", type=int)
@click.option("--max-error", type=float, help="Fail if any rho error exceeds this.")
@click.option("--min-order", type=float, help="Fail if the last rho order is lower.")
@click.pass_obj
def convergence(
    config: Dict[str, Any],
    rho0: Any,
    theta0: Any,
    alpha: Any,
    max_error: Optional[float],
    min_order: Optional[float],
    **flags: Any,
) -> int:
    """Convergence table against the 1D oracle, or against a fine run."""
    s = settings.merged(settings.CONVERGENCE_DEFAULTS, config, "convergence", flags)
    vs = _velocity_set(s["lattice"], rho0, theta0, alpha)
    ic, canonical_length, loaded = _initial_condition(s["ic"], vs.dimension)
    if loaded is not None:
        raise InvalidInitialCondition("convergence needs a gauss initial condition")
    length = s["length"] if s["length"] is not None else canonical_length
    _warn_tau(s["tau"])
    _threads(s["threads"])
    resolutions = s["resolutions"]
    if s["fine_n"] is None:
        if vs.dimension != 1:
            raise click.UsageError("--fine-n is required for 2D and 3D lattices")
        table = harness.convergence_vs_analytic(
            vs, ic, resolutions, s["end_time"], s["tau"], length
        )
    else:
        table = harness.convergence_self(
            vs, ic, resolutions, s["fine_n"], s["end_time"], s["tau"], length
        )
    buffer = io.StringIO()
    table.write_csv(buffer)
    _emit(buffer.getvalue(), s["out"])

    failed = False
    if max_error is not None:
        failed |= any(row.errors["rho"] > max_error for row in table.rows)
    if min_order is not None:
        order = table.order("rho")
        failed |= order is None or order < min_order
    return EXIT_FAILED if failed else EXIT_OK


@cli.command("moments-check")
@lattice_option
@with_family
@click.option("--trials", type=int)
@click.option("--seed", type=int)
@click.option("--out", help="JSON report path (default: stdout).")
@click.pass_obj
def moments_check(
    config: Dict[str, Any], rho0: Any, theta0: Any, alpha: Any, **flags: Any
) -> int:
    """Check equilibrium moments, and similarity conditions for monoatomic sets."""
    s = settings.merged(settings.MOMENTS_CHECK_DEFAULTS, config, "moments-check", flags)
    vs = _velocity_set(s["lattice"], rho0, theta0, alpha)
    constraints = kinetic.verify_polyatomic_constraints(vs, s["trials"], s["seed"])
    report: Dict[str, Any] = {"constraints": constraints.as_dict()}
    passed = constraints.passed
    if vs.is_monoatomic:
        compatibility = lattice.check_moment_compatibility(vs)
        report["compatibility"] = {
            "max_defect": compatibility.max_defect,
            "failed": [check.condition for check in compatibility.failed()],
            "passed": compatibility.passed,
        }
        passed = passed and compatibility.passed
    _emit(json.dumps(report, indent=2) + "\n", s["out"])
    return EXIT_OK if passed else EXIT_FAILED


@cli.command("end-times")
@click.option("--end-time", type=float, help="Target nondimensional end time.")
@click.option("--length", type=float)
@click.option("--resolutions", callback=_resolutions)
@click.pass_obj
def end_times(config: Dict[str, Any], **flags: Any) -> int:
    """Target minus achieved end time when rounding to whole steps."""
    s = settings.merged(settings.END_TIMES_DEFAULTS, config, "end-times", flags)
    rows = harness.end_time_table(s["end_time"], s["length"], s["resolutions"])
    buffer = io.StringIO()
    harness.write_end_times(rows, buffer)
    click.echo(buffer.getvalue(), nl=False)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        result = cli.main(
            args=list(argv) if argv is not None else None,
            prog_name="leelbm",
            standalone_mode=False,
        )
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        return EXIT_FAILED
    except (LeeLbmError, KeyError) as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_USAGE
    return result if isinstance(result, int) else EXIT_OK
