import io
import math
import os
from unittest import TestCase, skipUnless

import numpy as np

from leelbm import harness, lattice
from leelbm.errors import EmptySeries, NonNestedResolutions, UnorderedResolutions
from leelbm.grid import Grid
from leelbm.reference import MacroField, gauss_pulse
from leelbm.settings import SLOW_TESTS_ENV

TABLE_1 = {25: -3.06e-2, 40: -6.10e-4, 80: -6.10e-4, 120: -6.10e-4}


def single_site(rho: float) -> MacroField:
    grid = Grid.periodic(1, 1)
    return MacroField(grid, np.array([rho]), np.zeros((1, 1)), np.zeros(1))


def pulse(dimension: int) -> harness.InitialCondition:
    return lambda grid: gauss_pulse(dimension, grid)


def constant(grid: Grid) -> MacroField:
    f = MacroField.zeros(grid)
    f.rho[...] = 0.3
    f.u[...] = 0.2
    f.theta[...] = -0.1
    return f


class NormTests(TestCase):
    def test_examples(self) -> None:
        assert harness.l2_space_time([single_site(2.0)], 1.0)["rho"] == 2.0
        assert harness.l2_space_time([single_site(0.0)] * 3, 1.0)["rho"] == 0.0
        grid = Grid.periodic(1, 2, 2.0)
        f = MacroField(grid, np.array([3.0, 4.0]), np.zeros((1, 2)), np.zeros(2))
        assert harness.l2_space_time([f], 1.0) == {"rho": 5.0, "u_x": 0.0, "theta": 0.0}
        assert harness.l2_space(f, 1.0)["rho"] == 5.0
        with self.assertRaises(EmptySeries):
            harness.l2_space_time([], 1.0)

    def test_norm_relations(self) -> None:
        rng = np.random.default_rng(9)
        grid = Grid.periodic(2, 6)
        rho, theta = rng.normal(size=(2, 6, 6))
        f = MacroField(grid, rho, rng.normal(size=(2, 6, 6)), theta)
        dt = grid.eps
        space_time = harness.l2_space_time([f], dt)
        space = harness.l2_space(f, dt)
        flipped = MacroField(grid, -3 * f.rho, -3 * f.u, -3 * f.theta)
        scaled = harness.l2_space(flipped, dt)
        for name in space:
            assert abs(space_time[name] - space[name] * math.sqrt(dt)) < 1e-14
            assert abs(scaled[name] - 3 * space[name]) < 1e-14


class TableTests(TestCase):
    def test_manufactured_order(self) -> None:
        table = harness.ConvergenceTable("manufactured", "space")
        for n in (10, 20, 40, 80):
            table.add(n, 1 / n, n, {"rho": 7.0 / n**2})
        assert table.rows[0].orders == {}
        for row in table.rows[1:]:
            order = row.orders["rho"]
            assert order is not None and abs(order - 2.0) < 1e-10
        with self.assertRaises(UnorderedResolutions):
            table.add(40, 1 / 40, 40, {"rho": 1.0})

        out = io.StringIO()
        table.write_csv(out)
        lines = out.getvalue().splitlines()
        assert lines[0] == "N,eps,steps,end_time,err_rho,order_rho"
        assert lines[1].startswith("10,0.10000000000000001,10,")
        assert lines[1].endswith(",")
        assert len(lines) == 5

    def test_zero_errors_have_no_order(self) -> None:
        table = harness.ConvergenceTable("zero", "space")
        table.add(10, 0.1, 10, {"rho": 0.0})
        row = table.add(20, 0.05, 20, {"rho": 0.0})
        assert row.orders["rho"] is None


class EndTimeTests(TestCase):
    def test_steps_round_half_up(self) -> None:
        assert harness.steps_for(2.5, 1.0) == 3
        assert harness.steps_for(1.0, 1 / 50) == 50
        assert harness.steps_for(0.0, 0.1) == 0

    def test_table_1(self) -> None:
        rows = harness.end_time_table(math.sqrt(21 / 5), 2.0, list(TABLE_1))
        for row in rows:
            assert abs(row.gap - TABLE_1[row.resolution]) < 1e-4, row
            assert abs(row.achieved - row.steps * row.eps) < 1e-15
        assert [row.steps for row in rows] == [26, 41, 82, 123]


class ConvergenceTests(TestCase):
    def test_d1q3_is_exact(self) -> None:
        table = harness.convergence_vs_analytic(
            lattice.build_d1q3(), pulse(1), [50, 100, 200, 400], 1.0
        )
        assert [row.steps for row in table.rows] == [50, 100, 200, 400]
        for row in table.rows:
            assert max(row.errors.values()) <= 1e-12, row

    def test_constant_is_exact(self) -> None:
        table = harness.convergence_vs_analytic(
            lattice.build_d1q3(), constant, [10, 20], 0.5
        )
        for row in table.rows:
            assert max(row.errors.values()) <= 1e-14, row

    def test_nesting(self) -> None:
        vs = lattice.by_name("d2q5")
        with self.assertRaises(NonNestedResolutions):
            harness.convergence_self(vs, pulse(2), [30], 100, 1.0, length=2.0)
        with self.assertRaises(UnorderedResolutions):
            harness.convergence_self(vs, pulse(2), [50, 25], 100, 1.0, length=2.0)

    def test_default_domain_follows_the_pulse(self) -> None:
        table = harness.convergence_self(
            lattice.by_name("d2q5"), pulse(2), [20], 40, 0.2
        )
        assert table.rows[0].eps == 2.0 / 20 and table.rows[0].steps == 2
        analytic = harness.convergence_vs_analytic(
            lattice.build_d1q3(), pulse(1), [50], 0.1
        )
        assert analytic.rows[0].eps == 1.0 / 50

    def test_self_comparison_is_zero(self) -> None:
        vs = lattice.by_name("d2q5")
        table = harness.convergence_self(vs, pulse(2), [20], 20, 0.5, length=2.0)
        assert max(table.rows[0].errors.values()) == 0.0

    def test_d2q5_second_order(self) -> None:
        for name in ["d2q5", "d2q5-diatomic"]:
            table = harness.convergence_self(
                lattice.by_name(name), pulse(2), [25, 50, 100], 400, 1.0, length=2.0
            )
            order = table.order("rho")
            assert order is not None and 1.85 <= order <= 2.3, (name, order)

    @skipUnless(os.environ.get(SLOW_TESTS_ENV), f"set {SLOW_TESTS_ENV}=1")
    def test_d3q7_second_order(self) -> None:
        for name in ["d3q7", "d3q7-diatomic"]:
            table = harness.convergence_self(
                lattice.by_name(name), pulse(3), [16, 32], 96, 2.0, length=2.0
            )
            order = table.order("rho")
            assert order is not None and 1.8 <= order <= 2.4, (name, order)
