from unittest import TestCase

import numpy as np

from leelbm import kinetic, lattice
from leelbm.settings import DEFAULT_SEED


class KineticTests(TestCase):
    def test_moments_of_equilibrium(self) -> None:
        for vs in lattice.builtin_sets():
            rho, u, theta = kinetic.random_states(vs, 1000, DEFAULT_SEED)
            g = kinetic.equilibrium_arrays(vs, rho, u, theta)
            assert g.shape == (1000, vs.n)
            back_rho, back_u, back_theta = kinetic.moments_arrays(vs, g)
            defect = max(
                np.abs(back_rho - rho).max(),
                np.abs(back_u - u).max(),
                np.abs(back_theta - theta).max(),
            )
            assert defect <= 1e-13, (vs.name, defect)

    def test_rest_state(self) -> None:
        vs = lattice.by_name("d2q5")
        g = kinetic.equilibrium(vs, kinetic.MacroState(0.0, [0.0, 0.0], 0.0))
        assert not g.any()

    def test_pressure(self) -> None:
        vs = lattice.build_d2q5_diatomic()
        m = kinetic.MacroState(0.3, [0.0, 0.0], -0.1)
        assert abs(m.pressure(vs) - (20 / 3 * -0.1 + 0.3 * 0.3)) < 1e-15

    def test_projector(self) -> None:
        for vs in lattice.builtin_sets():
            e = kinetic.equilibrium_projector(vs)
            assert np.abs(e @ e - e).max() <= 1e-12, vs.name
            assert np.linalg.matrix_rank(e) == vs.dimension + 2, vs.name

    def test_polyatomic_constraints(self) -> None:
        for name in ["d2q5-diatomic", "d3q7-diatomic"]:
            report = kinetic.verify_polyatomic_constraints(
                lattice.by_name(name), 1000, DEFAULT_SEED
            )
            assert report.passed, report.as_dict()
            assert report.trials == 1000

    def test_flux_moments(self) -> None:
        m = kinetic.MacroState(0.2, [0.1, -0.3, 0.05], 0.4)
        for name in ["d3q7", "d3q19", "d3q7-diatomic"]:
            vs = lattice.by_name(name)
            report = kinetic.verify_flux_moments(vs, m)
            assert report.defect < 1e-13, (name, report.defect)
            assert report.third_moment.shape == (3, 3, 3)

    def test_array_shapes(self) -> None:
        vs = lattice.by_name("d2q5")
        rho = np.zeros((4, 6))
        u = np.zeros((2, 4, 6))
        g = kinetic.equilibrium_arrays(vs, rho, u, rho)
        assert g.shape == (4, 6, 5)
        r, v, t = kinetic.moments_arrays(vs, g)
        assert r.shape == (4, 6) and v.shape == (2, 4, 6) and t.shape == (4, 6)

    def test_d1q3_equilibrium(self) -> None:
        vs = lattice.build_d1q3()
        density = kinetic.equilibrium(vs, kinetic.MacroState(1.0, [0.0], 0.0))
        np.testing.assert_allclose(density, [2 / 3, 1 / 6, 1 / 6], atol=1e-15)
        velocity = kinetic.equilibrium(vs, kinetic.MacroState(0.0, [1.0], 0.0))
        np.testing.assert_allclose(velocity, [0.0, -0.5, 0.5], atol=1e-15)

    def test_equilibrium_is_linear(self) -> None:
        vs = lattice.by_name("d3q19")
        a = kinetic.MacroState(0.3, [0.1, 0.2, -0.4], -0.2)
        b = kinetic.MacroState(-1.1, [0.5, 0.0, 0.7], 0.9)
        combined = kinetic.MacroState(
            2 * a.rho_p - b.rho_p, 2 * a.u_p - b.u_p, 2 * a.theta_p - b.theta_p
        )
        expected = 2 * kinetic.equilibrium(vs, a) - kinetic.equilibrium(vs, b)
        np.testing.assert_allclose(
            kinetic.equilibrium(vs, combined), expected, atol=1e-14
        )

    def test_background_weights_as_populations(self) -> None:
        vs = lattice.build_d2q5_diatomic()
        m = kinetic.moments(vs, vs.weights.astype(float))
        assert abs(m.rho_p - 20 / 3) < 1e-14
        assert np.abs(m.u_p).max() < 1e-15
        assert abs(m.theta_p) < 1e-14

    def test_flux_examples(self) -> None:
        d1q3 = kinetic.verify_flux_moments(
            lattice.build_d1q3(), kinetic.MacroState(1.0, [0.0], 0.0)
        )
        np.testing.assert_allclose(d1q3.second_moment, [[1 / 3]], atol=1e-15)

        d2q5 = kinetic.verify_flux_moments(
            lattice.build_d2q5_mono(), kinetic.MacroState(0.0, [0.0, 0.0], 1.0)
        )
        np.testing.assert_allclose(d2q5.second_moment, np.eye(2), atol=1e-14)

        rest = kinetic.verify_flux_moments(
            lattice.by_name("d3q13"), kinetic.MacroState(0.0, [0.0] * 3, 0.0)
        )
        assert not rest.second_moment.any() and not rest.third_moment.any()
