"""
Tests for the embedding-method IBVP solver.
"""

import unittest

import numpy as np
from scipy.special import erfc

from fracdiff.errors import DomainError
from fracdiff.grid import TimeGrid
from fracdiff.ibvp import (
    BoundaryPath,
    DerivativeKind,
    IBVPProblem,
    InitialData,
    RobinBC,
    boundary_residuals,
    compute_h,
    eval_u,
    eval_ux,
    kernel_matrix,
    parse_path,
    solve,
)
from fracdiff.pulses import PulseSum
from fracdiff.specfun import FracIndex, delta_mu, r_eval
from fracdiff.volterra import PanelDensity


def half_line(nu, kind="caputo", value=1.0, initial=None, kappa=1.0):
    """Dirichlet data ``value`` at x = 0, domain (0, inf)."""
    return IBVPProblem(
        kind=kind,
        nu=nu,
        kappa=kappa,
        left=RobinBC.dirichlet(value),
        right=RobinBC(1.0, 0.0),
        left_path=BoundaryPath.constant(0.0),
        right_path=BoundaryPath.plus_infinity(),
        initial=initial or InitialData.constant(0.0),
    )


def whole_line(initial, nu=0.5, kind="caputo"):
    return IBVPProblem(
        kind=kind,
        nu=nu,
        kappa=1.0,
        left=RobinBC(1.0, 0.0),
        right=RobinBC(1.0, 0.0),
        left_path=BoundaryPath.minus_infinity(),
        right_path=BoundaryPath.plus_infinity(),
        initial=initial,
    )


def melting_front(nu, kind="caputo"):
    """u = 0 on a moving left edge, u -> -1 far to the right, u(x, 0) = -1."""
    return IBVPProblem(
        kind=kind,
        nu=nu,
        kappa=1.0,
        left=RobinBC.dirichlet(0.0),
        right=RobinBC.dirichlet(-1.0),
        left_path=BoundaryPath.power(1.0, nu),
        right_path=BoundaryPath.plus_infinity(),
        initial=InitialData.constant(-1.0),
    )


class TestDerivativeKind(unittest.TestCase):
    def test_parse(self):
        self.assertIs(DerivativeKind.parse("Caputo"), DerivativeKind.CAPUTO)
        self.assertIs(DerivativeKind.parse("RL"), DerivativeKind.RIEMANN_LIOUVILLE)
        self.assertIs(DerivativeKind.parse("riemann_liouville"), DerivativeKind.RIEMANN_LIOUVILLE)
        with self.assertRaises(DomainError):
            DerivativeKind.parse("gruenwald")

    def test_orders(self):
        self.assertAlmostEqual(DerivativeKind.CAPUTO.initial_order(0.3), 0.7)
        self.assertAlmostEqual(DerivativeKind.RIEMANN_LIOUVILLE.initial_order(0.3), 0.3)
        self.assertAlmostEqual(DerivativeKind.CAPUTO.initial_flux_order(0.3), 0.4)
        self.assertEqual(DerivativeKind.RIEMANN_LIOUVILLE.initial_flux_order(0.3), 0.0)


class TestParsePath(unittest.TestCase):
    def test_constant(self):
        path = parse_path("0")
        self.assertTrue(path.is_constant)
        np.testing.assert_allclose(path(np.array([0.0, 3.0])), [0.0, 0.0])

    def test_linear(self):
        self.assertAlmostEqual(float(parse_path("1+0.5*t")(2.0)), 2.0)
        self.assertAlmostEqual(float(parse_path("1 - 2*t")(0.25)), 0.5)
        self.assertAlmostEqual(float(parse_path("2*t")(1.5)), 3.0)
        self.assertTrue(parse_path("3+0*t").is_constant)

    def test_power(self):
        path = parse_path("1.2*t^0.4")
        self.assertFalse(path.is_constant)
        self.assertAlmostEqual(float(path(2.0)), 1.2 * 2.0 ** 0.4)

    def test_infinities(self):
        self.assertEqual(parse_path("+infinity").kind, BoundaryPath.plus_infinity().kind)
        self.assertEqual(parse_path("inf").kind, BoundaryPath.plus_infinity().kind)
        left = parse_path("-infinity")
        self.assertTrue(left.is_infinite)
        self.assertEqual(float(left(1.0)), -np.inf)

    def test_rejects_other_expressions(self):
        for text in ("sin(t)", "t^2+1", "", "2*x"):
            with self.assertRaises(DomainError):
                parse_path(text)

    def test_power_needs_positive_exponent(self):
        with self.assertRaises(DomainError):
            BoundaryPath.power(1.0, 0.0)


class TestProblemValidation(unittest.TestCase):
    def test_nu_range(self):
        with self.assertRaises(DomainError):
            half_line(0.7)

    def test_kappa(self):
        with self.assertRaises(DomainError):
            half_line(0.5, kappa=0.0)

    def test_paths_must_be_ordered(self):
        with self.assertRaises(DomainError):
            IBVPProblem(
                kind="caputo",
                nu=0.5,
                kappa=1.0,
                left=RobinBC.dirichlet(1.0),
                right=RobinBC.dirichlet(1.0),
                left_path=BoundaryPath.constant(1.0),
                right_path=BoundaryPath.constant(0.5),
                initial=InitialData.constant(0.0),
            )
        with self.assertRaises(DomainError):
            IBVPProblem(
                kind="caputo",
                nu=0.5,
                kappa=1.0,
                left=RobinBC.dirichlet(1.0),
                right=RobinBC.dirichlet(1.0),
                left_path=BoundaryPath.plus_infinity(),
                right_path=BoundaryPath.plus_infinity(),
                initial=InitialData.constant(0.0),
            )

    def test_boundary_row_needs_a_coefficient(self):
        with self.assertRaises(DomainError):
            RobinBC(0.0, 0.0)

    def test_initial_data_validation(self):
        with self.assertRaises(DomainError):
            InitialData.piecewise_constant([0.0, 1.0], [1.0, 2.0])
        with self.assertRaises(DomainError):
            InitialData.sampled([0.0, 0.0], [1.0, 2.0])
        with self.assertRaises(DomainError):
            InitialData.constant(1.0, extension="mirror")


class TestInitialData(unittest.TestCase):
    def test_extensions(self):
        data = InitialData.sampled([0.0, 1.0], [1.0, 3.0])
        np.testing.assert_allclose(data.extended(0.0, 1.0)(np.array([-1.0, 0.5, 2.0])), [1.0, 2.0, 3.0])
        zero = data.with_extension("zero").extended(0.0, 1.0)
        np.testing.assert_allclose(zero(np.array([-1.0, 0.5, 2.0])), [0.0, 2.0, 0.0])

    def test_uniform_value(self):
        self.assertEqual(InitialData.constant(2.0).uniform_value(0.0, np.inf), 2.0)
        self.assertIsNone(InitialData.constant(2.0, "zero").uniform_value(0.0, np.inf))
        self.assertEqual(InitialData.constant(2.0, "zero").uniform_value(-np.inf, np.inf), 2.0)
        self.assertIsNone(InitialData.piecewise_constant([0.0], [1.0, 1.0]).uniform_value(-1.0, 1.0))


class TestKernelMatrix(unittest.TestCase):
    def test_motionless_diagonal_is_a_pulse(self):
        problem = half_line(0.4)
        value = kernel_matrix(problem, 1.0, 0.5)
        self.assertAlmostEqual(value[0, 0], 0.5 * delta_mu(0.8, 0.5), places=12)
        self.assertEqual(value[1, 1], 0.0)
        self.assertEqual(value[0, 1], 0.0)

    def test_cross_kernel_is_erfc(self):
        problem = IBVPProblem(
            kind="caputo",
            nu=0.5,
            kappa=1.0,
            left=RobinBC.dirichlet(0.0),
            right=RobinBC.dirichlet(0.0),
            left_path=BoundaryPath.constant(0.0),
            right_path=BoundaryPath.constant(1.0),
            initial=InitialData.constant(0.0),
        )
        value = kernel_matrix(problem, 1.0, 0.0)
        self.assertAlmostEqual(value[0, 1], 0.5 * erfc(0.5), places=10)
        self.assertAlmostEqual(value[1, 0], value[0, 1], places=14)

    def test_flux_rows(self):
        problem = IBVPProblem(
            kind="caputo",
            nu=0.4,
            kappa=2.0,
            left=RobinBC(0.0, 1.0),
            right=RobinBC(1.0, 0.0),
            left_path=BoundaryPath.constant(0.0),
            right_path=BoundaryPath.plus_infinity(),
            initial=InitialData.constant(0.0),
        )
        value = kernel_matrix(problem, 1.0, 0.0)
        expected = -delta_mu(0.4, 1.0) / (2.0 * np.sqrt(2.0))
        self.assertAlmostEqual(value[0, 0], expected, places=12)

    def test_time_order(self):
        with self.assertRaises(DomainError):
            kernel_matrix(half_line(0.4), 1.0, 1.0)


class TestComputeH(unittest.TestCase):
    def setUp(self):
        self.grid = TimeGrid(1.0, 16)

    def test_constant_initial_data_caputo(self):
        h_minus, h_plus = compute_h(half_line(0.4, initial=InitialData.constant(-0.5)), self.grid)
        self.assertEqual(h_minus, PulseSum.constant(1.5))
        self.assertTrue(h_plus.is_zero)

    def test_constant_initial_data_rl(self):
        h_minus, _ = compute_h(half_line(0.4, kind="rl", initial=InitialData.constant(-0.5)), self.grid)
        self.assertEqual(h_minus, PulseSum.constant(1.0) + PulseSum.pulse(0.8, 0.5))

    def test_melting_front(self):
        h_minus, h_plus = compute_h(melting_front(0.4), self.grid)
        self.assertEqual(h_minus, PulseSum.constant(1.0))
        self.assertEqual(h_plus, PulseSum.constant(-1.0))

    def test_sampled_boundary_data(self):
        problem = IBVPProblem(
            kind="caputo",
            nu=0.5,
            kappa=1.0,
            left=RobinBC(1.0, 0.0, lambda t: np.sin(t)),
            right=RobinBC(1.0, 0.0),
            left_path=BoundaryPath.constant(0.0),
            right_path=BoundaryPath.plus_infinity(),
            initial=InitialData.constant(0.25),
        )
        h_minus, _ = compute_h(problem, self.grid)
        t = self.grid.nodes[1:]
        np.testing.assert_allclose(h_minus.values[1:], np.sin(t) - 0.25)


class TestSolve(unittest.TestCase):
    def test_half_line_density_in_closed_form(self):
        solution = solve(half_line(0.4), TimeGrid(1.0, 16))
        self.assertEqual(solution.phi_minus, PulseSum.pulse(0.2, 2.0))
        self.assertTrue(solution.phi_plus.is_zero)
        self.assertEqual(solution.diagnostics["route"], "left:abel,right:abel")
        np.testing.assert_allclose(
            solution.density_samples().values[1:], 2.0 * delta_mu(0.2, solution.grid.nodes[1:])
        )

    def test_rl_density_has_dirac_part(self):
        solution = solve(half_line(0.3, kind="rl", initial=InitialData.constant(0.5)), TimeGrid(1.0, 16))
        self.assertEqual(solution.phi_minus, PulseSum.pulse(0.4, 2.0) - PulseSum.dirac(1.0))

    def test_melting_front_far_density(self):
        nu = 0.4
        solution = solve(melting_front(nu), TimeGrid(1.0, 16))
        self.assertEqual(solution.phi_plus, PulseSum.pulse(1.0 - 2.0 * nu, -2.0))
        self.assertIsInstance(solution.phi_minus, PanelDensity)
        self.assertEqual(solution.diagnostics["route"], "left:volterra,right:abel")

    def test_pure_initial_value_problem(self):
        solution = solve(whole_line(InitialData.constant(3.0)), TimeGrid(1.0, 16))
        self.assertEqual(solution.diagnostics["route"], "free")
        for x, t in ((-5.0, 0.1), (0.0, 1.0), (7.0, 30.0)):
            self.assertAlmostEqual(eval_u(solution, x, t), 3.0, places=12)
            self.assertEqual(eval_ux(solution, x, t), 0.0)

    def test_grid_must_resolve_kernels(self):
        with self.assertRaises(DomainError):
            solve(half_line(0.4), TimeGrid(1.0, 8))


class TestEvaluation(unittest.TestCase):
    def test_half_line_classical_limit(self):
        grid = TimeGrid(2.0, 32)
        caputo = solve(half_line(0.5), grid)
        rl = solve(half_line(0.5, kind="rl"), grid)
        for x in (0.0, 0.3, 1.0, 2.5):
            for t in (0.2, 1.0, 2.0):
                expected = erfc(x / (2.0 * np.sqrt(t)))
                self.assertAlmostEqual(eval_u(caputo, x, t), expected, delta=1e-3)
                self.assertAlmostEqual(eval_u(rl, x, t), eval_u(caputo, x, t), delta=1e-6)

    def test_constant_initial_data_caputo_profile(self):
        nu, u0 = 0.3, -0.4
        solution = solve(half_line(nu, initial=InitialData.constant(u0)), TimeGrid(1.0, 16))
        x, t = 0.7, 1.3
        self.assertAlmostEqual(
            eval_u(solution, x, t), u0 + (1.0 - u0) * r_eval(FracIndex(1.0, nu), x, t), places=10
        )
        self.assertAlmostEqual(
            eval_ux(solution, x, t), -(1.0 - u0) * r_eval(FracIndex(1.0 - nu, nu), x, t), places=10
        )

    def test_constant_initial_data_rl_flux(self):
        nu, u0 = 0.3, -0.4
        solution = solve(half_line(nu, kind="rl", initial=InitialData.constant(u0)), TimeGrid(1.0, 16))
        x, t = 0.7, 1.3
        expected = -r_eval(FracIndex(1.0 - nu, nu), x, t) + u0 * r_eval(FracIndex(nu, nu), x, t)
        self.assertAlmostEqual(eval_ux(solution, x, t), expected, places=10)

    def test_flux_matches_finite_differences(self):
        solution = solve(half_line(0.3, initial=InitialData.constant(0.2)), TimeGrid(1.0, 16))
        x, t, step = 0.8, 0.9, 1e-5
        numeric = (eval_u(solution, x + step, t) - eval_u(solution, x - step, t)) / (2.0 * step)
        self.assertAlmostEqual(eval_ux(solution, x, t) / numeric, 1.0, delta=1e-4)

    def test_step_initial_data_on_whole_line(self):
        solution = solve(whole_line(InitialData.piecewise_constant([0.0], [1.0, 0.0])), TimeGrid(1.0, 16))
        x, t = 0.5, 1.0
        self.assertAlmostEqual(eval_u(solution, x, t), 0.5 * erfc(x / (2.0 * np.sqrt(t))), delta=1e-6)
        expected_ux = -np.exp(-x * x / (4.0 * t)) / (2.0 * np.sqrt(np.pi * t))
        self.assertAlmostEqual(eval_ux(solution, x, t), expected_ux, delta=1e-6)

    def test_slab_with_dirichlet_ends(self):
        problem = IBVPProblem(
            kind="caputo",
            nu=0.5,
            kappa=1.0,
            left=RobinBC.dirichlet(1.0),
            right=RobinBC.dirichlet(1.0),
            left_path=BoundaryPath.constant(0.0),
            right_path=BoundaryPath.constant(2.0),
            initial=InitialData.constant(0.0),
        )
        grid = TimeGrid(0.5, 64)
        solution = solve(problem, grid)
        self.assertEqual(solution.diagnostics["route"], "volterra-2x2")
        self.assertLess(max(solution.diagnostics["residual_norms"]), 1e-10)
        self.assertAlmostEqual(eval_u(solution, 1.0, 0.5), 0.6292, delta=2e-2)

        residuals = boundary_residuals(solution, grid.nodes[[16, 32, 64]])
        self.assertEqual(set(residuals), {"left", "right"})
        for values in residuals.values():
            self.assertLess(np.max(np.abs(values)), 1e-8)

    def test_extension_does_not_change_solution(self):
        grid = TimeGrid(0.5, 64)
        carried = solve(half_line(0.5, initial=InitialData.constant(0.3)), grid)
        zeroed = solve(half_line(0.5, initial=InitialData.constant(0.3, extension="zero")), grid)
        self.assertEqual(zeroed.diagnostics["route"], "left:volterra,right:abel")
        x, t = 1.0, 0.5
        expected = 0.3 + 0.7 * erfc(x / (2.0 * np.sqrt(t)))
        self.assertAlmostEqual(eval_u(carried, x, t), expected, places=9)
        self.assertAlmostEqual(eval_u(zeroed, x, t), expected, delta=5e-3)

    def test_out_of_domain(self):
        solution = solve(half_line(0.4), TimeGrid(1.0, 16))
        with self.assertRaises(DomainError):
            eval_u(solution, -0.1, 0.5)
        with self.assertRaises(DomainError):
            eval_ux(solution, 0.5, 0.0)

    def test_beyond_solved_time_span(self):
        solution = solve(melting_front(0.4), TimeGrid(1.0, 16))
        with self.assertRaises(DomainError):
            eval_u(solution, 5.0, 1.5)


if __name__ == "__main__":
    unittest.main()
