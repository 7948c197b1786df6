"""
Tests for the one-phase fractional Stefan problems.
"""

import dataclasses
import unittest

import numpy as np
import pytest
from scipy.special import erf, erfc

from fracdiff.errors import ConvergenceError, DomainError, UnsupportedProblemError
from fracdiff.grid import TimeGrid
from fracdiff.ibvp import DerivativeKind
from fracdiff.stefan import (
    NewtonConfig,
    neumann_alpha,
    rl_ansatz_check,
    stefan1_alpha,
    stefan1_equation,
    stefan1_from_u0,
    stefan1_residuals,
    stefan1_solve,
    stefan2_eval_u,
    stefan2_solve,
)

NEUMANN_ALPHA = 0.620063


class TestStefan1Alpha(unittest.TestCase):
    def test_neumann_limit(self):
        alpha = stefan1_alpha(0.5, 1.0)
        self.assertAlmostEqual(alpha, NEUMANN_ALPHA, delta=1e-4)
        self.assertAlmostEqual(alpha, neumann_alpha(1.0), places=9)

    def test_equation_vanishes_at_root(self):
        alpha = stefan1_alpha(0.3, 2.0)
        self.assertLess(abs(float(stefan1_equation(alpha, 0.3, 2.0))), 1e-11)

    def test_alpha_decreases_with_latent_heat(self):
        alphas = [stefan1_alpha(0.4, r) for r in (0.5, 1.0, 2.0, 4.0)]
        self.assertTrue(all(a > b for a, b in zip(alphas, alphas[1:])))

    def test_domain(self):
        with self.assertRaises(DomainError):
            stefan1_alpha(0.6, 1.0)
        with self.assertRaises(DomainError):
            stefan1_alpha(0.4, 0.0)
        with self.assertRaises(DomainError):
            neumann_alpha(-1.0)


class TestStefan1Solution(unittest.TestCase):
    def test_neumann_solution(self):
        sol = stefan1_solve(0.5, 1.0)
        self.assertAlmostEqual(sol.u0, -erfc(sol.alpha) / erf(sol.alpha), places=10)

        t = np.linspace(0.2, 3.0, 10)[:, None]
        x = np.linspace(0.0, 1.0, 10)[None, :] * sol.eta(t)
        expected = 1.0 - erf(x / (2.0 * np.sqrt(t))) / erf(sol.alpha)
        np.testing.assert_allclose(sol.u(x, t), expected, atol=1e-10)

    def test_front_and_boundary_values(self):
        sol = stefan1_solve(0.3, 1.0)
        xs, u = sol.profile(1.5, n_points=11)
        self.assertEqual(len(xs), 11)
        self.assertAlmostEqual(xs[-1], float(sol.eta(1.5)))
        self.assertAlmostEqual(u[0], 1.0, places=12)
        self.assertAlmostEqual(u[-1], 0.0, places=10)

    def test_front_scaling(self):
        sol = stefan1_solve(0.3, 1.0)
        self.assertAlmostEqual(sol.eta(4.0) / sol.eta(1.0), 4.0 ** 0.3, places=12)

    def test_flux_sign(self):
        sol = stefan1_solve(0.4, 1.0)
        self.assertLess(sol.ux(0.1, 1.0), 0.0)

    def test_outside_domain(self):
        sol = stefan1_solve(0.4, 1.0)
        with self.assertRaises(DomainError):
            sol.u(float(sol.eta(1.0)) + 0.1, 1.0)
        with self.assertRaises(DomainError):
            sol.ux(0.1, 0.0)
        with self.assertRaises(DomainError):
            sol.profile(1.0, n_points=1)

    def test_rl_matches_caputo_at_half(self):
        caputo = stefan1_solve(0.5, 1.0, "caputo")
        rl = stefan1_solve(0.5, 1.0, "rl")
        self.assertEqual(rl.kind, DerivativeKind.RIEMANN_LIOUVILLE)
        self.assertEqual((rl.alpha, rl.u0), (caputo.alpha, caputo.u0))

    def test_rl_below_half_is_unsupported(self):
        with self.assertRaises(UnsupportedProblemError):
            stefan1_solve(0.3, 1.0, "rl")

    def test_from_u0_round_trip(self):
        sol = stefan1_solve(0.3, 1.5)
        back = stefan1_from_u0(0.3, sol.u0)
        self.assertAlmostEqual(back.alpha, sol.alpha, places=9)
        self.assertAlmostEqual(back.r, 1.5, places=8)

    def test_from_u0_needs_negative_u0(self):
        with self.assertRaises(DomainError):
            stefan1_from_u0(0.3, 0.5)


@pytest.mark.parametrize("nu", [0.25, 0.3, 0.4])
def test_residuals_vanish_at_computed_alpha(nu):
    report = stefan1_residuals(stefan1_solve(nu, 1.0), [0.5, 1.0, 2.0])
    assert np.max(report["right_bc"]) <= 1e-10
    assert np.max(report["stefan"]) <= 1e-10


def test_residuals_detect_wrong_alpha():
    sol = stefan1_solve(0.3, 1.0)
    report = stefan1_residuals(dataclasses.replace(sol, alpha=sol.alpha * 1.01), [0.5, 1.0, 2.0])
    assert np.max(report["right_bc"]) >= 1e-4
    assert np.max(report["stefan"]) >= 1e-4


class TestRLAnsatzCheck(unittest.TestCase):
    def test_expression_varies_in_time(self):
        report = rl_ansatz_check(0.3, 0.5, [0.5, 1.0, 2.0, 4.0], u0=-0.5)
        self.assertGreater(report.spread, 1e-3)
        self.assertFalse(report.trivial)

    def test_default_u0_from_alpha(self):
        alpha = stefan1_alpha(0.3, 1.0)
        report = rl_ansatz_check(0.3, alpha, [0.5, 1.0, 2.0])
        self.assertLess(report.u0, 0.0)
        self.assertGreater(report.spread, 1e-3)

    def test_zero_u0_is_trivial(self):
        report = rl_ansatz_check(0.3, 0.5, [0.5, 1.0, 2.0], u0=0.0)
        self.assertTrue(report.trivial)
        self.assertEqual(report.spread, 0.0)

    def test_domain(self):
        with self.assertRaises(DomainError):
            rl_ansatz_check(0.5, 0.5, [0.5, 1.0])
        with self.assertRaises(DomainError):
            rl_ansatz_check(0.3, 0.5, [1.0])
        with self.assertRaises(DomainError):
            rl_ansatz_check(0.3, -0.5, [0.5, 1.0])


class TestNewtonConfig(unittest.TestCase):
    def test_validation(self):
        with self.assertRaises(DomainError):
            NewtonConfig(tol=0.0)
        with self.assertRaises(DomainError):
            NewtonConfig(damping=1.0)
        with self.assertRaises(DomainError):
            NewtonConfig(startup_substeps=0)


class TestStefan2(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.grid = TimeGrid(1.0, 32)
        cls.caputo = stefan2_solve("caputo", 0.5, 1.0, cls.grid)

    def test_shapes(self):
        state = self.caputo
        self.assertEqual(state.eta.values.shape, (33,))
        self.assertEqual(state.phi_minus.values.shape, (33,))
        self.assertEqual(len(state.edges), 32 + 4)
        self.assertEqual(state.eta.values[0], 0.0)

    def test_residuals(self):
        self.assertLessEqual(np.max(self.caputo.residual_bc), 1e-8)
        self.assertLessEqual(np.max(self.caputo.residual_stefan), 1e-8)

    def test_turning_front_is_flagged(self):
        # the early flux pushes the front backwards before it recovers
        with self.assertLogs("fracdiff.stefan", level="WARNING") as logs:
            state = stefan2_solve("caputo", 0.5, 1.0, self.grid)
        self.assertFalse(state.monotone)
        self.assertEqual(state.direction, "non-monotone")
        self.assertLess(state.eta.values[1], 0.0)
        self.assertLess(np.min(state.eta.values), state.eta.values[-1])
        self.assertTrue(any("not monotone" in line for line in logs.output))
        self.assertNotIn("np.float64", "\n".join(logs.output))

    def test_direction_labels(self):
        ramp = np.linspace(0.0, 1.0, len(self.caputo.edges))
        cases = {"increasing": ramp, "decreasing": -ramp, "constant": np.zeros_like(ramp)}
        for label, eta in cases.items():
            state = dataclasses.replace(self.caputo, eta_edges=eta)
            self.assertEqual(state.direction, label)
            self.assertTrue(state.monotone)

    def test_rl_coincides_with_caputo_at_half(self):
        rl = stefan2_solve("rl", 0.5, 1.0, self.grid)
        np.testing.assert_allclose(rl.eta.values, self.caputo.eta.values, atol=5e-10)

    def test_field_vanishes_on_front(self):
        front = float(self.caputo.eta_at(1.0))
        self.assertAlmostEqual(stefan2_eval_u(self.caputo, front, 1.0), 0.0, delta=1e-8)

    def test_far_field(self):
        front = float(self.caputo.eta_at(1.0))
        self.assertAlmostEqual(stefan2_eval_u(self.caputo, front + 50.0, 1.0), -1.0, delta=1e-6)

    def test_eval_domain(self):
        front = float(self.caputo.eta_at(0.5))
        with self.assertRaises(DomainError):
            stefan2_eval_u(self.caputo, front - 0.5, 0.5)
        with self.assertRaises(DomainError):
            stefan2_eval_u(self.caputo, front + 1.0, 2.0)

    def test_fractional_order(self):
        state = stefan2_solve("caputo", 0.4, 1.0, self.grid)
        self.assertLessEqual(np.max(state.residual_bc), 1e-8)
        self.assertLessEqual(np.max(state.residual_stefan), 1e-8)
        self.assertEqual(state.eta.values[0], 0.0)

    def test_needs_fine_grid(self):
        with self.assertRaises(DomainError):
            stefan2_solve("caputo", 0.4, 1.0, TimeGrid(1.0, 16))

    def test_newton_budget_exhausted(self):
        with self.assertRaises(ConvergenceError):
            stefan2_solve("caputo", 0.4, 1.0, self.grid, newton=NewtonConfig(tol=1e-15, max_iter=1))


@pytest.mark.parametrize("nu", [0.4, 0.5])
def test_stefan2_self_convergence(nu):
    fronts = [stefan2_solve("caputo", nu, 1.0, TimeGrid(1.0, n)).eta.values for n in (32, 64, 128)]
    coarse = fronts[0]
    middle = fronts[1][::2]
    fine = fronts[2][::4]
    ratio = np.max(np.abs(coarse - middle)) / np.max(np.abs(middle - fine))
    assert ratio >= 1.5


if __name__ == "__main__":
    unittest.main()
