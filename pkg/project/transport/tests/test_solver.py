import math

import numpy as np
from django.test import SimpleTestCase, override_settings

from transport.exceptions import CFLViolation, DiagnosticError, DomainError, HypothesisViolation
from transport.services.kernel import KernelSpec
from transport.services.operators import RadialField, velocity
from transport.services.solver import (BlowupTrace, BumpProfile, GaussianProfile, SolverConfig, advance_to,
                                       burgers_blowup_time, burgers_exact, c_tilde, certified_constant,
                                       convergence_order, default_delta, gronwall_check, hamilton_jacobi_dt,
                                       hamilton_jacobi_rate, hamilton_jacobi_step, make_initial_bump,
                                       ode_inequality_check, predict_blowup_time, refinement_study, run,
                                       steepest_slope, step)


def bump_factory(spec, height=1.0, radius=1.0):
    def factory(grid):
        return make_initial_bump(height, radius, grid, spec)
    return factory


class ProfileTest(SimpleTestCase):

    def test_bump_derivatives(self):
        profile = BumpProfile(1.0, 1.0)
        r = np.linspace(0.05, 0.95, 19)
        h = 1e-6
        fd1 = (profile.value(r + h) - profile.value(r - h)) / (2 * h)
        fd2 = (profile.d1(r + h) - profile.d1(r - h)) / (2 * h)
        self.assertTrue(np.allclose(profile.d1(r), fd1, rtol=1e-6, atol=1e-8))
        self.assertTrue(np.allclose(profile.d2(r), fd2, rtol=1e-6, atol=1e-6))

    def test_bump_is_compact(self):
        profile = BumpProfile(2.0, 0.5)
        self.assertEqual(profile.value(0.0), 2.0)
        self.assertEqual(float(profile.value(0.6)), 0.0)

    def test_invalid_bump(self):
        with self.assertRaises(DomainError):
            BumpProfile(-1.0, 1.0)


class ConfigTest(SimpleTestCase):

    def test_default_delta(self):
        self.assertEqual(default_delta(1.0), 0.5)
        self.assertEqual(default_delta(0.5), 0.25)
        self.assertEqual(default_delta(1.5), 0.25)
        self.assertEqual(default_delta(0.0), 0.5)
        self.assertEqual(default_delta(2.0), 0.5)

    def test_validation(self):
        spec = KernelSpec(2, 1.0)
        with self.assertRaises(DomainError):
            SolverConfig(spec, cfl=1.0)
        with self.assertRaises(DomainError):
            SolverConfig(spec, grid_M=1)
        with self.assertRaises(HypothesisViolation):
            SolverConfig(spec, delta=1.0)
        with self.assertRaises(DomainError):
            SolverConfig(spec, threshold_factor=1.0)
        self.assertEqual(SolverConfig(spec).delta, 0.5)

    def test_make_grid(self):
        grid = SolverConfig(KernelSpec(2, 1.0), grid_M=50).make_grid()
        self.assertEqual(grid.size, 51)
        self.assertEqual(grid[-1], 1.2)


class ComparisonOdeTest(SimpleTestCase):

    def test_c_tilde(self):
        self.assertAlmostEqual(c_tilde(2.0, 1.0, 0.5, 1.0), 1.0)
        self.assertAlmostEqual(c_tilde(2.0, 1.0, 0.5, 4.0), 0.5)
        with self.assertRaises(HypothesisViolation):
            c_tilde(1.0, 0.5, 0.5, 1.0)

    def test_predicted_time(self):
        spec = KernelSpec(2, 1.0)
        u0 = make_initial_bump(1.0, 1.0, SolverConfig(spec, grid_M=200).make_grid(), spec)
        T = predict_blowup_time(u0, 0.5, 1.0, constant=2.0)
        self.assertGreater(T, 0.0)
        self.assertAlmostEqual(predict_blowup_time(u0, 0.5, 1.0, constant=4.0), T / 2.0)
        with self.assertRaises(HypothesisViolation):
            predict_blowup_time(RadialField(u0.grid, u0.values, KernelSpec(2, 0.0)), 0.5, 1.0, constant=1.0)

    def test_short_trace(self):
        trace = BlowupTrace(delta=0.5, L=1.0, C_tilde=1.0, threshold=10.0)
        for t in range(3):
            trace.record(t, 1.0 + t, {'grad_sup': 1.0, 'support_radius': 1.0, 'curvature_sup': 1.0,
                                      'compression_sup': 1.0, 'grad_argmax': 0.5,
                                      'velocity_gradient_sup': 1.0, 'u_origin': 1.0})
        with self.assertRaises(DiagnosticError):
            ode_inequality_check(trace)
        report = ode_inequality_check(BlowupTrace(delta=0.5, L=1.0))
        self.assertFalse(report.checked)
        self.assertTrue(report.passed)


class DiagnosticsTest(SimpleTestCase):

    def test_cell_slope_next_to_plateau(self):
        # 평평한 구간 옆 계단은 PCHIP 절점 기울기가 모두 0
        grid = np.linspace(0.0, 1.0, 11)
        u = RadialField(grid, np.where(grid < 0.15, 1.0, 0.0), KernelSpec(2, 1.0))
        self.assertEqual(float(np.max(np.abs(u.nodal_derivative))), 0.0)
        grad, where = steepest_slope(u)
        self.assertAlmostEqual(grad, 10.0)
        self.assertAlmostEqual(where, 0.15)

    def test_smooth_field_uses_larger_slope(self):
        spec = KernelSpec(2, 1.0)
        u = make_initial_bump(1.0, 1.0, SolverConfig(spec, grid_M=400).make_grid(), spec)
        grad, _ = steepest_slope(u)
        self.assertGreaterEqual(grad, float(np.max(np.abs(u.nodal_derivative))))
        exact = np.max(np.abs(BumpProfile(1.0, 1.0).d1(np.linspace(0.0, 1.0, 20001))))
        self.assertLess(abs(grad / exact - 1.0), 1e-2)


class StepTest(SimpleTestCase):

    def setUp(self):
        self.spec = KernelSpec(2, 1.0)
        self.u = make_initial_bump(1.0, 1.0, SolverConfig(self.spec, grid_M=200).make_grid(), self.spec)

    def test_cfl_violation(self):
        with self.assertRaises(CFLViolation):
            step(self.u, 1.0)

    def test_range_and_origin(self):
        v = velocity(self.u)
        dt = 0.5 * np.min(np.diff(self.u.grid)) / v.sup
        u = self.u
        for _ in range(5):
            u = step(u, dt)
        self.assertGreaterEqual(u.values.min(), self.u.values.min() - 1e-14)
        self.assertLessEqual(u.values.max(), self.u.values.max() + 1e-14)
        self.assertLessEqual(abs(u.at_origin() - self.u.at_origin()), 1e-10)


class BurgersTest(SimpleTestCase):

    def test_gaussian_shock_time(self):
        self.assertAlmostEqual(burgers_blowup_time(GaussianProfile(1.0)), 0.25, places=12)

    def test_exact_solution(self):
        profile = GaussianProfile(1.0)
        r = np.linspace(0.0, 3.0, 31)
        self.assertTrue(np.allclose(burgers_exact(profile, 0.0, r), profile.value(r)))
        u = burgers_exact(profile, 0.1, r)
        self.assertAlmostEqual(float(u[0]), 1.0, places=14)
        self.assertTrue(np.all(u <= 1.0 + 1e-15))
        with self.assertRaises(DomainError):
            burgers_exact(profile, 0.25, r)

    def test_scheme_matches_characteristics(self):
        profile = GaussianProfile(1.0)
        grid = np.linspace(0.0, profile.extent / 0.8, 1601)
        u, steps = advance_to(RadialField(grid, profile.value(grid), KernelSpec(1, 2.0)), 0.1, cfl=0.5)
        self.assertGreater(steps, 0)
        self.assertLess(np.max(np.abs(u.values - burgers_exact(profile, 0.1, grid))), 1e-4)

    def test_convergence_order(self):
        report = convergence_order(GaussianProfile(1.0), 0.1, grids=(100, 200, 400))
        self.assertEqual(len(report.errors), 3)
        self.assertGreaterEqual(report.order, 1.5)

    def test_bump_matches_characteristics(self):
        profile = BumpProfile(1.0, 1.0)
        half = 0.5 * burgers_blowup_time(profile)
        spec = KernelSpec(2, 2.0)
        for M in (2000, 4000):
            with self.subTest(M=M):
                grid = SolverConfig(spec, grid_M=M, grid_strength=0.0).make_grid()
                u, _ = advance_to(make_initial_bump(1.0, 1.0, grid, spec), half, cfl=0.5)
                self.assertLess(np.max(np.abs(u.values - burgers_exact(profile, half, grid))), 1e-4)
                self.assertLessEqual(abs(u.at_origin() - 1.0), 1e-10)

    def test_detected_shock(self):
        spec = KernelSpec(2, 2.0)
        oracle = burgers_blowup_time(BumpProfile(1.0, 1.0))
        for M in (800, 2000, 4000):
            with self.subTest(M=M):
                config = SolverConfig(spec, grid_M=M, grid_strength=0.0, threshold_factor=10.0, output_stride=50)
                result = run(config, make_initial_bump(1.0, 1.0, config.make_grid(), spec), progress=False)
                self.assertEqual(result.trace.monitored, 'compression_sup')
                self.assertTrue(result.blowup)
                self.assertLess(abs(result.detected_time - oracle) / oracle, 0.15)
                self.assertLess(abs(result.trace.predicted_T_star - oracle) / oracle, 0.05)


class HamiltonJacobiTest(SimpleTestCase):

    def test_rate_is_exact_for_parabola(self):
        # 2 차 ENO 는 2 차식에서 정확 (상수 연장 옆 마지막 두 절점 제외)
        grid = SolverConfig(KernelSpec(2, 2.0), grid_M=100).make_grid()
        rate = hamilton_jacobi_rate(grid, -grid ** 2)
        self.assertTrue(np.allclose(rate[:-2], -4.0 * grid[:-2] ** 2, rtol=1e-10, atol=1e-12))
        self.assertEqual(rate[0], 0.0)

    def test_flat_field_is_stationary(self):
        grid = np.linspace(0.0, 1.2, 61)
        values = np.full(grid.size, 0.3)
        self.assertTrue(math.isinf(hamilton_jacobi_dt(grid, values, 0.5)))
        self.assertTrue(np.array_equal(hamilton_jacobi_step(grid, values, 0.1), values))

    def test_step_respects_cfl(self):
        spec = KernelSpec(2, 2.0)
        u = make_initial_bump(1.0, 1.0, SolverConfig(spec, grid_M=400, grid_strength=0.0).make_grid(), spec)
        with self.assertRaises(CFLViolation):
            step(u, 1.0)
        dt = hamilton_jacobi_dt(u.grid, u.values, 0.5)
        nxt = step(u, dt)
        self.assertEqual(nxt.at_origin(), u.at_origin())
        # u_t = -(u_r)^2 <= 0
        self.assertTrue(np.all(nxt.values <= u.values + 1e-14))


# (d, alpha)
BLOWUP_MATRIX = [(2, 0.5), (2, 1.0), (3, 1.0), (2, 1.5)]


@override_settings(NONLOCAL={'LAMBDA_POINTS': 200})
class BlowupScenarioTest(SimpleTestCase):

    def run_bump(self, spec, **options):
        config = SolverConfig(spec, grid_M=200, threshold_factor=10.0, **options)
        u0 = make_initial_bump(1.0, 1.0, config.make_grid(), spec)
        return config, u0, run(config, u0, progress=False)

    def test_blowup_d2_alpha1(self):
        spec = KernelSpec(2, 1.0)
        _, u0, result = self.run_bump(spec, output_stride=5)
        trace = result.trace

        self.assertTrue(result.blowup)
        self.assertLess(result.detected_time, 2.0 * trace.predicted_T_star)
        self.assertTrue(math.isclose(trace.C_tilde, c_tilde(certified_constant(spec, 0.5), 1.0, 0.5, trace.L)))

        for snap in result.snapshots:
            self.assertGreaterEqual(snap.u.min(), -1e-14)
            self.assertLessEqual(snap.u.max(), 1.0 + 1e-14)

        record = result.metadata()
        self.assertEqual(record['verdict'], 'blowup')
        self.assertEqual(record['samples'], len(trace))

    def test_matrix(self):
        for d, alpha in BLOWUP_MATRIX:
            with self.subTest(d=d, alpha=alpha):
                spec = KernelSpec(d, alpha)
                config, u0, result = self.run_bump(spec)
                trace = result.trace
                self.assertTrue(result.blowup)
                self.assertLess(result.detected_time, 2.0 * trace.predicted_T_star)

                u_origin = trace.array('u_origin')
                self.assertLessEqual(np.max(np.abs(u_origin - u0.at_origin())), 1e-10)

                grad = trace.array('grad_sup')
                smooth = grad < 3.0 * grad[0]
                delta = config.delta
                bound = trace.L ** (1.0 - delta) / (1.0 - delta) * grad[smooth]
                self.assertTrue(np.all(trace.array('I_values')[smooth] <= 1.1 * bound))

                report = ode_inequality_check(trace)
                self.assertTrue(report.checked)
                self.assertGreaterEqual(report.samples, 10)
                self.assertGreaterEqual(report.fraction, 0.95)
                self.assertGreaterEqual(report.increasing_fraction, 0.95)

    def test_refinement_of_blowup(self):
        for alpha in (1.0, 0.5):
            with self.subTest(alpha=alpha):
                spec = KernelSpec(2, alpha)
                config, _, result = self.run_bump(spec, output_stride=5)
                summary = refinement_study(config, bump_factory(spec), coarse=result, progress=False)
                self.assertEqual((summary.coarse_M, summary.fine_M), (200, 400))
                self.assertEqual(summary.coarse_time, result.detected_time)
                self.assertIsNotNone(summary.shift)
                self.assertLess(summary.shift, 0.2)
                self.assertTrue(summary.consistent)


class GlobalScenarioTest(SimpleTestCase):

    def test_two_dimensions_is_stationary(self):
        spec = KernelSpec(2, 0.0)
        config = SolverConfig(spec, grid_M=100, t_end=1.0)
        u0 = make_initial_bump(1.0, 1.0, config.make_grid(), spec)
        result = run(config, u0, progress=False)
        self.assertEqual(result.verdict, 'completed')
        self.assertLessEqual(np.max(np.abs(result.snapshots[-1].v)), 1e-12)
        self.assertLessEqual(np.max(np.abs(result.snapshots[-1].u - u0.values)), 1e-12)
        self.assertAlmostEqual(result.final_time, 1.0, places=12)

    def test_three_dimensions_stays_regular(self):
        spec = KernelSpec(3, 0.0)
        config = SolverConfig(spec, grid_M=120, t_end=0.5, output_stride=5)
        u0 = make_initial_bump(1.0, 1.0, config.make_grid(), spec)
        result = run(config, u0, progress=False)
        trace = result.trace
        self.assertEqual(result.verdict, 'completed')
        self.assertTrue(math.isinf(trace.threshold))
        self.assertIsNone(trace.C_tilde)
        self.assertTrue(np.all(np.diff(trace.array('support_radius')) <= 0.0))
        self.assertLessEqual(np.max(np.abs(trace.array('u_origin') - 1.0)), 1e-10)
        self.assertTrue(gronwall_check(trace))
        self.assertFalse(ode_inequality_check(trace).checked)

    def test_unbounded_prediction_needs_t_end(self):
        spec = KernelSpec(3, 0.0)
        config = SolverConfig(spec, grid_M=60)
        with self.assertRaises(DomainError):
            run(config, make_initial_bump(1.0, 1.0, config.make_grid(), spec), progress=False)

    def test_refinement_of_stationary_run(self):
        spec = KernelSpec(2, 0.0)
        config = SolverConfig(spec, grid_M=40, t_end=0.1)
        summary = refinement_study(config, bump_factory(spec), progress=False)
        self.assertEqual(summary.fine_M, 80)
        self.assertTrue(summary.consistent)
        self.assertIsNone(summary.shift)
