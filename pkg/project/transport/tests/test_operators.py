import math

import numpy as np
from django.test import SimpleTestCase
from scipy import integrate

from transport.exceptions import DomainError, OriginNotMaximumWarning
from transport.services.kernel import KernelSpec
from transport.services.mellin import positivity_certificate
from transport.services.operators import (RadialField, blowup_functional, graded_grid, mellin_pairing,
                                          positivity_ratio, rhs_functional, support_radius, velocity,
                                          velocity_operator, weighted_pairing)
from transport.services.solver import BumpProfile, make_initial_bump


def gaussian(grid, spec):
    return RadialField(grid, np.exp(-grid ** 2), spec)


class GridTest(SimpleTestCase):

    def test_graded_grid(self):
        grid = graded_grid(100, 1.2, focus=(0.0, 1.0))
        self.assertEqual(grid.size, 101)
        self.assertEqual(grid[0], 0.0)
        self.assertEqual(grid[-1], 1.2)
        self.assertTrue(np.all(np.diff(grid) > 0))
        steps = np.diff(grid)
        self.assertLess(steps[0], steps[len(steps) // 2])

    def test_uniform_when_strength_zero(self):
        self.assertTrue(np.allclose(graded_grid(10, 2.0, strength=0.0), np.linspace(0.0, 2.0, 11)))

    def test_invalid(self):
        with self.assertRaises(DomainError):
            graded_grid(1, 1.0)
        with self.assertRaises(DomainError):
            graded_grid(10, -1.0)


class RadialFieldTest(SimpleTestCase):

    def setUp(self):
        self.spec = KernelSpec(2, 1.0)
        self.grid = graded_grid(200, 1.2, focus=(0.0, 1.0))

    def test_grid_must_start_at_origin(self):
        with self.assertRaises(DomainError):
            RadialField(self.grid + 0.1, np.zeros(self.grid.size), self.spec)

    def test_shape_mismatch(self):
        with self.assertRaises(DomainError):
            RadialField(self.grid, np.zeros(3), self.spec)

    def test_even_interpolant(self):
        u = make_initial_bump(1.0, 1.0, self.grid, self.spec)
        r = np.array([0.13, 0.5, 0.77])
        self.assertTrue(np.allclose(u(r), u(-r)))
        self.assertEqual(u.nodal_derivative[0], 0.0)

    def test_nodal_derivative(self):
        profile = BumpProfile(1.0, 1.0)
        u = make_initial_bump(1.0, 1.0, self.grid, self.spec)
        self.assertLess(np.max(np.abs(u.nodal_derivative - profile.d1(self.grid))), 1e-2)

    def test_support_radius(self):
        u = make_initial_bump(1.0, 1.0, self.grid, self.spec)
        self.assertLess(support_radius(u), 1.0)
        self.assertGreater(support_radius(u), 0.9)

    def test_bump_must_fit(self):
        with self.assertRaises(DomainError):
            make_initial_bump(1.0, 1.1, self.grid, self.spec)


class VelocityTest(SimpleTestCase):

    def test_local_limit_is_derivative(self):
        grid = np.linspace(0.0, 1.2, 101)
        u = make_initial_bump(1.0, 1.0, grid, KernelSpec(2, 2.0))
        v = velocity(u)
        self.assertTrue(np.array_equal(v.values, u.nodal_derivative))

    def test_trivial_kernel_gives_zero_velocity(self):
        grid = graded_grid(100, 1.2, focus=(0.0, 1.0))
        v = velocity(make_initial_bump(1.0, 1.0, grid, KernelSpec(2, 0.0)))
        self.assertLessEqual(v.sup, 1e-12)

    def test_newtonian_field(self):
        # d = 3, alpha = 0: v(r) = -(4 pi / r^2) int_0^r u rho^2
        grid = graded_grid(800, 1.2, focus=(0.0, 1.0))
        profile = BumpProfile(1.0, 1.0)
        v = velocity(make_initial_bump(1.0, 1.0, grid, KernelSpec(3, 0.0)))
        for r in (0.2, 0.5, 0.8, 1.1):
            mass, _ = integrate.quad(lambda x: float(profile.value(x)) * x ** 2, 0.0, min(r, 1.0))
            self.assertLess(abs(float(v(r)) + 4.0 * math.pi * mass / r ** 2), 2e-3 * v.sup, f"r={r}")

    def test_compressive_sign(self):
        grid = graded_grid(200, 1.2, focus=(0.0, 1.0))
        v = velocity(make_initial_bump(1.0, 1.0, grid, KernelSpec(2, 1.0)))
        self.assertEqual(v.values[0], 0.0)
        self.assertLessEqual(np.max(v.values), 0.0)
        self.assertLess(np.min(v.values), 0.0)
        self.assertTrue(np.allclose(v(-grid[1:50]), -v(grid[1:50])))

    def test_singular_kernel_error_estimate(self):
        grid = graded_grid(200, 1.2, focus=(0.0, 1.0))
        v = velocity(make_initial_bump(1.0, 1.0, grid, KernelSpec(2, 1.5)))
        self.assertTrue(np.all(np.isfinite(v.values)))
        self.assertTrue(math.isfinite(v.quadrature_error_estimate))
        self.assertGreaterEqual(v.quadrature_error_estimate, 0.0)

    def test_linearity(self):
        spec = KernelSpec(2, 1.0)
        grid = graded_grid(400, 1.2, focus=(0.0, 1.0))
        u1 = make_initial_bump(1.0, 1.0, grid, spec)
        u2 = make_initial_bump(1.0, 0.6, grid, spec)
        operator = velocity_operator(spec, grid)
        w1, w2 = u1.nodal_derivative, u2.nodal_derivative
        combined, _ = operator.apply(0.7 * w1 - 0.4 * w2)
        expected = 0.7 * operator.apply(w1)[0] - 0.4 * operator.apply(w2)[0]
        self.assertLessEqual(np.max(np.abs(combined - expected)), 1e-12 * np.max(np.abs(expected)))

        v1, v2 = velocity(u1), velocity(u2)
        scaled = velocity(u1.with_values(-2.5 * u1.values))
        self.assertLessEqual(np.max(np.abs(scaled.values + 2.5 * v1.values)), 1e-12 * scaled.sup)
        # 절점 기울기는 PCHIP 이라 합에 대해서는 근사적으로만 선형
        summed = velocity(u1.with_values(0.7 * u1.values + 0.4 * u2.values))
        self.assertLess(np.max(np.abs(summed.values - 0.7 * v1.values - 0.4 * v2.values)), 1e-2 * summed.sup)

    def test_error_estimate_covers_finer_rule(self):
        grid = graded_grid(200, 1.2, focus=(0.0, 1.0))
        for alpha in (0.5, 1.0, 1.5):
            with self.subTest(alpha=alpha):
                u = make_initial_bump(1.0, 1.0, grid, KernelSpec(2, alpha))
                coarse, fine = velocity(u, 8), velocity(u, 16)
                self.assertLessEqual(np.max(np.abs(fine.values - coarse.values)), coarse.quadrature_error_estimate)
                operator = velocity_operator(u.spec, grid, 8)
                self.assertEqual(operator.row_error.shape, grid.shape)
                self.assertEqual(operator.row_error[0], 0.0)

    def test_operator_is_cached(self):
        grid = graded_grid(60, 1.2, focus=(0.0, 1.0))
        spec = KernelSpec(2, 1.0)
        self.assertIs(velocity_operator(spec, grid), velocity_operator(spec, grid.copy()))

    def test_truncated_support(self):
        grid = graded_grid(100, 1.0)
        u = RadialField(grid, np.exp(-grid ** 2), KernelSpec(2, 1.0))
        with self.assertRaises(DomainError):
            velocity(u)


class FunctionalTest(SimpleTestCase):

    def test_rhs_oracle(self):
        # int_0^inf (1 - exp(-r^2))^2 r^{-2} dr = sqrt(pi) (2 - sqrt(2))
        f = gaussian(graded_grid(800, 10.0), KernelSpec(2, 1.0))
        expected = math.sqrt(math.pi) * (2.0 - math.sqrt(2.0))
        self.assertLess(abs(rhs_functional(f, 0.0) / expected - 1.0), 1e-3)

    def test_mellin_side_matches_direct(self):
        for d, alpha, delta in ((2, 1.0, 0.0), (3, 1.5, 0.2)):
            with self.subTest(d=d, alpha=alpha, delta=delta):
                f = gaussian(graded_grid(800, 10.0), KernelSpec(d, alpha))
                pairing, rhs = mellin_pairing(f, delta)
                self.assertTrue(math.isfinite(pairing) and math.isfinite(rhs))
                self.assertLess(abs(pairing / weighted_pairing(f, delta) - 1.0), 1e-3)
                self.assertLess(abs(rhs / rhs_functional(f, delta) - 1.0), 1e-3)

    def test_blowup_functional_matches_quadrature(self):
        grid = graded_grid(400, 1.2, focus=(0.0, 1.0))
        profile = BumpProfile(1.0, 1.0)
        u = make_initial_bump(1.0, 1.0, grid, KernelSpec(2, 1.0))
        expected, _ = integrate.quad(lambda r: (1.0 - float(profile.value(r))) * r ** -1.5, 0.0, 1.0, limit=200)
        self.assertLess(abs(blowup_functional(u, 0.5, 1.0) / expected - 1.0), 1e-4)

    def test_blowup_functional_bound(self):
        # I <= L^{1-delta} / (1 - delta) * sup|u_r|
        grid = graded_grid(400, 1.2, focus=(0.0, 1.0))
        u = make_initial_bump(1.0, 1.0, grid, KernelSpec(2, 1.0))
        bound = 1.0 / 0.5 * np.max(np.abs(BumpProfile(1.0, 1.0).d1(np.linspace(0, 1, 10001))))
        self.assertLessEqual(blowup_functional(u, 0.5, 1.0), bound)

    def test_origin_not_maximum_warns(self):
        grid = graded_grid(100, 1.2)
        values = grid ** 2 * np.exp(-8.0 * grid ** 2)
        u = RadialField(grid, values, KernelSpec(2, 1.0))
        with self.assertWarns(OriginNotMaximumWarning):
            blowup_functional(u, 0.5, 1.0)

    def test_blowup_functional_arguments(self):
        u = make_initial_bump(1.0, 1.0, graded_grid(100, 1.2), KernelSpec(2, 1.0))
        with self.assertRaises(DomainError):
            blowup_functional(u, 1.0, 1.0)
        with self.assertRaises(DomainError):
            blowup_functional(u, 0.5, 2.0)

    def test_weighted_inequality(self):
        spec = KernelSpec(2, 1.0)
        grid = graded_grid(800, 10.0)
        constant = positivity_certificate(spec, 0.0, 1e3, n_points=64).positivity_constant
        for scale in (1.0, 4.0):
            with self.subTest(scale=scale):
                f = RadialField(grid, np.exp(-scale * grid ** 2), spec)
                self.assertGreater(weighted_pairing(f, 0.0), 0.0)
                self.assertGreaterEqual(positivity_ratio(f, 0.0), constant * (1.0 - 1e-4))
