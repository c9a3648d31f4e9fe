import math

import numpy as np
from django.test import SimpleTestCase

from transport.exceptions import DomainError, SingularPointError, UnsupportedError
from transport.services.kernel import (KernelSpec, build_series, kernel_eval, kernel_quadrature, kernel_table,
                                       kernel_values, series_coefficients, singular_coefficient,
                                       taylor_coefficient)
from transport.services.special import sphere_area


class KernelSpecTest(SimpleTestCase):

    def test_local_limit_has_no_kernel(self):
        spec = KernelSpec(2, 2.0)
        self.assertTrue(spec.local_limit)
        with self.assertRaises(UnsupportedError):
            spec.require_kernel()

    def test_out_of_range(self):
        with self.assertRaises(UnsupportedError):
            KernelSpec(2, 2.5).require_kernel()
        with self.assertRaises(DomainError):
            KernelSpec(1, 0.0).require_kernel()
        with self.assertRaises(DomainError):
            KernelSpec(0, 1.0)


class TaylorCoefficientTest(SimpleTestCase):

    def test_alpha_zero(self):
        spec = KernelSpec(3, 0.0)
        self.assertAlmostEqual(taylor_coefficient(spec, 0), 4.0 * math.pi / 3.0, places=12)
        self.assertEqual(taylor_coefficient(spec, 1), 0.0)
        self.assertEqual(taylor_coefficient(KernelSpec(2, 0.0), 0), 0.0)

    def test_first_coefficient(self):
        for d in (2, 3, 5):
            for alpha in (0.25, 1.0, 1.5):
                expected = sphere_area(d).sigma * (d + alpha - 2) / d
                got = taylor_coefficient(KernelSpec(d, alpha), 0)
                self.assertLess(abs(got / expected - 1.0), 1e-12)

    def test_one_dimensional_binomial(self):
        spec = KernelSpec(1, 0.5)
        self.assertAlmostEqual(taylor_coefficient(spec, 0), 1.0, places=12)
        self.assertAlmostEqual(taylor_coefficient(spec, 1), 1.0 / 8.0, places=12)
        self.assertAlmostEqual(taylor_coefficient(KernelSpec(1, 1.0), 3), 2.0 / 7.0, places=12)

    def test_negative_index(self):
        with self.assertRaises(DomainError):
            taylor_coefficient(KernelSpec(2, 1.0), -1)

    def test_positivity_matrix(self):
        for d in range(1, 7):
            for alpha in (0.1, 0.25, 0.5, 1.0, 1.5, 1.9):
                coeffs = series_coefficients(KernelSpec(d, alpha), 200)
                self.assertTrue(np.all(coeffs > 0), f"d={d} alpha={alpha}")

    def test_asymptotic_slope(self):
        n = np.arange(100, 201)
        for d in (1, 2, 3, 6):
            for alpha in (0.25, 1.0, 1.9):
                coeffs = series_coefficients(KernelSpec(d, alpha), 200)[100:]
                slope, _ = np.polyfit(np.log(n), np.log(coeffs), 1)
                self.assertLess(abs(slope - (alpha - 2.0)), 0.05, f"d={d} alpha={alpha}")


class BuildSeriesTest(SimpleTestCase):

    def test_stopping_rule(self):
        spec = KernelSpec(2, 1.0)
        series = build_series(spec, 1e-10, r_switch=0.7)
        N, rs = series.truncation_N, series.r_switch
        scale = 1.0 / (1.0 - rs ** 2)
        self.assertLess(series.coeffs[N] * rs ** (2 * N + 1) * scale, 1e-10)
        self.assertGreaterEqual(series.coeffs[N - 1] * rs ** (2 * N - 1) * scale, 1e-10)
        self.assertGreaterEqual(series.tail_bound, 0.0)

    def test_alpha_zero_single_term(self):
        series = build_series(KernelSpec(3, 0.0), 1e-12)
        self.assertEqual(series.truncation_N, 0)
        self.assertEqual(series.coeffs.size, 1)

    def test_invalid_tolerance(self):
        with self.assertRaises(DomainError):
            build_series(KernelSpec(2, 1.0), 0.0)

    def test_coefficients_are_read_only(self):
        series = build_series(KernelSpec(2, 1.0), 1e-8)
        with self.assertRaises(ValueError):
            series.coeffs[0] = 1.0


class KernelEvalTest(SimpleTestCase):

    def test_one_dimensional_log(self):
        self.assertAlmostEqual(kernel_eval(KernelSpec(1, 1.0), 0.5), math.log(3.0), places=13)

    def test_origin_and_trivial_kernel(self):
        self.assertEqual(kernel_eval(KernelSpec(3, 1.5), 0.0), 0.0)
        self.assertEqual(kernel_eval(KernelSpec(2, 0.0), 0.5), 0.0)

    def test_errors(self):
        with self.assertRaises(DomainError):
            kernel_eval(KernelSpec(2, 1.0), -0.5)
        with self.assertRaises(SingularPointError):
            kernel_eval(KernelSpec(2, 1.0), 1.0)
        with self.assertRaises(SingularPointError):
            kernel_values(KernelSpec(3, 1.5), np.array([0.5, 1.0]))

    def test_series_matches_quadrature(self):
        for d in (2, 3, 4):
            for alpha in (0.25, 0.5, 1.0, 1.5):
                spec = KernelSpec(d, alpha)
                for r in (0.1, 0.3, 0.5):
                    quadrature = kernel_quadrature(spec, r)
                    self.assertLess(abs(kernel_eval(spec, r) - quadrature), 1e-8 * max(1.0, abs(quadrature)),
                                    f"{spec} r={r}")

    def test_quadrature_forms_agree(self):
        for spec in (KernelSpec(2, 0.5), KernelSpec(3, 1.5)):
            for r in (0.4, 0.85, 1.3):
                cosine = kernel_quadrature(spec, r, form='cosine')
                positive = kernel_quadrature(spec, r, form='positive')
                self.assertLess(abs(cosine - positive), 1e-8 * max(1.0, abs(cosine)))

    def test_reflection_identity(self):
        for d in (2, 3, 4):
            for alpha in (0.25, 0.5, 1.0, 1.5):
                spec = KernelSpec(d, alpha)
                for r in (0.2, 0.5, 0.8):
                    outer = kernel_values(spec, np.array([1.0 / r]))[0]
                    inner = kernel_quadrature(spec, r)
                    self.assertLess(abs(outer * r ** (-(d - 2 + alpha)) - inner), 1e-8 * max(1.0, abs(inner)),
                                    f"{spec} r={r}")

    def test_reflection_example(self):
        spec = KernelSpec(2, 1.0)
        self.assertAlmostEqual(kernel_eval(spec, 2.0), 0.5 * kernel_quadrature(spec, 0.5), places=9)

    def test_vectorized_matches_scalar(self):
        for spec in (KernelSpec(1, 0.5), KernelSpec(2, 1.0), KernelSpec(3, 1.5)):
            r = np.array([0.2, 0.6, 0.9, 1.2, 2.5])
            scalar = np.array([kernel_eval(spec, x) for x in r])
            self.assertTrue(np.allclose(kernel_values(spec, r), scalar, rtol=1e-8, atol=1e-10), str(spec))
            self.assertTrue(np.allclose(kernel_values(spec, -r), -scalar, rtol=1e-8, atol=1e-10))

    def test_singularity_order(self):
        spec = KernelSpec(2, 1.5)
        c = singular_coefficient(spec)
        self.assertGreater(c, 0.0)
        for sign in (-1.0, 1.0):
            eps = 2.0 ** -np.arange(8, 17)
            scaled = kernel_values(spec, 1.0 + sign * eps) * eps ** (spec.alpha - 1.0)
            self.assertLess(np.max(np.abs(scaled)) / np.min(np.abs(scaled)), 1.5)

    def test_log_singularity(self):
        spec = KernelSpec(3, 1.0)
        eps = 2.0 ** -np.arange(8, 17)
        scaled = kernel_values(spec, 1.0 - eps) / -np.log(eps)
        self.assertLess(np.max(scaled) / np.min(scaled), 1.5)

    def test_table_skips_singular_point(self):
        r, g = kernel_table(KernelSpec(2, 1.0), np.array([0.0, 0.5, 1.0, 2.0]))
        self.assertEqual(list(r), [0.0, 0.5, 2.0])
        self.assertEqual(g[0], 0.0)
