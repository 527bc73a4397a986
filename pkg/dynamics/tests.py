import numpy as np
from django.test import SimpleTestCase

from ccr_algebra.elements import OneParticleBasis
from field_eq.data import TestFunction
from field_eq.operator import apply_P_array
from geometry.perturbations import MetricPerturbation, bump_perturbation, perturb
from geometry.regions import diamond, slab
from geometry.spacetime import KGParams, bump, flat
from kg_workbench.exceptions import GeometryError

from .locality import dual_kinematic_subspace, dynamical_vs_kinematic, fixed_subspace, sampling_region
from .rce import rce, rce_derivative, rce_testfunction, rce_transport
from .stress_energy import apply_L, conservation_study, diffeomorphism_covariance_residual, stress_energy_pairing


def background():
    return bump(n_x=16, n_t=40, kg=KGParams(m_sq=1.0, xi=0.3), amplitude=0.2)


def small_h(M, amp=0.05):
    return bump_perturbation(M, center=(18, 8), widths=(3, 3), amp_beta=amp, amp_a=-0.6 * amp)


def relative(a, b):
    return float(np.abs(a - b).max() / np.abs(b).max())


def block_above(M, rng, rows=(26, 29)):
    values = np.zeros(M.shape)
    values[rows[0]:rows[1], 5:11] = rng.standard_normal((rows[1] - rows[0], 6))
    return TestFunction(values)


class RelativeCauchyEvolutionTest(SimpleTestCase):
    def setUp(self):
        self.M = background()
        self.h = small_h(self.M)

    def test_testfunction_route_matches_transport(self):
        via_f = rce(self.M, self.h, t_ref=30)
        via_transport = rce_transport(self.M, self.h, t_ref=30)
        self.assertLess(relative(via_f.matrix, via_transport.matrix), 1e-9)

    def test_independent_of_band_and_surfaces(self):
        first = rce(self.M, self.h, t_ref=30)
        second = rce(self.M, self.h, t_ref=30, band=(26, 29))
        self.assertLess(relative(first.matrix, second.matrix), 1e-9)
        wide = rce_transport(self.M, self.h, t_ref=30, sigma_minus=5, sigma_plus=28)
        self.assertLess(relative(wide.matrix, first.matrix), 1e-9)

    def test_is_symplectic_and_nontrivial(self):
        rmap = rce_transport(self.M, self.h, t_ref=10)
        self.assertLess(rmap.symplectic_defect() / rmap.dx, 1e-9)
        self.assertGreater(np.abs(rmap.matrix - np.eye(rmap.size)).max(), 1e-4)
        basis = OneParticleBasis.for_spacetime(self.M, 10)
        self.assertTrue(rmap.on_algebra(basis).preserves_symplectic_form(tol=1e-9))

    def test_zero_perturbation_is_identity(self):
        rmap = rce(self.M, MetricPerturbation.zero(self.M), t_ref=20)
        np.testing.assert_array_equal(rmap.matrix, np.eye(2 * self.M.n_x))

    def test_rejects_test_function_below(self):
        rng = np.random.default_rng(3)
        f = block_above(self.M, rng, rows=(12, 15))
        with self.assertRaisesRegex(GeometryError, "f must be supported in M\\+"):
            rce_testfunction(self.M, self.h, f)

    def test_testfunction_agrees_with_matrix(self):
        from field_eq.green import to_quotient

        rng = np.random.default_rng(4)
        f = block_above(self.M, rng)
        rmap = rce(self.M, self.h, t_ref=30)
        expected = rmap.matrix @ to_quotient(self.M, f, 30).vector
        got = to_quotient(self.M, rce_testfunction(self.M, self.h, f), 30).vector
        self.assertLess(relative(got, expected), 1e-9)


class StressEnergyTest(SimpleTestCase):
    def setUp(self):
        self.M = background()
        self.h = small_h(self.M, amp=1.0)

    def test_apply_L_is_minus_variation(self):
        rng = np.random.default_rng(5)
        u = rng.standard_normal(self.M.shape)
        s = 1e-4
        plus = apply_P_array(perturb(self.M, self.h.scaled(s)), u)
        minus = apply_P_array(perturb(self.M, self.h.scaled(-s)), u)
        fd = -(plus - minus) / (2 * s)
        self.assertLess(relative(apply_L(self.M, self.h, u).values.real, fd), 1e-6)

    def test_pairing_is_rce_derivative(self):
        rng = np.random.default_rng(6)
        f = block_above(self.M, rng)
        pairing = stress_energy_pairing(self.M, self.h, f, t_ref=30)
        derivative = rce_derivative(self.M, self.h, f, t_ref=30, s0=1e-2)
        self.assertLess(relative(derivative.vector, pairing.vector), 1e-6)

    def test_lie_perturbations_are_conserved_under_refinement(self):
        study = conservation_study(levels=2, dx0=0.1)
        coarse, fine = study.residuals
        self.assertLess(coarse, 2e-3)
        self.assertGreaterEqual(study.orders[0], 1.8)

    def test_diffeomorphism_covariance(self):
        M = flat(n_x=16, n_t=48, kg=KGParams(m_sq=1.0))
        h = bump_perturbation(M, center=(24, 8), widths=(4, 4), amp_beta=0.05)
        t = np.arange(M.n_t)
        profile = np.where(np.abs(t - 24) < 12, np.cos(0.5 * np.pi * (t - 24) / 12) ** 2, 0.0)
        X_t = np.tile(profile[:, None], (1, M.n_x)) * M.dt
        X_x = np.zeros(M.shape)
        residual = diffeomorphism_covariance_residual(M, h, X_t, X_x, s=0.05, t_ref=40)
        self.assertLess(residual, 0.1)


class DynamicalLocalityTest(SimpleTestCase):
    def region(self, M):
        return diamond(M, 16, 20, 2)

    def test_sampling_region_avoids_the_hull(self):
        M = flat(n_x=40, n_t=32, kg=KGParams(m_sq=1.0))
        allowed = sampling_region(M, self.region(M))
        self.assertFalse(allowed.is_empty)
        self.assertTrue((allowed & self.region(M)).is_empty)

    def test_nothing_to_perturb_fixes_everything(self):
        M = flat(n_x=12, n_t=32, kg=KGParams(m_sq=1.0))
        fixed = fixed_subspace(M, slab(M, 4, 27), t_ref=16, n_samples=3)
        self.assertEqual(fixed.dim, 2 * M.n_x)

    def test_fixed_space_contains_kinematic_and_dual(self):
        M = flat(n_x=40, n_t=32, kg=KGParams(m_sq=1.0))
        O = self.region(M)
        fixed = fixed_subspace(M, O, t_ref=16, n_samples=6, seed=11)
        dual = dual_kinematic_subspace(M, fixed.touched, 16)
        from ccr_algebra.kinematic import kinematic_subspace

        kin = kinematic_subspace(M, O, 16)
        for span in (kin.span, dual):
            for k in range(span.shape[1]):
                v = span[:, k]
                residual = np.linalg.norm(v - fixed.span @ (fixed.span.T @ v)) / np.linalg.norm(v)
                self.assertLess(residual, 1e-6)
        self.assertEqual(fixed.dims_by_sample, sorted(fixed.dims_by_sample, reverse=True))

    def test_massive_field_fixes_no_zero_mode(self):
        M = flat(n_x=40, n_t=32, kg=KGParams(m_sq=1.0))
        report = dynamical_vs_kinematic(M, self.region(M), t_ref=16, n_samples=6, seed=11)
        self.assertFalse(report.zero_mode_fixed)
        self.assertGreaterEqual(report.dim_fixed, report.dim_dual)
        self.assertNotEqual(report.verdict, "mismatch (+zero mode)")

    def test_massive_field_matches_the_dual_with_enough_samples(self):
        M = flat(n_x=40, n_t=32, kg=KGParams(m_sq=1.0))
        report = dynamical_vs_kinematic(M, self.region(M), t_ref=16, n_samples=20, seed=11)
        self.assertEqual(report.dim_fixed, report.dim_dual)
        self.assertLessEqual(report.max_angle, 1e-3)
        self.assertEqual(report.verdict, "match")

    def test_massless_zero_mode_surplus(self):
        M = flat(n_x=40, n_t=32, kg=KGParams(m_sq=0.0, xi=0.0))
        report = dynamical_vs_kinematic(M, self.region(M), t_ref=16, n_samples=6, seed=11)
        self.assertTrue(report.zero_mode_fixed)
        self.assertGreater(report.dim_fixed, report.dim_dual)
        self.assertEqual(report.verdict, "mismatch (+zero mode)")
