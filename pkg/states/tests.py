import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from ccr_algebra.elements import AlgebraElement, OneParticleBasis, adjoint, mul
from ccr_algebra.kinematic import gen
from dynamics.rce import rce_transport
from field_eq.data import random_test_function
from field_eq.green import commutator_function, transfer_matrix
from geometry.perturbations import bump_perturbation
from geometry.regions import diamond, static_worldline
from geometry.spacetime import KGParams, bump, flat
from kg_workbench.exceptions import StateError

from .energy import energy_density, gaussian_sampling, optimal_qei_state, qei_check, relative_energy, total_energy
from .hadamard import hadamard_difference
from .quasifree import (
    bogoliubov_transport,
    expectation,
    mode_occupations,
    n_point,
    particle_number,
    read_covariance,
    write_covariance,
)
from .vacuum import (
    chopped_vacuum,
    excited_state,
    random_gaussian_family,
    semidiscrete_frequencies,
    squeezed_state,
    ultrastatic_vacuum,
)


def coarse_flat(m_sq=1.0):
    return flat(n_x=6, n_t=14, dx=0.5, dt=0.25, kg=KGParams(m_sq=m_sq))


class VacuumTest(SimpleTestCase):
    def test_flat_circle_frequencies(self):
        M = flat(n_x=16, n_t=20, kg=KGParams(m_sq=1.0))
        k = 2 * np.pi * np.arange(M.n_x) / (M.n_x * M.dx)
        expected = np.sort(np.sqrt((2 / M.dx * np.sin(k * M.dx / 2)) ** 2 + 1.0))
        np.testing.assert_allclose(semidiscrete_frequencies(M), expected, rtol=1e-10)

    def test_state_invariants(self):
        vac = ultrastatic_vacuum(flat(n_x=16, n_t=20, kg=KGParams(m_sq=1.0)))
        self.assertLess(vac.ccr_defect(), 1e-11)
        self.assertGreater(vac.min_eigenvalue(), -1e-10)

    def test_invariant_under_one_step(self):
        M = flat(n_x=16, n_t=20, kg=KGParams(m_sq=1.0))
        vac = ultrastatic_vacuum(M)
        moved = bogoliubov_transport(vac, transfer_matrix(M, 0, 1))
        self.assertLess(np.abs(moved.W - vac.W).max() / np.abs(vac.W).max(), 1e-10)

    def test_ultrastatic_vacuum_on_the_inhomogeneous_circle(self):
        from geometry.spacetime import ultrastatic

        x = np.arange(16)
        M = ultrastatic(1.0 + 0.3 * np.sin(2 * np.pi * x / 16), n_t=20, kg=KGParams(m_sq=1.0))
        vac = ultrastatic_vacuum(M, surface_t=3)
        moved = bogoliubov_transport(vac, transfer_matrix(M, 3, 4))
        self.assertLess(np.abs(moved.W - vac.W).max() / np.abs(vac.W).max(), 1e-10)

    def test_requires_ultrastatic(self):
        with self.assertRaisesRegex(StateError, "ultrastatic required"):
            ultrastatic_vacuum(bump(n_x=16, n_t=20))

    def test_massless_zero_mode_is_regulated(self):
        vac = ultrastatic_vacuum(flat(n_x=16, n_t=20, kg=KGParams(m_sq=0.0)))
        self.assertAlmostEqual(vac.frequencies[0], 1e-4, places=8)
        self.assertGreater(vac.min_eigenvalue(), -1e-10)


class CorrelationTest(SimpleTestCase):
    def setUp(self):
        self.M = coarse_flat()
        self.vac = ultrastatic_vacuum(self.M, surface_t=6)
        self.basis = OneParticleBasis.for_spacetime(self.M, 6)
        self.rng = np.random.default_rng(8)

    def functions(self, n):
        return [random_test_function(self.M, self.rng) for _ in range(n)]

    def test_odd_functions_vanish(self):
        self.assertEqual(n_point(self.vac, *self.functions(3)), 0.0)

    def test_antisymmetric_part_is_commutator(self):
        for _ in range(10):
            f, h = self.functions(2)
            diff = n_point(self.vac, f, h) - n_point(self.vac, h, f)
            self.assertAlmostEqual(diff, 1j * commutator_function(self.M, f, h), delta=1e-10)

    def test_four_point_wick_rule(self):
        fs = self.functions(4)
        w = lambda a, b: n_point(self.vac, fs[a], fs[b])
        expected = w(0, 1) * w(2, 3) + w(0, 2) * w(1, 3) + w(0, 3) * w(1, 2)
        self.assertAlmostEqual(n_point(self.vac, *fs), expected, delta=1e-11 * max(1.0, abs(expected)))
        gens = [gen(self.M, f, self.basis) for f in fs]
        product = mul(mul(gens[0], gens[1]), mul(gens[2], gens[3]))
        self.assertAlmostEqual(expectation(self.vac, product), expected, delta=1e-11 * max(1.0, abs(expected)))

    def test_too_many_points(self):
        with self.assertRaises(StateError):
            n_point(self.vac, *self.functions(10))

    def test_unit_and_positivity(self):
        self.assertAlmostEqual(expectation(self.vac, AlgebraElement.unit(self.basis)), 1.0)
        for _ in range(100):
            words = {}
            for degree in range(4):
                word = tuple(int(i) for i in self.rng.integers(0, self.basis.size, size=degree))
                words[word] = complex(self.rng.standard_normal(), self.rng.standard_normal())
            A = AlgebraElement.from_words(self.basis, words)
            value = expectation(self.vac, mul(adjoint(A), A))
            self.assertGreaterEqual(value.real, -1e-9 * max(1.0, abs(value)))
            self.assertLess(abs(value.imag), 1e-9 * max(1.0, abs(value)))

    def test_covariance_text_format(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "vacuum.cov")
            write_covariance(path, self.vac)
            back = read_covariance(path, self.M)
        np.testing.assert_array_equal(back.C, self.vac.C)
        self.assertEqual(back.surface_t, 6)


class EnergyTest(SimpleTestCase):
    def setUp(self):
        self.M = flat(n_x=16, n_t=48, kg=KGParams(m_sq=1.0))
        self.vac = ultrastatic_vacuum(self.M)

    def test_reference_has_zero_density(self):
        _, rho = energy_density(self.vac, self.vac, static_worldline(self.M, 3, 0, 40))
        np.testing.assert_array_equal(rho, 0.0)

    def test_single_quantum_carries_its_frequency(self):
        M = flat(n_x=16, n_t=48, dx=0.1, dt=0.025, kg=KGParams(m_sq=1.0))
        vac = ultrastatic_vacuum(M)
        for k in (1, 2, 3, 4, 5):
            energy = total_energy(excited_state(vac, k), vac)
            self.assertAlmostEqual(energy / semidiscrete_frequencies(M)[k], 1.0, delta=0.02)
            self.assertAlmostEqual(energy, vac.frequencies[k], delta=1e-9 * energy)

    def test_single_quantum_carries_the_transfer_frequency_at_any_step(self):
        # at dt = dx / 2 the top modes sit a few percent above sqrt(lambda)
        energy = total_energy(excited_state(self.vac, 5), self.vac)
        self.assertAlmostEqual(energy, self.vac.frequencies[5], delta=1e-9 * energy)
        self.assertGreater(energy / semidiscrete_frequencies(self.M)[5], 1.03)

    def test_squeezing_gives_negative_density(self):
        state = squeezed_state(self.vac, 1, 0.5)
        lowest = min(
            energy_density(state, self.vac, static_worldline(self.M, j, 0, 44))[1].min()
            for j in range(self.M.n_x)
        )
        self.assertLess(lowest, 0.0)
        self.assertGreater(total_energy(state, self.vac), 0.0)


class QeiTest(SimpleTestCase):
    def setUp(self):
        self.M = flat(n_x=16, n_t=48, kg=KGParams(m_sq=1.0))
        self.vac = ultrastatic_vacuum(self.M)
        self.gamma = static_worldline(self.M, 8, 2, 44)
        self.f = gaussian_sampling(self.gamma, width=0.4)

    def family(self):
        family = random_gaussian_family(self.vac, 200, seed=42)
        family += [squeezed_state(self.vac, k, r, a) for k in (1, 2, 3) for r in (0.3, 1.0) for a in (0.0, 0.8)]
        return family

    def test_sampled_states_respect_the_bound(self):
        report = qei_check(self.family(), self.vac, self.gamma, self.f)
        self.assertTrue(report.passed)
        self.assertLess(report.bound, 0.0)
        self.assertTrue(np.isfinite(report.bound))
        self.assertLess(report.minimum, 0.0)
        self.assertEqual(report.values[0], 0.0)

    def test_scaling_the_weight(self):
        family = self.family()[:20]
        one = qei_check(family, self.vac, self.gamma, self.f)
        two = qei_check(family, self.vac, self.gamma, self.f.scaled(2.0))
        np.testing.assert_allclose(two.values, 2 * np.array(one.values), rtol=1e-9, atol=1e-12)
        self.assertAlmostEqual(two.bound, 2 * one.bound, delta=1e-9 * abs(one.bound))

    def test_optimal_state_reaches_the_bound(self):
        report = qei_check([self.vac], self.vac, self.gamma, self.f)
        best = optimal_qei_state(self.vac, self.gamma, self.f)
        value = qei_check([best], self.vac, self.gamma, self.f).values[0]
        self.assertGreaterEqual(value, report.bound - 1e-6 * abs(report.bound))
        self.assertLess(value, 0.5 * report.bound)

    def test_non_ultrastatic_rejected(self):
        M = bump(n_x=16, n_t=48)
        from .quasifree import QuasifreeState

        fake = QuasifreeState(self.vac.W, M, 0)
        with self.assertRaisesRegex(StateError, "ultrastatic required"):
            qei_check([fake], fake, static_worldline(M, 8, 2, 44), self.f)


class BogoliubovTest(SimpleTestCase):
    def setUp(self):
        self.M = flat(n_x=16, n_t=48, kg=KGParams(m_sq=1.0))
        self.vac = ultrastatic_vacuum(self.M)

    def test_identity_creates_nothing(self):
        state = bogoliubov_transport(self.vac, np.eye(2 * self.M.n_x))
        self.assertLess(abs(particle_number(self.vac, state)), 1e-10)

    def test_sudden_mass_jump(self):
        heavy = ultrastatic_vacuum(flat(n_x=16, n_t=48, kg=KGParams(m_sq=4.0)))
        occupations = mode_occupations(heavy, self.vac)
        w, w2 = self.vac.frequencies, heavy.frequencies
        np.testing.assert_allclose(occupations, (w - w2) ** 2 / (4 * w * w2), atol=1e-6)
        self.assertAlmostEqual(particle_number(heavy, self.vac), occupations.sum(), delta=1e-8)

    def test_curvature_bump_creates_particles(self):
        h = bump_perturbation(self.M, center=(24, 8), widths=(8, 5), amp_beta=0.3)
        rmap = rce_transport(self.M, h, t_ref=0)
        state = bogoliubov_transport(self.vac, rmap.matrix).validate()
        self.assertGreater(particle_number(self.vac, state), 1e-6)
        self.assertLess(state.ccr_defect(), 1e-11)

    def test_rejects_non_symplectic_maps(self):
        with self.assertRaisesRegex(StateError, "not symplectic"):
            bogoliubov_transport(self.vac, 2.0 * np.eye(2 * self.M.n_x))


class HadamardDifferenceTest(SimpleTestCase):
    def setUp(self):
        self.M = flat(n_x=32, n_t=20, kg=KGParams(m_sq=1.0))
        self.vac = ultrastatic_vacuum(self.M)

    def test_identical_states(self):
        report = hadamard_difference(self.vac, self.vac)
        self.assertEqual(report.differences, [0.0] * len(report.differences))
        self.assertTrue(report.compatible)

    def test_vacua_of_different_mass_are_compatible(self):
        other = ultrastatic_vacuum(flat(n_x=32, n_t=20, kg=KGParams(m_sq=4.0)))
        report = hadamard_difference(self.vac, other)
        self.assertEqual(report.classification, "Hadamard-compatible pair")

    def test_chopped_vacuum_is_singular(self):
        report = hadamard_difference(self.vac, chopped_vacuum(self.vac))
        self.assertFalse(report.compatible)
