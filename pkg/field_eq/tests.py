import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from geometry.causal import causal_future, causal_past, causally_disjoint
from geometry.regions import Region, diamond
from geometry.spacetime import KGParams, bump, cosmological, flat
from kg_workbench.exceptions import ConfigError, GeometryError

from .convergence import dalembert_convergence
from .data import CauchyData, SolutionField, TestFunction, random_test_function, symplectic_form
from .green import (
    advanced_array,
    commutator_function,
    evolve_data,
    green_retarded,
    point_field_data,
    retarded_array,
    solution_from_data,
    to_quotient,
    transfer_matrix,
)
from .operator import apply_P, apply_P_array, inner_w, variation_P
from .serialization import read_grid_csv, write_grid_csv
from .timeslice import timeslice_representative


def configs():
    kg = KGParams(m_sq=1.0, xi=0.3)
    return {
        "flat": flat(n_x=24, n_t=40, kg=kg),
        "bump": bump(n_x=24, n_t=40, kg=kg, amplitude=0.4),
        "cosmological": cosmological(n_x=24, n_t=40, kg=kg, expansion=0.3),
    }


def interior_random(M, rng):
    values = rng.standard_normal(M.shape)
    values[:5] = 0.0
    values[-5:] = 0.0
    return values


class DiscretePTest(SimpleTestCase):
    def test_constants_are_massless_solutions(self):
        M = flat(n_x=16, n_t=20, kg=KGParams(0.0, 0.0))
        Pu = apply_P(M, SolutionField(np.full(M.shape, 3.0)))
        self.assertLess(np.abs(Pu.values).max(), 1e-11)

    def test_plane_wave_with_lattice_dispersion(self):
        M = flat(n_x=32, n_t=40, kg=KGParams(m_sq=1.0))
        k = 2 * np.pi * 3 / (M.n_x * M.dx)
        lam = (2 / M.dx * np.sin(k * M.dx / 2)) ** 2 + 1.0
        omega = 2 / M.dt * np.arcsin(M.dt * np.sqrt(lam) / 2)
        t = np.arange(M.n_t)[:, None] * M.dt
        x = np.arange(M.n_x)[None, :] * M.dx
        residual = apply_P_array(M, np.cos(k * x - omega * t))
        self.assertLess(np.abs(residual).max(), 1e-10)

    def test_w_symmetry(self):
        rng = np.random.default_rng(1)
        for name, M in configs().items():
            with self.subTest(name):
                u, v = interior_random(M, rng), interior_random(M, rng)
                lhs = inner_w(M, apply_P_array(M, u), v)
                rhs = inner_w(M, u, apply_P_array(M, v))
                scale = np.sum(np.abs(M.w * apply_P_array(M, u) * v)) * M.dt * M.dx
                self.assertLess(abs(lhs - rhs), 1e-12 * scale)

    def test_variation_matches_finite_difference(self):
        from geometry.perturbations import bump_perturbation, perturb

        M = bump(n_x=24, n_t=40, kg=KGParams(m_sq=1.0, xi=0.3), amplitude=0.2)
        h = bump_perturbation(M, (20, 12), (8, 6), amp_beta=0.1, amp_a=-0.05)
        u = interior_random(M, np.random.default_rng(3))
        s = 1e-5
        fd = (apply_P_array(perturb(M, h.scaled(s)), u) - apply_P_array(perturb(M, h.scaled(-s)), u)) / (2 * s)
        exact = variation_P(M, h.d_beta, h.d_a, u)
        self.assertLess(np.abs(fd - exact).max(), 1e-6 * np.abs(exact).max())


class GreenOperatorTest(SimpleTestCase):
    def test_retarded_inverts_P_on_interior(self):
        rng = np.random.default_rng(2)
        for name, M in configs().items():
            with self.subTest(name):
                f = random_test_function(M, rng)
                u = green_retarded(M, f)
                residual = apply_P(M, u).values - f.values
                self.assertLess(np.abs(residual[1:-1]).max(), 1e-12 * np.abs(f.values).max())

    def test_retarded_support_inside_dilated_future(self):
        rng = np.random.default_rng(4)
        for name, M in configs().items():
            with self.subTest(name):
                f = random_test_function(M, rng)
                ret = retarded_array(M, f)
                adv = advanced_array(M, f)
                self.assertFalse(np.any(ret[~causal_future(M, f.support).mask]))
                self.assertFalse(np.any(adv[~causal_past(M, f.support).mask]))

    def test_antisymmetry(self):
        rng = np.random.default_rng(5)
        for name, M in configs().items():
            with self.subTest(name):
                f, h = random_test_function(M, rng), random_test_function(M, rng)
                self.assertLess(abs(commutator_function(M, f, h) + commutator_function(M, h, f)), 1e-12)
                self.assertLess(abs(commutator_function(M, f, f)), 1e-12)

    def test_causally_disjoint_supports_commute(self):
        M = configs()["bump"]
        rng = np.random.default_rng(6)
        O1 = diamond(M, 20, 5, 3)
        O2 = diamond(M, 20, 17, 3)
        self.assertTrue(causally_disjoint(M, O1, O2))
        for _ in range(5):
            f = random_test_function(M, rng, O1)
            h = random_test_function(M, rng, O2)
            self.assertEqual(commutator_function(M, f, h), 0.0)

    def test_dalembert_convergence(self):
        results, orders = dalembert_convergence(levels=3, dx0=0.1)
        self.assertLess(results[-1].error, results[0].error)
        for order in orders:
            self.assertGreaterEqual(order, 1.8)


class QuotientTest(SimpleTestCase):
    def test_P_image_is_killed(self):
        rng = np.random.default_rng(7)
        for name, M in configs().items():
            with self.subTest(name):
                g = interior_random(M, rng)
                data = to_quotient(M, TestFunction(apply_P_array(M, g)), 10)
                self.assertLess(data.max_norm(), 1e-12 * np.abs(g).max() * 1e2)

    def test_linearity(self):
        M = configs()["cosmological"]
        rng = np.random.default_rng(8)
        f, h = random_test_function(M, rng), random_test_function(M, rng, complex_valued=True)
        alpha = 0.7 - 1.3j
        lhs = to_quotient(M, alpha * f + h, 12)
        rhs = alpha * to_quotient(M, f, 12) + to_quotient(M, h, 12)
        self.assertLess((lhs - rhs).max_norm(), 1e-12 * max(lhs.max_norm(), 1.0))

    def test_symplectic_form_equals_E_on_every_surface(self):
        rng = np.random.default_rng(9)
        for name, M in configs().items():
            f, h = random_test_function(M, rng), random_test_function(M, rng)
            E = commutator_function(M, f, h)
            for t_ref in (0, 13, 25, M.n_t - 2):
                with self.subTest(name, t_ref=t_ref):
                    sigma = symplectic_form(to_quotient(M, f, t_ref), to_quotient(M, h, t_ref), M.dx)
                    self.assertLess(abs(sigma - E), 1e-11 * max(abs(E), 1.0))

    def test_symplectic_form_is_antisymmetric(self):
        rng = np.random.default_rng(10)
        d1 = CauchyData(rng.standard_normal(8), rng.standard_normal(8))
        d2 = CauchyData(rng.standard_normal(8), rng.standard_normal(8))
        self.assertEqual(symplectic_form(d1, d1, 0.1), 0.0)
        self.assertAlmostEqual(symplectic_form(d1, d2, 0.1), -symplectic_form(d2, d1, 0.1), places=14)

    def test_evolve_data_round_trip_and_symplectic(self):
        M = configs()["bump"]
        rng = np.random.default_rng(11)
        data = CauchyData(rng.standard_normal(M.n_x), rng.standard_normal(M.n_x), 5)
        there = evolve_data(M, data, 30)
        back = evolve_data(M, there, 5)
        self.assertLess((back - data).max_norm(), 1e-10)
        T = transfer_matrix(M, 5, 30)
        from .data import symplectic_matrix

        J = symplectic_matrix(M.n_x, M.dx)
        self.assertLess(np.abs(T.T @ J @ T - J).max(), 1e-10)

    def test_evolution_agrees_with_full_solution(self):
        M = configs()["cosmological"]
        f = random_test_function(M, np.random.default_rng(12))
        d10 = to_quotient(M, f, 10)
        self.assertLess((evolve_data(M, d10, 30) - to_quotient(M, f, 30)).max_norm(), 1e-10)
        u = solution_from_data(M, d10)
        self.assertLess(np.abs(apply_P(M, u).values).max(), 1e-9)

    def test_point_field_data_reads_the_field(self):
        M = configs()["bump"]
        rng = np.random.default_rng(13)
        data = CauchyData(rng.standard_normal(M.n_x), rng.standard_normal(M.n_x), 15)
        u = solution_from_data(M, data).values
        d = point_field_data(M, 15, 7)
        self.assertAlmostEqual(symplectic_form(d, data, M.dx), u[15, 7], places=12)
        d_next = point_field_data(M, 15, 7, "next")
        self.assertAlmostEqual(symplectic_form(d_next, data, M.dx), u[16, 7], places=11)


class TimesliceTest(SimpleTestCase):
    def test_band_representative(self):
        rng = np.random.default_rng(14)
        band = (16, 20)
        for name, M in configs().items():
            for _ in range(3):
                f = random_test_function(M, rng)
                h = random_test_function(M, rng)
                with self.subTest(name):
                    g = timeslice_representative(M, f, band)
                    rows = g.support.rows
                    self.assertTrue(rows.size == 0 or (rows.min() >= band[0] and rows.max() <= band[1]))
                    diff = to_quotient(M, g, 10) - to_quotient(M, f, 10)
                    self.assertLess(diff.max_norm(), 1e-12 * max(to_quotient(M, f, 10).max_norm(), 1.0))
                    self.assertLess(
                        abs(commutator_function(M, g, h) - commutator_function(M, f, h)), 1e-11
                    )

    def test_representative_of_later_function_stays_in_its_past(self):
        M = configs()["flat"]
        f = random_test_function(M, np.random.default_rng(15), diamond(M, 30, 12, 1))
        g = timeslice_representative(M, f, (14, 18))
        self.assertTrue(g.support.issubset(causal_past(M, f.support)))

    def test_thin_band_rejected(self):
        M = configs()["flat"]
        f = random_test_function(M, np.random.default_rng(16))
        with self.assertRaises(GeometryError):
            timeslice_representative(M, f, (10, 11))


class SerializationTest(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.path = Path(self.tmp.name) / "grid.csv"

    def test_green_field_survives_csv(self):
        M = configs()["bump"]
        f = random_test_function(M, np.random.default_rng(17), complex_valued=True)
        u = green_retarded(M, f).values
        write_grid_csv(self.path, u)
        np.testing.assert_array_equal(read_grid_csv(self.path, M.shape), u)
        lines = self.path.read_text().split("\n")
        self.assertEqual(lines[0], "t,x,re,im")
        self.assertEqual(len(lines) - 2, np.count_nonzero(u))

    def test_bad_rows_report_their_line(self):
        self.path.write_text("t,x,re,im\n3,4,1.0,0.0\n3,x,1.0,0.0\n")
        with self.assertRaises(ConfigError) as ctx:
            read_grid_csv(self.path, (8, 8))
        self.assertEqual(ctx.exception.lineno, 3)
