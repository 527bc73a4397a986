import numpy as np
from django.test import SimpleTestCase

from kg_workbench.exceptions import GeometryError, PerturbationError, SolvabilityError

from .causal import (
    causal_complement,
    causal_future,
    causal_past,
    causally_disjoint,
    cauchy_development,
    is_causally_convex,
)
from .embeddings import Embedding, identity_embedding
from .perturbations import MetricPerturbation, bump_perturbation, lie_perturbation, perturb, pullback_metric
from .regions import CUSTOM, DIAMOND, SLAB, Region, diamond, slab, static_worldline, surface_interval, worldline
from .spacetime import KGParams, Spacetime, bump, cos2_bump, cosmological, flat, periodic_offset


def random_region(M, rng, size=3):
    points = [(int(rng.integers(6, M.n_t - 6)), int(rng.integers(0, M.n_x))) for _ in range(size)]
    return Region.from_points(M, points)


class SpacetimeTest(SimpleTestCase):
    def test_cfl_violation_rejected(self):
        with self.assertRaises(SolvabilityError):
            flat(n_x=16, n_t=16, dx=0.1, dt=0.09)

    def test_signature_violation_rejected(self):
        beta = np.ones((8, 8))
        beta[3, 3] = -1.0
        with self.assertRaises(GeometryError):
            Spacetime(0.05, 0.1, beta, np.ones((8, 8)))

    def test_negative_mass_rejected(self):
        with self.assertRaises(GeometryError):
            KGParams(m_sq=-1.0)

    def test_families_are_valid(self):
        for M in (flat(n_x=16, n_t=24), bump(n_x=16, n_t=24), cosmological(n_x=16, n_t=24)):
            with self.subTest(repr(M)):
                self.assertEqual(M.shape, (24, 16))
                self.assertGreater(M.w.min(), 0.0)
        self.assertTrue(flat(n_x=16, n_t=24).is_ultrastatic)
        self.assertFalse(cosmological(n_x=16, n_t=24).is_static)

    def test_flat_curvature_vanishes(self):
        self.assertEqual(np.abs(flat(n_x=16, n_t=24).curvature).max(), 0.0)

    def test_expanding_curvature_matches_continuum(self):
        M = cosmological(n_x=8, n_t=200, dx=0.1, expansion=0.5, start=50, stop=150)
        a = M.a[:, 0]
        a_tt = np.gradient(np.gradient(a, M.dt), M.dt)
        rows = slice(60, 140)
        np.testing.assert_allclose(M.curvature[rows, 0], (2 * a_tt / a)[rows], rtol=5e-2, atol=1e-3)


class CausalStructureTest(SimpleTestCase):
    def test_flat_future_of_point_is_unit_cone(self):
        M = flat(n_x=32, n_t=24)
        F = causal_future(M, Region.from_points(M, [(5, 10)]))
        for t in range(M.n_t):
            for x in range(M.n_x):
                expected = t >= 5 and abs(int(periodic_offset(x, 10, M.n_x))) <= t - 5 + 1
                self.assertEqual((t, x) in F, expected, (t, x))
        # past the half circumference the cone closes around the circle
        self.assertEqual(len(Region(F.mask[22:])), 2 * M.n_x)

    def test_future_cone_wraps_across_the_seam(self):
        M = flat(n_x=32, n_t=24)
        F = causal_future(M, Region.from_points(M, [(5, 1)]))
        self.assertIn((6, 31), F)
        self.assertIn((7, 30), F)
        self.assertNotIn((6, 30), F)
        self.assertNotIn((6, 4), F)

    def test_cone_is_metric_independent(self):
        S = Region.from_points(flat(n_x=24, n_t=24), [(8, 3)])
        conformal = Spacetime(0.05, 0.1, np.full((24, 24), 1.44), np.full((24, 24), 1.2))
        self.assertEqual(causal_future(flat(n_x=24, n_t=24), S), causal_future(conformal, S))

    def test_reflexive_and_transitive(self):
        rng = np.random.default_rng(0)
        for i in range(100):
            M = flat(n_x=16, n_t=24) if i % 2 else bump(n_x=16, n_t=24)
            p = Region.from_points(M, [(int(rng.integers(0, 8)), int(rng.integers(0, 16)))])
            Fp = causal_future(M, p, dilate=False)
            self.assertTrue(p.issubset(Fp))
            q = Region.from_points(M, [sorted(Fp.points)[int(rng.integers(0, len(Fp)))]])
            self.assertTrue(causal_future(M, q, dilate=False).issubset(Fp))

    def test_monotone_and_antitone(self):
        M = flat(n_x=24, n_t=32)
        rng = np.random.default_rng(1)
        for _ in range(10):
            small = random_region(M, rng)
            big = small | random_region(M, rng)
            self.assertTrue(causal_future(M, small).issubset(causal_future(M, big)))
            self.assertTrue(causal_complement(M, big).issubset(causal_complement(M, small)))

    def test_complement_of_slab_is_empty(self):
        M = flat(n_x=16, n_t=24)
        self.assertTrue(causal_complement(M, slab(M, 10, 11)).is_empty)

    def test_double_complement_contains_region(self):
        M = flat(n_x=48, n_t=32)
        for r in (1, 2, 4):
            O = diamond(M, 16, 20, r)
            self.assertTrue(O.issubset(causal_complement(M, causal_complement(M, O))))

    def test_complement_of_diamond_by_enumeration(self):
        M = flat(n_x=48, n_t=32)
        O = diamond(M, 16, 20, 3)
        comp = causal_complement(M, O)
        for t in range(M.n_t):
            for x in range(M.n_x):
                related = any(
                    min(abs(x - ox), M.n_x - abs(x - ox)) <= abs(t - ot) + 1 for ot, ox in O.points
                )
                self.assertEqual((t, x) in comp, not related, (t, x))

    def test_development_of_interval_is_diamond(self):
        M = flat(n_x=48, n_t=40)
        base = surface_interval(M, 20, 15, 25)
        D = cauchy_development(M, base)
        self.assertEqual(D, diamond(M, 20, 20, 4) | base)
        self.assertTrue(base.issubset(D))
        self.assertTrue(is_causally_convex(M, D))

    def test_development_of_whole_surface_is_window(self):
        M = flat(n_x=16, n_t=20)
        self.assertEqual(cauchy_development(M, surface_interval(M, 7, 0, 15)), Region.full(M))

    def test_development_of_two_intervals_is_two_diamonds(self):
        M = flat(n_x=48, n_t=40)
        left = surface_interval(M, 20, 4, 12)
        right = surface_interval(M, 20, 28, 36)
        self.assertEqual(cauchy_development(M, left | right), cauchy_development(M, left) | cauchy_development(M, right))

    def test_base_must_lie_on_one_surface(self):
        M = flat(n_x=16, n_t=20)
        with self.assertRaisesMessage(GeometryError, "base must lie on a Cauchy surface"):
            cauchy_development(M, Region.from_points(M, [(3, 1), (4, 1)]))

    def test_empty_region(self):
        M = flat(n_x=16, n_t=20)
        with self.assertRaisesMessage(GeometryError, "empty region"):
            causal_future(M, Region.empty(M))

    def test_set_operations_keep_the_kind_they_preserve(self):
        M = flat(n_x=16, n_t=20)
        D = diamond(M, 10, 8, 2)
        S = slab(M, 6, 14)
        self.assertEqual((D & S).kind, DIAMOND)
        self.assertEqual((S | D).kind, SLAB)
        self.assertEqual((D - slab(M, 0, 2)).kind, DIAMOND)
        self.assertEqual((D | Region.empty(M)).kind, DIAMOND)
        self.assertEqual((D | diamond(M, 10, 2, 2)).kind, CUSTOM)
        self.assertEqual((S - D).kind, CUSTOM)
        self.assertEqual((D & diamond(M, 10, 9, 2)).kind, CUSTOM)

    def test_touching_pairs(self):
        M = flat(n_x=48, n_t=32)
        O1 = Region.from_points(M, [(10, 10)])
        O2 = Region.from_points(M, [(10, 11)])
        self.assertFalse(causally_disjoint(M, O1, O2))
        self.assertTrue(causally_disjoint(M, O1, O2, touching_ok=True))
        self.assertTrue(causally_disjoint(M, O1, Region.from_points(M, [(10, 13)])))


class PerturbationTest(SimpleTestCase):
    def test_zero_perturbation_is_identity(self):
        M = bump(n_x=16, n_t=24)
        self.assertIs(perturb(M, MetricPerturbation.zero(M)), M)

    def test_moderate_bump_passes(self):
        M = flat(n_x=32, n_t=48)
        h = bump_perturbation(M, (24, 16), (10, 8), amp_beta=0.1)
        self.assertEqual(perturb(M, h).beta.max(), 1.1)

    def test_signature_violation_is_too_large(self):
        M = flat(n_x=32, n_t=48)
        h = bump_perturbation(M, (24, 16), (10, 8), amp_beta=-1.5)
        with self.assertRaisesMessage(PerturbationError, "perturbation too large"):
            perturb(M, h)

    def test_support_in_padding_rejected(self):
        M = flat(n_x=16, n_t=24)
        d = np.zeros(M.shape)
        d[2, 3] = 0.1
        with self.assertRaises(GeometryError):
            MetricPerturbation(d, np.zeros(M.shape))

    def test_zero_vector_field(self):
        M = bump(n_x=16, n_t=24)
        h = lie_perturbation(M, np.zeros(M.shape), np.zeros(M.shape))
        self.assertTrue(h.is_zero)

    def test_time_reparametrization_in_flat_space(self):
        M = flat(n_x=32, n_t=64)
        f = 0.05 * cos2_bump(M.shape, (32, 16), (16, 10))
        h = lie_perturbation(M, f, np.zeros(M.shape))
        np.testing.assert_allclose(h.d_beta, 2 * np.gradient(f, M.dt, axis=0), atol=1e-12)
        self.assertEqual(np.abs(h.d_a).max(), 0.0)

    def test_lie_derivative_matches_pullback(self):
        M = bump(n_x=48, n_t=64, amplitude=0.3)
        X_t = 0.1 * cos2_bump(M.shape, (32, 20), (16, 16))
        X_x = 0.05 * cos2_bump(M.shape, (30, 26), (16, 16))
        s = 1e-3
        lie = lie_perturbation(M, X_t, X_x)
        pulled = pullback_metric(M, X_t, X_x, s)
        scale = lie.norm()
        self.assertLess(np.abs(pulled.d_beta / s - lie.d_beta).max(), 5e-2 * scale)
        self.assertLess(np.abs(pulled.d_a / s - lie.d_a).max(), 5e-2 * scale)

    def test_vector_field_in_padding_rejected(self):
        M = flat(n_x=16, n_t=24)
        X = np.zeros(M.shape)
        X[1, 4] = 0.1
        with self.assertRaises(GeometryError):
            lie_perturbation(M, X, np.zeros(M.shape))


class WorldlineAndEmbeddingTest(SimpleTestCase):
    def test_static_worldline_proper_time(self):
        M = flat(n_x=16, n_t=24)
        gamma = static_worldline(M, 3, 2, 12)
        np.testing.assert_allclose(gamma.dtau, M.dt)
        self.assertTrue(gamma.is_static)

    def test_spacelike_step_rejected(self):
        M = flat(n_x=16, n_t=24)
        with self.assertRaises(GeometryError):
            worldline(M, [(2, 3), (3, 4)])

    def test_identity_and_translation_embeddings(self):
        M = flat(n_x=16, n_t=24)
        N = flat(n_x=16, n_t=40)
        self.assertEqual(identity_embedding(M).push_region(diamond(M, 10, 5, 2)), diamond(M, 10, 5, 2))
        psi = Embedding(M, N, t_offset=6, x_roll=3)
        self.assertEqual(psi.push_region(Region.from_points(M, [(1, 15)])), Region.from_points(N, [(7, 2)]))

    def test_metric_mismatch_not_isometric(self):
        M = bump(n_x=16, n_t=24)
        with self.assertRaisesMessage(GeometryError, "not isometric"):
            Embedding(M, bump(n_x=16, n_t=24, amplitude=0.1))
