import numpy as np
from django.test import SimpleTestCase

from dynamics.rce import rce_transport
from field_eq.data import symplectic_matrix
from field_eq.green import transfer_matrix
from geometry.perturbations import MetricPerturbation, bump_perturbation
from geometry.regions import Region, diamond
from geometry.spacetime import KGParams, Spacetime, bump, flat
from kg_workbench.exceptions import GeometryError, SolvabilityError, WorkbenchError
from states.quasifree import particle_number
from states.vacuum import ultrastatic_vacuum

from .chains import assemble_chain, cauchy_chain_through, interpolate, transport_state
from .rigidity import verify_causality_rigidity

KG = KGParams(m_sq=1.0)


class InterpolationTest(SimpleTestCase):
    def setUp(self):
        self.M = flat(n_x=16, n_t=48, kg=KG)
        self.N = bump(n_x=16, n_t=48, kg=KG, amplitude=0.3)

    def test_trivial_chain_is_identity(self):
        chain = interpolate(self.M, self.M, (16, 24))
        np.testing.assert_allclose(chain.matrix, np.eye(2 * self.M.n_x), atol=1e-12)
        self.assertEqual((chain.past_surface, chain.future_surface), (13, 27))
        self.assertEqual(len(chain.links), 4)

    def test_interpolant_agrees_with_ends_outside_band(self):
        chain = interpolate(self.M, self.N, (16, 24))
        np.testing.assert_array_equal(chain.interpolant.beta[:17], self.M.beta[:17])
        np.testing.assert_array_equal(chain.interpolant.beta[24:], self.N.beta[24:])

    def test_flat_to_bump_is_symplectic_and_nontrivial(self):
        chain = interpolate(self.M, self.N, (16, 24))
        self.assertLess(chain.symplectic_defect(), 1e-9)
        self.assertGreater(np.abs(chain.matrix - np.eye(2 * self.M.n_x)).max(), 1e-6)

    def test_composite_matches_direct_evolution(self):
        chain = interpolate(self.M, self.N, (16, 24), source_surface=5, target_surface=40)
        direct = transfer_matrix(chain.interpolant, 5, 40)
        self.assertLess(np.abs(chain.matrix - direct).max(), 1e-9 * np.abs(direct).max())

    def test_mismatched_lattices_rejected(self):
        with self.assertRaises(GeometryError):
            interpolate(self.M, flat(n_x=12, n_t=48, kg=KG), (16, 24))
        with self.assertRaises(GeometryError):
            interpolate(self.M, flat(n_x=16, n_t=48, kg=KGParams(m_sq=2.0)), (16, 24))

    def test_blend_violating_cfl_suggests_wider_band(self):
        # both ends sit just inside the CFL limit, the blend does not
        M = flat(n_x=16, n_t=48, dx=0.1, dt=0.078, kg=KG)
        N = Spacetime(M.dt, M.dx, np.full(M.shape, 4.0), np.full(M.shape, 2.0), KG)
        with self.assertRaisesMessage(SolvabilityError, "widen the band"):
            interpolate(M, N, (16, 24))

    def test_band_without_room_rejected(self):
        with self.assertRaises(GeometryError):
            interpolate(self.M, self.N, (20, 20))

    def test_chain_through_inverts_relative_cauchy_evolution(self):
        h = bump_perturbation(self.M, center=(24, 8), widths=(6, 4), amp_beta=0.2)
        chain = cauchy_chain_through(self.M, h)
        self.assertEqual(chain.band, (19, 29))
        rmap = rce_transport(self.M, h, t_ref=chain.past_surface)
        np.testing.assert_allclose(chain.matrix @ rmap.matrix, np.eye(2 * self.M.n_x), atol=1e-9)


class TransportTest(SimpleTestCase):
    def setUp(self):
        self.M = flat(n_x=16, n_t=48, kg=KG)
        self.h = bump_perturbation(self.M, center=(24, 8), widths=(6, 4), amp_beta=0.2)

    def test_trivial_chain_keeps_state(self):
        chain = cauchy_chain_through(self.M, MetricPerturbation.zero(self.M))
        vac = ultrastatic_vacuum(self.M, chain.target_surface)
        result = transport_state(chain, vac)
        np.testing.assert_allclose(result.state.W, vac.W, atol=1e-12)
        self.assertLess(abs(result.particle_number), 1e-10)

    def test_vacuum_through_bump_creates_particles(self):
        chain = cauchy_chain_through(self.M, self.h)
        vac = ultrastatic_vacuum(self.M, chain.target_surface)
        result = transport_state(chain, vac)
        self.assertGreater(result.particle_number, 1e-6)
        self.assertGreaterEqual(result.state.min_eigenvalue(), -1e-10)
        self.assertEqual(result.hadamard.classification, "Hadamard-compatible pair")
        self.assertEqual(result.as_dict()["hadamard"], "Hadamard-compatible pair")

    def test_commutator_is_chain_invariant(self):
        chain = cauchy_chain_through(self.M, self.h)
        vac = ultrastatic_vacuum(self.M, chain.target_surface)
        state = transport_state(chain, vac).state
        sigma = symplectic_matrix(self.M.n_x, self.M.dx)
        self.assertLess(np.abs(state.W - state.W.T - 1j * sigma).max(), 1e-10)
        J = chain.matrix.T @ sigma @ chain.matrix
        self.assertLess(np.abs(J - sigma).max(), 1e-10)

    def test_different_bands_give_valid_states(self):
        vac = ultrastatic_vacuum(self.M, 14)
        N = bump(n_x=16, n_t=48, kg=KG, amplitude=0.2)
        for band in ((17, 22), (17, 30)):
            chain = assemble_chain(self.M, interpolate(self.M, N, band).interpolant, self.M, band,
                                   source_surface=14, target_surface=14)
            with self.subTest(band=band):
                result = transport_state(chain, vac)
                self.assertGreaterEqual(result.state.min_eigenvalue(), -1e-10)
                self.assertGreaterEqual(particle_number(vac, result.state), -1e-10)

    def test_state_on_wrong_surface_rejected(self):
        chain = cauchy_chain_through(self.M, self.h)
        with self.assertRaisesMessage(WorkbenchError, "chain ends on"):
            transport_state(chain, ultrastatic_vacuum(self.M, chain.target_surface + 1))


class RigidityTest(SimpleTestCase):
    def setUp(self):
        self.M = flat(n_x=32, n_t=48, kg=KG)
        self.N = bump(n_x=32, n_t=48, kg=KG, amplitude=0.3, center=(34, 16), widths=(8, 8))
        self.band = (12, 18)

    def test_flat_and_deformed_pairs(self):
        pairs = [
            (diamond(self.M, 30, 6, 1), diamond(self.M, 30, 20, 1)),
            (Region.from_points(self.M, [(34, 10)]), Region.from_points(self.M, [(36, 14)])),
            (diamond(self.M, 24, 4, 2), diamond(self.M, 26, 14, 1)),
        ]
        report = verify_causality_rigidity(self.M, self.N, pairs, self.band)
        self.assertTrue(report.passed)
        self.assertLessEqual(report.max_residual, 1e-10)
        for pair in report.pairs:
            self.assertLessEqual(pair.ultrastatic, 1e-11)

    def test_bases_on_past_surface(self):
        pairs = [(Region.from_points(self.M, [(11, 4)]), Region.from_points(self.M, [(11, 16)]))]
        report = verify_causality_rigidity(self.M, self.N, pairs, self.band)
        self.assertTrue(report.pairs[0].bases_disjoint)
        self.assertLessEqual(report.pairs[0].base_residual, 1e-10)

    def test_touching_pairs(self):
        pairs = [
            (Region.from_points(self.M, [(30, 10)]), Region.from_points(self.M, [(30, 11)])),
            (Region.from_points(self.M, [(30, 10)]), Region.from_points(self.M, [(31, 12)])),
        ]
        report = verify_causality_rigidity(self.M, self.N, pairs, self.band)
        self.assertTrue(all(p.touching for p in report.pairs))
        self.assertTrue(report.passed)
        header, body = report.rows()
        self.assertEqual(header[-1], "status")
        self.assertEqual([row[-1] for row in body], ["PASS", "PASS"])

    def test_related_regions_rejected(self):
        pairs = [(Region.from_points(self.M, [(30, 10)]), Region.from_points(self.M, [(32, 11)]))]
        with self.assertRaisesMessage(GeometryError, "regions not causally disjoint"):
            verify_causality_rigidity(self.M, self.N, pairs, self.band)

    def test_non_ultrastatic_start_rejected(self):
        with self.assertRaises(GeometryError):
            verify_causality_rigidity(self.N, self.M, [], self.band)
