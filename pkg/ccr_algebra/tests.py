import numpy as np
from django.test import SimpleTestCase

from field_eq.data import TestFunction, random_test_function
from field_eq.green import commutator_function
from field_eq.operator import apply_P_array
from geometry.causal import causal_complement, cauchy_development
from geometry.embeddings import Embedding, identity_embedding
from geometry.regions import Region, diamond, slab, surface_interval
from geometry.spacetime import KGParams, bump, flat
from kg_workbench.exceptions import ConfigError, TruncationError

from .elements import AlgebraElement, OneParticleBasis, adjoint, commutator, from_text, mul, to_text
from .kinematic import even_subalgebra_span, gen, kinematic_subspace
from .morphisms import pushforward_morphism


def small_spacetime():
    return bump(n_x=8, n_t=24, kg=KGParams(m_sq=1.0, xi=0.2), amplitude=0.3)


def toy_basis():
    # two canonical pairs
    gram = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]], dtype=float)
    return OneParticleBasis(gram)


def random_element(basis, rng, degree, n_terms=3):
    words = {}
    for _ in range(n_terms):
        word = tuple(int(i) for i in rng.integers(0, basis.size, size=degree))
        words[word] = complex(rng.standard_normal(), rng.standard_normal())
    return AlgebraElement.from_words(basis, words)


class AxiomTest(SimpleTestCase):
    def setUp(self):
        self.M = small_spacetime()
        self.basis = OneParticleBasis.for_spacetime(self.M, 10)
        self.rng = np.random.default_rng(20)

    def test_linearity(self):
        for _ in range(20):
            f = random_test_function(self.M, self.rng, complex_valued=True)
            h = random_test_function(self.M, self.rng)
            alpha = complex(*self.rng.standard_normal(2))
            lhs = gen(self.M, alpha * f + h, self.basis)
            rhs = alpha * gen(self.M, f, self.basis) + gen(self.M, h, self.basis)
            self.assertLess(lhs.distance(rhs), 1e-12 * max(lhs.max_coefficient(), 1.0))

    def test_field_equation(self):
        for _ in range(20):
            g = np.zeros(self.M.shape)
            g[6:18] = self.rng.standard_normal((12, self.M.n_x))
            element = gen(self.M, TestFunction(apply_P_array(self.M, g)), self.basis)
            self.assertLess(element.max_coefficient(), 1e-12 * max(np.abs(g).max(), 1.0))

    def test_hermiticity(self):
        for _ in range(20):
            f = random_test_function(self.M, self.rng, complex_valued=True)
            self.assertLess(adjoint(gen(self.M, f, self.basis)).distance(gen(self.M, f.conj(), self.basis)), 1e-13)

    def test_canonical_commutation_relations(self):
        for _ in range(20):
            f, h = random_test_function(self.M, self.rng), random_test_function(self.M, self.rng)
            c = commutator(gen(self.M, f, self.basis), gen(self.M, h, self.basis))
            expected = AlgebraElement.unit(self.basis, 1j * commutator_function(self.M, f, h))
            self.assertLess(c.distance(expected), 1e-11)

    def test_einstein_causality(self):
        M = flat(n_x=16, n_t=24, kg=KGParams(m_sq=1.0))
        basis = OneParticleBasis.for_spacetime(M, 10)
        checked = 0
        while checked < 50:
            t, x = int(self.rng.integers(7, 17)), int(self.rng.integers(0, 16))
            O1 = diamond(M, t, x, 1)
            candidates = sorted((causal_complement(M, O1) & slab(M, 6, 17)).points)
            if not candidates:
                continue
            t2, x2 = candidates[int(self.rng.integers(0, len(candidates)))]
            O2 = Region.from_points(M, [(t2, x2)])
            f1 = random_test_function(M, self.rng, O1 & slab(M, 5, 18))
            f2 = random_test_function(M, self.rng, O2)
            c = commutator(gen(M, f1, basis), gen(M, f2, basis))
            self.assertLess(c.max_coefficient(), 1e-11)
            checked += 1


class NormalFormTest(SimpleTestCase):
    def setUp(self):
        self.basis = toy_basis()
        self.rng = np.random.default_rng(21)

    def test_unit_is_neutral(self):
        A = random_element(self.basis, self.rng, 3)
        self.assertEqual(A.distance(mul(AlgebraElement.unit(self.basis), A)), 0.0)

    def test_single_mode_commutator(self):
        q = AlgebraElement.from_vector(self.basis, [1, 0, 0, 0])
        p = AlgebraElement.from_vector(self.basis, [0, 0, 1, 0])
        self.assertEqual(commutator(q, p).terms, {(): 1j})

    def test_associativity_against_flattened_words(self):
        for _ in range(10):
            A, B, C = (random_element(self.basis, self.rng, 2) for _ in range(3))
            left = mul(mul(A, B), C)
            right = mul(A, mul(B, C))
            flat_words = {}
            for wa, ca in A.terms.items():
                for wb, cb in B.terms.items():
                    for wc, cc in C.terms.items():
                        flat_words[wa + wb + wc] = flat_words.get(wa + wb + wc, 0) + ca * cb * cc
            oracle = AlgebraElement.from_words(self.basis, flat_words)
            self.assertLess(left.distance(right), 1e-12 * max(left.max_coefficient(), 1.0))
            self.assertLess(left.distance(oracle), 1e-12 * max(left.max_coefficient(), 1.0))

    def test_adjoint_rules(self):
        A = random_element(self.basis, self.rng, 2)
        B = random_element(self.basis, self.rng, 2)
        self.assertLess(adjoint(adjoint(A)).distance(A), 1e-13)
        self.assertLess(adjoint(mul(A, B)).distance(mul(adjoint(B), adjoint(A))), 1e-12)
        i_unit = AlgebraElement.unit(self.basis, 1j)
        self.assertEqual(adjoint(i_unit).terms, {(): -1j})

    def test_truncation_is_an_error(self):
        A = random_element(self.basis, self.rng, 4)
        B = random_element(self.basis, self.rng, 3)
        with self.assertRaisesMessage(TruncationError, "truncation degree exceeded"):
            mul(A, B)

    def test_text_round_trip_and_errors(self):
        A = random_element(self.basis, self.rng, 3) + 0.5
        self.assertEqual(from_text(self.basis, to_text(A)).distance(A), 0.0)
        self.assertEqual(to_text(A), to_text(from_text(self.basis, to_text(A))))
        with self.assertRaises(ConfigError):
            from_text(self.basis, "1.0 0.0 : 1\nnot a monomial\n")


class KinematicSubspaceTest(SimpleTestCase):
    def setUp(self):
        self.M = flat(n_x=16, n_t=32, kg=KGParams(m_sq=1.0))

    def test_isotony(self):
        small = kinematic_subspace(self.M, diamond(self.M, 15, 6, 1), 12)
        big = kinematic_subspace(self.M, diamond(self.M, 15, 6, 3), 12)
        self.assertTrue(big.contains(small))
        self.assertGreater(big.dim, small.dim)

    def test_development_adds_nothing(self):
        base = surface_interval(self.M, 15, 3, 11)
        D = cauchy_development(self.M, base)
        two_rows = D.restrict_rows(15, 16)
        S_rows = kinematic_subspace(self.M, two_rows, 12)
        S_dev = kinematic_subspace(self.M, D, 12)
        self.assertEqual(S_rows.dim, S_dev.dim)
        self.assertLessEqual(S_rows.principal_angles(S_dev).max(), 1e-6)

    def test_slab_gives_full_space(self):
        S = kinematic_subspace(self.M, slab(self.M, 14, 15), 20)
        self.assertEqual(S.dim, 2 * self.M.n_x)

    def test_even_span_deficit(self):
        O1 = diamond(self.M, 15, 3, 1)
        O2 = diamond(self.M, 15, 11, 1)
        report = even_subalgebra_span(self.M, O1, O2, 12)
        self.assertGreater(report.deficit, 0)
        self.assertEqual(report.deficit, report.expected_deficit)
        empty = even_subalgebra_span(self.M, O1, Region.empty(self.M), 12)
        self.assertEqual(empty.deficit, 0)


class PushforwardTest(SimpleTestCase):
    def setUp(self):
        kg = KGParams(m_sq=0.5)
        self.M = flat(n_x=8, n_t=20, kg=kg)
        self.N = flat(n_x=8, n_t=32, kg=kg)
        self.P = flat(n_x=8, n_t=40, kg=kg)
        self.rng = np.random.default_rng(22)

    def test_identity_embedding(self):
        M = small_spacetime()
        basis = OneParticleBasis.for_spacetime(M, 10)
        A = pushforward_morphism(identity_embedding(M), basis, basis)
        np.testing.assert_allclose(A.matrix, np.eye(basis.size))
        f = random_test_function(M, self.rng)
        self.assertLess(A(gen(M, f, basis)).distance(gen(M, f, basis)), 1e-12)

    def test_commutator_preserved(self):
        psi = Embedding(self.M, self.N, t_offset=6, x_roll=3)
        for _ in range(5):
            f, h = random_test_function(self.M, self.rng), random_test_function(self.M, self.rng)
            pf, ph = TestFunction(psi.push_grid(f.values)), TestFunction(psi.push_grid(h.values))
            self.assertLess(abs(commutator_function(self.N, pf, ph) - commutator_function(self.M, f, h)), 1e-11)

    def test_generators_map_to_pushed_generators(self):
        psi = Embedding(self.M, self.N, t_offset=6, x_roll=3)
        bM = OneParticleBasis.for_spacetime(self.M, 8)
        bN = OneParticleBasis.for_spacetime(self.N, 20)
        A = pushforward_morphism(psi, bM, bN)
        self.assertTrue(A.is_injective)
        self.assertTrue(A.preserves_symplectic_form())
        f = random_test_function(self.M, self.rng)
        pushed = gen(self.N, TestFunction(psi.push_grid(f.values)), bN)
        self.assertLess(A(gen(self.M, f, bM)).distance(pushed), 1e-11)

    def test_composition(self):
        phi = Embedding(self.M, self.N, t_offset=4, x_roll=1)
        psi = Embedding(self.N, self.P, t_offset=5, x_roll=2)
        bM = OneParticleBasis.for_spacetime(self.M, 8)
        bN = OneParticleBasis.for_spacetime(self.N, 14)
        bP = OneParticleBasis.for_spacetime(self.P, 20)
        direct = pushforward_morphism(psi.compose(phi), bM, bP)
        composed = pushforward_morphism(psi, bN, bP).compose(pushforward_morphism(phi, bM, bN))
        np.testing.assert_allclose(direct.matrix, composed.matrix, atol=1e-11)
        A = mul(gen(self.M, random_test_function(self.M, self.rng), bM), gen(self.M, random_test_function(self.M, self.rng), bM))
        self.assertLess(direct(A).distance(composed(A)), 1e-10)
