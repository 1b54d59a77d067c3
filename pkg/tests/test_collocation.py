import unittest

import numpy as np
from numpy.testing import assert_allclose

from expnls.nls import ButcherTableau, CollocationNodes, LagrangeBasis, NodeFamily
from expnls.nls.collocation import (
    NodeError,
    collocation_nodes,
    collocation_tableau,
    equispaced_nodes,
    gauss_nodes,
    gauss_tableau,
)
from expnls.nls.tableau import TableauError, explicit_euler_tableau


class TestNodes(unittest.TestCase):
    def test_two_stage_gauss_nodes(self):
        nodes = gauss_nodes(2)
        assert_allclose(nodes.c, [0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6], atol=1e-15)
        self.assertEqual(nodes.family, "gauss")

    def test_gauss_nodes_symmetric_about_half(self):
        for s in range(1, 9):
            with self.subTest(s=s):
                c = np.array(gauss_nodes(s).c)
                self.assertEqual(c.size, s)
                assert_allclose(c + c[::-1], 1.0, atol=1e-15)

    def test_gauss_stage_limit(self):
        with self.assertRaises(NodeError):
            gauss_nodes(9)
        with self.assertRaises(NodeError):
            gauss_nodes(0)

    def test_equispaced_nodes(self):
        nodes = collocation_nodes(3, NodeFamily.EQUISPACED)
        assert_allclose(nodes.c, [1 / 3, 2 / 3, 1.0])
        self.assertEqual(nodes.family, "equispaced")
        self.assertEqual(collocation_nodes(2), gauss_nodes(2))

    def test_invalid_nodes(self):
        """Test that repeated or out-of-range nodes raise a NodeError."""
        cases = [((0.2, 0.2), "pairwise distinct"), ((-0.1, 0.5), "outside [0, 1]"), ((), "At least one")]
        for c, message in cases:
            with self.subTest(c=c):
                with self.assertRaises(NodeError) as context:
                    CollocationNodes(c=c)
                self.assertIn(message, str(context.exception))


class TestLagrangeBasis(unittest.TestCase):
    def test_cardinal_property(self):
        """Test that l_j(c_k) is the Kronecker delta."""
        for nodes in (gauss_nodes(3), equispaced_nodes(4), gauss_nodes(6)):
            basis = LagrangeBasis(nodes)
            with self.subTest(nodes=nodes.c):
                values = np.array([basis.evaluate(ell, np.array(nodes.c)) for ell in range(nodes.s)])
                assert_allclose(values, np.eye(nodes.s), atol=1e-10)

    def test_integrals_sum_to_upper_limit(self):
        basis = LagrangeBasis(gauss_nodes(3))
        total = sum(basis.integral(ell, 0.7) for ell in range(3))
        self.assertAlmostEqual(total, 0.7, delta=1e-14)


class TestTableau(unittest.TestCase):
    def test_gauss_tableaux_properties(self):
        """Test consistency, symmetry and the Cooper condition for s = 1..5."""
        for s in range(1, 6):
            tableau = gauss_tableau(s)
            with self.subTest(s=s):
                self.assertTrue(tableau.is_consistent())
                self.assertTrue(tableau.is_symmetric())
                self.assertTrue(tableau.is_cooper())
                assert_allclose(tableau.c, tableau.a.sum(axis=1), atol=1e-13)

    def test_two_stage_gauss_matrix(self):
        root = np.sqrt(3) / 6
        expected = [[0.25, 0.25 - root], [0.25 + root, 0.25]]
        tableau = gauss_tableau(2)
        assert_allclose(tableau.a, expected, atol=1e-15)
        assert_allclose(tableau.b, [0.5, 0.5], atol=1e-15)

    def test_equispaced_tableau_is_not_symmetric(self):
        tableau = collocation_tableau(equispaced_nodes(3))
        self.assertTrue(tableau.is_consistent())
        self.assertFalse(tableau.is_symmetric())
        self.assertFalse(tableau.is_cooper())

    def test_explicit_euler(self):
        tableau = explicit_euler_tableau()
        self.assertTrue(tableau.is_consistent())
        self.assertFalse(tableau.is_symmetric())
        self.assertAlmostEqual(tableau.symmetry_defect(), 1.0)

    def test_nodes_must_match_row_sums(self):
        with self.assertRaises(TableauError) as context:
            ButcherTableau(a=[[0.5, 0.0], [0.0, 0.5]], b=[0.5, 0.5], c=[0.5, 0.6])
        self.assertIn("row sums", str(context.exception))

    def test_shape_mismatch(self):
        with self.assertRaises(TableauError):
            ButcherTableau(a=[[1.0, 0.0]], b=[1.0])
