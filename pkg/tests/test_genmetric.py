import math
from fractions import Fraction

import numpy as np
import pytest

from gencal import linalg
from gencal.clifford import orthonormal_frame
from gencal.errors import NotPositiveDefinite, NotSkew
from gencal.exterior import (
    Form, GenVector, exp_two_form, inner, mukai, parse_form, random_form, spinor_action, wedge,
)
from gencal.genmetric import (
    Dilaton, build, exact_metric, from_splitting, gtilde, gtilde_square_sign, pairing,
    pairing_matrix, qform, qnorm, random_metric,
)


def contraction(u, v):
    return u @ pairing_matrix(len(u) // 2) @ v


class TestBuild:
    def test_flat_involution(self):
        n = 3
        expected = np.block([[np.zeros((n, n)), np.eye(n)], [np.eye(n), np.zeros((n, n))]])
        assert np.array_equal(build(np.eye(n)).G, expected)

    def test_plus_space_is_graph(self):
        b = 0.7
        G = build(np.eye(2), np.array([[0.0, b], [-b, 0.0]]))
        for i in range(2):
            X = np.eye(2)[i]
            # X⌟B has components B[i, :]
            assert np.allclose(G.lift_plus(X).to_array(), np.concatenate([X, X + G.B[i]]))

    def test_eigenvalues(self, rng):
        G = random_metric(rng, 5)
        vals = np.sort(np.linalg.eigvals(G.G).real)
        assert np.allclose(vals, [-1] * 5 + [1] * 5)

    def test_involution_and_eigenspaces(self, rng):
        G = random_metric(rng, 4)
        assert np.allclose(G.G @ G.G, np.eye(8))
        assert np.allclose(G.G @ G.Vplus, G.Vplus) and np.allclose(G.G @ G.Vminus, -G.Vminus)

    def test_exact_involution(self):
        G = exact_metric([[2, 1], [1, 3]], ["1/2"])
        assert np.all(G.G @ G.G == linalg.as_exact(np.eye(4, dtype=int)))

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            build(np.diag([1.0, -2.0]))

    def test_rejects_symmetric_b(self):
        with pytest.raises(NotSkew):
            build(np.eye(2), np.ones((2, 2)))

    def test_splitting_reconstruction(self, rng):
        G = random_metric(rng, 5)
        mix = rng.standard_normal((5, 5)) + 5 * np.eye(5)
        H = from_splitting(G.Vplus @ mix)
        assert np.allclose(H.g, G.g) and np.allclose(H.B, G.B)


class TestLifts:
    def test_flat_lifts(self):
        G = build(np.eye(2))
        assert np.array_equal(G.lift_plus([1, 0]).to_array(), [1, 0, 1, 0])
        assert np.array_equal(G.lift_minus([1, 0]).to_array(), [1, 0, -1, 0])

    def test_norms_and_orthogonality(self, rng):
        G = random_metric(rng, 4)
        X, Y = rng.standard_normal((2, 4))
        gX = X @ G.g @ X
        assert math.isclose(G.lift_plus(X).pairing(G.lift_plus(X)), gX)
        assert math.isclose(G.lift_minus(X).pairing(G.lift_minus(X)), -gX)
        assert abs(G.lift_plus(X).pairing(G.lift_minus(Y))) < 1e-12


class TestSpinorOperator:
    def test_flat_plane_unit(self):
        assert gtilde(build(np.eye(2)), Form.scalar(2, 1.0)).allclose(parse_form("e12", 2))

    @pytest.mark.parametrize("n", range(2, 8))
    def test_is_volume_of_minus_space(self, rng, n):
        G = random_metric(rng, n)
        rho = random_form(rng, n)
        # g-orthonormal positively oriented frame lifted into V-
        P = orthonormal_frame(G.g)
        acted = rho
        for k in reversed(range(n)):
            acted = spinor_action(G.lift_minus(P[:, k]), acted)
        assert acted.allclose(gtilde(G, rho), 1e-8)

    @pytest.mark.parametrize("n", range(2, 9))
    def test_square_sign(self, rng, n):
        G = random_metric(rng, n)
        rho = random_form(rng, n)
        assert gtilde(G, gtilde(G, rho)).allclose(gtilde_square_sign(n) * rho, 1e-8)

    def test_square_sign_table(self):
        assert [gtilde_square_sign(n) for n in range(2, 10)] == [-1, -1, 1, 1, -1, -1, 1, 1]

    @pytest.mark.parametrize("n", range(2, 9))
    def test_parity(self, rng, n):
        even = random_form(rng, n, parity="even")
        expected = "even" if n % 2 == 0 else "odd"
        assert gtilde(random_metric(rng, n), even).parity == expected

    @pytest.mark.parametrize("n", range(2, 8))
    def test_isometry(self, rng, n):
        G = random_metric(rng, n)
        a, b = random_form(rng, n), random_form(rng, n)
        lhs = mukai(gtilde(G, a), b)
        rhs = (-1) ** (n * (n + 1) // 2) * mukai(a, gtilde(G, b))
        assert math.isclose(lhs, rhs, rel_tol=1e-8, abs_tol=1e-8)

    def test_b_conjugation(self, rng):
        G = random_metric(rng, 5)
        B = Form.two_form(G.B)
        rho = random_form(rng, 5)
        conj = wedge(exp_two_form(B), gtilde(build(G.g), wedge(exp_two_form(-B), rho)))
        assert conj.allclose(gtilde(G, rho))


class TestNorm:
    def test_unit(self):
        assert qnorm(build(np.eye(3)), Form.scalar(3, 1.0)) == 1.0

    def test_orthonormal_components(self):
        assert math.isclose(qnorm(build(np.eye(3)), parse_form("e1 + e23", 3)), math.sqrt(2))

    @pytest.mark.parametrize("n", range(2, 9))
    def test_positive(self, rng, n):
        G = random_metric(rng, n)
        for parity in ("even", "odd"):
            rho = random_form(rng, n, parity=parity)
            assert qform(G, rho, rho) > 0

    def test_matches_metric_inner_product(self, rng):
        g = random_metric(rng, 5).g
        rho = random_form(rng, 5, parity="odd")
        assert math.isclose(qnorm(build(g), rho) ** 2, inner(g, rho, rho), rel_tol=1e-9)

    def test_b_equivariance(self, rng):
        G = random_metric(rng, 4)
        rho = random_form(rng, 4, parity="even")
        twisted = wedge(exp_two_form(Form.two_form(G.B)), rho)
        assert math.isclose(qnorm(G, twisted), qnorm(build(G.g), rho), rel_tol=1e-9)

    def test_dilaton_weight(self, rng):
        G = random_metric(rng, 3)
        rho = random_form(rng, 3, parity="odd")
        assert math.isclose(qnorm(G, rho, 0.5), math.e ** 0.5 * qnorm(G, rho), rel_tol=1e-12)


class TestDilaton:
    def test_value(self):
        assert math.isclose(Dilaton(1.0, 4.0).value, 1.0 + 0.5 * math.log(4.0))

    def test_exact_weight(self):
        weight = Dilaton(Fraction(0), Fraction(1, 4)).weight_squared
        assert isinstance(weight, Fraction) and weight == Fraction(1, 4)

    def test_pairing_weight(self, rng):
        G = random_metric(rng, 4)
        a, b = random_form(rng, 4), random_form(rng, 4)
        assert math.isclose(pairing(G, a, b, Dilaton(0.0, 9.0)), 9.0 * pairing(G, a, b), rel_tol=1e-12)


def test_contraction_pairing(rng):
    u = GenVector(rng.standard_normal(3), rng.standard_normal(3))
    v = GenVector(rng.standard_normal(3), rng.standard_normal(3))
    assert math.isclose(u.pairing(v), contraction(u.to_array(), v.to_array()))
