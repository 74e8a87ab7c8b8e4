from fractions import Fraction

import numpy as np
import pytest

from gencal.errors import DegreeError, DimensionMismatch, NotPositiveDefinite
from gencal.exterior import (
    Form, GenVector, exp_two_form, format_form, hat, hodge_star, inner, interior, mask_of, mukai, parse_form,
    random_form, spinor_action, tilde, volume_form, wedge, wedge_covector,
)


def f(text, n, exact=True):
    return parse_form(text, n, exact=exact)


class TestWedge:
    def test_basis_product(self):
        assert wedge(f("e1", 2), f("e2", 2)) == f("e12", 2)

    def test_repeated_index_vanishes(self):
        assert wedge(f("e12", 2), f("e1", 2)).is_zero()

    def test_expands_bilinearly(self):
        assert wedge(f("1 + e1", 2), f("1 + e2", 2)) == f("1 + e1 + e2 + e12", 2)

    def test_graded_commutative(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 7))
            a, b = random_form(rng, n), random_form(rng, n)
            for p in range(n + 1):
                for q in range(n + 1):
                    lhs = wedge(a.part(p), b.part(q))
                    assert lhs.allclose((-1) ** (p * q) * wedge(b.part(q), a.part(p)))

    def test_associative_exact(self, rng):
        a, b, c = (random_form(rng, 5, exact=True) for _ in range(3))
        assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            wedge(f("e1", 2), f("e1", 3))


class TestInterior:
    def test_basis_contraction(self):
        assert interior([1, 0], f("e12", 2)) == f("e2", 2)

    def test_sign_from_position(self):
        assert interior([0, 1], f("e12", 2)) == f("-e1", 2)

    def test_triple(self):
        assert interior([1, 0, 0], f("e123", 3)) == f("e23", 3)

    def test_antiderivation(self, rng):
        X = rng.standard_normal(5)
        a, b = random_form(rng, 5), random_form(rng, 5)
        lhs = interior(X, wedge(a, b))
        rhs = wedge(interior(X, a), b) + wedge(tilde(a), interior(X, b))
        assert lhs.allclose(rhs)

    def test_nilpotent(self, rng):
        X = rng.standard_normal(6)
        assert interior(X, interior(X, random_form(rng, 6))).is_zero(1e-12)


class TestSpinorAction:
    def test_pure_contraction(self):
        assert spinor_action(GenVector([1, 0], [0, 0]), f("e1", 2)) == f("-1", 2)

    def test_pure_wedge(self):
        assert spinor_action(GenVector([0, 0], [1, 0]), f("1", 2)) == f("e1", 2)

    def test_clifford_square(self, rng):
        v = GenVector([1.0, 0, 0], [1.0, 0, 0])
        a = random_form(rng, 3)
        assert spinor_action(v, spinor_action(v, a)).allclose(-a)

    def test_clifford_relation(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 7))
            v = GenVector(rng.standard_normal(n), rng.standard_normal(n))
            w = GenVector(rng.standard_normal(n), rng.standard_normal(n))
            a = random_form(rng, n)
            lhs = spinor_action(v, spinor_action(w, a)) + spinor_action(w, spinor_action(v, a))
            assert lhs.allclose(-2 * v.pairing(w) * a)

    def test_flips_parity(self, rng):
        v = GenVector(rng.standard_normal(4), rng.standard_normal(4))
        assert spinor_action(v, random_form(rng, 4, parity="even")).parity == "odd"

    def test_wedge_covector_matches(self, rng):
        xi = rng.standard_normal(4)
        a = random_form(rng, 4)
        assert wedge_covector(xi, a).allclose(wedge(Form.one_form(xi), a))


class TestInvolutions:
    @pytest.mark.parametrize("text,expected", [("e1", "-e1"), ("e12", "-e12"), ("e123", "e123")])
    def test_hat_signs(self, text, expected):
        assert hat(f(text, 3)) == f(expected, 3)

    def test_tilde_signs(self):
        assert tilde(f("1 + e1 + e12 + e123", 3)) == f("1 - e1 + e12 - e123", 3)

    def test_both_involutions(self, rng):
        a = random_form(rng, 5)
        assert hat(hat(a)).allclose(a) and tilde(tilde(a)).allclose(a)


class TestMukai:
    def test_unit_against_volume(self):
        assert mukai(f("1", 2), f("e12", 2)) == -1

    def test_one_forms(self):
        assert mukai(f("e1", 2), f("e2", 2)) == -1

    @pytest.mark.parametrize("n", [2, 5, 6])
    def test_skew_dimensions(self, rng, n):
        for parity in ("even", "odd"):
            rho = random_form(rng, n, exact=True, parity=parity)
            assert mukai(rho, rho) == 0

    @pytest.mark.parametrize("n", range(2, 9))
    def test_symmetry_sign(self, rng, n):
        a, b = random_form(rng, n, exact=True), random_form(rng, n, exact=True)
        assert mukai(a, b) == (-1) ** (n * (n + 1) // 2) * mukai(b, a)


class TestHodge:
    def test_plane(self):
        assert hodge_star(np.eye(2), f("e1", 2, exact=False)).allclose(f("e2", 2, exact=False))

    def test_three_space(self):
        assert hodge_star(np.eye(3), f("e12", 3, exact=False)).allclose(f("e3", 3, exact=False))

    def test_scaled_metric(self):
        assert hodge_star(np.diag([1.0, 4.0]), f("e1", 2, exact=False)).allclose(f("2*e2", 2, exact=False))

    def test_exact_identity_metric(self):
        assert hodge_star(None, f("e12", 3)) == f("e3", 3)

    def test_defining_property(self, rng):
        n = 4
        A = rng.standard_normal((n, n))
        g = A @ A.T + n * np.eye(n)
        vol = np.sqrt(np.linalg.det(g)) * volume_form(n).to_float()
        for p in range(n + 1):
            a, b = random_form(rng, n).part(p), random_form(rng, n).part(p)
            assert wedge(a, hodge_star(g, b)).allclose(inner(g, a, b) * vol)

    def test_star_squared(self, rng):
        for n in range(2, 7):
            a = random_form(rng, n)
            for p in range(n + 1):
                twice = hodge_star(None, hodge_star(None, a.part(p)))
                assert twice.allclose((-1) ** (p * (n - p)) * a.part(p))

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            hodge_star(np.diag([1.0, -1.0]), f("e1", 2, exact=False))


class TestExp:
    def test_zero(self):
        assert exp_two_form(Form.zero(3)) == f("1", 3)

    def test_two_blocks(self):
        assert exp_two_form(f("e12 + e34", 4)) == f("1 + e12 + e34 + e1234", 4)

    def test_inverse(self, rng):
        a = rng.standard_normal((6, 6))
        B = Form.two_form(a - a.T)
        assert wedge(exp_two_form(B), exp_two_form(-B)).allclose(Form.scalar(6, 1.0))

    def test_abelian(self, rng):
        a, b = rng.standard_normal((2, 5, 5))
        B, C = Form.two_form(a - a.T), Form.two_form(b - b.T)
        assert wedge(exp_two_form(B), exp_two_form(C)).allclose(exp_two_form(B + C))

    def test_rejects_mixed_degree(self):
        with pytest.raises(DegreeError):
            exp_two_form(f("e1 + e12", 2))


class TestLiterals:
    def test_exact_round_trip(self, rng):
        for _ in range(20):
            a = random_form(rng, int(rng.integers(2, 7)), exact=True)
            assert parse_form(format_form(a), a.dim, exact=True) == a

    def test_fractions(self):
        a = f("1/2 - 3/4*e13", 3)
        assert a.coeffs[mask_of((1, 3))] == Fraction(-3, 4) and a.coeffs[0] == Fraction(1, 2)

    def test_float_round_trip(self, rng):
        a = random_form(rng, 4)
        assert parse_form(format_form(a), 4).allclose(a, 0)
