import numpy as np
import pytest

from gencal import fieldforms as ff
from gencal.errors import DegreeError, DimensionMismatch, PreconditionError
from gencal.fieldforms import PolyForm, PolyGenVector, d, d_H, parse_polyform, wedge


def P(text, n=3):
    return parse_polyform(text, n)


class TestLiterals:
    def test_round_trip(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 5))
            a = ff.random_polyform(rng, n, 2)
            assert parse_polyform(ff.format_polyform(a), n) == a

    def test_canonical_text(self):
        assert ff.format_polyform(P("e2*x1 + 1/2")) == "1/2 + x1*e2"

    def test_zero(self):
        assert P("0").is_zero() and ff.format_polyform(PolyForm.zero(3)) == "0"

    @pytest.mark.parametrize("bad", ["x4*e1", "e14", "e1*e2", "2*y1", "x1 +"])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            P(bad)

    def test_evaluate(self):
        value = P("x1*x2*e3 + 2").evaluate([2, 3, 5])
        assert value.coeffs[0] == 2 and value.coeffs[4] == 6


class TestDifferential:
    def test_coordinate_function(self):
        assert d(P("x1*e2")) == P("e12")

    def test_product_rule_sign(self):
        assert d(P("x3*e12")) == P("e123")

    def test_squares_to_zero(self, rng):
        for _ in range(20):
            a = ff.random_polyform(rng, 4, 3)
            assert d(d(a)).is_zero()

    def test_leibniz(self, rng):
        for _ in range(10):
            a, b = ff.random_polyform(rng, 3, 2), ff.random_polyform(rng, 3, 2)
            for p in range(4):
                lhs = d(wedge(a.part(p), b))
                assert lhs == wedge(d(a.part(p)), b) + wedge(a.part(p), d(b)) * (-1) ** p

    def test_twisted_unit(self):
        H = P("x1*e123")
        assert d_H(PolyForm.scalar(3, 1), H) == H

    def test_twisted_square(self, rng):
        for _ in range(10):
            H = ff.random_polyform(rng, 4, 2).part(3)
            a = ff.random_polyform(rng, 4, 2)
            assert d_H(d_H(a, H), H) == wedge(d(H), a)

    def test_twist_must_be_three_form(self):
        with pytest.raises(DegreeError):
            d_H(P("1"), P("e12"))


class TestLie:
    def test_coordinate_field_differentiates(self):
        assert ff.lie_derivative(1, P("x1^2*e23")) == P("2*x1*e23")

    def test_cartan_formula(self, rng):
        for _ in range(20):
            a = ff.random_polyform(rng, 4, 3)
            i = int(rng.integers(1, 5))
            assert ff.cartan_lie(i, a) == ff.lie_derivative(i, a)

    def test_non_coordinate_field_rejected(self):
        with pytest.raises(PreconditionError):
            ff.lie_derivative((1, 1, 0), P("e1"))

    def test_interior(self):
        assert ff.interior(2, P("e12")) == P("-e1")

    def test_field_length(self):
        with pytest.raises(DimensionMismatch):
            ff.interior((1, 0), P("e1"))


class TestCourant:
    def test_derivative_of_form(self):
        v = PolyGenVector(1, PolyForm.zero(2))
        w = PolyGenVector.zero(2) + PolyGenVector((0, 0), parse_polyform("x1*e2", 2))
        assert ff.courant(v, w) == PolyGenVector((0, 0), parse_polyform("e2", 2))

    def test_skew(self, rng):
        R, _ = ff.poly_ring(3)
        for _ in range(10):
            v = PolyGenVector(tuple(ff.random_polynomial(rng, 3, 2) for _ in range(3)), ff.random_polyform(rng, 3, 2).part(1))
            w = PolyGenVector(tuple(ff.random_polynomial(rng, 3, 2) for _ in range(3)), ff.random_polyform(rng, 3, 2).part(1))
            total = ff.courant(v, w) + ff.courant(w, v)
            assert total == PolyGenVector.zero(3)

    def test_closed_b_is_symmetry(self, rng):
        B = d(ff.random_polyform(rng, 3, 2).part(1))
        for _ in range(10):
            v = PolyGenVector(tuple(ff.random_polynomial(rng, 3, 2) for _ in range(3)), ff.random_polyform(rng, 3, 2).part(1))
            w = PolyGenVector(tuple(ff.random_polynomial(rng, 3, 2) for _ in range(3)), ff.random_polyform(rng, 3, 2).part(1))
            lhs = ff.courant(ff.b_transform(B, v), ff.b_transform(B, w))
            assert lhs == ff.b_transform(B, ff.courant(v, w))

    def test_non_closed_b_breaks_bracket(self):
        B = P("x3*e12")
        v, w = PolyGenVector(1, PolyForm.zero(3)), PolyGenVector(2, PolyForm.zero(3))
        assert ff.courant(ff.b_transform(B, v), ff.b_transform(B, w)) != ff.b_transform(B, ff.courant(v, w))

    def test_cotangent_part_is_one_form(self):
        with pytest.raises(DegreeError):
            PolyGenVector(1, P("e12"))


class TestIntertwining:
    def _data(self, rng, n, closed):
        theta = ff.random_theta(rng, n, 2, closed=closed)
        rho0, rho1 = ff.random_basic_form(rng, n, 1, 2, n), ff.random_basic_form(rng, n, 2, 2, n)
        dilaton = ff.random_polynomial(rng, n, 1, exclude=(n,))
        phi0, phi1 = ff.solve_closure(rho0, rho1, dilaton, theta)
        return rho0, rho1, phi0, phi1, dilaton, theta

    def test_agree_for_closed_connection(self, rng):
        for _ in range(10):
            tint, tint2 = ff.tdual_intertwine_check(*self._data(rng, 3, True))
            assert tint and tint2

    def test_literal_counterexample(self):
        n = 3
        theta = P("e3 + x1*e2")
        rho0, rho1 = PolyForm.scalar(n, 1), PolyForm.zero(n)
        phi0, phi1 = ff.solve_closure(rho0, rho1, 0, theta)
        tint, tint2 = ff.tdual_intertwine_check(rho0, rho1, phi0, phi1, 0, theta)
        assert tint and not tint2

    def test_random_data_usually_fails(self, rng):
        n = 3
        theta = ff.random_theta(rng, n, 1, closed=True)
        rho0 = ff.random_basic_form(rng, n, 1, 2, n)
        tint, _ = ff.tdual_intertwine_check(rho0, PolyForm.zero(n), P("e1"), PolyForm.zero(n), 0, theta)
        assert not tint

    def test_requires_basic_parts(self):
        with pytest.raises(PreconditionError):
            ff.tdual_intertwine_check(P("e3"), *(PolyForm.zero(3),) * 3, 0, P("e3"))

    def test_requires_normalised_theta(self):
        with pytest.raises(PreconditionError):
            ff.tdual_intertwine_check(*(PolyForm.zero(3),) * 4, 0, P("2*e3"))

    def test_dilaton_independent_of_direction(self):
        with pytest.raises(PreconditionError):
            ff.tdual_intertwine_check(*(PolyForm.zero(3),) * 4, "x3", P("e3"))
