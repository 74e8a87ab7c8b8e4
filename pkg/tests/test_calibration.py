import math
from fractions import Fraction

import numpy as np
import pytest

from gencal import calibration as cal
from gencal import dirac
from gencal.errors import DimensionMismatch, ParityMismatch
from gencal.exterior import Form, exp_two_form, inner, parse_form, random_form, wedge
from gencal.genmetric import GeneralisedMetric, build, exact_metric, gtilde, pairing, qnorm, random_metric
from gencal.purespinor import IsotropicPair, coordinate_pair, random_pair, tau_from_pair


def flux(f):
    return np.array([[0.0, f], [-f, 0.0]])


def g2_even():
    return cal.calibration_form(dirac.g2_spinor(), dirac.g2_spinor(), build(np.eye(7))).even()


class TestPairing:
    def test_top_form_on_plane(self):
        assert cal.pairing_value(parse_form("e12", 2, exact=False), coordinate_pair(2, (1, 2))) == 1

    def test_unit_against_flux(self):
        value = cal.pairing_value(parse_form("1", 2, exact=False), coordinate_pair(2, (1, 2), flux(0.5)))
        assert math.isclose(value, -0.5)

    def test_routes_agree(self, rng):
        for _ in range(60):
            n = int(rng.integers(2, 8))
            G = random_metric(rng, n)
            p = random_pair(rng, n)
            rho = random_form(rng, n, parity="even" if p.k % 2 == 0 else "odd")
            a, b = cal.pairing_value(rho, p, G), cal.pairing_value_mukai(rho, p, G)
            assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-9)

    def test_parity_mismatch(self):
        with pytest.raises(ParityMismatch):
            cal.pairing_value(parse_form("e1", 2), coordinate_pair(2, (1, 2)))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cal.pairing_value(parse_form("1", 3), coordinate_pair(2, (1, 2)))

    def test_classical_reduction(self, rng):
        # pure degree k, no flux and no B: the pairing is g(rho, vol_L)
        G = random_metric(rng, 5)
        G = build(G.g)
        p = IsotropicPair(rng.standard_normal((5, 3)), np.zeros((3, 3)))
        rho = random_form(rng, 5).part(3)
        assert math.isclose(cal.pairing_value(rho, p, G), inner(G.g, rho, p.volume(G.g)), rel_tol=1e-9)


class TestBound:
    def test_orthonormal_plane(self):
        assert cal.bound_value(build(np.eye(3)), coordinate_pair(3, (1, 3))) == 1

    @pytest.mark.parametrize("a", [1.0, 0.5, 2.0])
    def test_block(self, a):
        p = coordinate_pair(2, (1, 2), flux(a))
        assert math.isclose(cal.bound_value(build(np.eye(2)), p), math.sqrt(1 + a * a))

    def test_equals_spinor_norm(self, rng):
        for _ in range(60):
            n = int(rng.integers(2, 8))
            G = random_metric(rng, n)
            p = random_pair(rng, n)
            assert math.isclose(cal.bound_value(G, p), qnorm(G, tau_from_pair(p, G.g)), rel_tol=1e-9)

    def test_at_least_one(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 7))
            a = rng.standard_normal((n, n))
            p = random_pair(rng, n)
            U = p.orthonormal_basis(np.eye(n))
            q = IsotropicPair(U, p.F_matrix_orthonormal(np.eye(n)), p.orientation)
            assert cal.bound_value(build(np.eye(n), a - a.T), q) >= 1 - 1e-12

    def test_exact(self):
        G = exact_metric([[1, 0], [0, 1]], ["1/2"])
        p = IsotropicPair(np.array([[1, 0], [0, 1]], dtype=object), np.zeros((2, 2), dtype=object))
        assert cal.bound_squared(G, p) == Fraction(5, 4)


class TestIsCalibrated:
    def test_su3_complex_plane(self):
        psi = dirac.su3_spinor()
        right = dirac.DiracSpinor(6, 1j * psi.amplitudes)
        rho = cal.calibration_form(dirac.charge_conj(psi), right).even()
        report = cal.is_calibrated(rho, build(np.eye(6)), coordinate_pair(6, (1, 2)))
        assert report.calibrated and report.deficit < 1e-9

    def test_su3_four_plane(self):
        psi = dirac.su3_spinor()
        rho = cal.calibration_form(dirac.charge_conj(psi), psi).even()
        report = cal.is_calibrated(rho, build(np.eye(6)), coordinate_pair(6, (1, 2, 3, 4), orientation=-1))
        assert report.calibrated

    def test_g2_coassociative_with_flux(self):
        F = np.zeros((4, 4))
        F[np.triu_indices(4, 1)] = [0.3, -0.7, 1.1, -1.1, -0.7, -0.3]
        F -= F.T
        p = coordinate_pair(7, (4, 5, 6, 7), F, orientation=-1)
        report = cal.is_calibrated(g2_even(), build(np.eye(7)), p)
        assert report.calibrated and abs(report.deficit) < 1e-9

    def test_generic_plane_is_strict(self, rng):
        p = random_pair(rng, 7, 4)
        assert cal.is_calibrated(g2_even(), build(np.eye(7)), p).deficit > 1e-3

    def test_reports_flipped_orientation(self):
        report = cal.is_calibrated(g2_even(), build(np.eye(7)), coordinate_pair(7, (4, 5, 6, 7)))
        assert not report.calibrated and report.orientation == -1

    def test_exact_mode(self):
        G = exact_metric([[1, 0], [0, 1]], ["0"])
        rho = parse_form("1 + 3/2*e12", 2, exact=True)
        p = IsotropicPair(np.array([[1, 0], [0, 1]], dtype=object), np.array([[0, Fraction(3, 4)],
                                                                             [Fraction(-3, 4), 0]], dtype=object))
        report = cal.is_calibrated(rho.even(), G, p, dilaton=Fraction(0))
        assert report.exact and not report.calibrated and math.isclose(report.deficit, 0.5)

    def test_dilaton_weight(self):
        G = build(np.diag([1.0, 4.0]))
        p = coordinate_pair(2, (2,))
        rho = parse_form("2*e2", 2, exact=False)
        assert cal.is_calibrated(rho, G, p).calibrated
        assert not cal.is_calibrated(rho, G, p, dilaton=-0.5).calibrated

    def test_b_equivariance(self, rng):
        # calibrated straight plane shifted by B with flux j*B stays calibrated
        a = rng.standard_normal((7, 7))
        B = a - a.T
        G = GeneralisedMetric(np.eye(7), B)
        rho = wedge(exp_two_form(Form.two_form(B)), g2_even())
        idx = [3, 4, 5, 6]
        p = coordinate_pair(7, (4, 5, 6, 7), B[np.ix_(idx, idx)], orientation=-1)
        assert cal.is_calibrated(rho, G, p).calibrated

    def test_gtilde_duality(self):
        # the spinor operator swaps the calibrated planes with their complements
        G = build(np.eye(7))
        rho = g2_even()
        dual = gtilde(G, rho)
        report = cal.is_calibrated(dual.odd(), G, coordinate_pair(7, (1, 2, 3), orientation=-1))
        assert report.calibrated or report.orientation == 1


class TestSpinorCriterion:
    def test_associative_plane(self):
        psi = dirac.g2_spinor()
        p = coordinate_pair(7, (1, 2, 3), orientation=-1)
        assert cal.spinor_criterion(psi, psi, build(np.eye(7)), p) < 1e-12

    def test_b_shifted_pair(self, rng):
        a = rng.standard_normal((7, 7))
        B = a - a.T
        G = GeneralisedMetric(np.eye(7), B)
        psi = dirac.g2_spinor()
        idx = [0, 1, 2]
        p = coordinate_pair(7, (1, 2, 3), B[np.ix_(idx, idx)], orientation=-1)
        assert cal.spinor_criterion(psi, psi, G, p) < 1e-9

    def test_residual_measures_deficit(self, rng):
        for _ in range(40):
            n = int(rng.integers(2, 9))
            G = random_metric(rng, n)
            p = random_pair(rng, n)
            chi = 1 if n % 2 == 0 else None
            left, right = dirac.random_spinor(rng, n, chi), dirac.random_spinor(rng, n, chi)
            rho = cal.calibration_form(left, right, G)
            rho = rho.even() if p.k % 2 == 0 else rho.odd()
            ratio = cal.pairing_value(rho, p, G) / cal.bound_value(G, p)
            residual = cal.spinor_criterion(left, right, G, p)
            assert ratio <= 1 + 1e-9
            assert math.isclose(residual ** 2, 2 * (1 - ratio), abs_tol=1e-8)

    def test_needs_chirality(self, rng):
        from gencal.dirac import ChiralityMismatch

        psi = dirac.random_spinor(rng, 6)
        with pytest.raises(ChiralityMismatch):
            cal.spinor_criterion(psi, psi, build(np.eye(6)), coordinate_pair(6, (1, 2)))

    def test_spinor_deficit_matches_report(self, rng):
        G = build(np.eye(7))
        p = random_pair(rng, 7, 3)
        tau = tau_from_pair(p)
        report = cal.is_calibrated(cal.calibration_form(dirac.g2_spinor(), dirac.g2_spinor()).odd(), G, p)
        deficit = cal.spinor_deficit(cal.calibration_form(dirac.g2_spinor(), dirac.g2_spinor()).odd(), tau, G)
        assert math.isclose(deficit, report.deficit, rel_tol=1e-9, abs_tol=1e-12)


class TestMaximiser:
    def test_finds_coassociative_plane(self):
        p, report = cal.find_maximizer(g2_even(), build(np.eye(7)), 4, restarts=2, seed=3)
        assert report.deficit < 1e-6 and report.tight

    def test_zero_form_is_never_tight(self):
        p, report = cal.find_maximizer(Form.zero(4), build(np.eye(4)), 2, restarts=2, budget=50)
        assert math.isclose(report.deficit, report.bound_value) and report.bound_value > 0 and not report.tight

    def test_point_pair(self):
        p, report = cal.find_maximizer(g2_even(), build(np.eye(7)), 0)
        assert p.k == 0 and report.calibrated

    def test_deterministic(self):
        rho = g2_even()
        a = cal.find_maximizer(rho, None, 3, restarts=2, budget=60, seed=5)[1]
        b = cal.find_maximizer(rho, None, 3, restarts=2, budget=60, seed=5)[1]
        assert a == b

    def test_rejects_large_k(self):
        with pytest.raises(DimensionMismatch):
            cal.find_maximizer(g2_even(), None, 8)


class TestEnergy:
    def test_no_potential(self, rng):
        G = random_metric(rng, 4)
        p = random_pair(rng, 4, 2)
        assert cal.energy_density(G, 0.0, Form.zero(4), p) == (cal.bound_value(G, p), 0.0)

    def test_dilaton_halves(self, rng):
        G = random_metric(rng, 4)
        p = random_pair(rng, 4, 2)
        dbi0, _ = cal.energy_density(G, 0.0, Form.zero(4), p)
        dbi1, _ = cal.energy_density(G, math.log(2), Form.zero(4), p)
        assert math.isclose(dbi1, dbi0 / 2)

    def test_saturates_on_calibrated_pair(self):
        G = build(np.eye(7))
        rho = g2_even()
        p = coordinate_pair(7, (4, 5, 6, 7), orientation=-1)
        dbi, wz = cal.energy_density(G, 0.3, rho, p)
        assert math.isclose(dbi, wz)


def test_report_serialises():
    report = cal.is_calibrated(parse_form("e12", 2, exact=False), None, coordinate_pair(2, (1, 2)))
    assert set(report.to_dict()) >= {"pairing_value", "bound_value", "deficit", "calibrated", "witness"}


def test_weighted_pairing_consistency(rng):
    G = random_metric(rng, 3)
    a, b = random_form(rng, 3), random_form(rng, 3)
    assert math.isclose(pairing(G, a, b, 0.25), math.exp(0.5) * pairing(G, a, b), rel_tol=1e-12)
