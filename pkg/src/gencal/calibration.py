"""Generalised calibrations: the pairing against tau_{L,F}, the determinant
bound, the spinor criterion, a numeric maximiser and the brane energy density.

Pairings are read against the Riemannian volume form, so for a pair with
g-orthonormal L basis the pairing is the top coefficient of
``exp(-F) ^ j*rho`` on L.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import linalg
from .clifford import orthonormal_frame
from .dirac import ChiralityMismatch, DiracSpinor, charge_conj, detect_chirality, fierz, form_operator
from .errors import DimensionMismatch, ParityMismatch
from .exterior import (
    Form,
    compound,
    exp_two_form,
    induced_map,
    interior,
    masks_of_degree,
    mukai,
    pullback,
    volume_g,
    wedge,
    wedge_all,
)
from .genmetric import Dilaton, GeneralisedMetric, qnorm
from .genmetric import pairing as weighted_pairing
from .purespinor import IsotropicPair, tau_from_pair

EQUALITY_TOL = 1e-7


@dataclass(frozen=True)
class CalibrationReport:
    pairing_value: float
    bound_value: float
    deficit: float
    calibrated: bool
    orientation: int | None = None
    witness: float | None = None
    exact: bool = False
    tight: bool | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _g(G) -> np.ndarray | None:
    return G.g if isinstance(G, GeneralisedMetric) else G


def _metric_matrix(g, n: int, exact: bool) -> np.ndarray:
    if g is None:
        eye = np.eye(n, dtype=int)
        return linalg.as_exact(eye) if exact else np.eye(n)
    g = np.asarray(g)
    return linalg.as_exact(g) if exact and not linalg.is_exact(g) else g


def _check_parity(rho: Form, k: int) -> None:
    parity = rho.parity
    wanted = "even" if k % 2 == 0 else "odd"
    if parity not in (wanted, "zero"):
        raise ParityMismatch(f"a {k}-dimensional pair pairs with {wanted} forms, got a {parity} form")


def _basis_pairing(rho: Form, p: IsotropicPair):
    """Top coefficient of exp(-F) ^ j*rho relative to l^1 ^ ... ^ l^k of the L basis."""
    k = p.k
    exact = p.exact and rho.exact
    L = p.L if exact else linalg.to_float(p.L)
    pulled = pullback(L, rho if exact else rho.to_float())
    if k >= 2 and np.any(p.F != 0):
        F = p.F if exact else linalg.to_float(p.F)
        pulled = wedge(exp_two_form(-Form.two_form(F)), pulled)
    return pulled.top()


def pairing_value(rho: Form, p: IsotropicPair, G=None):
    """<rho, tau_{L,F}> against vol_g, via the pullback of rho to L."""
    if rho.dim != p.n:
        raise DimensionMismatch("form and pair live in different dimensions")
    _check_parity(rho, p.k)
    return _pairing_any_parity(rho, p, G)


def _pairing_any_parity(rho: Form, p: IsotropicPair, G=None) -> float:
    g = _metric_matrix(_g(G), p.n, False)
    raw = _basis_pairing(rho, p.to_float() if not (p.exact and rho.exact) else p)
    gram = linalg.to_float(p.L).T @ linalg.to_float(g) @ linalg.to_float(p.L)
    value = float(np.real(raw)) if not isinstance(raw, Fraction) else float(raw)
    return p.orientation * value / math.sqrt(np.linalg.det(gram)) if p.k else p.orientation * value


def pairing_value_mukai(rho: Form, p: IsotropicPair, G=None) -> float:
    """Same pairing through mukai(rho, tau_{L,F}) divided by the volume of g."""
    _check_parity(rho, p.k)
    g = _g(G)
    gf = None if g is None else linalg.to_float(g)
    tau = tau_from_pair(p.to_float(), gf)
    value = mukai(rho.to_float(), tau)
    return float(np.real(value)) / volume_g(gf)


def bound_squared(G, p: IsotropicPair):
    """det(j*(g+B) - F) / det(j*g), exact for rational input."""
    G = G if isinstance(G, GeneralisedMetric) else GeneralisedMetric(
        np.eye(p.n) if G is None else G, np.zeros((p.n, p.n)))
    if p.k == 0:
        return Fraction(1) if (p.exact and G.exact) else 1.0
    exact = p.exact and G.exact
    L = p.L if exact else linalg.to_float(p.L)
    g = G.g if exact else linalg.to_float(G.g)
    B = G.B if exact else linalg.to_float(G.B)
    F = p.F if exact else linalg.to_float(p.F)
    return linalg.det(L.T @ (g + B) @ L - F) / linalg.det(L.T @ g @ L)


def bound_value(G, p: IsotropicPair) -> float:
    return math.sqrt(float(bound_squared(G, p)))


def is_calibrated(rho: Form, G, p: IsotropicPair, tol: float = EQUALITY_TOL, dilaton=0.0) -> CalibrationReport:
    """Compare the pairing with the bound for p, checking both orientations of L.

    With a dilaton the pairing is weighted by exp(dilaton), which is the
    pointwise inequality <rho, tau> <= |tau| read against exp(2 dilaton) vol_g.
    """
    _check_parity(rho, p.k)
    weight2 = Dilaton.coerce(dilaton).weight_squared
    pairing = _pairing_any_parity(rho, p, G) * math.sqrt(float(weight2))
    bound = bound_value(G, p)
    exact = bool(isinstance(G, GeneralisedMetric) and G.exact and p.exact and rho.exact
                 and isinstance(weight2, Fraction))
    if exact:
        raw = _basis_pairing(rho, p)
        gram = linalg.det(p.L.T @ G.g @ p.L) if p.k else Fraction(1)
        b2 = bound_squared(G, p)
        signed = p.orientation * raw
        calibrated = signed >= 0 and weight2 * signed * signed == b2 * gram
        meets_flipped = -signed >= 0 and weight2 * signed * signed == b2 * gram
    else:
        calibrated = bound - pairing <= tol
        meets_flipped = bound + pairing <= tol
    orientation = p.orientation if calibrated else (-p.orientation if meets_flipped else None)
    return CalibrationReport(pairing, bound, bound - pairing, bool(calibrated), orientation, exact=exact)


def spinor_deficit(rho: Form, tau: Form, G: GeneralisedMetric, dilaton=0.0) -> float:
    """|tau| - <rho, tau> on the spinor scale, both read against exp(2 dilaton) vol_g.

    For tau = tau_{L,F} and a zero dilaton this is the deficit of the pair.
    """
    G = G.to_float() if G.exact else G
    value = weighted_pairing(G, rho.to_float(), tau.to_float(), dilaton)
    return qnorm(G, tau, dilaton) - float(np.real(value))


# ---------------------------------------------------------- spinor criterion

def criterion_phase(n: int, k: int, chirality: int | None = None) -> complex:
    """Phase kappa with <rho, tau>/|tau| = q(A psi_l, kappa sigma psi_r) for rho = fierz(psi_l, psi_r)."""
    m = n // 2
    if n % 2:
        return (-1) ** (m * (m + 1) // 2) * (1j) ** (m + 1)
    if chirality not in (1, -1):
        raise ChiralityMismatch("even dimensions need a chiral right spinor")
    return chirality * (-1) ** (m * (m + 1) // 2 + k) * (1j) ** m


def unit_spinor_lift(G: GeneralisedMetric, p: IsotropicPair) -> Form:
    """exp(-B) ^ tau_{L,F} / |tau_{L,F}|."""
    G = G.to_float() if G.exact else G
    tau = tau_from_pair(p.to_float(), G.g)
    untwisted = wedge(exp_two_form(-Form.two_form(G.B)), tau)
    return untwisted / qnorm(G, tau)


def spinor_criterion(psi_l: DiracSpinor, psi_r: DiracSpinor, G: GeneralisedMetric, p: IsotropicPair) -> float:
    """Residual |A(psi_l) - kappa sigma . psi_r| of the spinor equation."""
    n = G.dim
    if psi_l.n != n or psi_r.n != n or p.n != n:
        raise DimensionMismatch("spinors, metric and pair must share the dimension")
    chirality = detect_chirality(psi_r) if n % 2 == 0 else None
    kappa = criterion_phase(n, p.k, chirality)
    sigma = form_operator(unit_spinor_lift(G, p), n, linalg.to_float(G.g))
    lhs = charge_conj(psi_l).amplitudes
    rhs = kappa * sigma @ psi_r.amplitudes
    return float(np.linalg.norm(lhs - rhs))


def calibration_form(psi_l: DiracSpinor, psi_r: DiracSpinor, G: GeneralisedMetric | None = None) -> Form:
    """Real part of exp(B) ^ fierz(psi_l, psi_r), the form the spinor criterion refers to."""
    g = None if G is None else linalg.to_float(G.g)
    f = fierz(psi_l, psi_r, g)
    if G is not None and np.any(G.B != 0):
        f = wedge(exp_two_form(Form.two_form(linalg.to_float(G.B))), f)
    return f.real


# --------------------------------------------------------------- maximiser

def _pair_tables(n: int, k: int):
    """Index tables for the gradient of <beta_{k-2}, i_j i_i V> over pairs i<j."""
    masks_k = masks_of_degree(n, k)
    rows, cols, src, dst, signs = [], [], [], [], []
    for pos, K in enumerate(combinations(range(n), k)):
        for a, b in combinations(range(k), 2):
            i, j = K[a], K[b]
            rest = sum(1 << x for x in K if x not in (i, j))
            # e^i ^ e^j ^ e^{rest} = sign e^K
            sign = (-1) ** (a + b - 1)
            rows.append(i)
            cols.append(j)
            src.append(rest)
            dst.append(pos)
            signs.append(sign)
    return masks_k, np.array(rows), np.array(cols), np.array(src), np.array(dst), np.array(signs, dtype=float)


class _Objective:
    """Deficit bound - pairing over (Y, Fn), Y an orthonormal n x k frame and Fn an ambient skew matrix."""

    def __init__(self, rho_frame: Form, B_frame: np.ndarray, k: int):
        self.rho = rho_frame.to_float()
        if self.rho.is_complex:
            self.rho = self.rho.real
        self.B = B_frame
        self.n = rho_frame.dim
        self.k = k
        self.tables = _pair_tables(self.n, k)

    def beta(self, Fn: np.ndarray) -> Form:
        if not np.any(Fn):
            return self.rho
        return wedge(exp_two_form(-Form.two_form(Fn)), self.rho)

    def value(self, Y: np.ndarray, Fn: np.ndarray) -> tuple[float, float]:
        masks_k = self.tables[0]
        beta_k = self.beta(Fn).coeffs[masks_k]
        pairing = float(compound(Y, self.k)[:, 0] @ beta_k)
        A = np.eye(self.k) + Y.T @ (self.B - Fn) @ Y
        bound = math.sqrt(max(np.linalg.det(A), 0.0))
        return bound - pairing, pairing

    def gradient(self, Y: np.ndarray, Fn: np.ndarray):
        n, k = self.n, self.k
        masks_k, rows, cols, src, dst, signs = self.tables
        beta = self.beta(Fn)
        minors = compound(Y, k)[:, 0]
        # pairing gradient in Y: column a replaced by e_i
        gY = np.zeros((n, k))
        covecs = [Form.one_form(Y[:, a]) for a in range(k)]
        for a in range(k):
            others = covecs[:a] + covecs[a + 1:]
            rest = wedge_all(*others) if others else Form.scalar(n, 1.0)
            for i in range(n):
                contracted = interior(np.eye(n)[i], beta)
                gY[i, a] = (-1) ** a * float(np.dot(contracted.coeffs, rest.coeffs))
        # pairing gradient in Fn: -<e^i ^ e^j ^ beta, V>
        gF = np.zeros((n, n))
        if k >= 2:
            contrib = signs * beta.coeffs[src] * minors[dst]
            np.add.at(gF, (rows, cols), -contrib)
            gF = gF - gF.T
        A = np.eye(k) + Y.T @ (self.B - Fn) @ Y
        A_inv = np.linalg.inv(A)
        bound = math.sqrt(max(np.linalg.det(A), 1e-300))
        M = self.B - Fn
        bY = 0.5 * bound * (M @ Y @ (A_inv - A_inv.T))
        Gm = -Y @ A_inv.T @ Y.T
        bF = 0.5 * bound * (Gm - Gm.T)
        bF = np.triu(bF, 1) - np.triu(bF, 1).T
        # parameters are the upper triangle of Fn, so the lower half duplicates it
        gF = np.triu(gF, 1) - np.triu(gF, 1).T
        return bY - gY, bF - gF


def _cayley(Y: np.ndarray, grad: np.ndarray, t: float) -> np.ndarray:
    W = grad @ Y.T - Y @ grad.T
    n = Y.shape[0]
    eye = np.eye(n)
    return np.linalg.solve(eye + (t / 2) * W, (eye - (t / 2) * W) @ Y)


def _descend(obj: _Objective, Y: np.ndarray, Fn: np.ndarray, budget: int, stop: float):
    value, _ = obj.value(Y, Fn)
    t = 0.5
    converged = False
    for _ in range(budget):
        gY, gF = obj.gradient(Y, Fn)
        # Riemannian gradient norm via the Cayley generator
        W = gY @ Y.T - Y @ gY.T
        slope = 0.5 * float(np.sum(W * W)) + float(np.sum(gF * gF)) / 2
        if slope < stop ** 2:
            converged = True
            break
        while True:
            Y_new = _cayley(Y, gY, t)
            F_new = Fn - t * gF
            new_value, _ = obj.value(Y_new, F_new)
            if new_value <= value - 1e-4 * t * slope or t < 1e-12:
                break
            t *= 0.5
        if t < 1e-12:
            converged = True
            break
        Y, Fn, value = Y_new, F_new, new_value
        t = min(t * 2.0, 4.0)
    return Y, Fn, value, converged


def find_maximizer(rho: Form, G, k: int, budget: int = 400, restarts: int = 8, seed: int = 0,
                   tight_tol: float = 1e-6, stop: float = 1e-10):
    """Search for a pair of dimension k minimising bound - pairing."""
    n = rho.dim
    if not 0 <= k <= n:
        raise DimensionMismatch("k must lie between 0 and n")
    G = G if isinstance(G, GeneralisedMetric) else GeneralisedMetric(
        np.eye(n) if G is None else G, np.zeros((n, n)))
    G = G.to_float() if G.exact else G
    if k == 0:
        p = IsotropicPair(np.zeros((n, 0)), np.zeros((0, 0)))
        parity_part = rho.even()
        report = is_calibrated(parity_part, G, p)
        return p, _with_tight(report, tight_tol)
    P = orthonormal_frame(G.g)
    rho_frame = induced_map(P.T, rho.to_float())
    part = rho_frame.even() if k % 2 == 0 else rho_frame.odd()
    obj = _Objective(part, P.T @ G.B @ P, k)
    rng = np.random.default_rng(seed)
    best = None
    for restart in range(restarts):
        Y0, _ = np.linalg.qr(rng.standard_normal((n, k)))
        Y, Fn, value, _ = _descend(obj, Y0, np.zeros((n, n)), budget, stop)
        if best is None or value < best[0] - 1e-15:
            best = (value, restart, Y, Fn)
    _, _, Y, Fn = best
    L = P @ Y
    p = IsotropicPair(L, Y.T @ Fn @ Y)
    report = is_calibrated(rho.even() if k % 2 == 0 else rho.odd(), G, p, tol=tight_tol)
    return p, _with_tight(report, tight_tol)


def _with_tight(report: CalibrationReport, tight_tol: float) -> CalibrationReport:
    return CalibrationReport(report.pairing_value, report.bound_value, report.deficit,
                             report.calibrated, report.orientation, report.witness, report.exact,
                             tight=report.deficit <= tight_tol)


# ----------------------------------------------------------- energy density

def energy_density(G, dilaton: float, C: Form, p: IsotropicPair) -> tuple[float, float]:
    """Dirac-Born-Infeld and Wess-Zumino densities of a pair, weighted by exp(-dilaton)."""
    weight = math.exp(-dilaton)
    dbi = weight * bound_value(G, p)
    part = C.even() if p.k % 2 == 0 else C.odd()
    wz = weight * _pairing_any_parity(part, p, G) if not part.is_zero() else 0.0
    return dbi, wz
