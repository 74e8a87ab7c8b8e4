"""Property batteries behind ``gencal suite``.

Each property draws its own generator from the base seed and the property
name, so a single property can be rerun in isolation with the seed it
reports. A property returns the number of cases it checked and raises
AssertionError with the first counterexample otherwise.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import calibration, clifford, dirac, exterior, fieldforms, genmetric, purespinor, tduality

MODULES = ("exterior", "clifford", "genmetric", "dirac", "purespinor", "calibration", "tduality", "fieldforms")


@dataclass(frozen=True)
class Property:
    module: str
    name: str
    run: Callable[[np.random.Generator, int], int]
    cases: int


@dataclass(frozen=True)
class Outcome:
    module: str
    name: str
    seed: int
    cases: int
    passed: bool
    message: str = ""

    def to_dict(self) -> dict:
        return {"module": self.module, "name": self.name, "seed": self.seed, "cases": self.cases,
                "passed": self.passed, "message": self.message}


_REGISTRY: list[Property] = []


def prop(module: str, cases: int):
    def register(fn):
        _REGISTRY.append(Property(module, fn.__name__, fn, cases))
        return fn
    return register


def _check(ok: bool, message: str) -> None:
    if not ok:
        raise AssertionError(message)


# ---------------------------------------------------------------- exterior

@prop("exterior", 60)
def mukai_symmetry(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(2, 8))
        a, b = exterior.random_form(rng, n, exact=True), exterior.random_form(rng, n, exact=True)
        sign = (-1) ** (n * (n + 1) // 2)
        _check(exterior.mukai(a, b) == sign * exterior.mukai(b, a), f"n={n} a={a} b={b}")
    return cases


@prop("exterior", 60)
def clifford_adjointness(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(2, 8))
        a, b = exterior.random_form(rng, n, exact=True), exterior.random_form(rng, n, exact=True)
        v = exterior.GenVector(*(np.array([Fraction(int(x)) for x in rng.integers(-3, 4, n)], dtype=object)
                                 for _ in range(2)))
        lhs = exterior.mukai(exterior.spinor_action(v, a), b)
        rhs = (-1) ** n * exterior.mukai(a, exterior.spinor_action(v, b))
        _check(lhs == rhs, f"n={n} v={v}")
    return cases


@prop("exterior", 40)
def literal_round_trip(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(1, 9))
        a = exterior.random_form(rng, n, exact=True, density=0.4)
        text = exterior.format_form(a)
        _check(exterior.parse_form(text, n, exact=True) == a, f"literal {text!r}")
    return cases


@prop("exterior", 40)
def hodge_star_square(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(2, 8))
        g = genmetric.random_metric(rng, n).g
        a = exterior.random_form(rng, n)
        twice = exterior.hodge_star(g, exterior.hodge_star(g, a))
        expected = _by_degree(a, lambda p: (-1) ** (p * (n - p)))
        _check(twice.allclose(expected, 1e-8), f"n={n}")
    return cases


def _by_degree(a, sign):
    out = exterior.Form.zero(a.dim)
    for p in range(a.dim + 1):
        out = out + a.part(p) * sign(p)
    return out


# ---------------------------------------------------------------- clifford

@prop("clifford", 40)
def product_associative(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(2, 7))
        a, b, c = (clifford.CliffordElement(n, rng.standard_normal(1 << n)) for _ in range(3))
        left = clifford.cliff_product(clifford.cliff_product(a, b), c)
        right = clifford.cliff_product(a, clifford.cliff_product(b, c))
        _check(left.allclose(right, 1e-9), f"n={n}")
    return cases


@prop("clifford", 40)
def reverse_antiautomorphism(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(2, 7))
        a, b = (clifford.CliffordElement(n, rng.standard_normal(1 << n)) for _ in range(2))
        lhs = clifford.reverse(clifford.cliff_product(a, b))
        rhs = clifford.cliff_product(clifford.reverse(b), clifford.reverse(a))
        _check(lhs.allclose(rhs, 1e-9), f"n={n}")
    return cases


@prop("clifford", 30)
def pin_projection_orthogonal(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(2, 7))
        g = genmetric.random_metric(rng, n).g
        P = clifford.orthonormal_frame(g)
        vs = [clifford.CliffordElement.vector(rng.standard_normal(n), P) for _ in range(int(rng.integers(1, 4)))]
        a = vs[0]
        for v in vs[1:]:
            a = clifford.cliff_product(a, v)
        R = clifford.pin_project(a)
        _check(np.allclose(R.T @ g @ R, g, atol=1e-8), f"n={n}")
    return cases


# --------------------------------------------------------------- genmetric

@prop("genmetric", 35)
def gtilde_square_sign(rng, cases):
    for i in range(cases):
        n = 2 + i % 7
        G = genmetric.random_metric(rng, n)
        rho = exterior.random_form(rng, n)
        twice = genmetric.gtilde(G, genmetric.gtilde(G, rho))
        _check(twice.allclose(rho * genmetric.gtilde_square_sign(n), 1e-8), f"n={n}")
    return cases


@prop("genmetric", 35)
def norm_positive(rng, cases):
    for i in range(cases):
        n = 2 + i % 7
        G = genmetric.random_metric(rng, n)
        rho = exterior.random_form(rng, n)
        q = genmetric.qform(G, rho, rho)
        _check(q > 0, f"n={n} q={q}")
    return cases


@prop("genmetric", 35)
def b_conjugation(rng, cases):
    for i in range(cases):
        n = 2 + i % 7
        G = genmetric.random_metric(rng, n)
        G0 = genmetric.GeneralisedMetric(G.g, np.zeros((n, n)))
        rho = exterior.random_form(rng, n)
        eB = exterior.exp_two_form(G.B_form())
        emB = exterior.exp_two_form(-G.B_form())
        expected = exterior.wedge(eB, genmetric.gtilde(G0, exterior.wedge(emB, rho)))
        _check(genmetric.gtilde(G, rho).allclose(expected, 1e-8), f"n={n}")
    return cases


@prop("genmetric", 35)
def involution_swaps_splitting(rng, cases):
    for i in range(cases):
        n = 2 + i % 7
        G = genmetric.random_metric(rng, n)
        M = G.G
        _check(np.allclose(M @ M, np.eye(2 * n), atol=1e-8), f"n={n}: G^2 != 1")
        _check(np.allclose(M @ G.Vplus, G.Vplus, atol=1e-8), f"n={n}: V+ not fixed")
        _check(np.allclose(M @ G.Vminus, -G.Vminus, atol=1e-8), f"n={n}: V- not negated")
    return cases


# ------------------------------------------------------------------- dirac

@prop("dirac", 11)
def charge_conjugation_square(rng, cases):
    for n in range(2, 2 + cases):
        rep = dirac.build_gamma(n)
        C = rep.conj_matrix
        m = n // 2
        expected = (-1) ** (m * (m + 1) // 2)
        _check(np.allclose(C @ np.conj(C), expected * np.eye(rep.size), atol=1e-10), f"n={n}")
        for c in rep.generators:
            _check(np.allclose(C @ np.conj(c), rep.conj_sign * c @ C, atol=1e-10), f"n={n}: not equivariant")
    return cases


@prop("dirac", 30)
def fierz_linear_in_right_slot(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(2, 9))
        a, b, c = (dirac.random_spinor(rng, n) for _ in range(3))
        z = complex(*rng.standard_normal(2))
        lhs = dirac.fierz(a, b + c * z)
        rhs = dirac.fierz(a, b) + dirac.fierz(a, c) * z
        _check(lhs.allclose(rhs, 1e-9), f"n={n}")
    return cases


@prop("dirac", 3)
def structure_supports(rng, cases):
    g2 = dirac.structure_forms("G2", dirac.g2_spinor())
    total = g2.forms["even"] + g2.forms["odd"]
    _check(sorted({len(i) for i, _ in total.real.terms() if abs(_) > 1e-9}) == [0, 3, 4, 7], "G2 support")
    s7 = dirac.structure_forms("SPIN7", dirac.spin7_spinor())
    _check(sorted({len(i) for i, c in s7.forms["even"].terms() if abs(c) > 1e-9}) == [0, 4, 8], "Spin(7) support")
    su3 = dirac.structure_forms("SU3", dirac.su3_spinor())
    omega = dirac.kahler_form()
    expected = exterior.exp_two_form(omega * (-1j))
    _check(su3.forms["rho0"].allclose(expected, 1e-9), "SU(3) exp(-i omega)")
    return cases


# -------------------------------------------------------------- purespinor

@prop("purespinor", 60)
def factorize_round_trip(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(2, 8))
        G = genmetric.random_metric(rng, n)
        p = purespinor.random_pair(rng, n)
        c, q = purespinor.factorize(purespinor.tau_from_pair(p, G.g), G.g)
        _check(abs(c - 1) < 1e-7 and p.equivalent(q, 1e-7), f"n={n} k={p.k}")
    return cases


@prop("purespinor", 60)
def rank_equals_dimension(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(2, 8))
        G = genmetric.random_metric(rng, n)
        p = purespinor.random_pair(rng, n)
        r = purespinor.rank(purespinor.tau_from_pair(p, G.g))
        _check(r == p.k, f"n={n} k={p.k} rank={r}")
    return cases


@prop("purespinor", 60)
def gluing_routes_agree(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(2, 8))
        G = genmetric.random_metric(rng, n)
        p = purespinor.random_pair(rng, n)
        R = purespinor.gluing_matrix(G, p)
        _check(np.allclose(R.T @ G.g @ R, G.g, atol=1e-8), f"n={n}: not orthogonal")
        pinned = clifford.pin_project(purespinor.pin_lift(G, p))
        _check(np.allclose(pinned, R, atol=1e-8), f"n={n} k={p.k}: pin lift disagrees")
    return cases


# ------------------------------------------------------------- calibration

@prop("calibration", 60)
def determinant_bound_routes(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(2, 8))
        G = genmetric.random_metric(rng, n)
        p = purespinor.random_pair(rng, n)
        norm = genmetric.qnorm(G, purespinor.tau_from_pair(p, G.g))
        _check(math.isclose(norm, calibration.bound_value(G, p), rel_tol=1e-9), f"n={n} k={p.k}")
    return cases


@prop("calibration", 60)
def pairing_routes_agree(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(2, 8))
        G = genmetric.random_metric(rng, n)
        p = purespinor.random_pair(rng, n)
        rho = exterior.random_form(rng, n, parity="even" if p.k % 2 == 0 else "odd")
        a = calibration.pairing_value(rho, p, G)
        b = calibration.pairing_value_mukai(rho, p, G)
        _check(math.isclose(a, b, rel_tol=1e-8, abs_tol=1e-9), f"n={n} k={p.k}: {a} vs {b}")
    return cases


@prop("calibration", 60)
def spinor_residual_measures_deficit(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(2, 9))
        G = genmetric.random_metric(rng, n)
        p = purespinor.random_pair(rng, n)
        chi = 1 if n % 2 == 0 else None
        psi_l, psi_r = dirac.random_spinor(rng, n, chi), dirac.random_spinor(rng, n, chi)
        rho = calibration.calibration_form(psi_l, psi_r, G)
        rho = rho.even() if p.k % 2 == 0 else rho.odd()
        ratio = calibration.pairing_value(rho, p, G) / calibration.bound_value(G, p)
        res = calibration.spinor_criterion(psi_l, psi_r, G, p)
        _check(ratio <= 1 + 1e-9, f"n={n} k={p.k}: bound violated")
        _check(math.isclose(res ** 2, 2 * (1 - ratio), abs_tol=1e-8), f"n={n} k={p.k}: residual {res}")
    return cases


# --------------------------------------------------------------- tduality

@prop("tduality", 60)
def buscher_routes_agree(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(2, 9))
        G = genmetric.random_metric(rng, n)
        ctx = tduality.random_context(rng, n)
        a = tduality.tdualize_metric(G, ctx)
        b = tduality.tdualize_metric(G, ctx, route="eigen")
        _check(np.allclose(a.g, b.g, atol=1e-8) and np.allclose(a.B, b.B, atol=1e-8), f"n={n}")
    return cases


@prop("tduality", 60)
def norm_transport(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(2, 8))
        G = genmetric.random_metric(rng, n)
        ctx = tduality.random_context(rng, n)
        phi = float(rng.standard_normal())
        rho = exterior.random_form(rng, n)
        Gd = tduality.tdualize_metric(G, ctx)
        phid = tduality.tdualize_dilaton(phi, G.g, ctx)
        before = genmetric.qnorm(G, rho, phi)
        after = genmetric.qnorm(Gd, tduality.tdualize_spinor(rho, ctx), phid)
        _check(math.isclose(before, after, rel_tol=1e-8), f"n={n}: {before} vs {after}")
    return cases


@prop("tduality", 60)
def rank_shift(rng, cases):
    for i in range(cases):
        n = int(rng.integers(2, 8))
        G = genmetric.random_metric(rng, n)
        ctx = tduality.random_context(rng, n)
        inside = i % 2 == 0
        k = int(rng.integers(1 if inside else 0, n + 1 if inside else n))
        p = purespinor.random_pair(rng, n, k, containing=ctx.X if inside else None)
        dual = tduality.tdualize_pair(p, G, ctx)
        _check(dual.k == k + tduality.rank_shift(p, ctx), f"n={n} k={k} inside={inside}: got {dual.k}")
        _check(dual.k == (k - 1 if inside else k + 1), f"n={n} k={k} inside={inside}: got {dual.k}")
    return cases


# -------------------------------------------------------------- fieldforms

@prop("fieldforms", 25)
def d_squares_to_zero(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(2, 6))
        w = fieldforms.random_polyform(rng, n, 3)
        _check(fieldforms.d(fieldforms.d(w)).is_zero(), f"n={n} w={w}")
        B = fieldforms.random_basic_form(rng, n, 2, 3)
        H = fieldforms.d(B)
        _check(fieldforms.d_H(fieldforms.d_H(w, H), H).is_zero(), f"n={n}: d_H^2 != 0 for H = dB")
    return cases


@prop("fieldforms", 25)
def cartan_formula(rng, cases):
    for _ in range(cases):
        n = int(rng.integers(2, 6))
        w = fieldforms.random_polyform(rng, n, 3)
        i = int(rng.integers(1, n + 1))
        _check(fieldforms.cartan_lie(i, w) == fieldforms.lie_derivative(i, w), f"n={n} i={i}")
    return cases


@prop("fieldforms", 20)
def closed_b_preserves_bracket(rng, cases):
    def section(n):
        vec = tuple(fieldforms.random_polynomial(rng, n, 2) for _ in range(n))
        form = fieldforms.PolyForm.one_form(n, [fieldforms.random_polynomial(rng, n, 2) for _ in range(n)])
        return fieldforms.PolyGenVector(vec, form)

    for _ in range(cases):
        n = int(rng.integers(2, 5))
        B = fieldforms.d(fieldforms.random_basic_form(rng, n, 1, 2, density=1.0))
        v, w = section(n), section(n)
        lhs = fieldforms.courant(fieldforms.b_transform(B, v), fieldforms.b_transform(B, w))
        _check(lhs == fieldforms.b_transform(B, fieldforms.courant(v, w)), f"n={n}")
    return cases


@prop("fieldforms", 30)
def intertwining_with_closed_theta(rng, cases):
    for i in range(cases):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(0, n))
        r0 = fieldforms.random_basic_form(rng, n, k, 2)
        r1 = fieldforms.random_basic_form(rng, n, max(k - 1, 0), 2)
        D = fieldforms.random_polynomial(rng, n, 2, exclude=(n,))
        theta = fieldforms.random_theta(rng, n, 2, closed=True)
        f0, f1 = fieldforms.solve_closure(r0, r1, D, theta)
        if i % 2:
            f1 = f1 + fieldforms.random_basic_form(rng, n, max(k - 1, 0) + 1, 1, density=1.0)
        holds, holds_dual = fieldforms.tdual_intertwine_check(r0, r1, f0, f1, D, theta)
        _check(holds == holds_dual, f"n={n}: {holds} vs {holds_dual}")
    return cases


# ---------------------------------------------------------------- runner

def property_seed(base: int, module: str, name: str) -> int:
    return (base * 1_000_003 + zlib.crc32(f"{module}.{name}".encode())) % 2 ** 32


def properties(suite: str) -> list[Property]:
    if suite == "all":
        return list(_REGISTRY)
    if suite not in MODULES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(MODULES + ('all',))}")
    return [p for p in _REGISTRY if p.module == suite]


def run(suite: str, seed: int = 0) -> list[Outcome]:
    outcomes = []
    for p in properties(suite):
        s = property_seed(seed, p.module, p.name)
        rng = np.random.default_rng(s)
        try:
            cases = p.run(rng, p.cases)
            outcomes.append(Outcome(p.module, p.name, s, cases, True))
        except AssertionError as exc:
            outcomes.append(Outcome(p.module, p.name, s, p.cases, False, str(exc)))
    return sorted(outcomes, key=lambda o: (MODULES.index(o.module), o.name))
