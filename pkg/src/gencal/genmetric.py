"""Generalised Riemannian metrics on T + T*.

Conventions used throughout the package:

* ``B`` is stored as the matrix of the bilinear form, ``B[i, j] = B(e_i, e_j)``,
  so the 2-form is ``sum_{i<j} B[i, j] e^{ij}``.
* Block matrices act on column vectors ``(X, xi)`` with X the vector part.
* The contraction map ``X -> X⌟B`` therefore has matrix ``B.T``.

V+ is the graph of ``X -> g X + X⌟B`` and V- the graph of
``X -> -g X + X⌟B``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction

import numpy as np

from . import linalg
from .errors import DimensionMismatch, GencalError, NotPositiveDefinite, NotSkew
from .exterior import (
    Form,
    GenVector,
    exp_two_form,
    hat,
    hodge_star,
    mukai,
    tilde,
    volume_g,
    wedge,
)


@dataclass(frozen=True)
class Dilaton:
    """Dilaton value constant + ln(log_arg)/2, closed under duality with rational data."""

    constant: Fraction | float = 0
    log_arg: Fraction | float = 1

    @property
    def value(self) -> float:
        return float(self.constant) + 0.5 * math.log(float(self.log_arg))

    @property
    def exact(self) -> bool:
        return isinstance(self.constant, Fraction) and isinstance(self.log_arg, Fraction)

    @classmethod
    def coerce(cls, phi) -> "Dilaton":
        if isinstance(phi, Dilaton):
            return phi
        return cls(phi, Fraction(1) if isinstance(phi, Fraction) else 1)

    @property
    def weight_squared(self):
        """exp(2 * value), exact when the constant vanishes and log_arg is rational."""
        if self.exact and self.constant == 0:
            return Fraction(self.log_arg)
        return math.exp(2 * self.value)


class NegativeNorm(GencalError, ArithmeticError):
    """The spinor norm came out negative, which signals a sign-convention bug."""


@dataclass(frozen=True, eq=False)
class GeneralisedMetric:
    g: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        exact = linalg.is_exact(np.asarray(self.g)) or linalg.is_exact(np.asarray(self.B))
        g = linalg.as_exact(self.g) if exact else np.asarray(self.g, dtype=float)
        B = linalg.as_exact(self.B) if exact else np.asarray(self.B, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DimensionMismatch("g must be square")
        if B.shape != g.shape:
            raise DimensionMismatch("g and B must have the same shape")
        scale = 1.0 if exact else max(1.0, float(np.max(np.abs(g))), float(np.max(np.abs(B), initial=0.0)))
        if not linalg.is_symmetric(g, 1e-10 * scale) or not linalg.is_positive_definite(g):
            raise NotPositiveDefinite("g must be symmetric positive definite")
        if not linalg.is_skew(B, 1e-10 * scale):
            raise NotSkew("B must be skew-symmetric")
        if not exact:
            # remove rounding noise so downstream code sees exact symmetry
            g, B = (g + g.T) / 2, (B - B.T) / 2
        g.flags.writeable = False
        B.flags.writeable = False
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "B", B)

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    @property
    def exact(self) -> bool:
        return linalg.is_exact(self.g)

    @cached_property
    def plus_map(self) -> np.ndarray:
        """Matrix of X -> g X + X⌟B."""
        return self.g + self.B.T

    @cached_property
    def minus_map(self) -> np.ndarray:
        return -self.g + self.B.T

    @cached_property
    def Vplus(self) -> np.ndarray:
        """2n x n frame whose columns span V+."""
        return np.vstack([self._identity(), self.plus_map])

    @cached_property
    def Vminus(self) -> np.ndarray:
        return np.vstack([self._identity(), self.minus_map])

    def _identity(self) -> np.ndarray:
        if self.exact:
            return linalg.as_exact(np.eye(self.dim, dtype=int))
        return np.eye(self.dim)

    @cached_property
    def G(self) -> np.ndarray:
        """The involution with V+ and V- as its +1 and -1 eigenspaces."""
        g_inv = linalg.inv(self.g)
        Bm = self.B.T
        top = np.hstack([-g_inv @ Bm, g_inv])
        bottom = np.hstack([self.g - Bm @ g_inv @ Bm, Bm @ g_inv])
        return np.vstack([top, bottom])

    def lift_plus(self, X) -> GenVector:
        X = self._vector(X)
        return GenVector(X, self.plus_map @ X)

    def lift_minus(self, X) -> GenVector:
        X = self._vector(X)
        return GenVector(X, self.minus_map @ X)

    def _vector(self, X) -> np.ndarray:
        X = linalg.as_exact(X) if self.exact else np.asarray(X, dtype=float)
        if X.shape != (self.dim,):
            raise DimensionMismatch(f"expected a vector of length {self.dim}")
        return X

    def is_flat(self) -> bool:
        """True when g is the identity, so exact forms stay exact."""
        return bool(np.all(self.g == np.eye(self.dim)))

    def star_metric(self):
        return None if self.is_flat() else linalg.to_float(self.g)

    def to_float(self) -> "GeneralisedMetric":
        return GeneralisedMetric(linalg.to_float(self.g), linalg.to_float(self.B))

    def B_form(self) -> Form:
        return Form.two_form(self.B)


def build(g, B=None) -> GeneralisedMetric:
    g = np.asarray(g)
    if B is None:
        B = np.zeros_like(g) if g.dtype != object else linalg.as_exact(np.zeros(g.shape, dtype=int))
    return GeneralisedMetric(g, B)


def from_splitting(frame) -> GeneralisedMetric:
    """Recover (g, B) from any 2n x n frame spanning a positive definite V+."""
    frame = np.asarray(frame)
    n = frame.shape[1]
    if frame.shape != (2 * n, n):
        raise DimensionMismatch("expected a 2n x n frame")
    top, bottom = frame[:n], frame[n:]
    P = bottom @ linalg.inv(top)
    g = (P + P.T) / 2
    B = (P.T - P) / 2
    return GeneralisedMetric(g, B)


def pairing_matrix(n: int) -> np.ndarray:
    """Gram matrix of the contraction product (X + xi, Y + eta) = (xi(Y) + eta(X)) / 2."""
    z = np.zeros((n, n))
    eye = np.eye(n)
    return 0.5 * np.block([[z, eye], [eye, z]])


def _gtilde_untwisted(g, rho: Form) -> Form:
    n = rho.dim
    if n % 2 == 0:
        return hodge_star(g, hat(rho))
    return -hodge_star(g, hat(tilde(rho)))


def gtilde(G: GeneralisedMetric, rho: Form) -> Form:
    """Action of the volume element of V- on form-spinors.

    With B = 0 this is the Hodge star after hat, composed with tilde and an
    overall minus sign when n is odd. The signs are the ones making the
    associated norm positive definite.
    """
    if rho.dim != G.dim:
        raise DimensionMismatch("form and metric dimensions differ")
    g = G.star_metric()
    if not np.any(G.B != 0):
        return _gtilde_untwisted(g, rho)
    eB = exp_two_form(Form.two_form(G.B))
    return wedge(eB, _gtilde_untwisted(g, wedge(exp_two_form(-Form.two_form(G.B)), rho)))


def gtilde_square_sign(n: int) -> int:
    return -1 if (n * (n - 1) // 2) % 2 else 1


def norm_sign(n: int, parity: str) -> int:
    """Sign s with Q(rho, tau) = s * <rho, gtilde tau> for the given parity."""
    m = n // 2
    s = -1 if m % 2 else 1
    return s if parity == "even" else -s


def pairing(G: GeneralisedMetric, a: Form, b: Form, dilaton: float = 0.0):
    """Mukai pairing read against the weighted volume e^{2 phi} vol_g."""
    if isinstance(dilaton, Dilaton):
        dilaton = dilaton.value
    value = mukai(a, b)
    if dilaton == 0 and G.is_flat():
        return value
    return value * np.exp(2 * dilaton) / volume_g(linalg.to_float(G.g))


def qform(G: GeneralisedMetric, rho: Form, tau: Form, dilaton: float = 0.0):
    """Symmetric positive form on spinors of one parity."""
    parity = rho.parity
    if parity == "mixed":
        return qform(G, rho.even(), tau.even(), dilaton) + qform(G, rho.odd(), tau.odd(), dilaton)
    if parity == "zero":
        return 0.0
    value = pairing(G, rho, gtilde(G, tau), dilaton)
    return norm_sign(G.dim, parity) * value


def qnorm(G: GeneralisedMetric, rho: Form, dilaton: float = 0.0, tol: float = 1e-9) -> float:
    if isinstance(dilaton, Dilaton):
        dilaton = dilaton.value
    q = qform(G, rho, rho, dilaton)
    if np.iscomplexobj(q):
        q = q.real
    scale = max(1.0, float(rho.norm()) ** 2 * np.exp(2 * dilaton))
    if q < -tol * scale:
        raise NegativeNorm(f"spinor norm squared is negative ({q})")
    return float(np.sqrt(max(q, 0.0)))


def random_metric(rng: np.random.Generator, n: int, b_scale: float = 1.0) -> GeneralisedMetric:
    A = rng.standard_normal((n, n))
    g = A @ A.T + n * np.eye(n) * 0.5
    S = rng.standard_normal((n, n)) * b_scale
    return GeneralisedMetric(g, (S - S.T) / 2)


def exact_metric(g_rows, b_upper) -> GeneralisedMetric:
    n = len(g_rows)
    g = linalg.as_exact(np.array([[Fraction(x) for x in row] for row in g_rows], dtype=object))
    B = linalg.skew_from_upper([Fraction(x) for x in b_upper], n, exact=True)
    return GeneralisedMetric(g, B)
