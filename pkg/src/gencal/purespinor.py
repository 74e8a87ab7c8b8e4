"""Pure spinors, isotropic pairs (L, F) and gluing matrices.

A pair is an oriented subspace L (columns of an n x k matrix) carrying a
2-form F given by its skew matrix in the L basis. Its spinor is
``exp(F0) ^ hat(star(vol_L))`` where F0 extends F to T by the g-orthogonal
projection onto L and vol_L is the unit g-volume of L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
import scipy.linalg
import sympy

from . import linalg
from .clifford import CliffordElement, J_inverse, orthonormal_frame
from .errors import DegenerateSubspace, DimensionMismatch, NotPure, NotSkew
from .exterior import (
    Form,
    GenVector,
    exp_two_form,
    hat,
    hodge_star,
    interior,
    wedge,
    wedge_all,
    wedge_covector,
)
from .genmetric import GeneralisedMetric, qnorm


@dataclass(frozen=True, eq=False)
class IsotropicPair:
    L: np.ndarray
    F: np.ndarray
    orientation: int = 1

    def __post_init__(self):
        L = np.asarray(self.L)
        if L.ndim == 1:
            L = L.reshape(-1, 1)
        exact = linalg.is_exact(L) or linalg.is_exact(np.asarray(self.F))
        L = linalg.as_exact(L) if exact else np.asarray(L, dtype=float)
        k = L.shape[1]
        F = np.asarray(self.F) if np.size(self.F) else np.zeros((k, k))
        F = linalg.as_exact(F) if exact else np.asarray(F, dtype=float)
        if F.shape != (k, k):
            raise DimensionMismatch(f"F must be {k}x{k} for a {k}-dimensional L")
        if not linalg.is_skew(F, tol=1e-10):
            raise NotSkew("F must be skew in the L basis")
        if linalg.matrix_rank(L) != k:
            raise DegenerateSubspace("the columns of L are linearly dependent")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        L.flags.writeable = False
        F.flags.writeable = False
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "F", F)

    @property
    def n(self) -> int:
        return self.L.shape[0]

    @property
    def k(self) -> int:
        return self.L.shape[1]

    @property
    def exact(self) -> bool:
        return linalg.is_exact(self.L)

    def flipped(self) -> "IsotropicPair":
        return IsotropicPair(self.L, self.F, -self.orientation)

    def to_float(self) -> "IsotropicPair":
        return IsotropicPair(linalg.to_float(self.L), linalg.to_float(self.F), self.orientation)

    def with_F(self, F) -> "IsotropicPair":
        return IsotropicPair(self.L, F, self.orientation)

    def equivalent(self, other: "IsotropicPair", tol: float = 1e-9) -> bool:
        """Same oriented subspace carrying the same 2-form, whatever the bases."""
        if other.n != self.n or other.k != self.k:
            return False
        if self.k == 0:
            return self.orientation == other.orientation
        exact = self.exact and other.exact
        A = self.L if exact else linalg.to_float(self.L)
        Bm = other.L if exact else linalg.to_float(other.L)
        # other.L = self.L @ T for a change of basis T
        if exact:
            T = linalg.solve(A.T @ A, A.T @ Bm)
            if np.any(A @ T != Bm):
                return False
        else:
            T = np.linalg.lstsq(A, Bm, rcond=None)[0]
            if np.linalg.norm(A @ T - Bm) > tol * max(1.0, np.linalg.norm(Bm)):
                return False
        det = linalg.det(T)
        same_orientation = (det > 0) == (self.orientation == other.orientation)
        F_self = self.F if exact else linalg.to_float(self.F)
        F_other = other.F if exact else linalg.to_float(other.F)
        moved = T.T @ F_self @ T
        if exact:
            return bool(same_orientation and np.all(moved == F_other))
        return bool(same_orientation and np.allclose(moved, F_other, atol=tol, rtol=0))

    def dual_basis(self, g=None) -> np.ndarray:
        """Rows l^a with l^a(L_b) = delta_ab that vanish on the g-orthogonal complement of L."""
        g = _metric(g, self.n, self.exact)
        Lg = self.L.T @ g
        return linalg.solve(Lg @ self.L, Lg)

    def orthonormal_basis(self, g=None) -> np.ndarray:
        """g-orthonormal basis of L with the orientation of the pair."""
        g = linalg.to_float(_metric(g, self.n, False))
        L = linalg.to_float(self.L)
        if self.k == 0:
            return L
        # Gram-Schmidt keeps the orientation of the given basis
        R = np.linalg.cholesky(L.T @ g @ L).T
        U = L @ np.linalg.inv(R)
        if self.orientation < 0:
            U = U.copy()
            U[:, 0] = -U[:, 0]
        return U

    def F_matrix(self, g=None) -> np.ndarray:
        """The canonical extension F0 as an n x n skew matrix."""
        D = self.dual_basis(g)
        return D.T @ self.F @ D

    def F_matrix_orthonormal(self, g=None) -> np.ndarray:
        """F in the orthonormal basis returned by orthonormal_basis."""
        U = self.orthonormal_basis(g)
        D = linalg.to_float(self.dual_basis(g))
        C = D @ U
        return C.T @ linalg.to_float(self.F) @ C

    def volume(self, g=None) -> Form:
        """Unit volume form of L, as a form on T vanishing on the complement."""
        U = self.orthonormal_basis(g)
        gm = linalg.to_float(_metric(g, self.n, False))
        if self.k == 0:
            return Form.scalar(self.n, float(self.orientation))
        covectors = [Form.one_form(gm @ U[:, a]) for a in range(self.k)]
        out = wedge_all(*covectors)
        return out


def _metric(g, n: int, exact: bool):
    if g is None:
        eye = np.eye(n, dtype=int)
        return linalg.as_exact(eye) if exact else np.eye(n)
    g = np.asarray(g)
    if exact and not linalg.is_exact(g):
        return linalg.as_exact(g)
    return g


def _g_of(G) -> np.ndarray | None:
    if isinstance(G, GeneralisedMetric):
        return G.g
    return G


def _star_metric(g):
    if g is None:
        return None
    g = np.asarray(g)
    if np.all(g == np.eye(g.shape[0])):
        return None
    return linalg.to_float(g)


def tau_from_pair(p: IsotropicPair, g=None) -> Form:
    """The spinor exp(F0) ^ hat(star(vol_L))."""
    g = _g_of(g)
    if p.exact and _star_metric(g) is None:
        return _tau_exact_flat(p)
    vol = p.volume(g)
    base = hat(hodge_star(_star_metric(g), vol))
    if p.k < 2 or not np.any(p.F != 0):
        return base
    F0 = Form.two_form(linalg.to_float(p.F_matrix(g)))
    return wedge(exp_two_form(F0), base)


def tau_direction(p: IsotropicPair, g=None) -> Form:
    """A positive multiple of tau_from_pair with rational arithmetic when inputs are rational.

    The unit volume of L and the Hodge star both carry square roots; dropping
    these positive factors keeps the half-line and the annihilator intact.
    """
    g = _g_of(g)
    if not p.exact:
        return tau_from_pair(p, g)
    gm = _metric(g, p.n, True)
    D = p.dual_basis(gm)
    # raising the indices of the wedge of the covectors g L_a gives the wedge of the L_a
    raised = wedge_all(*[Form.one_form(p.L[:, a]) for a in range(p.k)]) if p.k else Form.scalar(p.n, 1, exact=True)
    if p.orientation < 0:
        raised = -raised
    base = hat(hodge_star(None, raised))
    if p.k < 2 or not np.any(p.F != 0):
        return base
    F0 = Form.two_form(D.T @ p.F @ D)
    return wedge(exp_two_form(F0), base)


def _tau_exact_flat(p: IsotropicPair) -> Form:
    # With g = Id and a rational basis the unit volume needs sqrt(det(L^T L)),
    # which is rational only in special cases; fall back to floats otherwise.
    gram = linalg.det(p.L.T @ p.L) if p.k else Fraction(1)
    root = _rational_sqrt(gram)
    if root is None:
        return tau_from_pair(p.to_float(), None)
    return tau_direction(p, None) / root


def _rational_sqrt(q: Fraction) -> Fraction | None:
    q = Fraction(q)
    num, den = _isqrt_exact(q.numerator), _isqrt_exact(q.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _isqrt_exact(x: int) -> int | None:
    r = math.isqrt(x)
    return r if r * r == x else None


# -------------------------------------------------------------- annihilator

def action_matrix(tau: Form) -> np.ndarray:
    """2^n x 2n matrix of v -> v . tau on the basis e_1..e_n, e^1..e^n."""
    n = tau.dim
    cols = []
    eye = np.eye(n, dtype=int)
    for i in range(n):
        cols.append((-interior(eye[i], tau)).coeffs)
    for i in range(n):
        cols.append(wedge_covector(eye[i], tau).coeffs)
    return np.array(cols, dtype=tau.coeffs.dtype).T


def annihilator(tau: Form, tol: float = 1e-9) -> np.ndarray:
    """Columns spanning {v in T + T* : v . tau = 0}."""
    if tau.is_zero():
        raise NotPure("the zero spinor has no annihilator")
    A = action_matrix(tau)
    if not tau.exact:
        scale = max(1.0, float(np.max(np.abs(A))))
        return linalg.null_space(A / scale, tol)
    return linalg.null_space(A)


def is_isotropic(W: np.ndarray, tol: float = 1e-9) -> bool:
    n = W.shape[0] // 2
    gram = W[:n].T @ W[n:]
    gram = gram + gram.T
    if linalg.is_exact(gram):
        return bool(np.all(gram == 0))
    return bool(np.max(np.abs(gram), initial=0.0) <= tol)


@dataclass(frozen=True, eq=False)
class PureSpinor:
    tau: Form
    tol: float = 1e-9

    @cached_property
    def annihilator(self) -> np.ndarray:
        return annihilator(self.tau, self.tol)

    @property
    def is_pure(self) -> bool:
        return self.annihilator.shape[1] == self.tau.dim

    @cached_property
    def rank(self) -> int:
        if not self.is_pure:
            raise NotPure(f"annihilator has dimension {self.annihilator.shape[1]}, expected {self.tau.dim}")
        n = self.tau.dim
        return linalg.matrix_rank(self.annihilator[:n], self.tol)


def is_pure(tau: Form, tol: float = 1e-9) -> bool:
    return PureSpinor(tau, tol).is_pure


def rank(tau, tol: float = 1e-9) -> int:
    """n minus the dimension of the covector part of the annihilator."""
    spinor = tau if isinstance(tau, PureSpinor) else PureSpinor(tau, tol)
    return spinor.rank


def pair_annihilator(p: IsotropicPair, g=None) -> np.ndarray:
    """Columns spanning {X + X⌟F0 + eta : X in L, eta vanishing on L}."""
    g = _metric(_g_of(g), p.n, p.exact)
    F0 = p.F_matrix(g)
    # X⌟F0 has matrix F0^T
    top_L = np.vstack([p.L, F0.T @ p.L])
    annihilating = linalg.null_space(p.L.T) if p.k else (
        linalg.as_exact(np.eye(p.n, dtype=int)) if p.exact else np.eye(p.n))
    zeros = np.zeros_like(annihilating) if not p.exact else linalg.as_exact(np.zeros(annihilating.shape, dtype=int))
    bottom = np.vstack([zeros, annihilating])
    return np.hstack([top_L, bottom])


def subspace_to_pair(W: np.ndarray, tol: float = 1e-9, canonical: bool = True) -> IsotropicPair:
    """Read (L, F) off a maximal isotropic subspace, orientation +1.

    With ``canonical`` the L basis is the reduced column-echelon basis, so equal
    subspaces give identical pairs.
    """
    n = W.shape[0] // 2
    if W.shape[1] != n:
        raise NotPure(f"subspace has dimension {W.shape[1]}, expected {n}")
    A, C = W[:n], W[n:]
    exact = linalg.is_exact(W)
    if canonical:
        L = linalg.column_echelon(A, tol)
    else:
        L = _pivot_columns(A, tol)
    k = L.shape[1]
    if k == 0:
        return IsotropicPair(L if L.size else np.zeros((n, 0), dtype=object if exact else float),
                             np.zeros((0, 0), dtype=object if exact else float))
    # each L column is A y for some y; its covector partner is C y
    if exact:
        y = _exact_least_squares(A, L)
    else:
        y = np.linalg.lstsq(A, L, rcond=None)[0]
    xi = C @ y
    F = xi.T @ L  # F(l_a, l_b) = xi_a(l_b)
    F = (F - F.T) / 2
    return IsotropicPair(L, F, 1)


def _exact_least_squares(A: np.ndarray, targets: np.ndarray) -> np.ndarray:
    Am = linalg._to_sympy(A)
    cols = []
    for j in range(targets.shape[1]):
        b = linalg._to_sympy(targets[:, j:j + 1])
        sol, params = Am.gauss_jordan_solve(b)
        sol = sol.subs({t: 0 for t in params})
        cols.append(sol)
    return linalg._from_sympy(sympy.Matrix.hstack(*cols))


def _pivot_columns(A: np.ndarray, tol: float) -> np.ndarray:
    r = linalg.matrix_rank(A, tol)
    if r == 0:
        return np.zeros((A.shape[0], 0))
    _, _, piv = scipy.linalg.qr(linalg.to_float(A), pivoting=True)
    return A[:, np.sort(piv[:r])]


def orient_like(p: IsotropicPair, tau: Form, g=None) -> tuple[float, IsotropicPair]:
    """Choose the orientation of p so that tau = c tau_p with c > 0; returns (c, pair)."""
    ref = tau_from_pair(p.to_float(), _star_metric_or_float(g))
    t = tau.to_float()
    c = _ratio(t, ref)
    if c < 0:
        return -c, p.flipped()
    return c, p


def _star_metric_or_float(g):
    g = _g_of(g)
    return None if g is None else linalg.to_float(g)


def _ratio(a: Form, b: Form) -> float:
    ca, cb = a.coeffs, b.coeffs
    denom = np.vdot(cb, cb)
    c = np.vdot(cb, ca) / denom
    if np.iscomplexobj(c):
        c = c.real
    return float(c)


def factorize(tau: Form, g=None, tol: float = 1e-9) -> tuple[float, IsotropicPair]:
    """Write tau = c * tau_from_pair(p) with c > 0."""
    if tau.is_zero():
        raise NotPure("the zero spinor is not pure")
    W = annihilator(tau, tol)
    n = tau.dim
    if W.shape[1] != n:
        raise NotPure(f"annihilator has dimension {W.shape[1]}, expected {n}")
    p = subspace_to_pair(W, tol, canonical=True)
    g = _g_of(g)
    gm = _metric(g, n, False) if not p.exact else _metric(g, n, True)
    c, p = orient_like(p, tau, gm)
    residual = (tau.to_float() - tau_from_pair(p.to_float(), _star_metric_or_float(g)) * c).norm()
    if residual > 1e-6 * max(1.0, tau.norm()):
        raise NotPure(f"spinor is not of the form c exp(F) vol (residual {residual:.3g})")
    return c, p


# ------------------------------------------------------------ gluing matrix

def gluing_matrix(G: GeneralisedMetric, p: IsotropicPair) -> np.ndarray:
    """Matrix of the g-orthogonal map R with W = {Y + P(Y)}, P: V+ -> V-, read through the lifts.

    W meets V- trivially, so every w in W splits uniquely as
    lift_plus(Y) + lift_minus(Z); R sends Y to Z.
    """
    G = G.to_float() if G.exact else G
    p = p.to_float()
    W = pair_annihilator(p, G.g)
    n = G.dim
    X, xi = W[:n], W[n:]
    Bm = G.B.T
    diff = np.linalg.solve(G.g, xi - Bm @ X)
    Y = (X + diff) / 2
    Z = (X - diff) / 2
    return Z @ np.linalg.inv(Y)


def gluing_matrix_block(G: GeneralisedMetric, p: IsotropicPair) -> tuple[np.ndarray, np.ndarray]:
    """Block-formula route: returns (R, basis) with R written in the adapted orthonormal basis.

    basis has the orthonormal basis of L first and of its orthogonal
    complement after; the L block is (j*(g-B)+F)(j*(g+B)-F)^{-1} in bilinear
    matrices, the complement block is -Id.
    """
    G = G.to_float() if G.exact else G
    p = p.to_float()
    n, k = p.n, p.k
    U = p.orthonormal_basis(G.g)
    complement = _orthonormal_complement(U, G.g)
    basis = np.hstack([U, complement])
    R = -np.eye(n)
    if k:
        Bl = U.T @ G.B @ U
        F = p.F_matrix_orthonormal(G.g)
        eye = np.eye(k)
        R[:k, :k] = (eye - Bl + F) @ np.linalg.inv(eye + Bl - F)
    return R, basis


def _orthonormal_complement(U: np.ndarray, g: np.ndarray) -> np.ndarray:
    n, k = U.shape
    if k == n:
        return np.zeros((n, 0))
    # complement = kernel of U^T g, made g-orthonormal
    K = scipy.linalg.null_space(U.T @ g) if k else np.eye(n)
    R = np.linalg.cholesky(K.T @ g @ K).T
    return K @ np.linalg.inv(R)


def pin_lift(G: GeneralisedMetric, p: IsotropicPair) -> CliffordElement:
    """Clifford element of the normalised untwisted spinor exp(-B) ^ tau / |tau|."""
    G = G.to_float() if G.exact else G
    p = p.to_float()
    tau = tau_from_pair(p, G.g)
    norm = qnorm(G, tau)
    untwisted = wedge(exp_two_form(-Form.two_form(G.B)), tau) / norm
    return J_inverse(untwisted, G.g)


# ----------------------------------------------------------------- sampling

def random_pair(rng: np.random.Generator, n: int, k: int | None = None, f_scale: float = 1.0,
                containing=None) -> IsotropicPair:
    """Random pair; ``containing`` forces the vector into L."""
    if k is None:
        k = int(rng.integers(0, n + 1))
    L = rng.standard_normal((n, k))
    if containing is not None and k:
        L[:, 0] = containing
    S = rng.standard_normal((k, k)) * f_scale
    return IsotropicPair(L, (S - S.T) / 2, int(rng.choice([1, -1])))


def coordinate_pair(n: int, indices, F=None, orientation: int = 1) -> IsotropicPair:
    indices = list(indices)
    L = np.zeros((n, len(indices)))
    for a, i in enumerate(indices):
        L[i - 1, a] = 1.0
    k = len(indices)
    return IsotropicPair(L, np.zeros((k, k)) if F is None else F, orientation)
