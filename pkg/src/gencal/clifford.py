"""Clifford algebra Cliff(T, g) of a positive definite metric.

Elements are stored in a g-orthonormal frame f_1..f_n with f_i f_i = +1, so
the product of basis blades is a pure bitmask sign and the isomorphism with
forms (J) is the identity on coefficients in that frame.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError, DegreeError, DimensionMismatch, NotInPin
from .exterior import (
    Form,
    _check_spd,
    _signs_for,
    degrees,
    induced_map,
    pair_signs,
)


def orthonormal_frame(g) -> np.ndarray:
    """Columns form a g-orthonormal, positively oriented frame (via Cholesky)."""
    g = _check_spd(g)
    chol = np.linalg.cholesky(g)
    return np.linalg.inv(chol).T


class CliffordElement:
    __slots__ = ("dim", "coeffs", "frame")

    def __init__(self, dim: int, coeffs, frame=None):
        arr = np.asarray(coeffs)
        if arr.dtype != object:
            arr = arr.astype(np.complex128 if np.iscomplexobj(arr) else np.float64)
        if arr.shape != (1 << dim,):
            raise ValueError(f"expected {1 << dim} coefficients")
        arr.flags.writeable = False
        frame = np.eye(dim) if frame is None else np.asarray(frame, dtype=float)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "frame", frame)

    def __setattr__(self, name, value):
        raise AttributeError("CliffordElement is immutable")

    @classmethod
    def scalar(cls, dim: int, value=1.0, frame=None) -> "CliffordElement":
        arr = np.zeros(1 << dim)
        arr[0] = value
        return cls(dim, arr, frame)

    @classmethod
    def blade(cls, dim: int, indices, coeff=1.0, frame=None) -> "CliffordElement":
        """coeff * f_{i1} f_{i2} ... in the given order."""
        out = cls.scalar(dim, coeff, frame)
        for i in indices:
            out = out * cls.vector(np.eye(dim)[i - 1], frame)
        return out

    @classmethod
    def vector(cls, components, frame=None) -> "CliffordElement":
        """Vector with the given components in the orthonormal frame."""
        components = np.asarray(components)
        n = components.shape[0]
        arr = np.zeros(1 << n, dtype=np.result_type(components.dtype, np.float64))
        for i in range(n):
            arr[1 << i] = components[i]
        return cls(n, arr, frame)

    def _same(self, other: "CliffordElement") -> None:
        if self.dim != other.dim:
            raise DimensionMismatch("Clifford elements of different dimensions")
        if not np.allclose(self.frame, other.frame):
            raise DimensionMismatch("Clifford elements expressed in different frames")

    def _new(self, coeffs) -> "CliffordElement":
        return CliffordElement(self.dim, coeffs, self.frame)

    def __add__(self, other):
        self._same(other)
        return self._new(self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._same(other)
        return self._new(self.coeffs - other.coeffs)

    def __neg__(self):
        return self._new(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, CliffordElement):
            return cliff_product(self, other)
        return self._new(self.coeffs * other)

    def __rmul__(self, s):
        return self._new(self.coeffs * s)

    def __truediv__(self, s):
        return self._new(self.coeffs / s)

    def grade(self, p: int) -> "CliffordElement":
        arr = self.coeffs.copy()
        arr[degrees(self.dim) != p] = 0
        return self._new(arr)

    def scalar_part(self):
        return self.coeffs[0]

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def allclose(self, other: "CliffordElement", tol: float = 1e-9) -> bool:
        self._same(other)
        return bool(np.all(np.abs(self.coeffs - other.coeffs) <= tol))

    def __repr__(self) -> str:
        return f"CliffordElement({self.dim}, {J(self)})"


def cliff_product(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    a._same(b)
    n = a.dim
    ia = np.flatnonzero(a.coeffs != 0)
    ib = np.flatnonzero(b.coeffs != 0)
    dtype = np.result_type(a.coeffs.dtype, b.coeffs.dtype)
    out = np.zeros(1 << n, dtype=dtype)
    if ia.size and ib.size:
        signs = _signs_for(dtype, pair_signs(n, ia, ib))
        prod = np.multiply.outer(a.coeffs[ia], b.coeffs[ib]) * signs
        np.add.at(out, (ia[:, None] ^ ib[None, :]).ravel(), prod.ravel())
    return a._new(out)


def _grade_signs(n: int, kind: str) -> np.ndarray:
    p = degrees(n)
    if kind == "reverse":
        return 1 - 2 * ((p * (p - 1) // 2) & 1)
    return 1 - 2 * (p & 1)


def reverse(a: CliffordElement) -> CliffordElement:
    return a._new(a.coeffs * _grade_signs(a.dim, "reverse"))


def grade_involution(a: CliffordElement) -> CliffordElement:
    return a._new(a.coeffs * _grade_signs(a.dim, "alpha"))


def inverse(a: CliffordElement, tol: float = 1e-9) -> CliffordElement:
    """Inverse of a versor, a^{-1} = reverse(a) / (a reverse(a))."""
    ar = reverse(a)
    norm2 = cliff_product(a, ar)
    s = norm2.scalar_part()
    rest = norm2.coeffs.copy()
    rest[0] = 0
    if abs(s) <= tol or np.max(np.abs(rest)) > tol * max(1.0, abs(s)):
        raise NotInPin("element is not an invertible versor")
    return ar / s


def cliff_exp(a: CliffordElement, tol: float = 1e-16, max_terms: int = 200) -> CliffordElement:
    """Exponential by scaling and squaring around a Taylor series."""
    if np.any(a.coeffs[degrees(a.dim) % 2 == 1] != 0):
        raise DegreeError("cliff_exp expects an even element")
    scale = max(a.norm(), 1e-300)
    squarings = max(0, int(np.ceil(np.log2(scale))) + 1)
    x = a / (2 ** squarings)
    term = CliffordElement.scalar(a.dim, 1.0, a.frame)
    total = term
    for k in range(1, max_terms):
        term = cliff_product(term, x) / k
        total = total + term
        if term.norm() <= tol * total.norm():
            break
    else:
        raise ConvergenceError("exponential series did not converge")
    for _ in range(squarings):
        total = cliff_product(total, total)
    return total


def volume_element(n: int, frame=None) -> CliffordElement:
    return CliffordElement.blade(n, range(1, n + 1), 1.0, frame)


def pin_project(a: CliffordElement, tol: float = 1e-9) -> np.ndarray:
    """Matrix of x -> a x alpha(a)^{-1}, in the coordinates of the base space.

    The result R satisfies R^T g R = g for the metric whose orthonormal frame
    the element is expressed in.
    """
    n = a.dim
    a_inv = grade_involution(inverse(a, tol))
    cols = []
    for i in range(n):
        x = CliffordElement.vector(np.eye(n)[i], a.frame)
        y = cliff_product(cliff_product(a, x), a_inv)
        leak = y.coeffs.copy()
        leak[[1 << j for j in range(n)]] = 0
        if np.max(np.abs(leak)) > tol:
            raise NotInPin("twisted adjoint action leaves the vectors")
        cols.append(y.coeffs[[1 << j for j in range(n)]])
    R_frame = np.array(cols).T
    if np.iscomplexobj(R_frame):
        if np.max(np.abs(R_frame.imag)) > tol:
            raise NotInPin("twisted adjoint action is not real")
        R_frame = R_frame.real
    P = a.frame
    return P @ R_frame @ np.linalg.inv(P)


def J(a: CliffordElement) -> Form:
    """The form with the same coefficients, rewritten in the standard coframe."""
    frame_form = Form(a.dim, a.coeffs)
    if np.allclose(a.frame, np.eye(a.dim)):
        return frame_form
    # f^j = sum_i (P^{-1})[j, i] e^i
    return induced_map(np.linalg.inv(a.frame).T, frame_form)


def J_inverse(rho: Form, g=None) -> CliffordElement:
    """Clifford element whose frame coefficients are those of rho."""
    if g is None:
        return CliffordElement(rho.dim, rho.to_float().coeffs)
    P = orthonormal_frame(g)
    # e^i = sum_j P[i, j] f^j
    coeffs = induced_map(P.T, rho).coeffs
    return CliffordElement(rho.dim, coeffs, P)


def frame_vector(X, frame) -> np.ndarray:
    """Components of the vector X in the orthonormal frame."""
    return np.linalg.solve(np.asarray(frame), np.asarray(X, dtype=float))

