"""Mixed-degree exterior algebra over R^n with the Spin(n,n) action on forms.

A basis monomial e^{i1...ip} is stored as the bitmask with bits i1-1, ..., ip-1
set, so a form of dimension n is a dense array of 2**n coefficients.  The
array dtype selects the scalar field: float64, complex128, or object arrays of
``fractions.Fraction`` for exact rational arithmetic.

Sign convention: e^A ^ e^B = (-1)^t e^{A|B} where t counts the pairs
(i in A, j in B) with i > j.  Every other module inherits it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import DegreeError, DimensionMismatch, NotPositiveDefinite

MAX_DIM = 12
_TABLE_DIM = 10  # full pair-sign tables are cached up to this dimension


# ---------------------------------------------------------------- sign tables

@lru_cache(maxsize=None)
def degrees(n: int) -> np.ndarray:
    masks = np.arange(1 << n)
    deg = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        deg += (masks >> i) & 1
    deg.flags.writeable = False
    return deg


@lru_cache(maxsize=None)
def _lower_signs(n: int) -> np.ndarray:
    """Row i holds (-1)^(number of set bits below bit i) for every mask."""
    masks = np.arange(1 << n)
    out = np.empty((n, 1 << n), dtype=np.int64)
    for i in range(n):
        below = masks & ((1 << i) - 1)
        out[i] = 1 - 2 * (degrees(n)[below] & 1)
    out.flags.writeable = False
    return out


def _reorder_signs(n: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise sign of sorting e^a e^b, ignoring overlaps."""
    deg = degrees(n)
    parity = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
    for j in range(n):
        parity ^= ((b >> j) & 1) & (deg[a >> (j + 1)] & 1)
    return 1 - 2 * parity


@lru_cache(maxsize=None)
def _sign_table(n: int) -> np.ndarray:
    masks = np.arange(1 << n)
    table = _reorder_signs(n, masks[:, None], masks[None, :]).astype(np.int8)
    table.flags.writeable = False
    return table


def pair_signs(n: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Outer table of reorder signs for index arrays a and b."""
    if n <= _TABLE_DIM:
        return _sign_table(n)[np.ix_(a, b)].astype(np.int64)
    return _reorder_signs(n, a[:, None], b[None, :])


@lru_cache(maxsize=None)
def complement_signs(n: int) -> np.ndarray:
    """Sign s_A with e^A ^ e^{A^c} = s_A e^{1...n}."""
    masks = np.arange(1 << n)
    out = _reorder_signs(n, masks, ((1 << n) - 1) ^ masks)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=None)
def _degree_signs(n: int, kind: str) -> np.ndarray:
    p = degrees(n)
    if kind == "hat":
        out = 1 - 2 * ((p * (p + 1) // 2) & 1)
    else:
        out = 1 - 2 * (p & 1)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=None)
def masks_of_degree(n: int, p: int) -> np.ndarray:
    """Masks of degree p, ordered lexicographically by their index tuples."""
    out = np.array([sum(1 << i for i in c) for c in combinations(range(n), p)], dtype=np.int64)
    out.flags.writeable = False
    return out


# ------------------------------------------------------------------- scalars

def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot use {x!r} as an exact rational")


def _coerce(coeffs: np.ndarray) -> np.ndarray:
    if coeffs.dtype == object:
        return np.array([_as_fraction(c) for c in coeffs], dtype=object)
    if np.iscomplexobj(coeffs):
        return coeffs.astype(np.complex128)
    return coeffs.astype(np.float64)


def _signs_for(dtype, signs: np.ndarray) -> np.ndarray:
    return signs.astype(object) if dtype == object else signs


def mask_of(indices) -> int:
    mask = 0
    for i in indices:
        if i < 1:
            raise ValueError(f"form indices start at 1, got {i}")
        bit = 1 << (i - 1)
        if mask & bit:
            raise ValueError(f"repeated index {i}")
        mask |= bit
    return mask


def indices_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


# ---------------------------------------------------------------------- Form

class Form:
    """An element of the exterior algebra of (R^n)*.

    Forms are immutable; arithmetic returns new instances.  ``a ^ b`` is the
    wedge product and ``s * a`` scales by a scalar.
    """

    __slots__ = ("dim", "coeffs")
    __array_priority__ = 100

    def __init__(self, dim: int, coeffs):
        if not 0 <= dim <= MAX_DIM:
            raise ValueError(f"dimension must lie in 0..{MAX_DIM}, got {dim}")
        arr = _coerce(np.asarray(coeffs).reshape(-1))
        if arr.shape != (1 << dim,):
            raise ValueError(f"expected {1 << dim} coefficients, got {arr.shape[0]}")
        arr.flags.writeable = False
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Form is immutable")

    # construction ---------------------------------------------------------

    @classmethod
    def zero(cls, dim: int, exact: bool = False, complex: bool = False) -> "Form":
        if exact:
            return cls(dim, np.full(1 << dim, Fraction(0), dtype=object))
        return cls(dim, np.zeros(1 << dim, dtype=np.complex128 if complex else np.float64))

    @classmethod
    def scalar(cls, dim: int, value=1, exact: bool = False) -> "Form":
        return cls.monomial(dim, (), value, exact=exact)

    @classmethod
    def monomial(cls, dim: int, indices, coeff=1, exact: bool = False) -> "Form":
        """coeff * e^{i1...ip}, with the indices put in ascending order."""
        indices = tuple(indices)
        order = sorted(range(len(indices)), key=lambda k: indices[k])
        inversions = sum(1 for a in range(len(order)) for b in range(a + 1, len(order)) if order[a] > order[b])
        mask = mask_of(indices)
        if mask >= 1 << dim:
            raise ValueError(f"index out of range for dimension {dim}: {indices}")
        if exact:
            arr = np.full(1 << dim, Fraction(0), dtype=object)
            arr[mask] = _as_fraction(coeff) * (-1) ** inversions
        else:
            arr = np.zeros(1 << dim, dtype=np.complex128 if isinstance(coeff, complex) else np.float64)
            arr[mask] = coeff * (-1) ** inversions
        return cls(dim, arr)

    @classmethod
    def from_terms(cls, dim: int, terms: dict, exact: bool = False) -> "Form":
        """Build from a mapping {index tuple: coefficient}."""
        out = cls.zero(dim, exact=exact, complex=any(isinstance(c, complex) for c in terms.values()))
        for idx, c in terms.items():
            out = out + cls.monomial(dim, idx, c, exact=exact)
        return out

    @classmethod
    def one_form(cls, covec) -> "Form":
        covec = np.asarray(covec)
        n = covec.shape[0]
        exact = covec.dtype == object
        arr = np.full(1 << n, Fraction(0), dtype=object) if exact else np.zeros(1 << n, dtype=covec.dtype if np.iscomplexobj(covec) else np.float64)
        for i in range(n):
            arr[1 << i] = covec[i]
        return cls(n, arr)

    @classmethod
    def two_form(cls, mat) -> "Form":
        """The 2-form sum_{i<j} mat[i,j] e^{ij} (mat is read as a skew matrix)."""
        mat = np.asarray(mat)
        n = mat.shape[0]
        exact = mat.dtype == object
        out = np.full(1 << n, Fraction(0), dtype=object) if exact else np.zeros(1 << n, dtype=np.complex128 if np.iscomplexobj(mat) else np.float64)
        for i in range(n):
            for j in range(i + 1, n):
                out[(1 << i) | (1 << j)] = mat[i, j]
        return cls(n, out)

    # conversions ----------------------------------------------------------

    @property
    def exact(self) -> bool:
        return self.coeffs.dtype == object

    @property
    def is_complex(self) -> bool:
        return self.coeffs.dtype == np.complex128

    def to_exact(self) -> "Form":
        if self.exact:
            return self
        if self.is_complex:
            raise TypeError("exact mode does not support complex coefficients")
        return Form(self.dim, np.array([Fraction(float(c)) for c in self.coeffs], dtype=object))

    def to_float(self) -> "Form":
        if self.exact:
            return Form(self.dim, np.array([float(c) for c in self.coeffs]))
        return self

    def as_complex(self) -> "Form":
        return Form(self.dim, self.to_float().coeffs.astype(np.complex128))

    @property
    def real(self) -> "Form":
        return self if self.exact else Form(self.dim, self.coeffs.real.copy())

    @property
    def imag(self) -> "Form":
        if self.exact:
            return Form.zero(self.dim, exact=True)
        return Form(self.dim, self.coeffs.imag.copy())

    def conj(self) -> "Form":
        return self if self.exact else Form(self.dim, self.coeffs.conj())

    def two_form_matrix(self) -> np.ndarray:
        """Skew matrix M with M[i,j] the coefficient of e^{ij} for i<j."""
        n = self.dim
        dtype = object if self.exact else self.coeffs.dtype
        mat = np.zeros((n, n), dtype=dtype)
        if self.exact:
            mat[:] = Fraction(0)
        for i in range(n):
            for j in range(i + 1, n):
                c = self.coeffs[(1 << i) | (1 << j)]
                mat[i, j] = c
                mat[j, i] = -c
        return mat

    # inspection -----------------------------------------------------------

    def __getitem__(self, indices) -> object:
        if isinstance(indices, int):
            indices = (indices,)
        return self.coeffs[mask_of(indices)]

    def terms(self):
        """Nonzero (indices, coefficient) pairs ordered by degree then indices."""
        nz = [int(m) for m in np.flatnonzero(self.coeffs != 0)]
        nz.sort(key=lambda m: (degrees(self.dim)[m], indices_of(m)))
        return [(indices_of(m), self.coeffs[m]) for m in nz]

    def part(self, p: int) -> "Form":
        keep = degrees(self.dim) == p
        return self._masked(keep)

    def even(self) -> "Form":
        return self._masked(degrees(self.dim) % 2 == 0)

    def odd(self) -> "Form":
        return self._masked(degrees(self.dim) % 2 == 1)

    def _masked(self, keep: np.ndarray) -> "Form":
        arr = self.coeffs.copy()
        arr[~keep] = Fraction(0) if self.exact else 0
        return Form(self.dim, arr)

    def support(self, tol: float = 0.0) -> set[int]:
        """Degrees carrying a coefficient larger than tol in absolute value."""
        mags = np.abs(self.coeffs.astype(complex) if self.exact else self.coeffs)
        return {int(p) for p in np.unique(degrees(self.dim)[mags > tol])}

    @property
    def parity(self) -> str:
        """'even', 'odd', 'mixed' or 'zero'."""
        return parity_of(self)

    def top(self):
        return self.coeffs[-1]

    def norm(self) -> float:
        """Euclidean norm of the coefficient vector."""
        return float(np.sqrt(np.sum(np.abs(self.to_float().coeffs) ** 2)))

    def is_zero(self, tol: float = 0.0) -> bool:
        if self.exact:
            return not np.any(self.coeffs != 0)
        return bool(np.all(np.abs(self.coeffs) <= tol))

    def allclose(self, other: "Form", tol: float = 1e-9) -> bool:
        _check_dims(self, other)
        if self.exact and other.exact:
            return bool(np.all(self.coeffs == other.coeffs))
        diff = self.to_float().coeffs - other.to_float().coeffs
        return bool(np.all(np.abs(diff) <= tol))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return self.dim == other.dim and self.allclose(other)

    __hash__ = None

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        _check_dims(self, other)
        return Form(self.dim, _combine(self.coeffs, other.coeffs, np.add))

    def __sub__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        _check_dims(self, other)
        return Form(self.dim, _combine(self.coeffs, other.coeffs, np.subtract))

    def __neg__(self):
        return Form(self.dim, -self.coeffs)

    def __mul__(self, s):
        if isinstance(s, Form):
            return NotImplemented
        if self.exact and isinstance(s, (int, Fraction)):
            return Form(self.dim, self.coeffs * Fraction(s))
        return Form(self.dim, self.to_float().coeffs * s)

    __rmul__ = __mul__

    def __truediv__(self, s):
        if self.exact and isinstance(s, (int, Fraction)):
            return Form(self.dim, self.coeffs / Fraction(s))
        return Form(self.dim, self.to_float().coeffs / s)

    def __xor__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return wedge(self, other)

    def __repr__(self) -> str:
        return f"Form({self.dim}, {format_form(self)!r})"

    def __str__(self) -> str:
        return format_form(self)


def _combine(a: np.ndarray, b: np.ndarray, op) -> np.ndarray:
    if (a.dtype == object) != (b.dtype == object):
        a = a.astype(float) if a.dtype == object else a
        b = b.astype(float) if b.dtype == object else b
    return op(a, b)


def _check_dims(*forms: Form) -> None:
    dims = {f.dim for f in forms}
    if len(dims) > 1:
        raise DimensionMismatch(f"forms of different dimensions: {sorted(dims)}")


def parity_of(a: Form) -> str:
    nz = np.flatnonzero(a.coeffs != 0)
    if nz.size == 0:
        return "zero"
    pars = set((degrees(a.dim)[nz] % 2).tolist())
    if pars == {0}:
        return "even"
    if pars == {1}:
        return "odd"
    return "mixed"


def _zeros_like(a: Form, dtype=None) -> np.ndarray:
    dtype = dtype or a.coeffs.dtype
    if dtype == object:
        return np.full(a.coeffs.shape, Fraction(0), dtype=object)
    return np.zeros(a.coeffs.shape, dtype=dtype)


def _result_dtype(*arrays):
    if any(x.dtype == object for x in arrays):
        return object
    if any(np.iscomplexobj(x) for x in arrays):
        return np.complex128
    return np.float64


# ---------------------------------------------------------------- operations

def wedge(a: Form, b: Form) -> Form:
    _check_dims(a, b)
    n = a.dim
    ca, cb = a.coeffs, b.coeffs
    if (ca.dtype == object) != (cb.dtype == object):
        ca, cb = a.to_float().coeffs, b.to_float().coeffs
    ia = np.flatnonzero(ca != 0)
    ib = np.flatnonzero(cb != 0)
    dtype = _result_dtype(ca, cb)
    out = np.full(1 << n, Fraction(0), dtype=object) if dtype == object else np.zeros(1 << n, dtype=dtype)
    if ia.size and ib.size:
        ok = (ia[:, None] & ib[None, :]) == 0
        signs = _signs_for(dtype, pair_signs(n, ia, ib))
        prod = np.multiply.outer(ca[ia], cb[ib]) * signs
        targets = (ia[:, None] | ib[None, :])[ok]
        np.add.at(out, targets, prod[ok])
    return Form(n, out)


def wedge_all(*forms: Form) -> Form:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def _as_vector(x, n: int, exact: bool) -> np.ndarray:
    arr = np.asarray(x)
    if arr.shape != (n,):
        raise DimensionMismatch(f"expected a length-{n} vector, got shape {arr.shape}")
    if exact:
        return np.array([_as_fraction(c) for c in arr], dtype=object)
    return arr


def interior(X, a: Form) -> Form:
    """Contraction X ⌟ a of a vector into a form."""
    n = a.dim
    X = _as_vector(X, n, a.exact)
    if not a.exact and X.dtype == object:
        X = X.astype(float)
    dtype = _result_dtype(a.coeffs, X)
    src = a.coeffs if dtype != np.complex128 else a.coeffs.astype(np.complex128)
    out = _zeros_like(a, dtype)
    masks = np.arange(1 << n)
    signs = _signs_for(dtype, _lower_signs(n))
    for i in range(n):
        if X[i] == 0:
            continue
        has = masks[(masks >> i) & 1 == 1]
        out[has ^ (1 << i)] += X[i] * signs[i][has] * src[has]
    return Form(n, out)


def wedge_covector(xi, a: Form) -> Form:
    """xi ^ a for a covector given by its components."""
    n = a.dim
    xi = _as_vector(xi, n, a.exact)
    if not a.exact and xi.dtype == object:
        xi = xi.astype(float)
    dtype = _result_dtype(a.coeffs, xi)
    src = a.coeffs if dtype != np.complex128 else a.coeffs.astype(np.complex128)
    out = _zeros_like(a, dtype)
    masks = np.arange(1 << n)
    signs = _signs_for(dtype, _lower_signs(n))
    for i in range(n):
        if xi[i] == 0:
            continue
        free = masks[(masks >> i) & 1 == 0]
        out[free | (1 << i)] += xi[i] * signs[i][free] * src[free]
    return Form(n, out)


@dataclass(frozen=True, eq=False)
class GenVector:
    """An element X ⊕ ξ of T ⊕ T*."""

    vec: np.ndarray
    covec: np.ndarray

    def __post_init__(self):
        vec, covec = np.asarray(self.vec), np.asarray(self.covec)
        if vec.shape != covec.shape or vec.ndim != 1:
            raise DimensionMismatch("vector and covector parts must have equal length")
        object.__setattr__(self, "vec", vec)
        object.__setattr__(self, "covec", covec)

    @property
    def dim(self) -> int:
        return self.vec.shape[0]

    @classmethod
    def from_array(cls, arr) -> "GenVector":
        arr = np.asarray(arr)
        n = arr.shape[0] // 2
        return cls(arr[:n], arr[n:])

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.vec, self.covec])

    def pairing(self, other: "GenVector"):
        """(X⊕ξ, Y⊕η) = (ξ(Y) + η(X)) / 2."""
        s = np.dot(self.covec, other.vec) + np.dot(other.covec, self.vec)
        return s / 2 if not isinstance(s, (int, Fraction)) else Fraction(s) / 2

    def __add__(self, other: "GenVector") -> "GenVector":
        return GenVector(self.vec + other.vec, self.covec + other.covec)

    def __mul__(self, s) -> "GenVector":
        return GenVector(self.vec * s, self.covec * s)

    __rmul__ = __mul__

    def __neg__(self) -> "GenVector":
        return GenVector(-self.vec, -self.covec)


def spinor_action(v: GenVector, a: Form) -> Form:
    """(X ⊕ ξ) • a = -X ⌟ a + ξ ^ a."""
    if v.dim != a.dim:
        raise DimensionMismatch(f"vector of dimension {v.dim} acting on forms of dimension {a.dim}")
    return wedge_covector(v.covec, a) - interior(v.vec, a)


def hat(a: Form) -> Form:
    """Scale the degree-p part by (-1)^(p(p+1)/2)."""
    return Form(a.dim, a.coeffs * _signs_for(a.coeffs.dtype, _degree_signs(a.dim, "hat")))


def tilde(a: Form) -> Form:
    """Scale the degree-p part by (-1)^p."""
    return Form(a.dim, a.coeffs * _signs_for(a.coeffs.dtype, _degree_signs(a.dim, "tilde")))


def reverse(a: Form) -> Form:
    """Scale the degree-p part by (-1)^(p(p-1)/2)."""
    return tilde(hat(a))


def mukai(a: Form, b: Form):
    """Top coefficient of a ^ hat(b) against e^{1...n}."""
    _check_dims(a, b)
    n = a.dim
    ca, cb = a.coeffs, hat(b).coeffs
    if (ca.dtype == object) != (cb.dtype == object):
        ca, cb = a.to_float().coeffs, hat(b).to_float().coeffs
    full = (1 << n) - 1
    masks = np.arange(1 << n)
    signs = _signs_for(ca.dtype if ca.dtype == object else np.float64, complement_signs(n))
    return np.sum(ca * cb[full ^ masks] * signs)


def exp_two_form(B: Form) -> Form:
    """1 + B + B^B/2 + ... acting by wedge."""
    deg = degrees(B.dim)
    if np.any(B.coeffs[deg != 2] != 0):
        raise DegreeError("exp_two_form expects a pure 2-form")
    out = Form.scalar(B.dim, 1, exact=B.exact)
    if not B.exact and B.is_complex:
        out = out.as_complex()
    term = out
    for k in range(1, B.dim // 2 + 1):
        term = wedge(term, B) / k
        out = out + term
    return out


def volume_form(n: int, exact: bool = False) -> Form:
    return Form.monomial(n, range(1, n + 1), exact=exact)


# -------------------------------------------------------- metric-dependent

def _check_spd(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise NotPositiveDefinite("metric must be a square matrix")
    if not np.allclose(g, g.T, atol=1e-12):
        raise NotPositiveDefinite("metric is not symmetric")
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("metric is not positive definite") from None
    return g


@lru_cache(maxsize=None)
def _subset_rows(n: int, p: int) -> np.ndarray:
    return np.array(list(combinations(range(n), p)), dtype=np.int64).reshape(-1, p)


def compound(M: np.ndarray, p: int) -> np.ndarray:
    """p-th compound matrix: all p×p minors, subsets in lexicographic order."""
    M = np.asarray(M)
    if p == 0:
        return np.ones((1, 1), dtype=np.result_type(M.dtype, np.float64))
    rows = _subset_rows(M.shape[0], p)
    cols = _subset_rows(M.shape[1], p)
    out = np.empty((rows.shape[0], cols.shape[0]), dtype=np.result_type(M.dtype, np.float64))
    step = max(1, 2_000_000 // max(1, cols.shape[0] * p * p))
    for start in range(0, rows.shape[0], step):
        r = rows[start:start + step]
        sub = M[r[:, None, :, None], cols[None, :, None, :]]
        out[start:start + step] = np.linalg.det(sub)
    return out


def induced_map(M: np.ndarray, a: Form) -> Form:
    """Apply the algebra map induced by M on 1-forms: e^j -> sum_i M[i, j] e^i."""
    n = a.dim
    M = np.asarray(M)
    src = a.to_float().coeffs
    out = np.zeros(1 << n, dtype=np.result_type(src.dtype, M.dtype, np.float64))
    for p in range(n + 1):
        idx = masks_of_degree(n, p)
        block = src[idx]
        if not np.any(block):
            continue
        out[idx] = compound(M, p) @ block
    return Form(n, out)


def pullback(M: np.ndarray, a: Form) -> Form:
    """Pull a back along the linear map R^k -> R^n whose matrix (n x k) is M."""
    M = np.asarray(M)
    n, k = M.shape
    if a.dim != n:
        raise DimensionMismatch("map and form dimensions differ")
    if a.exact and M.dtype == object:
        images = [Form(k, _one_form_coeffs(M[j], k)) for j in range(n)]
        out = Form.zero(k, exact=True)
        for idx, c in a.terms():
            out = out + wedge_all(Form.scalar(k, c, exact=True), *[images[i - 1] for i in idx])
        return out
    src = a.to_float().coeffs if a.exact else a.coeffs
    out = np.zeros(1 << k, dtype=np.result_type(src.dtype, np.float64))
    Mt = np.asarray(M, dtype=float).T
    for p in range(min(n, k) + 1):
        block = src[masks_of_degree(n, p)]
        if np.any(block):
            out[masks_of_degree(k, p)] = compound(Mt, p) @ block
    return Form(k, out)


def _one_form_coeffs(row, k: int) -> np.ndarray:
    out = np.empty(1 << k, dtype=object)
    out[:] = Fraction(0)
    for i in range(k):
        out[1 << i] = _as_fraction(row[i])
    return out


def _is_identity(g) -> bool:
    return g is None or (np.asarray(g).dtype != object and np.array_equal(np.asarray(g, dtype=float), np.eye(len(g))))


def raise_indices(g, a: Form) -> Form:
    """Apply the inverse metric to every degree (the map Λg^{-1})."""
    if _is_identity(g):
        return a
    g = _check_spd(g)
    return induced_map(np.linalg.inv(g), a)


def hodge_star(g, a: Form) -> Form:
    """Hodge star with a ^ ⋆b = g(a, b) vol_g, vol_g = sqrt(det g) e^{1...n}.

    ``g=None`` means the identity metric; then exact coefficients stay exact.
    """
    n = a.dim
    if _is_identity(g):
        raised, scale = a, 1
    else:
        g = _check_spd(g)
        raised, scale = raise_indices(g, a), float(np.sqrt(np.linalg.det(g)))
    masks = np.arange(1 << n)
    full = (1 << n) - 1
    out = _zeros_like(raised)
    out[full ^ masks] = raised.coeffs * _signs_for(raised.coeffs.dtype, complement_signs(n))
    star = Form(n, out)
    return star if scale == 1 else star * scale


def inner(g, a: Form, b: Form):
    """Bilinear metric g(a, b) on forms; distinct degrees are orthogonal."""
    _check_dims(a, b)
    rb = raise_indices(g, b)
    if a.exact and rb.exact:
        return np.sum(a.coeffs * rb.coeffs)
    return np.sum(a.to_float().coeffs * rb.to_float().coeffs)


def volume_g(g) -> float:
    return 1.0 if g is None else float(np.sqrt(np.linalg.det(_check_spd(g))))


# ---------------------------------------------------------- literal syntax

_NUMBER = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?:/\d+)?"
_BASIS = r"e(?:\{[\d,\s]*\}|\d+)"
_TERM = re.compile(
    rf"\s*(?P<sign>[+-])?\s*(?:(?P<coef>\([^()]*\)|{_NUMBER})\s*(?P<star>\*)?\s*)?(?P<basis>{_BASIS})?\s*"
)


def parse_basis(token: str) -> tuple[int, ...]:
    body = token[1:]
    if body.startswith("{"):
        inner_text = body[1:-1].strip()
        return tuple(int(t) for t in inner_text.split(",")) if inner_text else ()
    return tuple(int(ch) for ch in body)


def _parse_coefficient(text: str, exact: bool):
    if text.startswith("("):
        if exact:
            raise ValueError("complex coefficients are not available in exact mode")
        return complex(text.replace(" ", ""))
    if exact:
        return Fraction(text)
    if "/" in text:
        num, den = text.split("/")
        return float(num) / float(den)
    return float(text)


def parse_form(text: str, dim: int, exact: bool = False) -> Form:
    """Parse literals such as ``"1 + 2*e12 - 0.5*e134"``.

    Multi-digit indices use braces, e.g. ``e{1,10}``.
    """
    text = text.strip()
    if text in ("", "0"):
        return Form.zero(dim, exact=exact)
    out = Form.zero(dim, exact=exact)
    pos = 0
    first = True
    while pos < len(text):
        m = _TERM.match(text, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse form literal at position {pos}: {text!r}")
        sign, coef, star, basis = m.group("sign"), m.group("coef"), m.group("star"), m.group("basis")
        if sign is None and not first:
            raise ValueError(f"missing '+' or '-' before term at position {pos}: {text!r}")
        if coef is None and basis is None:
            raise ValueError(f"empty term at position {pos}: {text!r}")
        if coef is not None and basis is not None and star is None:
            raise ValueError(f"expected '*' between coefficient and basis at position {pos}: {text!r}")
        if star is not None and basis is None:
            raise ValueError(f"dangling '*' at position {pos}: {text!r}")
        value = _parse_coefficient(coef, exact) if coef is not None else (Fraction(1) if exact else 1.0)
        if sign == "-":
            value = -value
        idx = parse_basis(basis) if basis else ()
        if any(not 1 <= i <= dim for i in idx):
            raise ValueError(f"index out of range 1..{dim} in {basis!r}")
        out = out + Form.monomial(dim, idx, value, exact=exact)
        pos = m.end()
        first = False
    return out


def _format_scalar(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    if isinstance(c, complex) or isinstance(c, np.complexfloating):
        return repr(complex(c))
    text = repr(float(c))
    return text[:-2] if text.endswith(".0") else text


def _basis_token(idx: tuple[int, ...]) -> str:
    if any(i > 9 for i in idx):
        return "e{" + ",".join(map(str, idx)) + "}"
    return "e" + "".join(map(str, idx))


def format_form(a: Form) -> str:
    pieces = []
    for idx, c in a.terms():
        negative = False
        if isinstance(c, complex) or isinstance(c, np.complexfloating):
            if complex(c).imag == 0:
                c = complex(c).real
        if not (isinstance(c, complex) or isinstance(c, np.complexfloating)):
            negative = c < 0
            c = -c if negative else c
        mag = _format_scalar(c)
        if not idx:
            body = mag
        elif mag == "1":
            body = _basis_token(idx)
        else:
            body = f"{mag}*{_basis_token(idx)}"
        if not pieces:
            pieces.append(("-" if negative else "") + body)
        else:
            pieces.append(("- " if negative else "+ ") + body)
    return " ".join(pieces) if pieces else "0"


def random_form(rng: np.random.Generator, n: int, exact: bool = False, parity: str | None = None,
                density: float = 1.0, scale: int = 5) -> Form:
    """Random test form; exact forms get small rational coefficients."""
    size = 1 << n
    keep = rng.random(size) < density
    if parity == "even":
        keep &= degrees(n) % 2 == 0
    elif parity == "odd":
        keep &= degrees(n) % 2 == 1
    if exact:
        num = rng.integers(-scale, scale + 1, size)
        den = rng.integers(1, scale + 1, size)
        arr = np.array([Fraction(int(a), int(b)) if k else Fraction(0) for a, b, k in zip(num, den, keep)], dtype=object)
        return Form(n, arr)
    return Form(n, np.where(keep, rng.standard_normal(size), 0.0))

