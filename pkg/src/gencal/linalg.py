"""Small linear-algebra helpers shared by float and exact code paths.

Exact matrices are numpy object arrays of Fractions; the rational work is
delegated to sympy.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import sympy

DEFAULT_TOL = 1e-9


def is_exact(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def as_exact(a) -> np.ndarray:
    a = np.asarray(a)
    out = np.empty(a.shape, dtype=object)
    for idx, x in np.ndenumerate(a):
        out[idx] = x if isinstance(x, Fraction) else Fraction(x) if not isinstance(x, (float, np.floating)) else Fraction(float(x))
    return out


def _to_sympy(a: np.ndarray) -> sympy.Matrix:
    return sympy.Matrix(a.shape[0], a.shape[1], [sympy.Rational(x.numerator, x.denominator) for x in a.ravel()])


def _from_sympy(m: sympy.Matrix) -> np.ndarray:
    out = np.empty((m.rows, m.cols), dtype=object)
    for i in range(m.rows):
        for j in range(m.cols):
            q = sympy.Rational(m[i, j])
            out[i, j] = Fraction(int(q.p), int(q.q))
    return out


def inv(a: np.ndarray) -> np.ndarray:
    if is_exact(a):
        return _from_sympy(_to_sympy(a).inv())
    return np.linalg.inv(a)


def det(a: np.ndarray):
    if is_exact(a):
        q = sympy.Rational(_to_sympy(a).det())
        return Fraction(int(q.p), int(q.q))
    return float(np.linalg.det(a))


def solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if is_exact(a) or is_exact(b):
        return inv(as_exact(a)) @ as_exact(b)
    return np.linalg.solve(a, b)


def null_space(a: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Columns spanning the kernel of a."""
    if is_exact(a):
        vecs = _to_sympy(a).nullspace()
        if not vecs:
            return np.empty((a.shape[1], 0), dtype=object)
        return _from_sympy(sympy.Matrix.hstack(*vecs))
    if a.shape[0] == 0:
        return np.eye(a.shape[1])
    _, s, vh = np.linalg.svd(a)
    scale = max(1.0, s[0]) if s.size else 1.0
    rank = int(np.sum(s > tol * scale))
    return vh[rank:].conj().T


def matrix_rank(a: np.ndarray, tol: float = DEFAULT_TOL) -> int:
    if a.size == 0:
        return 0
    if is_exact(a):
        return int(_to_sympy(a).rank())
    s = np.linalg.svd(a, compute_uv=False)
    scale = max(1.0, s[0]) if s.size else 1.0
    return int(np.sum(s > tol * scale))


def column_echelon(a: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Canonical basis of the column space: reduced echelon form of a^T, transposed."""
    if is_exact(a):
        rref, pivots = _to_sympy(a.T).rref()
        return _from_sympy(rref[: len(pivots), :].T)
    m = np.array(a.T, dtype=float)
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(m[r:, c])))
        if abs(m[p, c]) <= tol:
            continue
        m[[r, p]] = m[[p, r]]
        m[r] /= m[r, c]
        for i in range(rows):
            if i != r:
                m[i] -= m[i, c] * m[r]
        r += 1
    return m[:r].T


def is_symmetric(a: np.ndarray, tol: float = 1e-12) -> bool:
    if is_exact(a):
        return bool(np.all(a == a.T))
    return bool(np.allclose(a, a.T, atol=tol))


def is_skew(a: np.ndarray, tol: float = 1e-12) -> bool:
    if is_exact(a):
        return bool(np.all(a == -a.T))
    return bool(np.allclose(a, -a.T, atol=tol))


def is_positive_definite(a: np.ndarray) -> bool:
    if is_exact(a):
        return bool(_to_sympy(a).is_positive_definite)
    try:
        np.linalg.cholesky(np.asarray(a, dtype=float))
    except np.linalg.LinAlgError:
        return False
    return True


def to_float(a) -> np.ndarray:
    return np.asarray(a, dtype=float) if is_exact(np.asarray(a)) else np.asarray(a)


def skew_from_upper(values, n: int, exact: bool = False) -> np.ndarray:
    """Skew matrix from its strict upper triangle listed row by row."""
    values = list(values)
    expected = n * (n - 1) // 2
    if len(values) != expected:
        raise ValueError(f"expected {expected} upper-triangle entries, got {len(values)}")
    out = np.zeros((n, n), dtype=object if exact else float)
    if exact:
        out[:] = Fraction(0)
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = values[k]
            out[j, i] = -values[k]
            k += 1
    return out


def upper_from_skew(a: np.ndarray) -> list:
    n = a.shape[0]
    return [a[i, j] for i in range(n) for j in range(i + 1, n)]
