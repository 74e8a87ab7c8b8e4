"""Complex Dirac spinors, charge conjugation and the fierzing map.

The representation is built from hermitian matrices with gamma_i^2 = 1 by
the usual tensor-product recursion. Vectors act on spinors through
c_i = i gamma_i, so c_i^2 = -1, which is the sign for which a real
structure with the expected squares exists in dimensions 6, 7 and 8.
For odd n the last generator is normalised so that the Clifford volume
element acts by (-1)^{m(m+1)/2} i^{m+1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .clifford import CliffordElement, orthonormal_frame
from .errors import DegreeError, DimensionMismatch, GencalError, PreconditionError
from .exterior import Form, degrees, hodge_star, induced_map, mask_of, masks_of_degree

_S1 = np.array([[0, 1], [1, 0]], dtype=complex)
_S2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_S3 = np.array([[1, 0], [0, -1]], dtype=complex)
_I2 = np.eye(2, dtype=complex)

MAX_DIM = 12


class ChiralityMismatch(GencalError, ValueError):
    pass


def _kron(*mats) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def hermitian_gammas(n: int) -> list[np.ndarray]:
    m = n // 2
    gammas = []
    for k in range(m):
        before, after = [_S3] * k, [_I2] * (m - k - 1)
        gammas.append(_kron(*before, _S1, *after))
        gammas.append(_kron(*before, _S2, *after))
    if n % 2:
        prod = np.eye(1 << m, dtype=complex)
        for gm in gammas:
            prod = prod @ gm
        gammas.append((1j) ** m * prod)
    return gammas


def volume_eigenvalue(n: int) -> complex:
    """Scalar by which the volume element acts: on chirality + for even n, on all of the module for odd n."""
    m = n // 2
    sign = -1 if (m * (m + 1) // 2) % 2 else 1
    return sign * (1j) ** (m + 1 if n % 2 else m)


@dataclass(frozen=True, eq=False)
class GammaRep:
    n: int
    gammas: tuple = field(repr=False)
    generators: tuple = field(repr=False)
    conj_matrix: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.conj_matrix.shape[0]

    @property
    def half_dim(self) -> int:
        return self.n // 2

    @property
    def conj_sign(self) -> int:
        """epsilon with A(X.Psi) = epsilon X.A(Psi)."""
        return 1 if self.half_dim % 2 else -1

    @property
    def conj_square(self) -> int:
        m = self.half_dim
        return -1 if (m * (m + 1) // 2) % 2 else 1

    def blade(self, mask: int) -> np.ndarray:
        return _blade(self, mask)

    @property
    def volume(self) -> np.ndarray:
        return self.blade((1 << self.n) - 1)

    @property
    def chirality_op(self) -> np.ndarray:
        """Hermitian involution whose +1 eigenspace is the + half-spinor module (n even)."""
        if self.n % 2:
            raise DimensionMismatch("chirality is only defined for even n")
        return self.volume / volume_eigenvalue(self.n)

    def vector_op(self, X) -> np.ndarray:
        X = np.asarray(X)
        return sum(X[i] * self.generators[i] for i in range(self.n))


@lru_cache(maxsize=None)
def _blade_cached(n: int, mask: int) -> np.ndarray:
    rep = build_gamma(n)
    out = np.eye(rep.size, dtype=complex)
    for i in range(n):
        if mask >> i & 1:
            out = out @ rep.generators[i]
    out.flags.writeable = False
    return out


def _blade(rep: GammaRep, mask: int) -> np.ndarray:
    return _blade_cached(rep.n, mask)


def _solve_conj_matrix(generators, eps: int) -> np.ndarray:
    """Unitary C with C conj(c_i) = eps c_i C for all generators.

    Every generator is either real or purely imaginary, so the product of
    the generators of one type is a solution; Schur's lemma makes it unique
    up to a phase.
    """
    d = generators[0].shape[0]
    real_type = [c for c in generators if np.allclose(np.conj(c), c)]
    imag_type = [c for c in generators if np.allclose(np.conj(c), -c)]
    for group in (real_type, imag_type):
        C = np.eye(d, dtype=complex)
        for c in group:
            C = C @ c
        if all(np.allclose(C @ np.conj(c), eps * c @ C) for c in generators):
            return C
    raise GencalError("no charge conjugation matrix with the required sign")


@lru_cache(maxsize=None)
def build_gamma(n: int) -> GammaRep:
    if not 2 <= n <= MAX_DIM:
        raise DimensionMismatch(f"spinor modules are supported for 2 <= n <= {MAX_DIM}")
    gammas = hermitian_gammas(n)
    generators = [1j * gm for gm in gammas]
    if n % 2:
        vol = np.eye(generators[0].shape[0], dtype=complex)
        for c in generators:
            vol = vol @ c
        if not np.isclose(vol[0, 0], volume_eigenvalue(n)):
            generators[-1] = -generators[-1]
    m = n // 2
    eps = 1 if m % 2 else -1
    C = _solve_conj_matrix(generators, eps)
    for arr in (*gammas, *generators, C):
        arr.flags.writeable = False
    return GammaRep(n, tuple(gammas), tuple(generators), C)


@dataclass(frozen=True, eq=False)
class DiracSpinor:
    n: int
    amplitudes: np.ndarray
    chirality: int | None = None

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (1 << (self.n // 2),):
            raise DimensionMismatch(f"expected {1 << (self.n // 2)} amplitudes")
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)

    @property
    def rep(self) -> GammaRep:
        return build_gamma(self.n)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "DiracSpinor":
        return DiracSpinor(self.n, self.amplitudes / self.norm(), self.chirality)

    def __add__(self, other: "DiracSpinor") -> "DiracSpinor":
        chi = self.chirality if self.chirality == other.chirality else None
        return DiracSpinor(self.n, self.amplitudes + other.amplitudes, chi)

    def __sub__(self, other: "DiracSpinor") -> "DiracSpinor":
        return self + other * -1

    def __mul__(self, s) -> "DiracSpinor":
        return DiracSpinor(self.n, self.amplitudes * s, self.chirality)

    __rmul__ = __mul__

    def allclose(self, other: "DiracSpinor", tol: float = 1e-9) -> bool:
        return bool(np.allclose(self.amplitudes, other.amplitudes, atol=tol, rtol=0))

    def to_list(self) -> list[float]:
        """Interleaved real and imaginary parts."""
        return [float(x) for z in self.amplitudes for x in (z.real, z.imag)]

    @classmethod
    def from_list(cls, n: int, values, chirality: int | None = None) -> "DiracSpinor":
        values = np.asarray(values, dtype=float)
        if values.size != 2 << (n // 2):
            raise DimensionMismatch(f"expected {2 << (n // 2)} interleaved re/im values")
        return cls(n, values[0::2] + 1j * values[1::2], chirality)


def detect_chirality(psi: DiracSpinor, tol: float = 1e-9) -> int | None:
    if psi.n % 2:
        return None
    gamma = psi.rep.chirality_op
    v = psi.amplitudes
    if np.allclose(gamma @ v, v, atol=tol * max(1.0, np.linalg.norm(v))):
        return 1
    if np.allclose(gamma @ v, -v, atol=tol * max(1.0, np.linalg.norm(v))):
        return -1
    return None


def chiral_projection(psi: DiracSpinor, sign: int) -> DiracSpinor:
    gamma = psi.rep.chirality_op
    return DiracSpinor(psi.n, (psi.amplitudes + sign * gamma @ psi.amplitudes) / 2, sign)


def _frame_coefficients(a: Form, g) -> np.ndarray:
    """Coefficients of a in a g-orthonormal coframe."""
    if g is None:
        return np.asarray(a.to_float().coeffs)
    P = orthonormal_frame(g)
    return induced_map(P.T, a).coeffs


def form_operator(a, n: int, g=None) -> np.ndarray:
    """Matrix by which a form (through the Clifford isomorphism) acts on spinors."""
    if isinstance(a, CliffordElement):
        coeffs = a.coeffs
    else:
        if a.dim != n:
            raise DimensionMismatch("form and spinor dimensions differ")
        coeffs = _frame_coefficients(a, g)
    rep = build_gamma(n)
    out = np.zeros((rep.size, rep.size), dtype=complex)
    for mask in np.flatnonzero(coeffs != 0):
        out += coeffs[mask] * rep.blade(int(mask))
    return out


def clifford_act(a, psi: DiracSpinor, g=None) -> DiracSpinor:
    if isinstance(a, CliffordElement) and a.dim != psi.n:
        raise DimensionMismatch("Clifford element and spinor dimensions differ")
    amp = form_operator(a, psi.n, g) @ psi.amplitudes
    return DiracSpinor(psi.n, amp, None)


def vector_act(X, psi: DiracSpinor) -> DiracSpinor:
    return DiracSpinor(psi.n, psi.rep.vector_op(X) @ psi.amplitudes, None)


def charge_conj(psi: DiracSpinor) -> DiracSpinor:
    rep = psi.rep
    amp = rep.conj_matrix @ np.conj(psi.amplitudes)
    chi = psi.chirality
    if chi is not None and rep.half_dim % 2:
        chi = -chi
    return DiracSpinor(psi.n, amp, chi)


def hermitian_product(psi: DiracSpinor, phi: DiracSpinor) -> complex:
    """q(psi, phi), conjugate-linear in the first slot."""
    return complex(np.vdot(psi.amplitudes, phi.amplitudes))


def bilinear_A(psi: DiracSpinor, phi: DiracSpinor) -> complex:
    return hermitian_product(charge_conj(psi), phi)


def fierz(psi_l: DiracSpinor, psi_r: DiracSpinor, g=None) -> Form:
    """Form whose e_K coefficient (orthonormal coframe) is A(psi_l, e_K . psi_r)."""
    if psi_l.n != psi_r.n:
        raise DimensionMismatch("spinors of different dimensions")
    n = psi_l.n
    rep = psi_l.rep
    a = rep.conj_matrix @ np.conj(psi_l.amplitudes)
    coeffs = np.array([np.vdot(a, rep.blade(mask) @ psi_r.amplitudes) for mask in range(1 << n)])
    frame_form = Form(n, coeffs)
    if g is None:
        return frame_form
    P = orthonormal_frame(g)
    return induced_map(np.linalg.inv(P).T, frame_form)


# ------------------------------------------------------------ structures

G2_TRIPLES = ((1, 2, 3), (1, 4, 5), (1, 6, 7), (2, 4, 6), (2, 5, 7), (3, 4, 7), (3, 5, 6))
G2_SIGNS = (1, 1, 1, 1, -1, -1, -1)


def g2_three_form() -> Form:
    """The associative 3-form matching the spinor returned by g2_spinor."""
    return Form.from_terms(7, {t: s for t, s in zip(G2_TRIPLES, G2_SIGNS)})


def cayley_four_form() -> Form:
    """The Cayley form matching the spinor returned by spin7_spinor."""
    phi = g2_three_form()
    e8 = Form.monomial(8, (8,))
    lifted = Form(8, np.concatenate([phi.coeffs, np.zeros(128)]))
    star = Form(8, np.concatenate([hodge_star(None, phi).coeffs, np.zeros(128)]))
    return (lifted ^ e8) + star


def _joint_eigenvector(rep: GammaRep, constraints) -> np.ndarray:
    """Unit vector v with blade_K v = lam v for every (mask, lam) constraint."""
    d = rep.size
    system = np.vstack([rep.blade(mask) - lam * np.eye(d) for mask, lam in constraints])
    _, s, vh = np.linalg.svd(system)
    null = vh[s.size:] if s.size < d else vh[np.abs(s) < 1e-9]
    if null.shape[0] == 0:
        null = vh[-1:] if s[-1] < 1e-9 else null
    if null.shape[0] != 1:
        raise GencalError(f"spinor constraints leave a {null.shape[0]}-dimensional space")
    return null[0].conj()


def _make_real(rep: GammaRep, v: np.ndarray) -> np.ndarray:
    """Rotate the phase so that A(v) = v (possible when A^2 = 1 and the line is A-stable)."""
    av = rep.conj_matrix @ np.conj(v)
    overlap = np.vdot(v, av)
    # A(u v) = conj(u) A(v) = conj(u) * overlap * v; want = u v, so u^2 = overlap
    u = np.sqrt(overlap)
    out = u * v
    return out / np.linalg.norm(out)


@lru_cache(maxsize=None)
def g2_spinor() -> DiracSpinor:
    """Unit real spinor in dimension 7 whose fierz square is 1 - phi - *phi + vol."""
    rep = build_gamma(7)
    constraints = [(mask_of(t), s) for t, s in zip(G2_TRIPLES[:4], G2_SIGNS[:4])]
    # blade_K psi = lam psi fixes the degree-3 part of the square
    v = _joint_eigenvector(rep, [(m, -s) for m, s in constraints])
    return DiracSpinor(7, _make_real(rep, v))


@lru_cache(maxsize=None)
def spin7_spinor() -> DiracSpinor:
    """Unit real chiral spinor in dimension 8 with fierz square 1 - Omega + vol."""
    rep = build_gamma(8)
    omega = cayley_four_form()
    terms = [(mask_of(idx), float(c)) for idx, c in omega.terms()]
    lam = -1.0
    v = _joint_eigenvector(rep, [(m, lam * c) for m, c in terms[:7]])
    return DiracSpinor(8, _make_real(rep, v), detect_chirality(DiracSpinor(8, v)))


def kahler_form() -> Form:
    return Form.from_terms(6, {(1, 2): 1, (3, 4): 1, (5, 6): 1})


@lru_cache(maxsize=None)
def su3_spinor() -> DiracSpinor:
    """Unit chiral spinor in dimension 6 with fierz(A psi, psi) = exp(-i omega)."""
    rep = build_gamma(6)
    v = _joint_eigenvector(rep, [(mask_of(p), -1j) for p in ((1, 2), (3, 4), (5, 6))])
    psi = DiracSpinor(6, v)
    return DiracSpinor(6, v, detect_chirality(psi))


@dataclass(frozen=True)
class StructureForms:
    kind: str
    forms: dict
    support: dict
    valid: bool
    notes: tuple = ()


def _check_unit(*spinors: DiracSpinor, tol: float = 1e-9) -> None:
    for psi in spinors:
        if abs(psi.norm() - 1) > tol:
            raise PreconditionError("structure spinors must have unit norm")


def structure_forms(kind: str, psi_l: DiracSpinor, psi_r: DiracSpinor | None = None,
                    tol: float = 1e-9) -> StructureForms:
    kind = kind.upper()
    psi_r = psi_l if psi_r is None else psi_r
    expected_n = {"G2": 7, "SPIN7": 8, "SU3": 6}.get(kind)
    if expected_n is None:
        raise ValueError(f"unknown structure kind {kind!r}")
    if psi_l.n != expected_n or psi_r.n != expected_n:
        raise DimensionMismatch(f"{kind} structures live in dimension {expected_n}")
    _check_unit(psi_l, psi_r, tol=tol)
    notes = []
    if kind == "G2":
        total = fierz(psi_l, psi_r)
        forms = {"even": total.even(), "odd": total.odd()}
        valid = _is_real(total, tol)
        if not valid:
            notes.append("fierz square has an imaginary part")
    elif kind == "SPIN7":
        chi_l, chi_r = detect_chirality(psi_l, tol), detect_chirality(psi_r, tol)
        if chi_l is None or chi_r is None:
            raise ChiralityMismatch("Spin(7) structures need chiral spinors")
        total = fierz(psi_l, psi_r)
        key = "even" if chi_l == chi_r else "odd"
        forms = {key: total.even() if key == "even" else total.odd()}
        valid = _is_real(total, tol)
    else:
        chi_l, chi_r = detect_chirality(psi_l, tol), detect_chirality(psi_r, tol)
        if chi_l is None or chi_r is None:
            raise ChiralityMismatch("SU(3) structures need chiral spinors")
        total = fierz(charge_conj(psi_l), psi_r)
        forms = {"rho0": total.even(), "rho1": total.odd()}
        valid = True
    support = {k: sorted(v.support(tol)) for k, v in forms.items()}
    return StructureForms(kind, forms, support, valid, tuple(notes))


def _is_real(a: Form, tol: float) -> bool:
    return not a.is_complex or float(np.max(np.abs(a.coeffs.imag))) <= tol


def random_spinor(rng: np.random.Generator, n: int, chirality: int | None = None) -> DiracSpinor:
    d = 1 << (n // 2)
    psi = DiracSpinor(n, rng.standard_normal(d) + 1j * rng.standard_normal(d))
    if chirality is not None:
        psi = chiral_projection(psi, chirality)
    return psi.normalized()


def real_spinor(rng: np.random.Generator, n: int, chirality: int | None = None) -> DiracSpinor:
    """Random unit spinor fixed by charge conjugation (needs A^2 = +1)."""
    psi = random_spinor(rng, n, chirality)
    rep = psi.rep
    if rep.conj_square != 1:
        raise DimensionMismatch("charge conjugation has no fixed points in this dimension")
    amp = psi.amplitudes + rep.conj_matrix @ np.conj(psi.amplitudes)
    return DiracSpinor(n, amp / np.linalg.norm(amp), psi.chirality)
