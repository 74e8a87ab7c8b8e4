"""Differential forms with polynomial coefficients on a single chart of R^n.

Coefficients live in the sympy polynomial ring QQ[x1, ..., xn], so every
operation here is exact. Dimensions are limited to n <= 6 and literal or
random inputs to polynomial degree 6; past that the number of terms grows
faster than the checks are worth.

The dilaton enters the intertwining check only through d(phi)^ terms, so it
is passed as a polynomial and never exponentiated.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np
from sympy import QQ
from sympy.polys.rings import PolyElement, ring

from .errors import DegreeError, DimensionMismatch, PreconditionError
from .exterior import Form, indices_of, mask_of

MAX_DIM = 6
MAX_POLY_DEGREE = 6


@lru_cache(maxsize=None)
def poly_ring(n: int):
    """The ring QQ[x1..xn] and its generators."""
    if not 1 <= n <= MAX_DIM:
        raise DimensionMismatch(f"polynomial forms support 1 <= n <= {MAX_DIM}, got {n}")
    R, *gens = ring(",".join(f"x{i}" for i in range(1, n + 1)), QQ)
    return R, tuple(gens)


def _wedge_sign(a: int, b: int) -> int:
    """Sign of e^A ^ e^B against e^{A u B} for disjoint masks."""
    swaps = 0
    rest = b
    while rest:
        low = rest & -rest
        swaps += bin(a & ~((low << 1) - 1)).count("1")
        rest ^= low
    return -1 if swaps % 2 else 1


def _contract_sign(i: int, mask: int) -> int:
    return -1 if bin(mask & ((1 << i) - 1)).count("1") % 2 else 1


def _total_degree(c: PolyElement) -> int:
    return max((sum(m) for m in c.monoms()), default=0)


def _to_fraction(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


class PolyForm:
    """Mixed-degree form sum_K c_K(x) e^K with c_K in QQ[x1..xn]."""

    __slots__ = ("dim", "ring", "terms")

    def __init__(self, dim: int, terms: dict | None = None):
        R, _ = poly_ring(dim)
        clean = {}
        for mask, c in (terms or {}).items():
            if mask >> dim:
                raise DimensionMismatch(f"basis element beyond dimension {dim}")
            c = R(c)
            if c:
                clean[mask] = c
        self.dim = dim
        self.ring = R
        self.terms = clean

    # construction
    @classmethod
    def zero(cls, dim: int) -> "PolyForm":
        return cls(dim)

    @classmethod
    def scalar(cls, dim: int, value) -> "PolyForm":
        return cls(dim, {0: value})

    @classmethod
    def monomial(cls, dim: int, indices, coeff=1) -> "PolyForm":
        indices = tuple(indices)
        if len(set(indices)) != len(indices):
            return cls(dim)
        sign = 1
        ordered = list(indices)
        # bubble sort to count transpositions
        for i in range(len(ordered)):
            for j in range(len(ordered) - 1 - i):
                if ordered[j] > ordered[j + 1]:
                    ordered[j], ordered[j + 1] = ordered[j + 1], ordered[j]
                    sign = -sign
        R, _ = poly_ring(dim)
        return cls(dim, {mask_of(ordered): sign * R(coeff)})

    @classmethod
    def one_form(cls, dim: int, coeffs) -> "PolyForm":
        return cls(dim, {1 << i: c for i, c in enumerate(coeffs)})

    @classmethod
    def from_form(cls, a: Form) -> "PolyForm":
        a = a.to_exact()
        return cls(a.dim, {mask_of(idx): QQ(c.numerator, c.denominator) for idx, c in a.terms()})

    @classmethod
    def parse(cls, text: str, dim: int) -> "PolyForm":
        return parse_polyform(text, dim)

    # inspection
    def coefficient(self, indices):
        return self.terms.get(mask_of(indices), self.ring.zero)

    def part(self, p: int) -> "PolyForm":
        return PolyForm(self.dim, {m: c for m, c in self.terms.items() if bin(m).count("1") == p})

    def degrees(self) -> set[int]:
        return {bin(m).count("1") for m in self.terms}

    def is_zero(self) -> bool:
        return not self.terms

    def poly_degree(self) -> int:
        return max((_total_degree(c) for c in self.terms.values()), default=0)

    def depends_on(self, i: int) -> bool:
        """True when some coefficient involves x_i (1-based)."""
        return any(c.degree(i - 1) > 0 for c in self.terms.values())

    def evaluate(self, point) -> Form:
        """Exact Form obtained by substituting the rational point."""
        if len(point) != self.dim:
            raise DimensionMismatch(f"point must have {self.dim} coordinates")
        values = [QQ(Fraction(v).numerator, Fraction(v).denominator) for v in point]
        out = {indices_of(m): _to_fraction(c(*values)) for m, c in self.terms.items()}
        return Form.from_terms(self.dim, out, exact=True)

    # arithmetic
    def _check(self, other: "PolyForm") -> None:
        if not isinstance(other, PolyForm):
            raise TypeError("expected a PolyForm")
        if other.dim != self.dim:
            raise DimensionMismatch("polynomial forms of different dimensions")

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyForm) and other.dim == self.dim and other.terms == self.terms

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms.items())))

    def __add__(self, other: "PolyForm") -> "PolyForm":
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, self.ring.zero) + c
        return PolyForm(self.dim, out)

    def __neg__(self) -> "PolyForm":
        return PolyForm(self.dim, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "PolyForm") -> "PolyForm":
        return self + (-other)

    def __mul__(self, s) -> "PolyForm":
        """Multiply by a number or by a polynomial function."""
        if isinstance(s, PolyForm):
            raise TypeError("use ^ for the wedge product")
        if isinstance(s, Fraction):
            s = QQ(s.numerator, s.denominator)
        s = self.ring(s)
        return PolyForm(self.dim, {m: s * c for m, c in self.terms.items()})

    __rmul__ = __mul__

    def __xor__(self, other: "PolyForm") -> "PolyForm":
        return wedge(self, other)

    def __repr__(self) -> str:
        return f"PolyForm({self.dim}, {format_polyform(self)!r})"

    def __str__(self) -> str:
        return format_polyform(self)


def wedge(a: PolyForm, b: PolyForm) -> PolyForm:
    a._check(b)
    out: dict = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            if ma & mb:
                continue
            m = ma | mb
            out[m] = out.get(m, a.ring.zero) + _wedge_sign(ma, mb) * ca * cb
    return PolyForm(a.dim, out)


def d(a: PolyForm) -> PolyForm:
    """Exterior derivative."""
    _, gens = poly_ring(a.dim)
    out: dict = {}
    for m, c in a.terms.items():
        for i, x in enumerate(gens):
            if m >> i & 1:
                continue
            dc = c.diff(x)
            if not dc:
                continue
            target = m | (1 << i)
            out[target] = out.get(target, a.ring.zero) + _wedge_sign(1 << i, m) * dc
    return PolyForm(a.dim, out)


def d_H(a: PolyForm, H: PolyForm) -> PolyForm:
    """Twisted differential d + H^ for a 3-form H."""
    a._check(H)
    if H.degrees() - {3}:
        raise DegreeError("the twisting form must be a 3-form")
    return d(a) + wedge(H, a)


def _vector_field(X, n: int) -> tuple:
    R, _ = poly_ring(n)
    if isinstance(X, int):
        if not 1 <= X <= n:
            raise DimensionMismatch(f"coordinate direction must lie in 1..{n}")
        return tuple(R.one if i == X - 1 else R.zero for i in range(n))
    X = tuple(R(c) for c in X)
    if len(X) != n:
        raise DimensionMismatch(f"vector field needs {n} components")
    return X


def interior(X, a: PolyForm) -> PolyForm:
    """Contraction with a vector field, given as a coordinate index or polynomial components."""
    X = _vector_field(X, a.dim)
    out: dict = {}
    for m, c in a.terms.items():
        for i, comp in enumerate(X):
            if not comp or not m >> i & 1:
                continue
            target = m ^ (1 << i)
            out[target] = out.get(target, a.ring.zero) + _contract_sign(i, m) * comp * c
    return PolyForm(a.dim, out)


def _coordinate_index(X, n: int) -> int:
    if isinstance(X, (int, np.integer)):
        _vector_field(int(X), n)
        return int(X)
    comps = _vector_field(X, n)
    nonzero = [i for i, c in enumerate(comps) if c]
    if len(nonzero) == 1 and comps[nonzero[0]] == 1:
        return nonzero[0] + 1
    raise PreconditionError("only coordinate directions are supported for the Lie derivative")


def lie_derivative(X, a: PolyForm) -> PolyForm:
    """Lie derivative along the coordinate field d/dx_i, i.e. differentiation of coefficients."""
    i = _coordinate_index(X, a.dim)
    _, gens = poly_ring(a.dim)
    return PolyForm(a.dim, {m: c.diff(gens[i - 1]) for m, c in a.terms.items()})


def _lie(X: tuple, a: PolyForm) -> PolyForm:
    # Cartan's formula works for any polynomial field
    return d(interior(X, a)) + interior(X, d(a))


def cartan_lie(X, a: PolyForm) -> PolyForm:
    """Lie derivative through d i_X + i_X d."""
    return _lie(_vector_field(X, a.dim), a)


class PolyGenVector:
    """Section X + xi of T + T* with polynomial components."""

    __slots__ = ("vector", "form")

    def __init__(self, vector, form: PolyForm):
        if form.degrees() - {1}:
            raise DegreeError("the cotangent part must be a 1-form")
        self.vector = _vector_field(vector, form.dim)
        self.form = form

    @classmethod
    def zero(cls, n: int) -> "PolyGenVector":
        R, _ = poly_ring(n)
        return cls((R.zero,) * n, PolyForm(n))

    @property
    def dim(self) -> int:
        return self.form.dim

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyGenVector) and self.vector == other.vector and self.form == other.form

    def __add__(self, other: "PolyGenVector") -> "PolyGenVector":
        return PolyGenVector(tuple(a + b for a, b in zip(self.vector, other.vector)), self.form + other.form)

    def __sub__(self, other: "PolyGenVector") -> "PolyGenVector":
        return PolyGenVector(tuple(a - b for a, b in zip(self.vector, other.vector)), self.form - other.form)

    def __repr__(self) -> str:
        return f"PolyGenVector({[str(c) for c in self.vector]}, {str(self.form)!r})"


def vector_bracket(X: tuple, Y: tuple, n: int) -> tuple:
    _, gens = poly_ring(n)
    return tuple(
        sum((X[j] * Y[i].diff(gens[j]) - Y[j] * X[i].diff(gens[j]) for j in range(n)), poly_ring(n)[0].zero)
        for i in range(n)
    )


def courant(v: PolyGenVector, w: PolyGenVector) -> PolyGenVector:
    """[X,Y] + L_X eta - L_Y xi - d(X⌟eta - Y⌟xi)/2."""
    if v.dim != w.dim:
        raise DimensionMismatch("sections of different dimensions")
    n = v.dim
    X, xi, Y, eta = v.vector, v.form, w.vector, w.form
    form = _lie(X, eta) - _lie(Y, xi) - d(interior(X, eta) - interior(Y, xi)) * QQ(1, 2)
    return PolyGenVector(vector_bracket(X, Y, n), form)


def b_transform(B: PolyForm, v: PolyGenVector) -> PolyGenVector:
    """X + xi -> X + (xi + X⌟B)."""
    if B.degrees() - {2}:
        raise DegreeError("B must be a 2-form")
    return PolyGenVector(v.vector, v.form + interior(v.vector, B))


# ---------------------------------------------------- T-duality on a chart

def is_basic(a: PolyForm, direction: int) -> bool:
    return interior(direction, a).is_zero()


def is_invariant(a: PolyForm, direction: int) -> bool:
    return not a.depends_on(direction)


def _as_function(f, n: int):
    R, _ = poly_ring(n)
    if isinstance(f, PolyForm):
        if f.degrees() - {0}:
            raise DegreeError("the dilaton must be a function")
        return f.coefficient(())
    if isinstance(f, str):
        return parse_polyform(f, n).coefficient(())
    return R(f)


def tdual_intertwine_check(rho0: PolyForm, rho1: PolyForm, phi0: PolyForm, phi1: PolyForm,
                           dilaton, theta: PolyForm, direction: int | None = None) -> tuple[bool, bool]:
    """Compare the closure equations before and after duality along d/dx_direction.

    With rho = rho0 + theta ^ rho1 and phi = phi0 + theta ^ phi1 split into
    basic parts, the first boolean states

        phi0 = -dD ^ rho0 + d rho0 + dtheta ^ rho1,   phi1 = dD ^ rho1 - d rho1,

    for D the dilaton polynomial. The second states the same equations for
    the dual data rho0' = -rho1, rho1' = -rho0 with phi replaced by minus its
    dual, using the same dilaton and the same theta.
    """
    n = rho0.dim
    for f in (rho1, phi0, phi1, theta):
        rho0._check(f)
    direction = n if direction is None else direction
    _vector_field(direction, n)
    D = _as_function(dilaton, n)
    _, gens = poly_ring(n)
    if D.degree(direction - 1) > 0:
        raise PreconditionError("the dilaton must not depend on the duality coordinate")
    if theta.degrees() - {1} or theta.coefficient((direction,)) != 1:
        raise PreconditionError("theta must be a 1-form with theta(X) = 1")
    if not is_invariant(theta, direction):
        raise PreconditionError("theta must be invariant along the duality direction")
    for name, f in (("rho0", rho0), ("rho1", rho1), ("phi0", phi0), ("phi1", phi1)):
        if not is_basic(f, direction):
            raise PreconditionError(f"{name} is not basic: it has a dx{direction} component")
        if not is_invariant(f, direction):
            raise PreconditionError(f"{name} depends on x{direction}")
    dD = d(PolyForm.scalar(n, D))
    dtheta = d(theta)

    def equations(r0, r1, f0, f1) -> bool:
        first = -wedge(dD, r0) + d(r0) + wedge(dtheta, r1)
        second = wedge(dD, r1) - d(r1)
        return f0 == first and f1 == second

    holds = equations(rho0, rho1, phi0, phi1)
    # dual decomposition: rho' = -rho1 - theta ^ rho0, and the equations are posed for -phi'
    holds_dual = equations(-rho1, -rho0, phi1, phi0)
    return holds, holds_dual


def solve_closure(rho0: PolyForm, rho1: PolyForm, dilaton, theta: PolyForm) -> tuple[PolyForm, PolyForm]:
    """The basic parts (phi0, phi1) making the undualised equations hold."""
    n = rho0.dim
    dD = d(PolyForm.scalar(n, _as_function(dilaton, n)))
    phi0 = -wedge(dD, rho0) + d(rho0) + wedge(d(theta), rho1)
    phi1 = wedge(dD, rho1) - d(rho1)
    return phi0, phi1


# --------------------------------------------------------------- sampling

def random_polynomial(rng: np.random.Generator, n: int, max_degree: int, exclude: tuple[int, ...] = (),
                      terms: int = 3, coeff_range: int = 3):
    """Random polynomial in QQ[x1..xn] avoiding the listed 1-based variables."""
    if max_degree > MAX_POLY_DEGREE:
        raise PreconditionError(f"polynomial degree is capped at {MAX_POLY_DEGREE}")
    R, gens = poly_ring(n)
    allowed = [g for i, g in enumerate(gens) if i + 1 not in exclude]
    out = R.zero
    for _ in range(terms):
        deg = int(rng.integers(0, max_degree + 1))
        mono = R(int(rng.integers(-coeff_range, coeff_range + 1)))
        for _ in range(deg):
            if allowed:
                mono *= allowed[int(rng.integers(len(allowed)))]
        out += mono
    return out


def random_basic_form(rng: np.random.Generator, n: int, degree: int, max_degree: int,
                      direction: int | None = None, density: float = 0.6) -> PolyForm:
    """Random x_direction-independent form of one degree without dx_direction."""
    direction = n if direction is None else direction
    others = [i for i in range(1, n + 1) if i != direction]
    terms = {}
    for idx in combinations(others, degree):
        if rng.random() < density:
            terms[mask_of(idx)] = random_polynomial(rng, n, max_degree, exclude=(direction,))
    return PolyForm(n, terms)


def random_polyform(rng: np.random.Generator, n: int, max_degree: int, density: float = 0.3) -> PolyForm:
    """Random mixed-degree form with coefficients in all variables."""
    terms = {m: random_polynomial(rng, n, max_degree) for m in range(1 << n) if rng.random() < density}
    return PolyForm(n, terms)


def random_theta(rng: np.random.Generator, n: int, max_degree: int, closed: bool = False,
                 direction: int | None = None) -> PolyForm:
    """theta = dx_direction + basic invariant part; closed=True keeps only constant coefficients."""
    direction = n if direction is None else direction
    R, _ = poly_ring(n)
    coeffs = []
    for i in range(1, n + 1):
        if i == direction:
            coeffs.append(R.one)
        elif closed:
            coeffs.append(R(int(rng.integers(-2, 3))))
        else:
            coeffs.append(random_polynomial(rng, n, max_degree, exclude=(direction,)))
    return PolyForm.one_form(n, coeffs)


# ---------------------------------------------------------- literal syntax

_MONO = re.compile(r"x(\d+)(?:\^(\d+))?$")
_NUM = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:/\d+)?$")
_BASIS = re.compile(r"e(\d+)$")


def _split_terms(text: str) -> list[tuple[str, str]]:
    terms, sign, current = [], "+", ""
    for ch in text:
        if ch in "+-" and current.strip():
            terms.append((sign, current.strip()))
            sign, current = ch, ""
        elif ch in "+-":
            if current.strip():
                raise ValueError(f"unexpected sign in {text!r}")
            sign = "-" if (sign == "-") != (ch == "-") else "+"
        else:
            current += ch
    if current.strip():
        terms.append((sign, current.strip()))
    elif text.strip():
        raise ValueError(f"dangling sign in {text!r}")
    return terms


def parse_polyform(text: str, dim: int) -> PolyForm:
    """Parse literals such as ``"x1^2*e23 - 3*x2*e1 + 1/2"``.

    Each term is a product of rational numbers, powers ``xi^k`` and at most
    one basis token ``e...`` with single-digit indices.
    """
    R, gens = poly_ring(dim)
    text = text.strip()
    out = PolyForm(dim)
    if text in ("", "0"):
        return out
    for sign, body in _split_terms(text):
        coeff = R.one
        basis: tuple[int, ...] = ()
        seen_basis = False
        for factor in (f.strip() for f in body.split("*")):
            if not factor:
                raise ValueError(f"empty factor in {body!r}")
            if m := _MONO.match(factor):
                i = int(m.group(1))
                if not 1 <= i <= dim:
                    raise ValueError(f"variable x{i} outside 1..{dim}")
                coeff *= gens[i - 1] ** int(m.group(2) or 1)
            elif _NUM.match(factor):
                q = Fraction(factor)
                coeff *= QQ(q.numerator, q.denominator)
            elif m := _BASIS.match(factor):
                if seen_basis:
                    raise ValueError(f"more than one basis token in {body!r}")
                seen_basis = True
                basis = tuple(int(ch) for ch in m.group(1))
                if any(not 1 <= i <= dim for i in basis):
                    raise ValueError(f"index out of range 1..{dim} in {factor!r}")
            else:
                raise ValueError(f"cannot parse factor {factor!r}")
        if _total_degree(coeff) > MAX_POLY_DEGREE:
            raise ValueError(f"polynomial degree is capped at {MAX_POLY_DEGREE}")
        if sign == "-":
            coeff = -coeff
        out = out + PolyForm.monomial(dim, basis, coeff)
    return out


def _format_poly(c: PolyElement, n: int) -> list[tuple[bool, str]]:
    """Monomials of c as (negative, text) in the ring's term order."""
    pieces = []
    for exps, q in c.terms():
        negative = q < 0
        q = -q if negative else q
        factors = [f"x{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(exps) if e]
        num = str(_to_fraction(q))
        if num != "1" or not factors:
            factors.insert(0, num)
        pieces.append((negative, "*".join(factors)))
    return pieces


def format_polyform(a: PolyForm) -> str:
    """Canonical text that parse_polyform reads back to the same form."""
    out = []
    for mask in sorted(a.terms, key=lambda m: (bin(m).count("1"), indices_of(m))):
        idx = indices_of(mask)
        token = "e" + "".join(map(str, idx)) if idx else ""
        for negative, mono in _format_poly(a.terms[mask], a.dim):
            if token:
                body = token if mono == "1" else f"{mono}*{token}"
            else:
                body = mono
            out.append(("- " if negative else "+ ") + body)
    if not out:
        return "0"
    text = " ".join(out)
    return text[2:] if text.startswith("+ ") else "-" + text[2:]
