"""T-duality along a direction X with a dual covector theta, theta(X) = 1.

The duality element X + (-theta) acts on forms by
``rho -> -X⌟rho - theta ^ rho`` and on T + T* by the reflection

    M(Y + eta) = (Y - theta(Y) X + eta(X) X) + (eta - eta(X) theta + theta(Y) theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import linalg
from .errors import DimensionMismatch, GencalError, PreconditionError
from .exterior import Form, GenVector, spinor_action
from .genmetric import Dilaton, GeneralisedMetric, from_splitting
from .purespinor import (
    IsotropicPair,
    orient_like,
    pair_annihilator,
    subspace_to_pair,
    tau_direction,
)


class DualityError(GencalError, ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DualityContext:
    X: np.ndarray
    theta: np.ndarray
    tol: float = 1e-12

    def __post_init__(self):
        X, theta = np.asarray(self.X), np.asarray(self.theta)
        exact = linalg.is_exact(X) or linalg.is_exact(theta)
        X = linalg.as_exact(X) if exact else X.astype(float)
        theta = linalg.as_exact(theta) if exact else theta.astype(float)
        if X.shape != theta.shape or X.ndim != 1:
            raise DimensionMismatch("X and theta must be vectors of the same length")
        pairing = theta @ X
        if (pairing != 1) if exact else abs(pairing - 1) > self.tol:
            raise DualityError(f"theta(X) must equal 1, got {pairing}")
        X.flags.writeable = False
        theta.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "theta", theta)

    @classmethod
    def coordinate(cls, n: int, direction: int, exact: bool = False) -> "DualityContext":
        """Duality along the coordinate vector e_direction (1-based)."""
        v = np.zeros(n, dtype=int)
        v[direction - 1] = 1
        if exact:
            return cls(linalg.as_exact(v), linalg.as_exact(v))
        return cls(v.astype(float), v.astype(float))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def exact(self) -> bool:
        return linalg.is_exact(self.X)

    @property
    def element(self) -> GenVector:
        return GenVector(self.X, -self.theta)

    @cached_property
    def M(self) -> np.ndarray:
        X = self.X.reshape(-1, 1)
        th = self.theta.reshape(-1, 1)
        eye = np.eye(self.n, dtype=int)
        if self.exact:
            eye = linalg.as_exact(eye)
        top = np.hstack([eye - X @ th.T, X @ X.T])
        bottom = np.hstack([th @ th.T, eye - th @ X.T])
        return np.vstack([top, bottom])

    @cached_property
    def adapted_basis(self) -> np.ndarray:
        """Columns x_1..x_{n-1} spanning ker theta, then x_n = X."""
        n = self.n
        j0 = int(np.argmax([abs(float(t)) for t in self.theta]))
        cols = []
        for i in range(n):
            if i == j0:
                continue
            col = np.zeros(n, dtype=object if self.exact else float)
            if self.exact:
                col[:] = Fraction(0)
            col[i] = 1
            col[j0] = -self.theta[i] / self.theta[j0]
            cols.append(col)
        cols.append(self.X)
        S = np.array(cols).T
        return linalg.as_exact(S) if self.exact else S.astype(float)


def _coerce_metric(G: GeneralisedMetric, ctx: DualityContext) -> GeneralisedMetric:
    if ctx.exact and not G.exact:
        return G
    if G.exact and not ctx.exact:
        return G.to_float()
    return G


def buscher(g: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Buscher rules along the last coordinate of an adapted basis.

    B is the matrix of the bilinear form. In that convention
    g'_nn = 1/g_nn, g'_kn = -B_kn/g_nn, B'_kn = -g_kn/g_nn and, for k, l < n,
    g'_kl = g_kl - (g_kn g_nl - B_kn B_ln)/g_nn,
    B'_kl = B_kl + (g_kn B_ln - g_ln B_kn)/g_nn.
    """
    n = g.shape[0]
    g2, B2 = g.copy(), B.copy()
    gnn = g[n - 1, n - 1]
    last = n - 1
    for k in range(n - 1):
        for l in range(n - 1):
            g2[k, l] = g[k, l] - (g[k, last] * g[last, l] - B[k, last] * B[l, last]) / gnn
            B2[k, l] = B[k, l] + (g[k, last] * B[l, last] - g[l, last] * B[k, last]) / gnn
        g2[k, last] = g2[last, k] = -B[k, last] / gnn
        B2[k, last] = -g[k, last] / gnn
        B2[last, k] = -B2[k, last]
    g2[last, last] = 1 / gnn
    B2[last, last] = 0 * gnn
    return g2, B2


def tdualize_metric(G: GeneralisedMetric, ctx: DualityContext, route: str = "buscher") -> GeneralisedMetric:
    """The dual metric, whose V+ is M(V+)."""
    G = _coerce_metric(G, ctx)
    if G.dim != ctx.n:
        raise DimensionMismatch("metric and duality context dimensions differ")
    if route == "eigen":
        return from_splitting(ctx.M @ G.Vplus)
    if route != "buscher":
        raise ValueError(f"unknown route {route!r}")
    S = ctx.adapted_basis
    if not G.exact:
        S = linalg.to_float(S)
    g_ad, B_ad = S.T @ G.g @ S, S.T @ G.B @ S
    g2, B2 = buscher(g_ad, B_ad)
    S_inv = linalg.inv(S)
    return GeneralisedMetric(S_inv.T @ g2 @ S_inv, S_inv.T @ B2 @ S_inv)


def tdualize_spinor(rho: Form, ctx: DualityContext) -> Form:
    if rho.dim != ctx.n:
        raise DimensionMismatch("form and duality context dimensions differ")
    return spinor_action(ctx.element, rho)


def tdualize_dilaton(phi, g, ctx: DualityContext):
    """phi - ln|X|_g; keeps the Dilaton form when given one."""
    g = np.asarray(g)
    X = ctx.X
    norm2 = X @ g @ X
    if isinstance(phi, Dilaton):
        if phi.exact and ctx.exact and linalg.is_exact(g):
            return Dilaton(phi.constant, Fraction(phi.log_arg) / Fraction(norm2))
        return Dilaton(float(phi.constant), float(phi.log_arg) / float(norm2))
    return float(phi) - 0.5 * math.log(float(norm2))


def tdualize_pair(p: IsotropicPair, G: GeneralisedMetric, ctx: DualityContext,
                  canonical: bool = True, tol: float = 1e-9) -> IsotropicPair:
    """Pair whose spinor spans the same half-line as the dual of tau_{L,F}.

    The annihilator of the dual spinor is M applied to the annihilator of
    tau_{L,F}; the orientation is read off by comparing spinors.
    """
    G = _coerce_metric(G, ctx)
    exact = ctx.exact and p.exact and G.exact
    if not exact:
        p = p.to_float()
    W = pair_annihilator(p, G.g if exact else linalg.to_float(G.g))
    M = ctx.M if exact else linalg.to_float(ctx.M)
    dual = subspace_to_pair(M @ W, tol, canonical=canonical)
    G_dual = tdualize_metric(G, ctx)
    rho = tdualize_spinor(tau_direction(p, G.g), ctx if exact else _float_ctx(ctx))
    _, oriented = orient_like(dual, rho.to_float(), linalg.to_float(G_dual.g))
    return oriented


def _float_ctx(ctx: DualityContext) -> DualityContext:
    if not ctx.exact:
        return ctx
    return DualityContext(linalg.to_float(ctx.X), linalg.to_float(ctx.theta))


def rank_shift(p: IsotropicPair, ctx: DualityContext, tol: float = 1e-9) -> int:
    """-1 when X lies in L, +1 otherwise."""
    L = linalg.to_float(p.L)
    X = linalg.to_float(ctx.X)
    if p.k == 0:
        return 1
    residual = X - L @ np.linalg.lstsq(L, X, rcond=None)[0]
    scale = max(1.0, float(np.linalg.norm(X)))
    r = float(np.linalg.norm(residual)) / scale
    if tol < r < 1e3 * tol:
        raise PreconditionError(f"X is neither clearly in L nor clearly outside it (distance {r:.3g})")
    return -1 if r <= tol else 1


def random_context(rng: np.random.Generator, n: int) -> DualityContext:
    X = rng.standard_normal(n)
    r = rng.standard_normal(n)
    r -= (r @ X) / (X @ X) * X
    # theta(X) = 1 with a bounded component off X keeps the adapted basis well conditioned
    theta = X / (X @ X) + 0.5 * r / np.linalg.norm(X)
    return DualityContext(X, theta)
