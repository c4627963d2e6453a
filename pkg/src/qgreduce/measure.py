"""Numerical checks of the spectral-measure identities behind the reduction.

Two routes to the spectral measure of ``N(z) = -(M_P(z) - alpha)^{-1}`` on a
Borel set ``B`` inside the gap:

* left: Stieltjes inversion, ``(1/2 pi i) int_B (N(x+ie) - N(x+ie)^*) dx``,
  with ``N`` built from the full deck Weyl matrix;
* right: ``sum_{z_k in B} n(z_k) / eta'(z_k) E_k`` assembled from the
  discrete eigenpairs and the scalar functions of the reduction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import NumericalCheckError
from .weyl import BoundaryCase, KInterval, ReductionContext, edge_weyl, locate_K, preimage

DEFAULT_LADDER = (1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4)
GL_NODES = 32
QUAD_TOL = 1e-10
MAX_PANELS = 1 << 15

_X, _W = np.polynomial.legendre.leggauss(GL_NODES)


# -- quadrature -------------------------------------------------------------------

def composite_gauss(f, a: float, b: float, panels: int):
    """Composite Gauss–Legendre rule; ``f`` maps an array of nodes to an array ``(n, ...)``."""
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * _X[None, :]).ravel()
    w = (half[:, None] * _W[None, :]).ravel()
    vals = f(x)
    return np.tensordot(w, vals, axes=1)


def doubling_quadrature(f, a: float, b: float, panels: int, tol: float = QUAD_TOL,
                        cap: int = MAX_PANELS):
    """Double the panel count until two successive results agree to ``tol`` (relative).

    Returns ``(value, panels)``.
    """
    prev = composite_gauss(f, a, b, panels)
    while True:
        if 2 * panels > cap:
            raise NumericalCheckError(f"quadrature did not converge with {cap} panels")
        panels *= 2
        cur = composite_gauss(f, a, b, panels)
        scale = max(np.max(np.abs(cur)), 1e-300)
        if np.max(np.abs(cur - prev)) <= tol * max(scale, 1.0):
            return cur, panels
        prev = cur


def _start_panels(a, b, eps, previous=1):
    need = int(np.ceil((b - a) / (16 * eps)))
    p = 1
    while p < max(need, previous):
        p *= 2
    return p


# -- batched Weyl function ---------------------------------------------------------

def projected_weyl_batch(ctx: ReductionContext, z: np.ndarray) -> np.ndarray:
    """``M_P(z)`` for an array of ``z``, shape ``(len(z), r, r)``."""
    g = ctx.graph
    w = edge_weyl(ctx.triple, g.potential, g.length, np.asarray(z, dtype=complex))
    deck = g.deck
    n = len(deck)
    rows = np.arange(n)
    M = np.zeros((len(z), n, n), dtype=complex)
    M[:, rows, rows] = np.where(deck.is_tail[None, :], w.m_ii[:, None], w.m_tt[:, None])
    M[:, rows, deck.partner] = np.where(deck.is_tail[None, :], w.m_it[:, None], w.m_ti[:, None])
    if g.is_magnetic:
        phi = np.exp(1j * deck.phase)
        M = phi[None, :, None] * M * phi.conj()[None, None, :]
    Q = ctx.basis
    return np.einsum("ki,nkl,lj->nij", Q.conj(), M, Q)


def N_function(ctx: ReductionContext, z) -> np.ndarray:
    """``N(z) = -(M_P(z) - alpha)^{-1}``, batched over ``z``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    Mp = projected_weyl_batch(ctx, z)
    r = ctx.reduced_dimension
    return -np.linalg.inv(Mp - ctx.alpha * np.eye(r)[None])


# -- Stieltjes inversion vs spectral assembly --------------------------------------

def stieltjes_lhs(ctx: ReductionContext, B: tuple[float, float], eps: float,
                  collar: float | None = None, panels: int = 1):
    """Approximation of the measure of ``B`` at height ``eps``.

    Returns ``(matrix, panels_used, hermiticity_defect)``.
    """
    a, b = B
    if collar is None:
        collar = 1e-4 * (b - a)

    def integrand(x):
        N = N_function(ctx, x + 1j * eps)
        return (N - np.conj(np.swapaxes(N, -1, -2))) / (2j * np.pi)

    start = _start_panels(a + collar, b - collar, eps, panels)
    S, used = doubling_quadrature(integrand, a + collar, b - collar, start)
    defect = float(np.linalg.norm(S - S.conj().T))
    return (S + S.conj().T) / 2, used, defect


def spectral_weights(ctx: ReductionContext, K: KInterval | None = None):
    """``(z_k, n(z_k)/eta'(z_k), E_k)`` for every discrete eigenvalue with a preimage in ``J``."""
    K = K or locate_K(ctx)
    out = []
    if K.empty:
        return out
    for lam, _, V in ctx.eig.clusters:
        try:
            z = preimage(ctx, lam, K)
        except (BoundaryCase, ValueError):
            continue
        eta, deta = ctx.eta(z, derivative=True)
        weight = float(np.real(ctx.n(z)) / np.real(deta))
        out.append((z, weight, V @ V.conj().T))
    return out


def stieltjes_rhs(ctx: ReductionContext, B: tuple[float, float], K: KInterval | None = None) -> np.ndarray:
    """``sum_{z_k in B} n(z_k)/eta'(z_k) E_k`` in the basis of ``ran P``."""
    a, b = B
    r = ctx.reduced_dimension
    out = np.zeros((r, r), dtype=complex)
    for z, weight, E in spectral_weights(ctx, K):
        if a < z < b:
            out += weight * E
    return out


@dataclass(frozen=True, eq=False)
class MeasureReport:
    B: tuple[float, float]
    eps: tuple[float, ...]
    lhs: tuple[np.ndarray, ...]
    rhs: np.ndarray
    discrepancies: tuple[float, ...]
    panels: tuple[int, ...]
    richardson: np.ndarray
    richardson_discrepancy: float
    rhs_norm: float
    rhs_min_eig: float
    hermiticity_defect: float
    warnings: tuple[str, ...] = field(default=())

    @property
    def monotone(self) -> bool:
        d = self.discrepancies
        return all(d[k + 1] <= d[k] * (1 + 1e-12) + 1e-14 for k in range(1, len(d) - 1))

    @property
    def richardson_ok(self) -> bool:
        return self.richardson_discrepancy <= 1e-3 * max(self.rhs_norm, 1e-300) or (
            self.rhs_norm == 0 and self.richardson_discrepancy <= 1e-6
        )

    @property
    def psd(self) -> bool:
        return self.rhs_min_eig >= -1e-10 * max(self.rhs_norm, 1.0)

    @property
    def passed(self) -> bool:
        return self.monotone and self.richardson_ok and self.psd


def measure_check(ctx: ReductionContext, B: tuple[float, float], ladder=DEFAULT_LADDER,
                  collar: float | None = None) -> MeasureReport:
    a, b = B
    J = ctx.J
    if not (J[0] <= a < b <= J[1]):
        raise ValueError(f"B={B} must lie inside J={J}")
    ladder = tuple(float(e) for e in ladder)
    if any(e2 >= e1 for e1, e2 in zip(ladder, ladder[1:])) or len(ladder) < 2:
        raise ValueError("eps ladder must hold at least two strictly decreasing values")
    K = locate_K(ctx)
    notes = []
    for z, _, _ in spectral_weights(ctx, K):
        if min(abs(z - a), abs(z - b)) < 1e-3:
            notes.append(f"eigenvalue {z:.12g} lies within 1e-3 of the end of B")
    rhs = stieltjes_rhs(ctx, B, K)
    lhs, disc, used = [], [], []
    panels = 1
    herm = 0.0
    for eps in ladder:
        S, panels, defect = stieltjes_lhs(ctx, B, eps, collar, panels)
        lhs.append(S)
        used.append(panels)
        herm = max(herm, defect)
        disc.append(float(np.linalg.norm(S - rhs, 2)))
    q = ladder[-2] / ladder[-1]
    rich = (q * lhs[-1] - lhs[-2]) / (q - 1)
    rhs_norm = float(np.linalg.norm(rhs, 2))
    min_eig = float(np.linalg.eigvalsh(rhs).min()) if rhs.size else 0.0
    return MeasureReport(
        B=(a, b), eps=ladder, lhs=tuple(lhs), rhs=rhs, discrepancies=tuple(disc),
        panels=tuple(used), richardson=rich,
        richardson_discrepancy=float(np.linalg.norm(rich - rhs, 2)),
        rhs_norm=rhs_norm, rhs_min_eig=min_eig, hermiticity_defect=herm, warnings=tuple(notes),
    )


# -- scalar kernel ------------------------------------------------------------------

@dataclass(frozen=True)
class KernelReport:
    lam: float
    I: tuple[float, float]
    eps: tuple[float, ...]
    values: tuple[float, ...]
    placement: str  # inside | endpoint | outside
    limit: float
    deviations: tuple[float, ...]


def k_I(ctx: ReductionContext, I: tuple[float, float], lam: float, eps: float, panels: int = 1):
    """``(1/pi) int_I Im[n(x+ie) / (lam - eta(x+ie))] dx``; returns ``(value, panels)``."""
    a, b = I

    def integrand(x):
        z = x + 1j * eps
        return np.imag(ctx.n(z) / (lam - ctx.eta(z))) / np.pi

    start = _start_panels(a, b, eps, panels)
    val, used = doubling_quadrature(integrand, a, b, start)
    return float(val), used


def kernel_limit(ctx: ReductionContext, I: tuple[float, float], lam: float, tol: float = 1e-9) -> tuple[str, float]:
    """Classify ``lam`` against ``eta([a, b])`` and return the limit of ``k_I`` as ``eps -> 0``."""
    a, b = I
    ea, eb = float(np.real(ctx.eta(a))), float(np.real(ctx.eta(b)))
    for end, val in ((a, ea), (b, eb)):
        if abs(lam - val) <= tol:
            _, d = ctx.eta(end, derivative=True)
            return "endpoint", 0.5 * float(np.real(ctx.n(end)) / np.real(d))
    lo, hi = min(ea, eb), max(ea, eb)
    if not lo < lam < hi:
        return "outside", 0.0
    _, d = ctx.eta(np.linspace(a, b, 257), derivative=True)
    if not (np.all(d.real > 0) or np.all(d.real < 0)):
        raise ValueError("eta is not strictly monotone on I")
    z = brentq(lambda x: float(np.real(ctx.eta(x))) - lam, a, b, xtol=1e-14)
    _, d = ctx.eta(z, derivative=True)
    return "inside", float(np.real(ctx.n(z)) / np.real(d))


def k_I_check(ctx: ReductionContext, I: tuple[float, float], lam: float,
              ladder=DEFAULT_LADDER) -> KernelReport:
    placement, limit = kernel_limit(ctx, I, lam)
    values, panels = [], 1
    for eps in ladder:
        v, panels = k_I(ctx, I, lam, eps, panels)
        values.append(v)
    return KernelReport(
        lam=float(lam), I=tuple(I), eps=tuple(ladder), values=tuple(values),
        placement=placement, limit=limit, deviations=tuple(abs(v - limit) for v in values),
    )
