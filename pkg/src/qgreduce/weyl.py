"""Weyl matrices and the reduction of a quantum-graph spectrum to a discrete one.

For a graph whose vertex unitaries share a single eigenvalue ``theta``
besides ``-1``, the projected Weyl function factorizes as

    M_P(z) - alpha = (eta(z) - T) / n(z)

with a scalar pair ``(eta, n)`` built from the edge transfer data and a
discrete self-adjoint operator ``T`` (the weighted adjacency operator,
its magnetic version or a projected deck shift).  Eigenvalues of the
graph inside a gap ``J`` of the reference spectrum are then the preimages
``eta^{-1}(lambda)`` of the eigenvalues ``lambda`` of ``T``, with equal
multiplicities.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .coupling import ScalarCondition, check_scalar_condition
from .discrete import (
    EigenDecomposition, block_basis, deck_shift, hermitian_eigs, magnetic_adjacency,
    projected_shift, symmetrize,
)
from .errors import NumericalCheckError, PreconditionError, SymmetryError
from .graph import MetricGraph, Potential
from .ode import check_symmetric_potential, reference_spectrum, transfer
from .results import SpectralEntry, SpectralResult

PIVOT_TOL = 1e-13
BOUNDARY_TOL = 1e-9
K_GRID = 512
TAIL_FRACTION_TOL = 1e-10


# -- edge and deck Weyl matrices ------------------------------------------------

@dataclass(frozen=True)
class EdgeWeylMatrix:
    m_ii: complex
    m_it: complex
    m_ti: complex
    m_tt: complex
    triple: str

    def matrix(self) -> np.ndarray:
        return np.array([[self.m_ii, self.m_it], [self.m_ti, self.m_tt]])


def edge_weyl(triple: str, potential: Potential, l: float, z) -> EdgeWeylMatrix:
    """2x2 Weyl matrix of one edge for the Dirichlet- or Neumann-based triple."""
    tm = transfer(potential, l, z)
    if triple == "dirichlet":
        pivot = tm.s
        entries = (-tm.c, 1.0, 1.0, -tm.sp)
    elif triple == "neumann":
        pivot = tm.cp
        entries = (tm.sp, 1.0, 1.0, tm.c)
    else:
        raise ValueError(f"unknown triple {triple!r}")
    if np.any(np.abs(pivot) < PIVOT_TOL):
        raise NumericalCheckError(f"z={z} lies on the {triple} reference spectrum")
    m = [np.asarray(e) / pivot for e in entries]
    if np.ndim(z) == 0:
        m = [complex(x) for x in m]
    return EdgeWeylMatrix(*m, triple=triple)


def full_weyl(g: MetricGraph, z: complex, triple: str = "dirichlet", magnetic: bool = True) -> np.ndarray:
    """Deck-space Weyl matrix ``M(z)`` assembled slot by slot.

    Slot ``(v, e, end)`` couples to itself through ``m_{end,end}`` and to its
    partner through ``m_{end,other}``.  Magnetic phases enter as
    ``Phi M Phi*``.
    """
    w = edge_weyl(triple, g.potential, g.length, z)
    deck = g.deck
    n = len(deck)
    M = np.zeros((n, n), dtype=complex)
    rows = np.arange(n)
    M[rows, rows] = np.where(deck.is_tail, w.m_ii, w.m_tt)
    M[rows, deck.partner] = np.where(deck.is_tail, w.m_it, w.m_ti)
    if magnetic and g.is_magnetic:
        phi = np.exp(1j * deck.phase)
        M = phi[:, None] * M * phi.conj()[None, :]
    return M


# -- reduction context ------------------------------------------------------------

@dataclass(frozen=True)
class KInterval:
    """``K = eta^{-1}([inf spec T, sup spec T]) & J`` with the diagnostics collected on it."""

    lo: float
    hi: float
    direction: int  # sign of eta' on K
    clipped: tuple[bool, bool]  # whether each end is an end of J
    eta_range: tuple[float, float]  # eta(K), sorted
    min_abs_deta: float
    sign_law: bool  # sign eta' == sign n on the grid
    grid: np.ndarray = field(repr=False)

    @property
    def empty(self) -> bool:
        return not self.lo < self.hi


@dataclass(frozen=True, eq=False)
class ReductionContext:
    """Everything needed to reduce the spectrum of ``g`` inside the gap ``J``."""

    graph: MetricGraph
    family: str  # delta | delta_prime | delta_prime_s | tail_fraction | custom
    scalar: ScalarCondition
    triple: str
    alpha: float
    kappa: float
    sign: int
    symmetric: bool
    basis: np.ndarray  # deck isometry onto ran P
    T: np.ndarray
    eig: EigenDecomposition
    J: tuple[float, float]
    reference: tuple[float, ...]  # reference eigenvalues up to (and just past) J
    delta_type: bool  # every P_v is the projector onto the constant vector

    @property
    def theta(self):
        return self.scalar.theta

    @property
    def reduced_dimension(self) -> int:
        return self.basis.shape[1]

    # -- scalar functions --

    def _parts(self, z, want_dz):
        return transfer(self.graph.potential, self.graph.length, z, want_dz=want_dz)

    def eta(self, z, derivative: bool = False):
        """``eta(z)``, or ``(eta(z), eta'(z))`` with ``derivative=True``."""
        tm = self._parts(z, derivative)
        a, k = self.alpha, self.kappa
        if self.triple == "dirichlet":
            val = a * tm.s + k * tm.c + (1 - k) * tm.sp
            der = (a * tm.ds_dz + k * tm.dc_dz + (1 - k) * tm.dsp_dz) if derivative else None
        else:
            val = a * tm.cp - k * tm.sp - (1 - k) * tm.c
            der = (a * tm.dcp_dz - k * tm.dsp_dz - (1 - k) * tm.dc_dz) if derivative else None
        val = self.sign * val
        if derivative:
            return val, self.sign * der
        return val

    def n(self, z, derivative: bool = False):
        tm = self._parts(z, derivative)
        if self.triple == "dirichlet":
            val, der = -tm.s, (-tm.ds_dz if derivative else None)
        else:
            val, der = -tm.cp, (-tm.dcp_dz if derivative else None)
        if derivative:
            return self.sign * val, self.sign * der
        return self.sign * val

    def eta_from_weyl(self, z):
        """``(alpha - kappa m_ii - (1-kappa) m_tt) / m_it`` straight from the edge Weyl matrix."""
        w = edge_weyl(self.triple, self.graph.potential, self.graph.length, z)
        k = self.kappa
        return self.sign * (self.alpha - k * w.m_ii - (1 - k) * w.m_tt) / w.m_it

    def projected_weyl(self, z) -> np.ndarray:
        """``M_P(z) = P M(z) P*`` in the basis of ``ran P``."""
        M = full_weyl(self.graph, z, self.triple)
        return self.basis.conj().T @ M @ self.basis

    def weyl_residual(self, z) -> float:
        """``|| (M_P - alpha) - (eta - T)/n ||`` at ``z``: the factorization defect."""
        Mp = self.projected_weyl(z) - self.alpha * np.eye(self.reduced_dimension)
        T = self.T_deck
        rhs = (self.eta(z) * np.eye(self.reduced_dimension) - T) / self.n(z)
        return float(np.linalg.norm(Mp - rhs))

    @property
    def T_deck(self) -> np.ndarray:
        """``sign * D_P`` written in the basis of ``ran P``."""
        D = deck_shift(self.graph, magnetic=self.graph.is_magnetic)
        return self.sign * projected_shift(D, self.basis)


def _family(g: MetricGraph, symmetric: bool) -> str:
    kinds = {g.couplings[v].kind for v in g.vertices}
    if not symmetric:
        return "tail_fraction"
    if len(kinds) == 1:
        kind = kinds.pop()
        if kind in ("delta", "delta_prime", "delta_prime_s"):
            return kind
    return "custom"


def _is_delta_type(g: MetricGraph, scalar: ScalarCondition) -> bool:
    for v in g.vertices:
        nc = scalar.normalized[v]
        d = g.degree(v)
        if nc.rank != 1 or np.linalg.norm(nc.P - np.ones((d, d)) / d) > 1e-12:
            return False
    return True


def _reference_through(potential, l, kind, b, z_min=None, cap=4096):
    """Reference eigenvalues up to the first one at or beyond ``b``."""
    count = 4
    while True:
        gl = reference_spectrum(potential, l, count, kind, z_min)
        if gl.values[-1] >= b or count >= cap:
            return gl
        count *= 2


def build_context(g: MetricGraph, gap: int | None = None,
                  interval: tuple[float, float] | None = None,
                  z_min: float | None = None, triple: str | None = None) -> ReductionContext:
    """Check the reduction hypotheses on ``g`` and set up the reduced problem.

    Exactly one of ``gap`` (index into the reference gap list, 0 = lowest)
    or ``interval`` (an open interval free of reference eigenvalues) is
    required.  Raises :class:`PreconditionError` subclasses when a
    hypothesis fails.
    """
    if (gap is None) == (interval is None):
        raise ValueError("give exactly one of gap or interval")
    scalar = check_scalar_condition(g, triple)
    triple = scalar.triple
    ref_kind = triple  # Dirichlet-based triple -> sigma_D, Neumann-based -> sigma_N
    symmetric = check_symmetric_potential(g.potential, g.length)

    Q = block_basis(g, scalar.normalized)
    kappa = 1.0
    if Q.shape[1]:
        tail_part = Q.conj().T @ (np.asarray(g.deck.is_tail, dtype=float)[:, None] * Q)
        k0 = float(np.real(np.trace(tail_part))) / Q.shape[1]
        uniform = np.linalg.norm(tail_part - k0 * np.eye(Q.shape[1])) <= TAIL_FRACTION_TOL
        if not symmetric:
            if not uniform:
                raise SymmetryError(
                    "the potential is not symmetric (V(x) != V(l-x)) and the outgoing "
                    "fraction of the coupling ranges is not uniform, so the projected "
                    "Weyl function does not factor through a scalar; run the oracle instead"
                )
            kappa = k0

    sign = -1 if all(g.couplings[v].kind == "delta_prime_s" for v in g.vertices) else 1
    delta_type = _is_delta_type(g, scalar)
    D = deck_shift(g, magnetic=g.is_magnetic)
    DP = projected_shift(D, Q)
    if delta_type:
        T = symmetrize(magnetic_adjacency(g), g.degrees)
        if np.linalg.norm(T - DP) > 1e-12:
            raise NumericalCheckError("projected deck shift and adjacency operator disagree")
    else:
        T = DP
    T = sign * T
    if not g.is_magnetic:
        T = T.real if np.allclose(T.imag, 0) else T
    eig = hermitian_eigs(T)

    if gap is not None:
        gl = reference_spectrum(g.potential, g.length, gap + 1, ref_kind, z_min)
        J = gl.gap(gap)
        ref = gl.values
    else:
        a, b = map(float, interval)
        if not a < b:
            raise ValueError("interval must satisfy a < b")
        gl = _reference_through(g.potential, g.length, ref_kind, b, z_min)
        inside = [v for v in gl.values if a <= v <= b]
        if inside:
            raise PreconditionError(
                f"interval ({a}, {b}) contains {ref_kind} reference eigenvalues {inside}; "
                "the reduction only applies inside a gap"
            )
        J, ref = (a, b), gl.values

    ctx = ReductionContext(
        graph=g, family=_family(g, symmetric), scalar=scalar, triple=triple,
        alpha=scalar.alpha, kappa=kappa, sign=sign, symmetric=symmetric, basis=Q,
        T=T, eig=eig, J=J, reference=ref, delta_type=delta_type,
    )
    grid = np.linspace(J[0], J[1], K_GRID)[1:-1]
    nv = ctx.n(grid).real
    if np.any(np.abs(nv) < 1e-12):
        raise PreconditionError("n(z) vanishes inside J")
    return ctx


# -- K and the inverse ------------------------------------------------------------

def _eta_real(ctx, z):
    return np.real(ctx.eta(np.asarray(z, dtype=float)))


def _scan_grid(J, n=K_GRID):
    a, b = J
    pad = 1e-12 * (1 + abs(a) + abs(b))
    return np.linspace(a + pad, b - pad, n)


def locate_K(ctx: ReductionContext, n_grid: int = K_GRID) -> KInterval:
    """Find ``K`` inside ``J`` and check connectivity, monotonicity and the sign law."""
    J = ctx.J
    grid = _scan_grid(J, n_grid)
    val, der = ctx.eta(grid, derivative=True)
    val, der = val.real, der.real
    # refine around points where eta' is small relative to its typical size
    typical = np.median(np.abs(der))
    weak = np.flatnonzero(np.abs(der) < 1e-2 * typical)
    if weak.size:
        extra = []
        for i in weak:
            lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
            extra.append(np.linspace(lo, hi, 17))
        grid = np.unique(np.concatenate([grid] + extra))
        val, der = ctx.eta(grid, derivative=True)
        val, der = val.real, der.real
    if ctx.reduced_dimension == 0:
        return KInterval(J[0], J[0], 0, (False, False), (0.0, 0.0), 0.0, True, grid)
    t_lo, t_hi = ctx.eig.bounds
    hit = (val >= t_lo) & (val <= t_hi)
    runs = np.split(np.flatnonzero(hit), np.flatnonzero(np.diff(np.flatnonzero(hit)) > 1) + 1)
    # runs that only touch an end of S_T within rounding are grazing contacts, not part of K
    grazing = lambda r: np.all(np.minimum(np.abs(val[r] - t_lo), np.abs(val[r] - t_hi)) <= BOUNDARY_TOL)
    runs = [r for r in runs if r.size and not grazing(r)]
    if not runs:
        return KInterval(J[0], J[0], 0, (False, False), (0.0, 0.0), 0.0, True, grid)
    if len(runs) > 1:
        raise PreconditionError("the set eta^{-1}(S_T) inside J is not connected")
    idx = runs[0]
    signs = np.sign(der[idx])
    if np.any(signs != signs[0]) or signs[0] == 0:
        raise PreconditionError("eta' changes sign on K; eta is not monotone there")
    direction = int(signs[0])
    nvals = np.real(ctx.n(grid[idx]))
    sign_law = bool(np.all(np.sign(nvals) == signs))

    def end(i_in, i_out):
        if i_out < 0 or i_out >= len(grid):
            return (J[0] if i_out < 0 else J[1]), True
        outside = val[i_out]
        level = t_lo if outside < t_lo else t_hi
        if i_out in (0, len(grid) - 1) and abs(outside - level) <= BOUNDARY_TOL:
            # eta leaves S_T only by rounding at the end of J: the end is clipped
            return (J[0] if i_out == 0 else J[1]), True
        f = lambda z: _eta_real(ctx, z) - level
        za, zb = sorted((grid[i_in], grid[i_out]))
        fa, fb = f(za), f(zb)
        if fa == 0:
            return za, False
        if fb == 0:
            return zb, False
        if np.sign(fa) == np.sign(fb):  # grazing within tolerance
            return grid[i_in], False
        return brentq(f, za, zb, xtol=1e-14, rtol=4 * np.finfo(float).eps), False

    lo, clip_lo = end(idx[0], idx[0] - 1)
    hi, clip_hi = end(idx[-1], idx[-1] + 1)
    e_lo, e_hi = float(_eta_real(ctx, lo)), float(_eta_real(ctx, hi))
    # at a clipped end eta' may vanish with eta(end) = +-1; the collar there is excluded
    keep = np.ones(idx.size, dtype=bool)
    for clipped, e_end in ((clip_lo, e_lo), (clip_hi, e_hi)):
        if clipped:
            keep &= np.abs(val[idx] - e_end) > BOUNDARY_TOL
    min_deta = float(np.min(np.abs(der[idx][keep]))) if keep.any() else 0.0
    return KInterval(
        lo=float(lo), hi=float(hi), direction=direction, clipped=(clip_lo, clip_hi),
        eta_range=(min(e_lo, e_hi), max(e_lo, e_hi)),
        min_abs_deta=min_deta, sign_law=sign_law, grid=grid[idx],
    )


class BoundaryCase(ValueError):
    """``lambda`` is within tolerance of ``eta`` at an end of ``J``."""


def preimage(ctx: ReductionContext, lam: float, K: KInterval | None = None) -> float:
    """The unique ``z`` in ``K`` with ``eta(z) = lam``."""
    K = K or locate_K(ctx)
    if K.empty:
        raise ValueError("K is empty")
    for end, clipped in zip(ctx.J, K.clipped):
        if clipped and abs(_eta_real(ctx, end) - lam) <= BOUNDARY_TOL:
            raise BoundaryCase(f"lambda={lam} meets eta at the end z={end} of J")
    lo_v, hi_v = K.eta_range
    if lam < lo_v - BOUNDARY_TOL or lam > hi_v + BOUNDARY_TOL:
        raise ValueError(f"lambda={lam} is outside eta(K)=[{lo_v}, {hi_v}]")
    f = lambda z: _eta_real(ctx, z) - lam
    fa, fb = f(K.lo), f(K.hi)
    if fa == 0:
        return K.lo
    if fb == 0:
        return K.hi
    if np.sign(fa) == np.sign(fb):
        return K.lo if abs(fa) <= abs(fb) else K.hi
    return float(brentq(f, K.lo, K.hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200))


def reduce_spectrum(ctx: ReductionContext, K: KInterval | None = None) -> SpectralResult:
    """Spectrum of the graph inside ``J`` as preimages of the discrete spectrum."""
    K = K or locate_K(ctx)
    entries, boundary, warnings = [], [], []
    if K.empty:
        warnings.append("spec T does not meet eta(J): no spectrum in J")
        return SpectralResult((), ctx.J, (), tuple(warnings))
    for lam, mult, _ in ctx.eig.clusters:
        try:
            z = preimage(ctx, lam, K)
        except BoundaryCase:
            boundary.append(lam)
            continue
        except ValueError:
            continue  # lam outside eta(J)
        residual = abs(float(_eta_real(ctx, z)) - lam)
        entries.append(SpectralEntry(float(z), mult, float(lam), "reduced", residual))
    entries.sort(key=lambda e: e.z)
    return SpectralResult(tuple(entries), ctx.J, tuple(boundary), tuple(warnings))


def reduce(g: MetricGraph, gap: int | None = None, interval=None, **kw) -> SpectralResult:
    return reduce_spectrum(build_context(g, gap=gap, interval=interval, **kw))
