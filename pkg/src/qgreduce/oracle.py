"""Direct eigenvalue solver for the quantum graph via the secular matrix.

On every edge an eigenfunction is ``f_e = a_e c(x; z) + b_e s(x; z)``.  Its
vertex traces are linear in the ``2|E|`` unknowns ``(a_e, b_e)``, and the
vertex conditions ``A_v Phi_v xi = B_v Phi_v xi'`` stack into a square
matrix whose rank drops exactly at eigenvalues.  Nothing here depends on
the dimension-reduction machinery; the conditions are taken in the
``(A, B)`` form written directly from the vertex rules.
"""
from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalCheckError
from .graph import MetricGraph
from .ode import transfer
from .results import SpectralEntry, SpectralResult

RANK_DROP = 1e-8
MULTIPLICITY = 1e-6
MERGE_TOL = 1e-9
DEFAULT_STEPS = 2048
MAX_DEPTH = 6
LIPSCHITZ_SAFETY = 1.5


class ScanResolutionWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class SecularMatrix:
    """Stack of secular matrices, shape ``(..., 2|E|, 2|E|)``; columns ``(a_e, b_e)`` per edge."""

    z: np.ndarray
    matrix: np.ndarray

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.matrix, compute_uv=False)

    def null_vector(self) -> np.ndarray:
        """Right singular vector of the smallest singular value (scalar ``z`` only)."""
        _, _, vh = np.linalg.svd(self.matrix)
        return vh[-1].conj()


def _vertex_blocks(g: MetricGraph):
    """Per vertex: (slot rows, A, B) with ``A xi = B xi'`` in the vertex's deck order."""
    out = []
    deck = g.deck
    for v in g.vertices:
        rows = np.arange(len(deck))[deck.blocks[v]]
        A, B = g.couplings[v].ab_form(g.degree(v))
        out.append((rows, A, B))
    return out


def _trace_maps(g: MetricGraph, c, s, cp, sp):
    """Value and inward-derivative traces, shape ``(N, slots, unknowns)``."""
    deck = g.deck
    N = np.shape(c)[0]
    G = np.zeros((N, len(deck), 2 * len(g.edges)), dtype=complex)
    Gp = np.zeros_like(G)
    for k in range(len(deck)):
        e = deck.edge_of[k]
        ia, ib = 2 * e, 2 * e + 1
        if deck.is_tail[k]:
            G[:, k, ia] = 1.0
            Gp[:, k, ib] = 1.0
        else:
            G[:, k, ia] = c
            G[:, k, ib] = s
            Gp[:, k, ia] = -cp
            Gp[:, k, ib] = -sp
    if g.is_magnetic:
        phi = np.exp(1j * deck.phase)[None, :, None]
        G = phi * G
        Gp = phi * Gp
    return G, Gp


def _assemble(g: MetricGraph, G, Gp):
    rows = []
    for slots, A, B in _vertex_blocks(g):
        rows.append(np.einsum("ij,njk->nik", A, G[:, slots]) - np.einsum("ij,njk->nik", B, Gp[:, slots]))
    return np.concatenate(rows, axis=1)


def secular_matrix(g: MetricGraph, z, derivative: bool = False):
    """Secular matrices at one or many spectral parameters ``z``.

    With ``derivative=True`` returns ``(S, dS/dz)``, both :class:`SecularMatrix`.
    """
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    tm = transfer(g.potential, g.length, z_arr, want_dz=derivative)
    S = _assemble(g, *_trace_maps(g, tm.c, tm.s, tm.cp, tm.sp))
    out = [S]
    if derivative:
        # the trace maps are affine in (c, s, c', s'); drop the constant part
        G, Gp = _trace_maps(g, tm.dc_dz, tm.ds_dz, tm.dcp_dz, tm.dsp_dz)
        G0, Gp0 = _trace_maps(g, *(np.zeros_like(tm.c),) * 4)
        out.append(_assemble(g, G - G0, Gp - Gp0))
    if np.ndim(z) == 0:
        out = [SecularMatrix(z_arr[0], m[0]) for m in out]
    else:
        out = [SecularMatrix(z_arr, m) for m in out]
    return tuple(out) if derivative else out[0]


def relative_sigma_min(g: MetricGraph, z) -> np.ndarray:
    sv = secular_matrix(g, z).singular_values()
    return sv[..., -1] / sv[..., 0]


_INV_PHI = (np.sqrt(5.0) - 1) / 2


def golden_minimize(f, lo, hi, rtol: float = 1e-14, max_iter: int = 200):
    """Lockstep golden-section minimization of a batched function on brackets ``[lo, hi]``.

    ``f`` maps an array of abscissae to an array of values.  Works for
    V-shaped minima (no smoothness assumed), which is what ``sigma_min``
    looks like at a rank drop.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    if lo.size == 0:
        return lo
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if np.all(hi - lo <= rtol * (1 + np.abs(lo))):
            break
        left = f1 < f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        keep_x = np.where(left, x1, x2)
        keep_f = np.where(left, f1, f2)
        new = np.where(left, hi - _INV_PHI * (hi - lo), lo + _INV_PHI * (hi - lo))
        fn = f(new)
        x1 = np.where(left, new, keep_x)
        f1 = np.where(left, fn, keep_f)
        x2 = np.where(left, keep_x, new)
        f2 = np.where(left, keep_f, fn)
    return np.where(f1 < f2, x1, x2)


def _probe(g, z):
    """``sigma_min / sigma_max``, ``sigma_min`` and a local Lipschitz bound for ``sigma_min``."""
    S, dS = secular_matrix(g, z, derivative=True)
    sv = S.singular_values()
    if not np.all(np.isfinite(sv)):
        raise NumericalCheckError("secular matrix produced non-finite singular values during the scan")
    lip = np.linalg.norm(dS.matrix, axis=(-2, -1))
    return sv[:, -1] / sv[:, 0], sv[:, -1], lip


def _scan(g, a, b, steps, max_depth=MAX_DEPTH, split=8):
    """Scan with cell certification, then refine every local minimum of sigma_min.

    A cell ``[z0, z1]`` can only contain a rank drop if
    ``sigma_min(z0) + sigma_min(z1) <= L (z1 - z0)`` with ``L`` bounding
    ``|d sigma_min / dz| <= ||dS/dz||``; such cells are split until the bound
    excludes a hidden root or the depth budget runs out.
    """
    pts = np.linspace(a, b, steps + 1)
    r, smin, lip = _probe(g, pts)
    for _ in range(max_depth):
        L = LIPSCHITZ_SAFETY * np.maximum(lip[:-1], lip[1:])
        open_cells = np.flatnonzero(smin[:-1] + smin[1:] <= L * np.diff(pts))
        if open_cells.size == 0:
            break
        new = np.concatenate([np.linspace(pts[i], pts[i + 1], split + 1)[1:-1] for i in open_cells])
        r2, s2, l2 = _probe(g, new)
        order = np.argsort(np.concatenate([pts, new]), kind="stable")
        pts = np.concatenate([pts, new])[order]
        r = np.concatenate([r, r2])[order]
        smin = np.concatenate([smin, s2])[order]
        lip = np.concatenate([lip, l2])[order]
    interior = np.flatnonzero((r[1:-1] <= r[:-2]) & (r[1:-1] <= r[2:])) + 1
    lo, hi = pts[interior - 1], pts[interior + 1]
    # a falling slope at either end of the scan may hide a root inside the first/last cell
    if r[0] < r[1]:
        lo, hi = np.append(lo, pts[0]), np.append(hi, pts[1])
    if r[-1] < r[-2]:
        lo, hi = np.append(lo, pts[-2]), np.append(hi, pts[-1])
    found = golden_minimize(lambda z: relative_sigma_min(g, z), lo, hi)
    # a minimum pinned to a bracket end is a grazing slope, not a root
    width = hi - lo
    ok = (found > lo + 1e-6 * width) & (found < hi - 1e-6 * width)
    return list(found[ok]), pts


def _merge(roots):
    roots = sorted(roots)
    merged = []
    for z in roots:
        if merged and abs(z - merged[-1]) <= MERGE_TOL * (1 + abs(z)):
            continue
        merged.append(z)
    return merged


def oracle_spectrum(g: MetricGraph, interval: tuple[float, float], steps: int = DEFAULT_STEPS,
                    collar: float | None = None) -> SpectralResult:
    """Eigenvalues of the quantum graph in the open interval by rank-drop search."""
    a, b = map(float, interval)
    if not a < b:
        raise ValueError("interval must satisfy a < b")
    if collar is None:
        collar = 1e-7 * (1 + max(abs(a), abs(b)))
    lo, hi = a + collar, b - collar
    roots, pts = _scan(g, lo, hi, steps)
    roots = _merge(roots)
    notes = []
    # roots sharing a scan cell neighbourhood after refinement are flagged
    for z1, z2 in zip(roots[:-1], roots[1:]):
        k = np.searchsorted(pts, z1)
        local = pts[min(k, len(pts) - 1)] - pts[max(k - 1, 0)]
        if z2 - z1 < 10 * local:
            msg = f"roots {z1:.12g} and {z2:.12g} are closer than ten local scan steps"
            notes.append(msg)
            _warnings.warn(msg, ScanResolutionWarning, stacklevel=2)
    entries = []
    for z in roots:
        sv = secular_matrix(g, z).singular_values()
        rel = sv[-1] / sv[0]
        if rel >= RANK_DROP:
            continue
        mult = int(np.sum(sv < MULTIPLICITY * sv[0]))
        entries.append(SpectralEntry(z, mult, None, "oracle", float(rel)))
    return SpectralResult(tuple(entries), (a, b), (), tuple(notes))


# -- comparison -------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonReport:
    pairs: tuple[tuple[float, float], ...]  # (reduced z, oracle z)
    max_deviation: float
    max_scaled_deviation: float  # |dz| / (1 + |z|)
    multiplicity_mismatches: tuple[tuple[float, int, int], ...]
    unmatched_reduced: tuple[float, ...]
    unmatched_oracle: tuple[float, ...]
    tolerance: float
    relative: bool
    passed: bool = field(default=False)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}: {len(self.pairs)} matched, max |dz| = {self.max_deviation:.3e}, "
                f"{len(self.multiplicity_mismatches)} multiplicity mismatches, "
                f"{len(self.unmatched_reduced)} + {len(self.unmatched_oracle)} unmatched")


def compare(reduced: SpectralResult, oracle: SpectralResult, z_tol: float = 1e-8,
            relative: bool = True) -> ComparisonReport:
    """Greedy nearest-neighbour matching of two spectral lists.

    With ``relative=True`` a pair passes when ``|dz| <= z_tol (1 + |z|)``.
    """
    R, O = list(reduced.entries), list(oracle.entries)
    cand = sorted(
        ((abs(r.z - o.z), i, j) for i, r in enumerate(R) for j, o in enumerate(O)),
        key=lambda t: t[0],
    )
    used_r, used_o, pairs = set(), set(), []
    for d, i, j in cand:
        if i in used_r or j in used_o:
            continue
        limit = z_tol * (1 + abs(R[i].z)) if relative else z_tol
        if d > max(limit, 1e3 * z_tol * (1 + abs(R[i].z))):
            continue  # too far to be the same eigenvalue; report both as unmatched
        used_r.add(i)
        used_o.add(j)
        pairs.append((i, j))
    pairs.sort()
    devs = [abs(R[i].z - O[j].z) for i, j in pairs]
    scaled = [d / (1 + abs(R[i].z)) for d, (i, j) in zip(devs, pairs)]
    mism = tuple((R[i].z, R[i].multiplicity, O[j].multiplicity)
                 for i, j in pairs if R[i].multiplicity != O[j].multiplicity)
    un_r = tuple(R[i].z for i in range(len(R)) if i not in used_r)
    un_o = tuple(O[j].z for j in range(len(O)) if j not in used_o)
    max_dev = max(devs, default=0.0)
    max_scaled = max(scaled, default=0.0)
    within = (max_scaled if relative else max_dev) <= z_tol
    return ComparisonReport(
        pairs=tuple((R[i].z, O[j].z) for i, j in pairs),
        max_deviation=max_dev, max_scaled_deviation=max_scaled,
        multiplicity_mismatches=mism, unmatched_reduced=un_r, unmatched_oracle=un_o,
        tolerance=z_tol, relative=relative,
        passed=bool(within and not mism and not un_r and not un_o),
    )
