"""Fundamental solutions of ``-y'' + V y = z y`` on ``[0, l]`` and reference spectra.

``c`` and ``s`` are the solutions with ``c(0) = 1, c'(0) = 0`` and
``s(0) = 0, s'(0) = 1``.  Everything downstream only needs their boundary
values at ``x = l`` (and the z-derivatives of those), collected in a
:class:`TransferMatrix`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial, pi

import numpy as np

from ._rk import integrate
from .errors import SpectrumScanError
from .graph import Potential

RTOL = 1e-12
ATOL = 1e-14
SERIES_RADIUS = 1e-2  # |z l^2| below which sin t / t uses its power series

_SERIES_N = 10
_S_COEF = np.array([(-1) ** k / factorial(2 * k + 1) for k in range(_SERIES_N)])
_C_COEF = np.array([(-1) ** k / factorial(2 * k) for k in range(_SERIES_N)])


@dataclass(frozen=True)
class TransferMatrix:
    """``c(l;z), s(l;z), c'(l;z), s'(l;z)`` and optionally their z-derivatives.

    Fields are complex scalars or arrays matching the shape of ``z``.
    """

    z: complex | np.ndarray
    c: complex | np.ndarray
    s: complex | np.ndarray
    cp: complex | np.ndarray
    sp: complex | np.ndarray
    dc_dz: complex | np.ndarray | None = None
    ds_dz: complex | np.ndarray | None = None
    dcp_dz: complex | np.ndarray | None = None
    dsp_dz: complex | np.ndarray | None = None

    @property
    def wronskian(self):
        return self.c * self.sp - self.s * self.cp

    @property
    def has_derivatives(self) -> bool:
        return self.dc_dz is not None


# -- closed form for V = 0 ------------------------------------------------------

def _sinc_parts(w):
    """``cos t``, ``sin t / t`` and ``d/dw (sin t / t)`` for ``t = sqrt(w)``, 1-d ``w``."""
    w = np.asarray(w, dtype=complex)
    cos_t, S, S_w = (np.empty_like(w) for _ in range(3))
    small = np.abs(w) < SERIES_RADIUS
    big = ~small
    t = np.sqrt(w[big])
    cos_t[big] = np.cos(t)
    S[big] = np.sin(t) / t
    S_w[big] = (cos_t[big] - S[big]) / (2 * w[big])
    if np.any(small):
        powers = w[small][None, :] ** np.arange(_SERIES_N)[:, None]
        cos_t[small] = _C_COEF @ powers
        S[small] = _S_COEF @ powers
        S_w[small] = (np.arange(1, _SERIES_N) * _S_COEF[1:]) @ powers[:-1]
    return cos_t, S, S_w


def free_transfer(l: float, z, want_dz: bool = False) -> TransferMatrix:
    """Transfer data for ``V = 0`` from ``cos(sqrt(z) x)`` and ``sin(sqrt(z) x)/sqrt(z)``."""
    z_arr = np.asarray(z, dtype=complex)
    w = z_arr * l * l
    cos_t, S, S_w = _sinc_parts(w.ravel())
    cos_t, S, S_w = (a.reshape(w.shape) for a in (cos_t, S, S_w))
    fields = dict(c=cos_t, s=l * S, cp=-z_arr * l * S, sp=cos_t)
    if want_dz:
        fields.update(
            dc_dz=-0.5 * l * l * S,
            ds_dz=l ** 3 * S_w,
            dcp_dz=-l * (S + w * S_w),
            dsp_dz=-0.5 * l * l * S,
        )
    if z_arr.ndim == 0:
        fields = {k: complex(v) for k, v in fields.items()}
        return TransferMatrix(z=complex(z_arr), **fields)
    return TransferMatrix(z=z_arr, **fields)


# -- general potential --------------------------------------------------------

def _rhs_factory(potential: Potential, z, want_dz: bool):
    def rhs(x, y):
        q = float(potential(x)) - z
        out = np.empty_like(y)
        out[0] = y[1]
        out[1] = q * y[0]
        out[2] = y[3]
        out[3] = q * y[2]
        if want_dz:
            out[4] = y[5]
            out[5] = q * y[4] - y[0]
            out[6] = y[7]
            out[7] = q * y[6] - y[2]
        return out

    return rhs


def ode_transfer(potential: Potential, l: float, z, want_dz: bool = False,
                 rtol: float = RTOL, atol: float = ATOL) -> TransferMatrix:
    """Transfer data by integrating the first-order system (and its z-variation)."""
    z_arr = np.asarray(z, dtype=complex)
    flat = z_arr.ravel()
    n = 8 if want_dz else 4
    y0 = np.zeros((n, flat.size), dtype=complex)
    y0[0] = 1.0  # c
    y0[3] = 1.0  # s'
    k_max = float(np.max(np.abs(np.sqrt(flat)))) if flat.size else 0.0
    h0 = min(l, 0.5 / (1.0 + k_max))
    y, _ = integrate(_rhs_factory(potential, flat, want_dz), y0, 0.0, l,
                     rtol=rtol, atol=atol, h0=h0)
    y = y.reshape((n,) + z_arr.shape)
    fields = dict(c=y[0], cp=y[1], s=y[2], sp=y[3])
    if want_dz:
        fields.update(dc_dz=y[4], dcp_dz=y[5], ds_dz=y[6], dsp_dz=y[7])
    if z_arr.ndim == 0:
        fields = {k: complex(v) for k, v in fields.items()}
        return TransferMatrix(z=complex(z_arr), **fields)
    return TransferMatrix(z=z_arr, **fields)


@lru_cache(maxsize=1 << 16)
def _transfer_scalar(potential: Potential, l: float, z: complex, want_dz: bool, method: str):
    if method == "closed":
        return free_transfer(l, z, want_dz)
    return ode_transfer(potential, l, z, want_dz)


def transfer(potential: Potential, l: float, z, want_dz: bool = False,
             method: str = "auto") -> TransferMatrix:
    """``c, s, c', s'`` at ``x = l`` for spectral parameter(s) ``z``.

    ``method`` is ``"ode"``, ``"closed"`` (zero potential only) or ``"auto"``
    (closed form whenever the potential vanishes).  Scalar calls are cached.
    """
    if l <= 0:
        raise ValueError("edge length must be positive")
    if method == "auto":
        method = "closed" if potential.is_zero else "ode"
    if method == "closed" and not potential.is_zero:
        raise ValueError("closed-form transfer data exist only for the zero potential")
    if method not in ("closed", "ode"):
        raise ValueError(f"unknown method {method!r}")
    if np.ndim(z) == 0:
        return _transfer_scalar(potential, float(l), complex(z), bool(want_dz), method)
    if method == "closed":
        return free_transfer(l, z, want_dz)
    return ode_transfer(potential, l, z, want_dz)


# -- reference spectra ----------------------------------------------------------

@dataclass(frozen=True)
class GapList:
    """Sorted reference eigenvalues and the open gaps between them.

    Gap 0 is ``(z_min, values[0])``; gap ``k`` is ``(values[k-1], values[k])``.
    """

    values: tuple[float, ...]
    kind: str  # "dirichlet" or "neumann"
    z_min: float

    def gaps(self) -> list[tuple[float, float]]:
        edges = (self.z_min,) + tuple(self.values)
        return list(zip(edges[:-1], edges[1:]))

    def gap(self, k: int) -> tuple[float, float]:
        if not 0 <= k < len(self.values):
            raise IndexError(f"gap {k} needs {k + 1} reference eigenvalues, have {len(self.values)}")
        return self.gaps()[k]


def default_z_min(first: float) -> float:
    return min(-1.0, first - 10.0)


def _boundary_function(kind: str):
    if kind == "dirichlet":
        return lambda tm: tm.s, lambda tm: tm.ds_dz
    if kind == "neumann":
        return lambda tm: tm.cp, lambda tm: tm.dcp_dz
    raise ValueError(f"unknown reference kind {kind!r}")


def _scan_roots(potential: Potential, l: float, count: int, kind: str,
                max_extensions: int = 8) -> np.ndarray:
    value_of, deriv_of = _boundary_function(kind)

    def f(z):
        return value_of(transfer(potential, l, np.asarray(z, dtype=float))).real

    vmin, vmax = potential.bounds(l)
    z0 = vmin - 1.0
    dk = pi / (16 * l)  # 16 samples per free-particle root spacing in sqrt(z)
    k_max = (count + 2) * pi / l + np.sqrt(vmax - vmin + 1.0)
    roots = np.empty(0)
    for _ in range(max_extensions + 1):
        k = np.arange(0.0, k_max + dk, dk)
        grid = z0 + k * k
        vals = f(grid)
        exact = np.flatnonzero(vals == 0)
        idx = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
        if idx.size + exact.size >= count:
            break
        k_max *= 2
    else:
        raise SpectrumScanError(
            f"found only {idx.size + exact.size} of {count} {kind} eigenvalues below z={grid[-1]:.6g}"
        )
    lo, hi = grid[idx].copy(), grid[idx + 1].copy()
    flo, fhi = vals[idx].copy(), vals[idx + 1].copy()
    # lockstep bisection
    for _ in range(200):
        width = hi - lo
        if np.all(width <= 1e-12 * (1 + np.abs(lo))):
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
        fhi = np.where(left, fhi, fm)
        hit = fm == 0
        lo = np.where(hit, mid, lo)
        hi = np.where(hit, mid, hi)
    # one safeguarded secant step
    with np.errstate(divide="ignore", invalid="ignore"):
        sec = lo - flo * (hi - lo) / (fhi - flo)
    ok = np.isfinite(sec) & (sec >= lo) & (sec <= hi)
    found = np.where(ok, sec, 0.5 * (lo + hi))
    found = np.sort(np.concatenate([found, grid[exact]]))[:count]
    d = deriv_of(transfer(potential, l, found, want_dz=True)).real
    if np.any(np.abs(d) < 1e-14):
        bad = found[np.abs(d) < 1e-14]
        raise SpectrumScanError(f"{kind} eigenvalue(s) {bad} do not look simple")
    return found


@lru_cache(maxsize=256)
def _reference_spectrum(potential, l, count, kind):
    return tuple(float(x) for x in _scan_roots(potential, l, count, kind))


def reference_spectrum(potential: Potential, l: float, count: int, kind: str = "dirichlet",
                       z_min: float | None = None) -> GapList:
    if count < 1:
        raise ValueError("count must be at least 1")
    values = _reference_spectrum(potential, float(l), int(count), kind)
    return GapList(values, kind, default_z_min(values[0]) if z_min is None else float(z_min))


def dirichlet_spectrum(potential: Potential, l: float, count: int, z_min: float | None = None) -> GapList:
    """First ``count`` zeros of ``z -> s(l; z)``."""
    return reference_spectrum(potential, l, count, "dirichlet", z_min)


def neumann_spectrum(potential: Potential, l: float, count: int, z_min: float | None = None) -> GapList:
    """First ``count`` zeros of ``z -> c'(l; z)``."""
    return reference_spectrum(potential, l, count, "neumann", z_min)


def symmetry_defect(potential: Potential, l: float, n: int = 1025) -> tuple[float, float]:
    """``max |V(x) - V(l-x)|`` on a grid and ``max |s'(l;z) - c(l;z)|`` at five probes."""
    x = np.linspace(0.0, l, n)
    pointwise = float(np.max(np.abs(potential(x) - potential(l - x))))
    vmin, _ = potential.bounds(l)
    probes = vmin + np.array([-1.0, 0.5, 5.0, 20.0, 60.0]) / (l * l)
    tm = transfer(potential, l, probes)
    boundary = float(np.max(np.abs(tm.sp - tm.c) / (1 + np.abs(tm.c))))
    return pointwise, boundary


def check_symmetric_potential(potential: Potential, l: float, tol: float = 1e-9) -> bool:
    """True when ``V(x) = V(l-x)`` on a sample grid and ``s'(l;z) = c(l;z)`` at probes."""
    pointwise, boundary = symmetry_defect(potential, l)
    return pointwise <= tol and boundary <= tol
