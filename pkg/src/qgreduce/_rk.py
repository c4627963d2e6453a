"""Batched adaptive Dormand–Prince 8(5,3) integrator.

Integrates many independent copies of a linear ODE in lockstep: the state
has shape ``(n, batch)`` and one step size is shared by the whole batch,
controlled by the worst member (max-norm).  The Butcher tableau is the one
shipped with scipy.
"""
from __future__ import annotations

import numpy as np
from scipy.integrate._ivp import dop853_coefficients as _dop

from .errors import IntegrationError

_S = _dop.N_STAGES
_A = _dop.A[:_S, :_S]
_B = _dop.B
_C = _dop.C[:_S]
_E3 = _dop.E3[:_S]
_E5 = _dop.E5[:_S]

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ORDER = 8


def integrate(rhs, y0, x0: float, x1: float, *, rtol: float = 1e-12, atol: float = 1e-14,
              h0: float | None = None, max_steps: int = 200_000):
    """Integrate ``y' = rhs(x, y)`` from ``x0`` to ``x1``.

    Returns ``(y(x1), info)`` where ``info`` holds ``steps``, ``rejected``
    and ``max_error`` (largest accepted normalized error estimate).
    """
    y = np.array(y0, dtype=complex)
    x = float(x0)
    span = float(x1) - x
    if span <= 0:
        return y, {"steps": 0, "rejected": 0, "max_error": 0.0}
    h = min(span, h0 if h0 else span / 16)
    K = np.empty((_S,) + y.shape, dtype=complex)
    steps = rejected = 0
    worst = 0.0
    while x < x1:
        if steps + rejected >= max_steps:
            raise IntegrationError(
                f"step budget exhausted at x={x:.6g} of {x1:.6g}", achieved_error=worst
            )
        last = x + h >= x1
        if last:
            h = x1 - x
        K[0] = rhs(x, y)
        for i in range(1, _S):
            dy = np.tensordot(_A[i, :i], K[:i], axes=1)
            K[i] = rhs(x + _C[i] * h, y + h * dy)
        y_new = y + h * np.tensordot(_B, K, axes=1)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        e5 = np.max(np.abs(np.tensordot(_E5, K, axes=1)) / scale)
        e3 = np.max(np.abs(np.tensordot(_E3, K, axes=1)) / scale)
        den = e5 * e5 + 0.01 * e3 * e3
        err = h * e5 * e5 / np.sqrt(den) if den > 0 else 0.0
        if not np.isfinite(err):
            raise IntegrationError(f"non-finite state at x={x:.6g}", achieved_error=float("inf"))
        if err <= 1.0:
            x = x1 if last else x + h
            y = y_new
            steps += 1
            worst = max(worst, err)
            factor = MAX_FACTOR if err == 0 else min(MAX_FACTOR, SAFETY * err ** (-1.0 / ORDER))
            h *= max(MIN_FACTOR, factor)
        else:
            rejected += 1
            h *= max(MIN_FACTOR, SAFETY * err ** (-1.0 / ORDER))
            if h < 1e-14 * max(1.0, abs(x)):
                raise IntegrationError(f"step size underflow at x={x:.6g}", achieved_error=err)
    return y, {"steps": steps, "rejected": rejected, "max_error": worst}
