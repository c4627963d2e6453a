"""Cross-validation of reduced spectra against the secular-matrix oracle."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import MetricGraph
from .oracle import ComparisonReport, compare, oracle_spectrum
from .results import SpectralResult
from .weyl import BOUNDARY_TOL, KInterval, ReductionContext, build_context, locate_K, reduce_spectrum


@dataclass(frozen=True, eq=False)
class VerificationReport:
    context: ReductionContext
    K: KInterval
    reduced: SpectralResult
    oracle: SpectralResult
    excluded_oracle: tuple[float, ...]
    comparison: ComparisonReport
    diagnostics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        d = self.diagnostics
        return (self.comparison.passed and d.get("sign_law", True)
                and d.get("multiplicity_conserved", True))


def eta_consistency(ctx: ReductionContext, n: int = 257) -> float:
    """Largest gap between the transfer-data and Weyl-matrix formulas for eta on J."""
    a, b = ctx.J
    z = np.linspace(a, b, n)[1:-1]
    return float(np.max(np.abs(ctx.eta(z) - ctx.eta_from_weyl(z))))


def factorization_residual(ctx: ReductionContext, probes=None) -> float:
    """Relative defect of ``M_P - alpha = (eta - T)/n`` at complex probe points."""
    if ctx.reduced_dimension == 0:
        return 0.0
    a, b = ctx.J
    if probes is None:
        probes = [a + (b - a) * t + 1j * (0.1 + t) for t in (0.2, 0.5, 0.8)]
    worst = 0.0
    for z in probes:
        Mp = ctx.projected_weyl(z)
        worst = max(worst, ctx.weyl_residual(z) / max(1.0, np.linalg.norm(Mp)))
    return worst


def filter_collar(ctx: ReductionContext, oracle: SpectralResult, reduced: SpectralResult):
    """Drop oracle roots that correspond to the boundary-grazing discrete eigenvalues."""
    if not reduced.boundary:
        return oracle, ()
    keep, dropped = [], []
    for e in oracle.entries:
        eta = float(np.real(ctx.eta(e.z)))
        if any(abs(eta - lam) <= BOUNDARY_TOL * 10 for lam in reduced.boundary):
            dropped.append(e.z)
        else:
            keep.append(e)
    return SpectralResult(tuple(keep), oracle.interval, tuple(dropped), oracle.warnings), tuple(dropped)


def cross_validate(g: MetricGraph, gap: int | None = None, interval=None, z_tol: float = 1e-8,
                   relative: bool = True, steps: int | None = None, **ctx_kw) -> VerificationReport:
    """Reduce, solve directly, and compare on the same gap."""
    ctx = build_context(g, gap=gap, interval=interval, **ctx_kw)
    K = locate_K(ctx)
    reduced = reduce_spectrum(ctx, K)
    kw = {"steps": steps} if steps else {}
    oracle_raw = oracle_spectrum(g, ctx.J, **kw)
    oracle, excluded = filter_collar(ctx, oracle_raw, reduced)
    report = compare(reduced, oracle, z_tol, relative)

    diag = {
        "family": ctx.family,
        "triple": ctx.triple,
        "alpha": ctx.alpha,
        "kappa": ctx.kappa,
        "J": ctx.J,
        "K": (K.lo, K.hi),
        "K_empty": K.empty,
        "min_abs_deta_on_K": K.min_abs_deta,
        "sign_law": K.sign_law,
        "eta_consistency": eta_consistency(ctx),
        "factorization_residual": factorization_residual(ctx),
    }
    if not K.empty:
        lo, hi = K.eta_range
        inside = [m for lam, m, _ in ctx.eig.clusters
                  if lo - BOUNDARY_TOL <= lam <= hi + BOUNDARY_TOL and lam not in reduced.boundary]
        diag["multiplicity_conserved"] = sum(inside) == reduced.total_multiplicity
    return VerificationReport(ctx, K, reduced, oracle, excluded, report, diag)
