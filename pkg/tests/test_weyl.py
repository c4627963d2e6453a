import numpy as np
import pytest

from qgreduce import (
    CouplingSpec, Potential, PreconditionError, SymmetryError, build_context, catalog, locate_K,
    reduce, reduce_spectrum,
)
from qgreduce.verify import eta_consistency, factorization_residual


def test_free_triangle_gap0():
    res = reduce(catalog.triangle(), gap=0)
    z = res.values
    assert np.allclose(z, [0.0, np.arccos(-0.5) ** 2], atol=1e-12)
    assert list(res.multiplicities) == [1, 2]


def test_boundary_eigenvalue_excluded():
    res = reduce(catalog.triangle(), gap=1)
    assert res.boundary == (1.0,) or np.allclose(res.boundary, [1.0])
    assert np.allclose(res.values, [(2 * np.pi - np.arccos(-0.5)) ** 2])


@pytest.mark.parametrize("alpha", [0.0, 0.7, -1.2])
def test_factorization_and_eta_consistency(alpha):
    g = catalog.star3(CouplingSpec.delta(alpha, per_degree=True), Potential.fourier(cos=(0.0, 1.0)))
    ctx = build_context(g, gap=1)
    assert eta_consistency(ctx) <= 1e-9
    assert factorization_residual(ctx) <= 1e-9


def test_kappa_for_directed_cycle():
    ctx = build_context(catalog.cycle(5, potential=Potential.polynomial([0.0, 1.0])), gap=0)
    assert ctx.kappa == pytest.approx(0.5)


def test_asymmetric_potential_needs_uniform_tail_fraction():
    with pytest.raises(SymmetryError):
        build_context(catalog.path3(potential=Potential.polynomial([0.0, 1.0])), gap=0)


def test_interval_containing_reference_eigenvalue_rejected():
    with pytest.raises(PreconditionError, match="reference eigenvalues"):
        build_context(catalog.triangle(), interval=(5.0, 12.0))


def test_interval_inside_gap_matches_gap_result():
    g = catalog.triangle()
    a = reduce(g, gap=0)
    b = reduce(g, interval=(1.0, 9.0))
    assert np.allclose(b.values, [v for v in a.values if 1.0 < v < 9.0])


def test_sign_law_and_derivative_bound():
    for make in catalog.STANDARD.values():
        for k in range(3):
            K = locate_K(build_context(make(), gap=k))
            if not K.empty:
                assert K.sign_law and K.min_abs_deta >= 1e-8


def test_reduced_residuals_small():
    ctx = build_context(catalog.triangle(CouplingSpec.delta(0.7, per_degree=True)), gap=2)
    res = reduce_spectrum(ctx, locate_K(ctx))
    assert all(e.residual <= 1e-12 for e in res.entries)
