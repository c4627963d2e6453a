import numpy as np
import pytest

from qgreduce import CouplingSpec, catalog, compare, oracle_spectrum
from qgreduce.oracle import golden_minimize, relative_sigma_min, secular_matrix
from qgreduce.results import SpectralEntry, SpectralResult


def test_single_edge_kirchhoff_is_neumann():
    res = oracle_spectrum(catalog.single_edge(), (1.0, 30.0))
    assert np.allclose(res.values, [np.pi ** 2], rtol=1e-12)


def test_triangle_multiplicity():
    res = oracle_spectrum(catalog.triangle(), (1.0, 9.0))
    assert list(res.multiplicities) == [2]
    assert res.values[0] == pytest.approx(np.arccos(-0.5) ** 2, rel=1e-12)


def test_secular_derivative_matches_difference():
    g = catalog.star3(CouplingSpec.delta(0.4))
    z, h = 7.3, 1e-6
    _, dS = secular_matrix(g, z, derivative=True)
    fd = (secular_matrix(g, z + h).matrix - secular_matrix(g, z - h).matrix) / (2 * h)
    assert np.linalg.norm(dS.matrix - fd) <= 1e-6 * np.linalg.norm(dS.matrix)


def test_sigma_min_vanishes_at_eigenvalue():
    g = catalog.triangle()
    assert relative_sigma_min(g, np.arccos(-0.5) ** 2) < 1e-12
    assert relative_sigma_min(g, 3.0) > 1e-3


def test_golden_minimize_quadratic():
    x = golden_minimize(lambda t: (t - 0.3) ** 2, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-7)


def _result(values, mults=None):
    mults = mults or [1] * len(values)
    return SpectralResult(tuple(SpectralEntry(v, m, None, "x", 0.0) for v, m in zip(values, mults)), (0, 10))


def test_compare_detects_mismatch():
    assert compare(_result([1.0, 2.0]), _result([1.0, 2.0 + 1e-12])).passed
    assert not compare(_result([1.0, 2.0]), _result([1.0, 2.0 + 1e-5])).passed
    assert not compare(_result([1.0]), _result([1.0], [2])).passed
    assert not compare(_result([1.0, 3.0]), _result([1.0])).passed
