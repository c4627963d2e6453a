import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qgreduce import Potential, dirichlet_spectrum, neumann_spectrum, transfer
from qgreduce.ode import check_symmetric_potential, free_transfer, ode_transfer


@settings(max_examples=40, deadline=None)
@given(st.floats(-50, 400), st.floats(-5, 5))
def test_closed_form_matches_integrator(re, im):
    z = complex(re, im)
    a = free_transfer(1.0, z, want_dz=True)
    b = ode_transfer(Potential.zero(), 1.0, z, want_dz=True)
    for f in ("c", "s", "cp", "sp", "dc_dz", "ds_dz", "dcp_dz", "dsp_dz"):
        x, y = getattr(a, f), getattr(b, f)
        assert abs(x - y) <= 1e-9 * max(1.0, abs(x))


def test_series_branch_is_continuous():
    z = np.array([0.99e-2, 1.01e-2, -0.99e-2, -1.01e-2])
    a = free_transfer(1.0, z, want_dz=True)
    ref = [ode_transfer(Potential.zero(), 1.0, x, want_dz=True) for x in z]
    for k, r in enumerate(ref):
        assert abs(a.s[k] - r.s) <= 1e-12 and abs(a.ds_dz[k] - r.ds_dz) <= 1e-12


def test_dirichlet_free_spectrum():
    gl = dirichlet_spectrum(Potential.zero(), 1.0, 3)
    assert np.allclose(gl.values, [np.pi ** 2, 4 * np.pi ** 2, 9 * np.pi ** 2], rtol=1e-12)
    assert gl.gap(0)[1] == gl.values[0]


def test_neumann_free_spectrum_starts_at_zero():
    gl = neumann_spectrum(Potential.zero(), 1.0, 3)
    assert np.allclose(gl.values, [0.0, np.pi ** 2, 4 * np.pi ** 2], atol=1e-10)


def test_scaled_length_spectrum():
    gl = dirichlet_spectrum(Potential.zero(), 2.0, 2)
    assert np.allclose(gl.values, [(np.pi / 2) ** 2, np.pi ** 2], rtol=1e-12)


def test_cos_potential_spectrum_matches_fine_scan():
    pot = Potential.fourier(cos=(0.0, 1.0))
    gl = dirichlet_spectrum(pot, 1.0, 3)
    z = np.linspace(5, 95, 9001)
    s = transfer(pot, 1.0, z).s.real
    roots = z[:-1][np.sign(s[:-1]) != np.sign(s[1:])]
    assert np.allclose(gl.values, roots, atol=0.011)
    assert all(abs(transfer(pot, 1.0, v).s) < 1e-10 for v in gl.values)


def test_symmetry_detection():
    assert check_symmetric_potential(Potential.fourier(cos=(0.0, 1.0)), 1.0)
    assert not check_symmetric_potential(Potential.polynomial([0.0, 1.0]), 1.0)
    assert check_symmetric_potential(Potential.polynomial([0.0, 1.0, -1.0]), 1.0)


def test_closed_method_rejects_nonzero_potential():
    with pytest.raises(ValueError):
        transfer(Potential.polynomial([1.0]), 1.0, 2.0, method="closed")
