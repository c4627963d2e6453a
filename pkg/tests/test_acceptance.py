"""Acceptance criteria 1-10, each at its stated tolerance.

Every test prints one ``criterion n: PASS|FAIL`` line; the conftest hook
repeats them in the terminal summary.
"""
import json
import time

import numpy as np
import pytest

from qgreduce import (
    CouplingSpec, Potential, ScalarConditionError, SymmetryError, build_context, catalog,
    check_scalar_condition, cross_validate, locate_K, reduce_spectrum,
)
from qgreduce.cli import main
from qgreduce.coupling import (
    relation_distance, relation_from_ab, relation_from_projector, relation_from_unitary,
    to_projector_form, to_unitary,
)
from qgreduce.discrete import (
    adjacency_operator, block_projector, deck_shift, delta_type_basis, magnetic_adjacency,
    symmetrize, theta_map,
)
from qgreduce.graph import graph_to_document
from qgreduce.measure import k_I_check, measure_check
from qgreduce.ode import ode_transfer, transfer

GAPS = (0, 1, 2)
COS = Potential.fourier(cos=(0.0, 1.0))


def _check_gaps(g, tol, relative, gaps=GAPS):
    """Cross-validate ``g`` on ``gaps``; returns (ok, worst deviation, reports)."""
    reports = [cross_validate(g, gap=k, z_tol=tol, relative=relative) for k in gaps]
    ok = all(r.passed for r in reports)
    worst = max((r.comparison.max_deviation for r in reports), default=0.0)
    return ok, worst, reports


# -- 1 -------------------------------------------------------------------------

def test_criterion_1_free_standard_graphs(record):
    t0 = time.perf_counter()
    ok, worst, cos_worst, count = True, 0.0, 0.0, 0
    for name, make in catalog.STANDARD.items():
        g = make()
        good, dev, reports = _check_gaps(g, 1e-8, relative=True)
        ok &= good
        worst = max(worst, dev)
        for r in reports:
            for e in r.reduced.entries:
                cos_worst = max(cos_worst, abs(np.cos(np.sqrt(complex(e.z))).real - e.lam))
                count += 1
    elapsed = time.perf_counter() - t0
    ok = ok and cos_worst <= 1e-10 and elapsed <= 10.0 and count > 0
    record(1, ok, f"{count} eigenvalues, max |dz|/(1+|z|)={worst:.1e}, "
                  f"max |cos sqrt z - lambda|={cos_worst:.1e}, {elapsed:.1f}s")
    assert ok


# -- 2 -------------------------------------------------------------------------

def test_criterion_2_symmetric_potential(record):
    t0 = time.perf_counter()
    ok, worst, runs = True, 0.0, 0
    for alpha in (0.0, 0.7):
        coupling = CouplingSpec.delta(alpha, per_degree=True)
        for make in (catalog.triangle, catalog.star3):
            good, dev, reports = _check_gaps(make(coupling, COS), 1e-6, relative=False)
            ok &= good and all(r.context.family == "delta" for r in reports)
            worst = max(worst, dev)
            runs += len(reports)
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed <= 60.0
    record(2, ok, f"{runs} gap runs, max |dz|={worst:.1e}, {elapsed:.1f}s")
    assert ok


# -- 3 -------------------------------------------------------------------------

def test_criterion_3_delta_prime(record):
    g = catalog.triangle(CouplingSpec.delta_prime(1.0, per_degree=True))
    ok, worst, reports = _check_gaps(g, 1e-6, relative=False)
    ctx = reports[0].context
    ok = ok and not ctx.delta_type and ctx.family == "delta_prime"
    n = sum(r.reduced.total_multiplicity for r in reports)
    record(3, ok, f"{n} eigenvalues with multiplicity, max |dz|={worst:.1e}")
    assert ok


# -- 4 -------------------------------------------------------------------------

def test_criterion_4_delta_prime_s(record):
    ok, worst, alpha = True, 0.0, 0.5
    for make in (catalog.single_edge, catalog.triangle):
        g = make(CouplingSpec.delta_prime_s(alpha, per_degree=True))
        good, dev, reports = _check_gaps(g, 1e-6, relative=False)
        worst = max(worst, dev)
        ctx = reports[0].context
        z = np.linspace(0.3, 60.0, 37)
        tm = transfer(g.potential, g.length, z)
        eta_ok = np.max(np.abs(ctx.eta(z) - (tm.c + alpha * tm.cp))) <= 1e-12
        minus_delta = -symmetrize(adjacency_operator(g), g.degrees)
        op_ok = np.linalg.norm(ctx.T - minus_delta) <= 1e-12
        ok &= good and ctx.triple == "neumann" and eta_ok and op_ok
    record(4, ok, f"Neumann triple, eta=c+alpha c', T=-Delta, max |dz|={worst:.1e}")
    assert ok


# -- 5 -------------------------------------------------------------------------

def test_criterion_5_directed_cycle_asymmetric_potential(record):
    g = catalog.cycle(4, potential=Potential.polynomial([0.0, 1.0]))
    ok, worst, reports = _check_gaps(g, 1e-6, relative=False)
    kappa = reports[0].context.kappa
    ok = ok and abs(kappa - 0.5) <= 1e-12 and reports[0].context.family == "tail_fraction"
    record(5, ok, f"kappa={kappa:.3f}, max |dz|={worst:.1e}")
    assert ok


# -- 6 -------------------------------------------------------------------------

def _gauge(g, theta):
    """Shift every edge phase by ``theta(head) - theta(tail)``; the flux is unchanged."""
    idx = g.vertex_index
    return g.with_betas([e.beta + theta[idx[e.head]] - theta[idx[e.tail]] for e in g.edges])


def test_criterion_6_magnetic_cycle(record):
    rng = np.random.default_rng(6)
    ok, worst, gauge_worst = True, 0.0, 0.0
    for flux in (np.pi / 4, np.pi / 2):
        g = catalog.cycle(4, flux=flux)
        good, dev, reports = _check_gaps(g, 1e-6, relative=False)
        ok &= good
        worst = max(worst, dev)
        h = _gauge(g, rng.uniform(-np.pi, np.pi, len(g.vertices)))
        for k, r in zip(GAPS, reports):
            other = reduce_spectrum(build_context(h, gap=k), None)
            a, b = r.reduced.values, other.values
            same = len(a) == len(b) and r.reduced.multiplicities == other.multiplicities
            ok &= same
            if same and len(a):
                gauge_worst = max(gauge_worst, float(np.max(np.abs(np.subtract(a, b)))))
    ok = ok and gauge_worst <= 1e-10
    record(6, ok, f"max |dz|={worst:.1e}, gauge shift {gauge_worst:.1e}")
    assert ok


# -- 7 -------------------------------------------------------------------------

def test_criterion_7_measure_identity(triangle, record):
    ctx = build_context(triangle, gap=0)
    rep = measure_check(ctx, (4.0, 4.8))
    ok = rep.monotone and rep.richardson_ok and rep.psd and rep.rhs_norm > 0
    record(7, ok, f"discrepancies {rep.discrepancies[0]:.1e} -> {rep.discrepancies[-1]:.1e}, "
                  f"extrapolated {rep.richardson_discrepancy:.1e} vs |rhs|={rep.rhs_norm:.3g}, "
                  f"min eig rhs {rep.rhs_min_eig:.1e}")
    assert ok


# -- 8 -------------------------------------------------------------------------

def test_criterion_8_kernel_limit(triangle, record):
    ctx = build_context(triangle, gap=0)
    I = (3.0, 5.0)
    cases = {"inside": -0.5, "endpoint": float(np.cos(np.sqrt(3.0))), "outside": 0.9}
    ok, parts = True, []
    for expected, lam in cases.items():
        rep = k_I_check(ctx, I, lam, ladder=(1e-3, 1e-4))
        dev = rep.deviations[-1]
        ok &= rep.placement == expected and dev <= 5e-3
        parts.append(f"{expected} {rep.values[-1]:.5f} vs {rep.limit:.5f}")
    record(8, ok, ", ".join(parts))
    assert ok


# -- 9 -------------------------------------------------------------------------

def _acceptance_graphs():
    out = [make() for make in catalog.STANDARD.values()]
    for alpha in (0.0, 0.7):
        c = CouplingSpec.delta(alpha, per_degree=True)
        out += [catalog.triangle(c, COS), catalog.star3(c, COS)]
    out.append(catalog.triangle(CouplingSpec.delta_prime(1.0, per_degree=True)))
    out += [make(CouplingSpec.delta_prime_s(0.5, per_degree=True))
            for make in (catalog.single_edge, catalog.triangle)]
    out.append(catalog.cycle(4, potential=Potential.polynomial([0.0, 1.0])))
    out += [catalog.cycle(4, flux=f) for f in (np.pi / 4, np.pi / 2)]
    return out


def _random_potential(rng):
    kind = rng.integers(3)
    if kind == 0:
        return Potential.polynomial(rng.normal(0, 3, size=rng.integers(1, 4)))
    if kind == 1:
        return Potential.fourier(cos=rng.normal(0, 3, 3), sin=rng.normal(0, 3, 2))
    xs = np.linspace(0, 1, 9)
    return Potential.table(xs, rng.normal(0, 3, xs.size))


def _random_z(rng, n):
    """Spectral parameters with |Im sqrt z| <= 1 so c and s stay of moderate size."""
    k = rng.uniform(0, 12, n) + 1j * rng.uniform(-1, 1, n)
    return k * k


def test_criterion_9_property_suites(record):
    rng = np.random.default_rng(9)
    results = {}

    # Wronskian on 10^3 random (z, V) probes
    worst = 0.0
    for _ in range(20):
        tm = ode_transfer(_random_potential(rng), 1.0, _random_z(rng, 50))
        worst = max(worst, float(np.max(np.abs(tm.wronskian - 1))))
    results["wronskian"] = (worst <= 1e-10, worst)

    # unitarity and (A,B) <-> U <-> (P,C) round trips
    worst = 0.0
    specs = [CouplingSpec.delta(1.3), CouplingSpec.kirchhoff(), CouplingSpec.delta_prime(0.8),
             CouplingSpec.delta_prime_s(-0.4), CouplingSpec.delta(0.7, per_degree=True)]
    for spec in specs:
        for d in (1, 2, 3, 5):
            A, B = spec.ab_form(d)
            U = to_unitary(spec, d)
            worst = max(worst, np.linalg.norm(U.conj().T @ U - np.eye(d)))
            R = relation_from_unitary(U)
            worst = max(worst, relation_distance(relation_from_ab(A, B), R),
                        relation_distance(relation_from_projector(to_projector_form(U)), R))
    for _ in range(50):
        d = int(rng.integers(1, 5))
        H = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        H = H + H.conj().T
        A, B = H, np.eye(d)  # A B* = B A* holds for Hermitian A
        U = to_unitary(CouplingSpec.custom_ab(A, B), d)
        R = relation_from_unitary(U)
        worst = max(worst, np.linalg.norm(U.conj().T @ U - np.eye(d)),
                    relation_distance(relation_from_ab(A, B), R),
                    relation_distance(relation_from_projector(to_projector_form(U)), R))
    results["couplings"] = (worst <= 1e-10, worst)

    graphs = _acceptance_graphs()
    # discrete spectra inside [-1, 1]; Theta isometry and intertwining
    worst_bound, worst_theta = 0.0, 0.0
    for g in graphs:
        for A in (adjacency_operator(g), magnetic_adjacency(g)):
            ev = np.linalg.eigvalsh(symmetrize(A, g.degrees))
            worst_bound = max(worst_bound, float(np.max(np.abs(ev))) - 1.0)
        Th = theta_map(g)
        W = np.diag(g.degrees.astype(float))
        P = block_projector(delta_type_basis(g))
        worst_theta = max(worst_theta, np.linalg.norm(Th.T @ Th - W))
        for magnetic in (False, True):
            D = deck_shift(g, magnetic=magnetic)
            A = magnetic_adjacency(g) if magnetic else adjacency_operator(g)
            worst_theta = max(worst_theta, np.linalg.norm(P @ D @ Th - Th @ A))
    results["discrete_bounds"] = (worst_bound <= 1e-12, worst_bound)
    results["theta"] = (worst_theta <= 1e-12, worst_theta)

    # K connectivity, min |eta'| and the sign law on every acceptance graph
    k_ok, min_deta = True, np.inf
    for g in graphs:
        for k in GAPS:
            ctx = build_context(g, gap=k)
            K = locate_K(ctx)  # raises when K is disconnected or eta' changes sign
            if K.empty:
                continue
            min_deta = min(min_deta, K.min_abs_deta)
            k_ok &= K.sign_law and K.min_abs_deta >= 1e-8
    results["K"] = (k_ok, min_deta)

    # z-derivatives against a fourth-order central difference
    worst = 0.0
    for pot in (Potential.zero(), COS, Potential.polynomial([0.0, 1.0]), _random_potential(rng)):
        for z in (0.37, 5.1 + 0.4j, 27.0, -3.2, 61.5 - 1.0j):
            h = 1e-3 * (1 + abs(z))
            tm = transfer(pot, 1.0, z, want_dz=True)
            pts = [transfer(pot, 1.0, z + m * h) for m in (-2, -1, 1, 2)]
            for name, dname in (("c", "dc_dz"), ("s", "ds_dz"), ("cp", "dcp_dz"), ("sp", "dsp_dz")):
                f = [getattr(p, name) for p in pts]
                fd = (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h)
                exact = getattr(tm, dname)
                worst = max(worst, abs(fd - exact) / max(abs(exact), 1.0))
    results["derivatives"] = (worst <= 1e-6, worst)

    ok = all(v[0] for v in results.values())
    record(9, ok, ", ".join(f"{k} {'ok' if v[0] else 'FAIL'} ({v[1]:.1e})" for k, v in results.items()))
    assert ok


# -- 10 ------------------------------------------------------------------------

def test_criterion_10_negative_controls(tmp_path, capsys, record):
    ok, parts = True, []
    ramp = Potential.polynomial([0.0, 1.0])
    for make in (catalog.path3, catalog.star3):
        g = make(CouplingSpec.delta(0.3, per_degree=True), ramp)
        with pytest.raises(SymmetryError):
            build_context(g, gap=0)
        path = tmp_path / f"{make.__name__}.json"
        path.write_text(json.dumps(graph_to_document(g)))
        code = main(["verify", str(path)])
        ok &= code == 4
        parts.append(f"{make.__name__} exit {code}")

    g = catalog.star3(CouplingSpec.delta(1.0))  # alpha(v) = 1 on degrees 3 and 1
    try:
        check_scalar_condition(g)
        named = False
    except ScalarConditionError as exc:
        msg = str(exc)
        named = len(exc.eigenvalues) == 2 and all(f"{lam:.12g}" in msg for lam in exc.eigenvalues)
    path = tmp_path / "star.json"
    path.write_text(json.dumps(graph_to_document(g)))
    capsys.readouterr()
    code = main(["reduce", str(path)])
    err = capsys.readouterr().err
    ok &= named and code == 4 and "two distinct eigenvalues" in err
    parts.append(f"non-proportional alpha: exit {code}, eigenvalues named {named}")
    record(10, ok, ", ".join(parts))
    assert ok
