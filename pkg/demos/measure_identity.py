"""Spectral measure of N(z) on B = (4.0, 4.8) for the free triangle.

The Stieltjes inversion of N at height eps approaches the point masses
n(z)/eta'(z) E at the eigenvalues in B.  The discrepancy shrinks linearly
in eps, so a Richardson step removes the leading term.
"""
from qgreduce import build_context, catalog
from qgreduce.measure import measure_check

ctx = build_context(catalog.triangle(), gap=0)
rep = measure_check(ctx, (4.0, 4.8))
print(f"{'eps':>8}  {'discrepancy':>12}  {'panels':>6}")
for eps, d, p in zip(rep.eps, rep.discrepancies, rep.panels):
    print(f"{eps:>8.0e}  {d:>12.3e}  {p:>6}")
print(f"extrapolated discrepancy {rep.richardson_discrepancy:.2e}, |rhs| = {rep.rhs_norm:.3f}, "
      f"passed: {rep.passed}")
