"""Free triangle: eigenvalues from the adjacency spectrum, checked directly.

With V = 0 and Kirchhoff vertices, eta(z) = cos(sqrt z).  Every eigenvalue
lambda of the weighted adjacency operator inside (-1, 1) produces one graph
eigenvalue per gap, at the preimage of lambda under eta.  The secular-matrix
solver finds the same numbers without using eta at all.
"""
import numpy as np

from qgreduce import catalog, cross_validate

g = catalog.triangle()
print("adjacency spectrum of the triangle: -1/2 (twice), 1\n")
print(f"{'gap':>3}  {'z reduced':>20}  {'z oracle':>20}  {'mult':>4}  {'lambda':>7}  {'cos sqrt z':>10}")
for k in range(4):
    rep = cross_validate(g, gap=k)
    for r, (_, zo) in zip(rep.reduced.entries, rep.comparison.pairs):
        print(f"{k:>3}  {r.z:>20.15f}  {zo:>20.15f}  {r.multiplicity:>4}  {r.lam:>7.3f}  "
              f"{np.cos(np.sqrt(complex(r.z))).real:>10.6f}")
    if rep.reduced.boundary:
        print(f"     lambda {rep.reduced.boundary} sits on the end of the gap and is left out")
    print(f"     gap {k}: {rep.comparison.summary()}")
