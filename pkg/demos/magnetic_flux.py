"""Flux through a 4-cycle moves eigenvalues; a gauge change does not.

The discrete operator for flux phi has eigenvalues cos((2 pi k + phi)/4).
Redistributing the edge phases by a vertex gauge keeps the total flux and
hence the spectrum.
"""
import numpy as np

from qgreduce import catalog, reduce

rng = np.random.default_rng(0)
for flux in (0.0, np.pi / 4, np.pi / 2, np.pi):
    g = catalog.cycle(4, flux=flux)
    theta = rng.uniform(-np.pi, np.pi, 4)
    idx = g.vertex_index
    h = g.with_betas([e.beta + theta[idx[e.head]] - theta[idx[e.tail]] for e in g.edges])
    a, b = reduce(g, gap=1), reduce(h, gap=1)
    shift = max(abs(x - y) for x, y in zip(a.values, b.values)) if a.values else 0.0
    vals = ", ".join(f"{z:.8f}(x{m})" for z, m in zip(a.values, a.multiplicities))
    print(f"flux {flux:.4f}: gap 1 eigenvalues {vals}; gauge shift {shift:.1e}")
