"""Small standard graphs used in tests, demos and the CLI examples."""
from __future__ import annotations

from .coupling import CouplingSpec
from .graph import MetricGraph, Potential, make_graph


def _make(vertices, edges, coupling, potential, length):
    return make_graph(vertices, edges, length=length, potential=potential or Potential.zero(),
                      couplings=coupling or CouplingSpec.kirchhoff())


def single_edge(coupling: CouplingSpec | None = None, potential: Potential | None = None,
                length: float = 1.0) -> MetricGraph:
    return _make(["v1", "v2"], [("e", "v1", "v2")], coupling, potential, length)


def path3(coupling=None, potential=None, length=1.0) -> MetricGraph:
    return _make(["a", "b", "c"], [("e1", "a", "b"), ("e2", "b", "c")], coupling, potential, length)


def star3(coupling=None, potential=None, length=1.0) -> MetricGraph:
    """Centre ``o`` joined to three leaves, edges pointing outwards."""
    return _make(["o", "x", "y", "z"], [("e1", "o", "x"), ("e2", "o", "y"), ("e3", "o", "z")],
                 coupling, potential, length)


def triangle(coupling=None, potential=None, length=1.0) -> MetricGraph:
    return _make(["a", "b", "c"], [("e1", "a", "b"), ("e2", "b", "c"), ("e3", "c", "a")],
                 coupling, potential, length)


def double_edge(coupling=None, potential=None, length=1.0) -> MetricGraph:
    return _make(["a", "b"], [("e1", "a", "b"), ("e2", "a", "b")], coupling, potential, length)


def loop_with_pendant(coupling=None, potential=None, length=1.0) -> MetricGraph:
    """Vertex ``a`` with a self-loop and a pendant edge to ``b``."""
    return _make(["a", "b"], [("loop", "a", "a"), ("p", "a", "b")], coupling, potential, length)


def single_loop(coupling=None, potential=None, length=1.0, beta: float = 0.0) -> MetricGraph:
    return _make(["a"], [("loop", "a", "a", beta)], coupling, potential, length)


def cycle(n: int, coupling=None, potential=None, length=1.0, flux: float = 0.0) -> MetricGraph:
    """Directed n-cycle ``v0 -> v1 -> ... -> v0`` with the flux spread evenly over the edges."""
    vertices = [f"v{k}" for k in range(n)]
    edges = [(f"e{k}", vertices[k], vertices[(k + 1) % n], flux / n) for k in range(n)]
    return _make(vertices, edges, coupling, potential, length)


STANDARD = {
    "single_edge": single_edge,
    "path3": path3,
    "star3": star3,
    "triangle": triangle,
    "double_edge": double_edge,
    "loop_with_pendant": loop_with_pendant,
}
