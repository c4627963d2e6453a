"""Finite equilateral metric graphs and the half-edge (deck) index.

Graph document format (JSON or YAML)::

    length: 1.0
    potential: {kind: zero}                      # or polynomial / fourier / table
    vertices:
      - id: a
        coupling: {type: delta, parameters: {alpha: 0.0}}
    edges:
      - {id: e1, tail: a, head: b, beta: 0.0}

See the README for the full schema.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .coupling import CouplingSpec
from .errors import CouplingError, GraphValidationError

DEFAULT_MAX_DEGREE = 64
TAIL, HEAD = "i", "t"  # iota / tau ends; iota sorts first


# -- potentials ---------------------------------------------------------------

@dataclass(frozen=True)
class Potential:
    """Real edge potential, shared by all edges.

    kinds
        ``zero``; ``polynomial`` with ``coefficients`` ``(c0, c1, ...)`` so that
        ``V(x) = sum c_k x**k``; ``fourier`` with ``cos``/``sin`` coefficient
        lists and ``period`` ``L``,
        ``V(x) = sum_k cos[k] cos(2 pi k x / L) + sum_k sin[k] sin(2 pi k x / L)``
        (``sin[0]`` is ignored); ``table`` with strictly increasing ``samples``
        ``((x, V), ...)`` interpolated by a cubic spline (linear below four
        samples).
    """

    kind: str = "zero"
    coefficients: tuple[float, ...] = ()
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()
    period: float = 1.0
    samples: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("zero", "polynomial", "fourier", "table"):
            raise GraphValidationError(f"unknown potential kind {self.kind!r}")
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        object.__setattr__(self, "cos", tuple(float(c) for c in self.cos))
        object.__setattr__(self, "sin", tuple(float(c) for c in self.sin))
        object.__setattr__(self, "samples", tuple((float(x), float(y)) for x, y in self.samples))
        if self.kind == "fourier" and not self.period > 0:
            raise GraphValidationError("fourier potential needs a positive period")
        if self.kind == "table":
            if len(self.samples) < 2:
                raise GraphValidationError("potential table needs at least two samples")
            xs = np.array([x for x, _ in self.samples])
            if np.any(np.diff(xs) <= 0):
                raise GraphValidationError("potential table abscissae must be strictly increasing")

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def polynomial(cls, coefficients):
        return cls("polynomial", coefficients=tuple(coefficients))

    @classmethod
    def fourier(cls, cos=(), sin=(), period=1.0):
        return cls("fourier", cos=tuple(cos), sin=tuple(sin), period=period)

    @classmethod
    def table(cls, xs, values):
        return cls("table", samples=tuple(zip(xs, values)))

    @property
    def is_zero(self) -> bool:
        if self.kind == "zero":
            return True
        if self.kind == "polynomial":
            return not any(self.coefficients)
        if self.kind == "fourier":
            return not any(self.cos) and not any(self.sin[1:])
        return False

    @cached_property
    def _interpolant(self):
        from scipy.interpolate import CubicSpline, interp1d

        xs, ys = map(np.array, zip(*self.samples))
        if len(xs) < 4:
            return interp1d(xs, ys, kind="linear", assume_sorted=True)
        return CubicSpline(xs, ys)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "polynomial":
            return np.polynomial.polynomial.polyval(x, self.coefficients) + 0.0 * x
        if self.kind == "fourier":
            out = np.zeros_like(x)
            w = 2 * np.pi * x / self.period
            for k, a in enumerate(self.cos):
                if a:
                    out = out + a * np.cos(k * w)
            for k, b in enumerate(self.sin):
                if k and b:
                    out = out + b * np.sin(k * w)
            return out
        return np.asarray(self._interpolant(x), dtype=float)

    evaluate = __call__

    def check_domain(self, l: float) -> None:
        if self.kind == "table":
            lo, hi = self.samples[0][0], self.samples[-1][0]
            if lo > 1e-12 or hi < l - 1e-12:
                raise GraphValidationError(
                    f"potential table covers [{lo}, {hi}] but the edges are [0, {l}]"
                )

    def bounds(self, l: float, n: int = 1025) -> tuple[float, float]:
        """(min, max) of V sampled on a fine grid of [0, l]."""
        v = self(np.linspace(0.0, l, n))
        return float(v.min()), float(v.max())

    def to_document(self) -> dict:
        if self.kind == "zero":
            return {"kind": "zero"}
        if self.kind == "polynomial":
            return {"kind": "polynomial", "coefficients": list(self.coefficients)}
        if self.kind == "fourier":
            return {"kind": "fourier", "cos": list(self.cos), "sin": list(self.sin), "period": self.period}
        return {"kind": "table", "samples": [list(s) for s in self.samples]}


# -- graph ----------------------------------------------------------------

@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    beta: float = 0.0

    @property
    def is_loop(self) -> bool:
        return self.tail == self.head


@dataclass(frozen=True, eq=False)
class MetricGraph:
    """Equilateral metric graph: every edge is ``[0, length]`` with the same potential.

    Use :func:`build_graph` (or :func:`make_graph`) rather than the
    constructor; they validate and sort the data.
    """

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    length: float
    potential: Potential
    couplings: Mapping[str, CouplingSpec]
    max_degree: int = DEFAULT_MAX_DEGREE

    @cached_property
    def _degrees(self):
        indeg = dict.fromkeys(self.vertices, 0)
        outdeg = dict.fromkeys(self.vertices, 0)
        for e in self.edges:
            outdeg[e.tail] += 1
            indeg[e.head] += 1
        return indeg, outdeg

    def indegree(self, v: str) -> int:
        return self._degrees[0][v]

    def outdegree(self, v: str) -> int:
        return self._degrees[1][v]

    def degree(self, v: str) -> int:
        return self.indegree(v) + self.outdegree(v)

    @cached_property
    def vertex_index(self) -> dict[str, int]:
        return {v: k for k, v in enumerate(self.vertices)}

    @property
    def degrees(self) -> np.ndarray:
        return np.array([self.degree(v) for v in self.vertices], dtype=float)

    @property
    def is_magnetic(self) -> bool:
        return any(e.beta for e in self.edges)

    @property
    def betas(self) -> np.ndarray:
        return np.array([e.beta for e in self.edges], dtype=float)

    def kappa(self, tol: float = 1e-12) -> float | None:
        """Common ratio outdeg v / deg v, or ``None`` if it varies."""
        ratios = [self.outdegree(v) / self.degree(v) for v in self.vertices]
        if max(ratios) - min(ratios) <= tol:
            return ratios[0]
        return None

    @cached_property
    def deck(self) -> "DeckIndex":
        return deck_index(self)

    def with_betas(self, betas: Sequence[float]) -> "MetricGraph":
        if len(betas) != len(self.edges):
            raise ValueError("need one phase per edge")
        edges = tuple(Edge(e.id, e.tail, e.head, float(b)) for e, b in zip(self.edges, betas))
        return MetricGraph(self.vertices, edges, self.length, self.potential,
                           dict(self.couplings), self.max_degree)

    def with_potential(self, potential: Potential) -> "MetricGraph":
        potential.check_domain(self.length)
        return MetricGraph(self.vertices, self.edges, self.length, potential,
                           dict(self.couplings), self.max_degree)

    def with_couplings(self, couplings) -> "MetricGraph":
        """Replace couplings; ``couplings`` is a spec for all vertices or a mapping."""
        if isinstance(couplings, CouplingSpec):
            couplings = dict.fromkeys(self.vertices, couplings)
        return make_graph(self.vertices, [(e.id, e.tail, e.head, e.beta) for e in self.edges],
                          length=self.length, potential=self.potential,
                          couplings={**self.couplings, **couplings}, max_degree=self.max_degree)


def make_graph(vertices, edges, *, length=1.0, potential=None, couplings=None,
               max_degree=DEFAULT_MAX_DEGREE) -> MetricGraph:
    """Validated graph from plain Python data.

    ``edges`` holds tuples ``(id, tail, head)`` or ``(id, tail, head, beta)``;
    ``couplings`` is a single :class:`CouplingSpec` for every vertex or a
    mapping vertex -> spec (missing vertices get Kirchhoff conditions).
    """
    potential = potential or Potential.zero()
    if not (isinstance(length, (int, float)) and np.isfinite(length) and length > 0):
        raise GraphValidationError(f"edge length must be positive, got {length!r}")
    vertices = [str(v) for v in vertices]
    if len(set(vertices)) != len(vertices):
        raise GraphValidationError("vertex ids must be unique")
    parsed = []
    for item in edges:
        if len(item) not in (3, 4):
            raise GraphValidationError(f"malformed edge {item!r}")
        eid, tail, head = (str(x) for x in item[:3])
        beta = float(item[3]) if len(item) == 4 else 0.0
        for end in (tail, head):
            if end not in vertices:
                raise GraphValidationError(f"edge {eid!r} refers to unknown vertex {end!r}")
        parsed.append(Edge(eid, tail, head, beta))
    if len({e.id for e in parsed}) != len(parsed):
        raise GraphValidationError("edge ids must be unique")
    if not parsed:
        raise GraphValidationError("graph has no edges")
    potential.check_domain(float(length))

    if couplings is None or isinstance(couplings, CouplingSpec):
        couplings = dict.fromkeys(vertices, couplings or CouplingSpec.kirchhoff())
    else:
        unknown = set(couplings) - set(vertices)
        if unknown:
            raise GraphValidationError(f"couplings given for unknown vertices {sorted(unknown)}")
        couplings = {v: couplings.get(v, CouplingSpec.kirchhoff()) for v in vertices}

    g = MetricGraph(
        vertices=tuple(sorted(vertices)),
        edges=tuple(sorted(parsed, key=lambda e: e.id)),
        length=float(length),
        potential=potential,
        couplings=couplings,
        max_degree=int(max_degree),
    )
    for v in g.vertices:
        d = g.degree(v)
        if d < 1:
            raise GraphValidationError(f"vertex {v!r} is isolated")
        if d > g.max_degree:
            raise GraphValidationError(f"vertex {v!r} has degree {d} > bound {g.max_degree}")
        g.couplings[v].check_degree(d)
    return g


# -- deck index -----------------------------------------------------------

@dataclass(frozen=True)
class Slot:
    vertex: str
    edge: str
    end: str  # TAIL or HEAD


@dataclass(frozen=True, eq=False)
class DeckIndex:
    """Half-edge slots ``(v, e, end)`` grouped into contiguous vertex blocks.

    ``partner[k]`` is the slot at the other end of the same edge; ``phase[k]``
    is ``beta_{v,e}``, i.e. 0 at a tail and ``beta_e`` at a head.
    """

    slots: tuple[Slot, ...]
    blocks: Mapping[str, slice]
    partner: np.ndarray
    edge_of: np.ndarray  # index into g.edges
    is_tail: np.ndarray
    phase: np.ndarray

    def __len__(self):
        return len(self.slots)

    @cached_property
    def position(self) -> dict[Slot, int]:
        return {s: k for k, s in enumerate(self.slots)}

    def index(self, vertex: str, edge: str, end: str) -> int:
        return self.position[Slot(vertex, edge, end)]


def deck_index(g: MetricGraph) -> DeckIndex:
    slots = []
    blocks = {}
    for v in g.vertices:
        start = len(slots)
        for e in g.edges:  # already sorted by id
            if e.tail == v:
                slots.append(Slot(v, e.id, TAIL))
            if e.head == v:
                slots.append(Slot(v, e.id, HEAD))
        blocks[v] = slice(start, len(slots))
    pos = {s: k for k, s in enumerate(slots)}
    edge_pos = {e.id: k for k, e in enumerate(g.edges)}
    partner = np.empty(len(slots), dtype=int)
    phase = np.zeros(len(slots))
    for k, s in enumerate(slots):
        e = g.edges[edge_pos[s.edge]]
        other = Slot(e.head, e.id, HEAD) if s.end == TAIL else Slot(e.tail, e.id, TAIL)
        partner[k] = pos[other]
        phase[k] = 0.0 if s.end == TAIL else e.beta
    return DeckIndex(
        slots=tuple(slots),
        blocks=blocks,
        partner=partner,
        edge_of=np.array([edge_pos[s.edge] for s in slots], dtype=int),
        is_tail=np.array([s.end == TAIL for s in slots]),
        phase=phase,
    )


# -- documents ------------------------------------------------------------

def _complex_matrix(data, name):
    def entry(x):
        if isinstance(x, (list, tuple)):
            if len(x) != 2:
                raise GraphValidationError(f"{name}: complex entries are [re, im] pairs")
            return complex(float(x[0]), float(x[1]))
        if isinstance(x, str):
            return complex(x.replace(" ", ""))
        return complex(float(x))

    try:
        return np.array([[entry(x) for x in row] for row in data], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise GraphValidationError(f"{name}: malformed matrix ({exc})") from None


def _strength(params, name):
    plain, scaled = params.get(name), params.get(f"{name}_per_degree")
    if plain is not None and scaled is not None:
        raise GraphValidationError(f"give either {name} or {name}_per_degree, not both")
    if scaled is not None:
        return float(scaled), True
    return float(plain or 0.0), False


def coupling_from_document(doc) -> CouplingSpec:
    if doc is None:
        return CouplingSpec.kirchhoff()
    kind = doc.get("type")
    params = doc.get("parameters") or {}
    try:
        if kind == "delta":
            return CouplingSpec.delta(*_strength(params, "alpha"))
        if kind == "delta_prime":
            return CouplingSpec.delta_prime(*_strength(params, "beta"))
        if kind == "delta_prime_s":
            return CouplingSpec.delta_prime_s(*_strength(params, "alpha"))
        if kind == "custom_AB":
            return CouplingSpec.custom_ab(_complex_matrix(params.get("A"), "A"),
                                          _complex_matrix(params.get("B"), "B"))
        if kind == "custom_U":
            return CouplingSpec.custom_u(_complex_matrix(params.get("U"), "U"))
    except CouplingError:
        raise
    except (TypeError, ValueError) as exc:
        raise GraphValidationError(f"bad parameters for coupling {kind!r}: {exc}") from None
    raise GraphValidationError(f"unknown coupling kind {kind!r}")


def coupling_to_document(spec: CouplingSpec) -> dict:
    def mat(m):
        return [[[z.real, z.imag] for z in row] for row in m]

    if spec.kind in ("delta", "delta_prime_s"):
        key = "alpha_per_degree" if spec.per_degree else "alpha"
        return {"type": spec.kind, "parameters": {key: spec.alpha}}
    if spec.kind == "delta_prime":
        key = "beta_per_degree" if spec.per_degree else "beta"
        return {"type": spec.kind, "parameters": {key: spec.beta}}
    if spec.kind == "custom_AB":
        return {"type": spec.kind, "parameters": {"A": mat(spec.A), "B": mat(spec.B)}}
    return {"type": spec.kind, "parameters": {"U": mat(spec.U)}}


def potential_from_document(doc) -> Potential:
    if doc is None:
        return Potential.zero()
    kind = doc.get("kind", "zero")
    try:
        if kind == "zero":
            return Potential.zero()
        if kind == "polynomial":
            return Potential.polynomial(doc["coefficients"])
        if kind == "fourier":
            return Potential.fourier(doc.get("cos", ()), doc.get("sin", ()), float(doc.get("period", 1.0)))
        if kind == "table":
            return Potential("table", samples=tuple(tuple(s) for s in doc["samples"]))
    except GraphValidationError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphValidationError(f"malformed potential {kind!r}: {exc}") from None
    raise GraphValidationError(f"unknown potential kind {kind!r}")


def build_graph(doc: Mapping) -> MetricGraph:
    """Validated :class:`MetricGraph` from a parsed graph document."""
    if not isinstance(doc, Mapping):
        raise GraphValidationError("graph document must be a mapping")
    try:
        vertices = doc["vertices"]
        edges = doc["edges"]
    except KeyError as exc:
        raise GraphValidationError(f"graph document lacks {exc.args[0]!r}") from None
    try:
        vids = [str(v["id"]) for v in vertices]
        couplings = {str(v["id"]): coupling_from_document(v.get("coupling")) for v in vertices}
        edge_items = [(e["id"], e["tail"], e["head"], float(e.get("beta", 0.0))) for e in edges]
    except (KeyError, TypeError) as exc:
        raise GraphValidationError(f"malformed vertex or edge entry: {exc}") from None
    return make_graph(
        vids, edge_items,
        length=doc.get("length", 1.0),
        potential=potential_from_document(doc.get("potential")),
        couplings=couplings,
        max_degree=doc.get("max_degree", DEFAULT_MAX_DEGREE),
    )


def graph_to_document(g: MetricGraph) -> dict:
    return {
        "length": g.length,
        "potential": g.potential.to_document(),
        "max_degree": g.max_degree,
        "vertices": [{"id": v, "coupling": coupling_to_document(g.couplings[v])} for v in g.vertices],
        "edges": [{"id": e.id, "tail": e.tail, "head": e.head, "beta": e.beta} for e in g.edges],
    }


def parse_document(text: str, suffix: str = ".json") -> dict:
    """Parse JSON or YAML text, reporting the offending line on failure."""
    if suffix.lower() in (".yaml", ".yml"):
        import yaml

        try:
            return yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f" at line {mark.line + 1}" if mark is not None else ""
            raise GraphValidationError(f"YAML parse error{where}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if text.splitlines() else ""
        raise GraphValidationError(f"JSON parse error at line {exc.lineno}: {exc.msg}\n  {line}") from None


def load_graph(path) -> tuple[MetricGraph, str]:
    """Load a graph file; returns the graph and the sha256 digest of the file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise GraphValidationError(f"cannot read {path}: {exc}") from None
    doc = parse_document(raw.decode("utf-8"), path.suffix)
    return build_graph(doc), hashlib.sha256(raw).hexdigest()
