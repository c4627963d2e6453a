"""Discrete operators on vertex functions and on the deck (half-edge) space.

Vertex functions carry the weighted norm ``sum_v deg v |f(v)|^2``.  The
adjacency operators below are written in the plain vertex basis, so they
are self-adjoint for the weighted product; :func:`symmetrize` conjugates
by ``W^{1/2}``, ``W = diag(deg v)``, to get a Hermitian matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .coupling import NormalizedCoupling
from .errors import NumericalCheckError
from .graph import MetricGraph

HERMITIAN_TOL = 1e-10
GROUP_TOL = 1e-8


def magnetic_adjacency(g: MetricGraph, betas: Sequence[float] | None = None) -> np.ndarray:
    """``(D_beta f)(v) = (1/deg v)(sum_{iota e = v} e^{-i b_e} f(tau e) + sum_{tau e = v} e^{i b_e} f(iota e))``."""
    betas = g.betas if betas is None else np.asarray(betas, dtype=float)
    idx = g.vertex_index
    n = len(g.vertices)
    A = np.zeros((n, n), dtype=complex)
    for e, b in zip(g.edges, betas):
        t, h = idx[e.tail], idx[e.head]
        A[t, h] += np.exp(-1j * b)
        A[h, t] += np.exp(1j * b)
    return A / g.degrees[:, None]


def adjacency_operator(g: MetricGraph) -> np.ndarray:
    """Weighted adjacency operator (phases ignored); real matrix."""
    return magnetic_adjacency(g, np.zeros(len(g.edges))).real


def symmetrize(A: np.ndarray, degrees: np.ndarray) -> np.ndarray:
    """``W^{1/2} A W^{-1/2}``; Hermitian whenever ``A`` is self-adjoint in the weighted product."""
    r = np.sqrt(np.asarray(degrees, dtype=float))
    return r[:, None] * A / r[None, :]


def weighted_inner(f, h, degrees) -> complex:
    return complex(np.sum(np.asarray(degrees) * np.conj(h) * f))


def deck_shift(g: MetricGraph, magnetic: bool = False) -> np.ndarray:
    """Partner permutation ``(D xi)_{v,e} = xi_{v_e,e}``.

    With ``magnetic=True`` returns ``Phi D Phi*`` where ``Phi`` multiplies
    slot ``(v, e)`` by ``exp(i beta_{v,e})``.
    """
    deck = g.deck
    n = len(deck)
    D = np.zeros((n, n), dtype=complex if magnetic else float)
    rows = np.arange(n)
    if magnetic:
        D[rows, deck.partner] = np.exp(1j * (deck.phase - deck.phase[deck.partner]))
    else:
        D[rows, deck.partner] = 1.0
    return D


def block_basis(g: MetricGraph, normalized: Mapping[str, NormalizedCoupling]) -> np.ndarray:
    """Deck-space isometry whose columns span ``ran P``, ``P = (+)_v P_v``.

    Columns come vertex by vertex in deck order, each vertex contributing
    its orthonormal basis of ``ran P_v``.
    """
    deck = g.deck
    cols = []
    for v in g.vertices:
        block = deck.blocks[v]
        basis = normalized[v].basis
        for k in range(basis.shape[1]):
            col = np.zeros(len(deck), dtype=complex)
            col[block] = basis[:, k]
            cols.append(col)
    if not cols:
        return np.zeros((len(deck), 0), dtype=complex)
    return np.column_stack(cols)


def block_projector(Q: np.ndarray) -> np.ndarray:
    return Q @ Q.conj().T


def projected_shift(D: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """``D_P = P D P*`` written in the orthonormal basis ``Q`` of ``ran P``."""
    DP = Q.conj().T @ D @ Q
    return (DP + DP.conj().T) / 2


def theta_map(g: MetricGraph) -> np.ndarray:
    """``(Theta xi)_v = xi(v) p_v`` as a deck-by-vertex matrix.

    ``Theta`` is isometric from the weighted vertex space: ``Theta* Theta = W``.
    """
    deck = g.deck
    T = np.zeros((len(deck), len(g.vertices)))
    for j, v in enumerate(g.vertices):
        T[deck.blocks[v], j] = 1.0
    return T


def delta_type_basis(g: MetricGraph) -> np.ndarray:
    """Orthonormal deck basis ``p_v / sqrt(deg v)``: the range of ``Theta W^{-1/2}``."""
    return theta_map(g) / np.sqrt(g.degrees)[None, :]


# -- Hermitian eigensolver ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Ascending eigenvalues, orthonormal eigenvectors and multiplicity groups."""

    values: np.ndarray
    vectors: np.ndarray
    groups: tuple[tuple[int, ...], ...]  # indices of (near-)equal eigenvalues

    @property
    def clusters(self) -> list[tuple[float, int, np.ndarray]]:
        """``(eigenvalue, multiplicity, eigenvectors)`` per group."""
        return [
            (float(np.mean(self.values[list(grp)])), len(grp), self.vectors[:, list(grp)])
            for grp in self.groups
        ]

    @property
    def bounds(self) -> tuple[float, float]:
        return float(self.values[0]), float(self.values[-1])

    def projector(self, select) -> np.ndarray:
        """Spectral projector onto eigenvalues ``x`` with ``select(x)`` true."""
        keep = [k for k, x in enumerate(self.values) if select(float(x))]
        V = self.vectors[:, keep]
        return V @ V.conj().T


def hermitian_eigs(M: np.ndarray, group_tol: float = GROUP_TOL,
                   hermitian_tol: float = HERMITIAN_TOL) -> EigenDecomposition:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("need a square matrix")
    if M.size and np.linalg.norm(M - M.conj().T) > hermitian_tol * max(1.0, np.linalg.norm(M)):
        raise NumericalCheckError("matrix is not Hermitian")
    if M.shape[0] == 0:
        return EigenDecomposition(np.zeros(0), np.zeros((0, 0)), ())
    values, vectors = np.linalg.eigh((M + M.conj().T) / 2)
    groups = []
    current = [0]
    for k in range(1, len(values)):
        if values[k] - values[current[-1]] <= group_tol:
            current.append(k)
        else:
            groups.append(tuple(current))
            current = [k]
    groups.append(tuple(current))
    return EigenDecomposition(values, vectors, tuple(groups))
