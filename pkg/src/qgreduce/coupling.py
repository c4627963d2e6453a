"""Vertex boundary conditions in (A, B), unitary and projector form.

All unitaries returned by :func:`to_unitary` act on *Dirichlet coordinates*:
for a vertex ``v`` the vector of edge values ``xi = (f_e(v))`` and the vector
of inward derivatives ``xi' = (f'_e(v))`` (``f'_e(0)`` at a tail,
``-f'_e(l)`` at a head) satisfy ``(1 - U) xi = i (1 + U) xi'``.

The Neumann-based edge triple swaps the roles of values and derivatives,
``Gamma~ = -xi'`` and ``Gamma~' = xi``; in those coordinates the same
condition is expressed by ``-U``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import CouplingError, ScalarConditionError

KINDS = ("delta", "delta_prime", "delta_prime_s", "custom_AB", "custom_U")
TRIPLES = ("dirichlet", "neumann")

UNITARY_TOL = 1e-12
MINUS_ONE_TOL = 1e-10


def _as_matrix(m) -> np.ndarray | None:
    if m is None:
        return None
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise CouplingError(f"coupling matrix must be square, got shape {m.shape}")
    return m


@dataclass(frozen=True, eq=False)
class CouplingSpec:
    """Boundary condition at one vertex.

    ``alpha`` is the strength of a delta or delta'_s coupling and ``beta``
    the strength of a delta' coupling.  With ``per_degree=True`` the stored
    value is multiplied by the vertex degree, so that ``alpha(v) = alpha *
    deg v`` holds on every vertex regardless of its degree.
    """

    kind: str
    alpha: float = 0.0
    beta: float = 0.0
    per_degree: bool = False
    A: np.ndarray | None = field(default=None, repr=False)
    B: np.ndarray | None = field(default=None, repr=False)
    U: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CouplingError(f"unknown coupling kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "A", _as_matrix(self.A))
        object.__setattr__(self, "B", _as_matrix(self.B))
        object.__setattr__(self, "U", _as_matrix(self.U))
        if self.kind == "custom_AB":
            if self.A is None or self.B is None or self.A.shape != self.B.shape:
                raise CouplingError("custom_AB coupling needs square matrices A and B of equal size")
        if self.kind == "custom_U" and self.U is None:
            raise CouplingError("custom_U coupling needs a matrix U")
        if self.kind == "delta_prime" and self.beta == 0:
            raise CouplingError("delta_prime coupling needs a non-zero beta")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def delta(cls, alpha=0.0, per_degree=False):
        return cls("delta", alpha=float(alpha), per_degree=per_degree)

    @classmethod
    def kirchhoff(cls):
        return cls("delta")

    @classmethod
    def delta_prime(cls, beta, per_degree=False):
        return cls("delta_prime", beta=float(beta), per_degree=per_degree)

    @classmethod
    def delta_prime_s(cls, alpha, per_degree=False):
        return cls("delta_prime_s", alpha=float(alpha), per_degree=per_degree)

    @classmethod
    def custom_ab(cls, A, B):
        return cls("custom_AB", A=A, B=B)

    @classmethod
    def custom_u(cls, U):
        return cls("custom_U", U=U)

    # -------------------------------------------------------------------------

    @property
    def native_triple(self) -> str:
        """Edge triple in which this coupling takes the projector form."""
        return "neumann" if self.kind in ("delta_prime", "delta_prime_s") else "dirichlet"

    def strength(self, deg: int) -> float:
        """alpha(v) (or beta(v) for delta') at a vertex of degree ``deg``."""
        value = self.beta if self.kind == "delta_prime" else self.alpha
        return value * deg if self.per_degree else value

    def size(self) -> int | None:
        for m in (self.A, self.U):
            if m is not None:
                return m.shape[0]
        return None

    def check_degree(self, deg: int) -> None:
        n = self.size()
        if n is not None and n != deg:
            raise CouplingError(f"{self.kind} matrix has size {n} but the vertex degree is {deg}")

    def ab_form(self, deg: int) -> tuple[np.ndarray, np.ndarray]:
        """Condition ``A xi = B xi'`` written directly from the vertex rules.

        This is deliberately independent of the unitary formulas so that
        the two can be cross-checked.
        """
        self.check_degree(deg)
        d = deg
        if self.kind == "custom_AB":
            return self.A.copy(), self.B.copy()
        if self.kind == "custom_U":
            U = self.U
            return np.eye(d) - U, 1j * (np.eye(d) + U)
        A = np.zeros((d, d), dtype=complex)
        B = np.zeros((d, d), dtype=complex)
        diffs = np.eye(d)[:-1] - np.eye(d)[1:]  # rows e_j - e_{j+1}
        s = self.strength(d)
        if self.kind == "delta":
            # continuity, then sum of derivatives = alpha(v) f(v)
            A[:-1] = diffs
            A[-1, 0] = s
            B[-1] = 1.0
        elif self.kind == "delta_prime":
            # sum of derivatives = 0, jumps of values = beta(v)/deg * jumps of derivatives
            B[0] = 1.0
            A[1:] = diffs
            B[1:] = (s / d) * diffs
        else:  # delta_prime_s
            # continuity of derivatives, sum of values = alpha(v) f'(v)
            B[:-1] = diffs
            A[-1] = 1.0
            B[-1, 0] = s
        return A, B


def to_unitary(spec: CouplingSpec, deg: int, triple: str = "dirichlet") -> np.ndarray:
    """Unitary ``U_v`` of ``spec`` at a vertex of degree ``deg``.

    ``triple="neumann"`` returns the matrix for the Neumann-based edge triple
    (the negative of the Dirichlet-coordinate one).
    """
    if triple not in TRIPLES:
        raise ValueError(f"triple must be one of {TRIPLES}")
    spec.check_degree(deg)
    d = deg
    I = np.eye(d, dtype=complex)
    J = np.ones((d, d), dtype=complex)
    s = spec.strength(d)
    if spec.kind == "delta":
        U = 2.0 / (d + 1j * s) * J - I
    elif spec.kind == "delta_prime":
        U = -(d + 1j * s) / (d - 1j * s) * I + 2.0 / (d - 1j * s) * J
    elif spec.kind == "delta_prime_s":
        U = I - 2.0 / (d - 1j * s) * J
    elif spec.kind == "custom_U":
        U = spec.U.copy()
    else:
        A, B = spec.A, spec.B
        pairing = A @ B.conj().T
        if np.linalg.norm(pairing - pairing.conj().T) > 1e-10 * max(1.0, np.linalg.norm(pairing)):
            raise CouplingError("custom_AB coupling violates A B* = B A*")
        gram = A @ A.conj().T + B @ B.conj().T
        if np.linalg.eigvalsh(gram).min() <= 1e-12 * max(1.0, np.linalg.norm(gram)):
            raise CouplingError("custom_AB coupling has singular A A* + B B*")
        U = -np.linalg.solve(A - 1j * B, A + 1j * B)
    defect = np.linalg.norm(U.conj().T @ U - I)
    if defect > 1e-10:
        raise CouplingError(f"{spec.kind} coupling is not unitary (|U*U - 1| = {defect:.2e})")
    return -U if triple == "neumann" else U


@dataclass(frozen=True, eq=False)
class NormalizedCoupling:
    """Projector form ``P xi' = C P xi``, ``(1 - P) xi = 0``.

    ``basis`` holds orthonormal columns spanning ``ran P``; ``C`` is written
    in that basis (use :attr:`C_full` for the ``deg x deg`` matrix).
    """

    U: np.ndarray
    P: np.ndarray
    basis: np.ndarray
    C: np.ndarray

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def C_full(self) -> np.ndarray:
        return self.basis @ self.C @ self.basis.conj().T


def fix_phase(vectors: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate every column so its first non-negligible entry is real positive."""
    out = np.array(vectors, dtype=complex)
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = np.flatnonzero(np.abs(col) > tol)
        if idx.size:
            z = col[idx[0]]
            out[:, k] = col * (abs(z) / z)
    return out


def range_basis(P: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the range of an orthogonal projector."""
    w, v = np.linalg.eigh((P + P.conj().T) / 2)
    keep = w > 0.5
    return fix_phase(v[:, keep])


def to_projector_form(U: np.ndarray, tol: float = MINUS_ONE_TOL) -> NormalizedCoupling:
    U = np.asarray(U, dtype=complex)
    d = U.shape[0]
    I = np.eye(d)
    # ker(1 + U) from the right singular vectors of 1 + U
    _, sv, vh = np.linalg.svd(I + U)
    null = vh[sv <= tol].conj().T
    P = I - null @ null.conj().T
    basis = range_basis(P)
    r = basis.shape[1]
    Ur = basis.conj().T @ U @ basis
    if r:
        gap = np.linalg.svd(np.eye(r) + Ur, compute_uv=False).min()
        if gap <= tol:
            raise CouplingError("1 + PUP* is numerically singular; eigenvalue -1 leaked into ran P")
        C = -1j * (np.eye(r) - Ur) @ np.linalg.inv(np.eye(r) + Ur)
        C = (C + C.conj().T) / 2
    else:
        C = np.zeros((0, 0), dtype=complex)
    return NormalizedCoupling(U=U, P=P, basis=basis, C=C)


# -- boundary relations ---------------------------------------------------------

def _null_space(M: np.ndarray, dim: int) -> np.ndarray:
    _, _, vh = np.linalg.svd(M)
    return vh[-dim:].conj().T


def relation_from_ab(A, B) -> np.ndarray:
    """Orthonormal basis (2d x d) of ``{(xi, xi'): A xi = B xi'}``."""
    A = np.asarray(A, dtype=complex)
    return _null_space(np.hstack([A, -np.asarray(B, dtype=complex)]), A.shape[0])


def relation_from_unitary(U) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    I = np.eye(U.shape[0])
    return _null_space(np.hstack([I - U, -1j * (I + U)]), U.shape[0])


def relation_from_projector(nc: NormalizedCoupling) -> np.ndarray:
    d = nc.P.shape[0]
    I = np.eye(d)
    top = np.hstack([I - nc.P, np.zeros((d, d))])
    bottom = np.hstack([-nc.C_full @ nc.P, nc.P])
    return _null_space(np.vstack([top, bottom]), d)


def relation_distance(R1: np.ndarray, R2: np.ndarray) -> float:
    """Spectral-norm distance between the orthogonal projectors onto two relations."""
    P1 = R1 @ R1.conj().T
    P2 = R2 @ R2.conj().T
    return float(np.linalg.norm(P1 - P2, 2))


# -- scalar spectrum condition -----------------------------------------------

@dataclass(frozen=True, eq=False)
class ScalarCondition:
    """Outcome of the single-eigenvalue test over all vertex unitaries.

    ``theta`` is ``None`` when every eigenvalue equals -1, i.e. the reduced
    space ``ran P`` is trivial.
    """

    theta: complex | None
    alpha: float
    triple: str
    normalized: Mapping[str, NormalizedCoupling]

    @property
    def reduced_dimension(self) -> int:
        return sum(nc.rank for nc in self.normalized.values())


def alpha_from_theta(theta: complex) -> float:
    return float((-1j * (1 - theta) / (1 + theta)).real)


def native_triple(g) -> str:
    kinds = {g.couplings[v].native_triple for v in g.vertices}
    return "neumann" if kinds == {"neumann"} else "dirichlet"


def _scalar_condition(g, triple: str, tol: float) -> ScalarCondition:
    collected = []  # (eigenvalue, vertex)
    normalized = {}
    for v in g.vertices:
        U = to_unitary(g.couplings[v], g.degree(v), triple)
        normalized[v] = to_projector_form(U, tol)
        for lam in np.linalg.eigvals(U):
            if abs(lam + 1) > tol:
                collected.append((complex(lam), v))
    if not collected:
        return ScalarCondition(None, 0.0, triple, normalized)
    theta, v0 = collected[0]
    for lam, v in collected[1:]:
        if abs(lam - theta) > tol:
            raise ScalarConditionError(
                f"vertex unitaries ({triple} triple) have two distinct eigenvalues "
                f"other than -1: {theta:.12g} at vertex {v0!r} and {lam:.12g} at vertex {v!r}",
                eigenvalues=(theta, lam),
            )
    return ScalarCondition(theta, alpha_from_theta(theta), triple, normalized)


def check_scalar_condition(g, triple: str | None = None, tol: float = MINUS_ONE_TOL) -> ScalarCondition:
    """Check that all vertex unitaries share one eigenvalue besides -1.

    With ``triple=None`` the graph's native triple is tried first and then
    the other one; the error of the native attempt is raised if both fail.
    """
    if triple is not None:
        return _scalar_condition(g, triple, tol)
    first = native_triple(g)
    second = "neumann" if first == "dirichlet" else "dirichlet"
    try:
        return _scalar_condition(g, first, tol)
    except ScalarConditionError as exc:
        try:
            return _scalar_condition(g, second, tol)
        except ScalarConditionError:
            raise exc from None
