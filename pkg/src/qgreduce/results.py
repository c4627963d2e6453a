"""Spectral result containers shared by the reduction and the oracle."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class SpectralEntry:
    z: float
    multiplicity: int
    lam: float | None  # discrete eigenvalue it came from (reduced method only)
    method: str  # "reduced" or "oracle"
    residual: float  # |eta(z) - lam| for reduced entries, sigma_min / sigma_max for oracle ones

    def as_row(self) -> dict:
        return {
            "z": self.z,
            "multiplicity": self.multiplicity,
            "lambda": self.lam,
            "method": self.method,
            "residual": self.residual,
        }


@dataclass(frozen=True)
class SpectralResult:
    """Eigenvalues inside an open interval, sorted by ``z``.

    ``boundary`` lists discrete eigenvalues (or oracle roots) excluded
    because they sit in the collar at an end of the interval.
    """

    entries: tuple[SpectralEntry, ...]
    interval: tuple[float, float]
    boundary: tuple[float, ...] = ()
    warnings: tuple[str, ...] = field(default=())

    @property
    def values(self) -> list[float]:
        return [e.z for e in self.entries]

    @property
    def multiplicities(self) -> list[int]:
        return [e.multiplicity for e in self.entries]

    @property
    def total_multiplicity(self) -> int:
        return sum(self.multiplicities)

    def rows(self) -> list[dict]:
        return [e.as_row() for e in self.entries]
