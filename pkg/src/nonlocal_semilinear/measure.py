"""Weighted Radon measures: finitely many atoms plus a density on a grid."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .domain import Domain, Grid, boundary_distance
from .errors import DegenerateInputError, DomainError


@dataclass(frozen=True, eq=False)
class WeightedMeasure:
    """``sum_k mass_k * Dirac(y_k) + density * dx``.

    ``atoms`` is a tuple of ``(location, mass)`` pairs.  In 1D a location is
    a float, otherwise a tuple of coordinates.  ``density`` holds node values
    on whatever grid the measure is later paired with.
    """

    atoms: tuple = ()
    density: np.ndarray | None = None
    domain: Domain = field(default_factory=Domain.interval)

    def __post_init__(self) -> None:
        clean = []
        for loc, mass in self.atoms:
            loc = float(loc) if np.ndim(loc) == 0 else tuple(float(c) for c in loc)
            boundary_distance(self.domain, loc)
            clean.append((loc, float(mass)))
        object.__setattr__(self, "atoms", tuple(clean))
        if self.density is not None:
            d = np.array(self.density, dtype=float)
            d.setflags(write=False)
            object.__setattr__(self, "density", d)

    @classmethod
    def dirac(cls, y, mass: float = 1.0, domain: Domain | None = None) -> "WeightedMeasure":
        return cls(((y, mass),), None, domain or Domain.interval())

    @classmethod
    def zero(cls, domain: Domain | None = None) -> "WeightedMeasure":
        return cls((), None, domain or Domain.interval())

    @property
    def is_nonnegative(self) -> bool:
        ok = all(m >= 0 for _, m in self.atoms)
        return ok and (self.density is None or bool(np.all(self.density >= 0)))

    @property
    def is_zero(self) -> bool:
        no_atoms = all(m == 0 for _, m in self.atoms)
        return no_atoms and (self.density is None or not np.any(self.density))

    def atom_locations(self) -> np.ndarray:
        if not self.atoms:
            return np.zeros((0, self.domain.N))
        return self.domain.as_points(np.array([loc for loc, _ in self.atoms], dtype=float))

    def atom_masses(self) -> np.ndarray:
        return np.array([m for _, m in self.atoms], dtype=float)

    def scaled(self, factor: float) -> "WeightedMeasure":
        atoms = tuple((loc, factor * m) for loc, m in self.atoms)
        dens = None if self.density is None else factor * self.density
        return WeightedMeasure(atoms, dens, self.domain)

    def to_dict(self) -> dict:
        return {
            "atoms": [{"x": loc, "mass": m} for loc, m in self.atoms],
            "density": None if self.density is None else [float(v) for v in self.density],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict, domain: Domain | None = None) -> "WeightedMeasure":
        atoms = tuple((a["x"], a["mass"]) for a in data.get("atoms", []))
        return cls(atoms, data.get("density"), domain or Domain.interval())


def weighted_norm(mu: WeightedMeasure, gamma: float, grid: Grid | None = None) -> float:
    """Total variation of ``mu`` against the weight ``delta**gamma``."""
    total = 0.0
    if mu.atoms:
        d = mu.domain.distance_unchecked(mu.atom_locations())
        total += float(np.sum(np.abs(mu.atom_masses()) * d**gamma))
    if mu.density is not None:
        if grid is None:
            raise DomainError("a grid is needed to integrate the density part")
        if mu.density.shape != (grid.n,):
            raise DomainError("density does not match the grid")
        total += float(np.sum(np.abs(mu.density) * grid.deltas**gamma * grid.weights))
    return total


def normalize(mu: WeightedMeasure, gamma: float, grid: Grid | None = None) -> WeightedMeasure:
    """Rescale ``mu`` to unit weighted norm."""
    norm = weighted_norm(mu, gamma, grid)
    if norm == 0:
        raise DegenerateInputError("cannot normalize the zero measure")
    if not np.isfinite(1.0 / norm):
        raise DegenerateInputError(f"weighted norm {norm!r} is too small to invert")
    return mu.scaled(1.0 / norm)


def boundary_concentrated_dirac(y, gamma: float, domain: Domain | None = None) -> WeightedMeasure:
    """Unit-norm Dirac mass ``delta(y)**(-gamma) * Dirac(y)``."""
    domain = domain or Domain.interval()
    d = boundary_distance(domain, y)
    return WeightedMeasure(((y, d ** (-gamma)),), None, domain)
