"""Periodic 1-D grids of cell states, U <-> W conversion and CSV snapshots.

Arrays are cell-major: ``partial`` and ``flux`` have shape (M, N-1).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import NonPositiveDensity

MIN_CELLS = 16


def cell_centers(M: int, length: float) -> np.ndarray:
    dx = length / M
    return (np.arange(M) + 0.5) * dx


def central_gradient(a: np.ndarray, dx: float) -> np.ndarray:
    """Second-order periodic central difference along axis 0."""
    return (np.roll(a, -1, axis=0) - np.roll(a, 1, axis=0)) / (2.0 * dx)


def central_gradient4(a: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order periodic central difference along axis 0 (diagnostics)."""
    return (
        -np.roll(a, -2, axis=0) + 8.0 * np.roll(a, -1, axis=0)
        - 8.0 * np.roll(a, 1, axis=0) + np.roll(a, 2, axis=0)
    ) / (12.0 * dx)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _write_csv(path, header, columns) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([_fmt(v) for v in row])


@dataclass
class FieldU1D:
    """Conserved-mode field (rho, rho V, rho_1..rho_{N-1}) on a periodic grid."""

    rho: np.ndarray
    momentum: np.ndarray
    partial: np.ndarray
    length: float = 1.0
    time: float = 0.0

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.momentum = np.asarray(self.momentum, dtype=float)
        self.partial = np.asarray(self.partial, dtype=float)
        if self.partial.ndim == 1:
            self.partial = self.partial[:, None]
        M = self.rho.shape[0]
        if M < MIN_CELLS:
            raise ValueError(f"need at least {MIN_CELLS} cells, got {M}")
        if self.momentum.shape != (M,) or self.partial.shape[0] != M:
            raise ValueError("field arrays must share the cell count")

    @property
    def M(self) -> int:
        return self.rho.shape[0]

    @property
    def N(self) -> int:
        return self.partial.shape[1] + 1

    @property
    def dx(self) -> float:
        return self.length / self.M

    @property
    def x(self) -> np.ndarray:
        return cell_centers(self.M, self.length)

    @property
    def velocity(self) -> np.ndarray:
        return self.momentum / self.rho

    @property
    def densities(self) -> np.ndarray:
        """(M, N) species densities with rho_N = rho - sum(partial)."""
        return np.concatenate([self.partial, (self.rho - self.partial.sum(axis=1))[:, None]], axis=1)

    def validate(self) -> None:
        rho = self.densities
        bad = np.flatnonzero(~np.all(rho > 0, axis=1))
        if bad.size:
            raise NonPositiveDensity("non-positive species density", cell=int(bad[0]))

    def stacked(self) -> np.ndarray:
        """(M, N+1) array of the conserved mode, columns (rho, rho V, rho_1..)."""
        return np.column_stack([self.rho, self.momentum, self.partial])

    def copy(self) -> "FieldU1D":
        return replace(self, rho=self.rho.copy(), momentum=self.momentum.copy(),
                       partial=self.partial.copy())

    def csv_columns(self):
        header = ["x", "rho", "momentum"] + [f"rho_{i + 1}" for i in range(self.N - 1)]
        cols = [self.x, self.rho, self.momentum] + list(self.partial.T)
        return header, cols

    def to_csv(self, path) -> None:
        _write_csv(path, *self.csv_columns())

    @classmethod
    def from_densities(cls, densities, velocity, length=1.0, time=0.0) -> "FieldU1D":
        rho_s = np.asarray(densities, dtype=float)
        rho = rho_s.sum(axis=1)
        return cls(rho, rho * np.asarray(velocity, dtype=float), rho_s[:, :-1], length, time)


@dataclass
class Field1D(FieldU1D):
    """Relaxation-system field in W variables: conserved mode plus the
    diffusion fluxes J_1..J_{N-1}."""

    flux: np.ndarray = None

    def __post_init__(self):
        super().__post_init__()
        if self.flux is None:
            self.flux = np.zeros_like(self.partial)
        self.flux = np.asarray(self.flux, dtype=float)
        if self.flux.ndim == 1:
            self.flux = self.flux[:, None]
        if self.flux.shape != self.partial.shape:
            raise ValueError("flux must have shape (M, N-1)")

    def copy(self) -> "Field1D":
        return replace(self, rho=self.rho.copy(), momentum=self.momentum.copy(),
                       partial=self.partial.copy(), flux=self.flux.copy())

    @property
    def all_fluxes(self) -> np.ndarray:
        """(M, N) fluxes including J_N = -sum(J_i)."""
        return np.concatenate([self.flux, -self.flux.sum(axis=1, keepdims=True)], axis=1)

    def conserved_mode(self) -> FieldU1D:
        return FieldU1D(self.rho.copy(), self.momentum.copy(), self.partial.copy(),
                        self.length, self.time)

    def to_U(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-species (densities, momenta), each (M, N): m_i = rho_i V + J_i."""
        rho_s = self.densities
        V = self.velocity
        return rho_s, rho_s * V[:, None] + self.all_fluxes

    def set_from_U(self, rho_s: np.ndarray, mom_s: np.ndarray) -> None:
        self.rho = rho_s.sum(axis=1)
        self.momentum = mom_s.sum(axis=1)
        self.partial = rho_s[:, :-1].copy()
        self.flux = mom_s[:, :-1] - rho_s[:, :-1] * (self.momentum / self.rho)[:, None]

    @classmethod
    def from_U(cls, rho_s, mom_s, length=1.0, time=0.0) -> "Field1D":
        rho_s = np.asarray(rho_s, dtype=float)
        mom_s = np.asarray(mom_s, dtype=float)
        rho = rho_s.sum(axis=1)
        m = mom_s.sum(axis=1)
        J = mom_s[:, :-1] - rho_s[:, :-1] * (m / rho)[:, None]
        return cls(rho, m, rho_s[:, :-1], length, time, J)

    def csv_columns(self):
        header, cols = super().csv_columns()
        header += [f"J_{i + 1}" for i in range(self.N - 1)]
        cols += list(self.flux.T)
        return header, cols
