"""Periodic first-order finite-volume building blocks shared by both solvers."""
from __future__ import annotations

import numpy as np

from .errors import CFLViolation


def right(a: np.ndarray) -> np.ndarray:
    """Cell j+1 values aligned with cell j (face j+1/2 is between them)."""
    return np.roll(a, -1, axis=0)


def face_speed(cell_speed, speed=None):
    """Dissipation speed per face j+1/2: a fixed global value when ``speed``
    is given, otherwise max of the two neighbouring cell speeds."""
    if speed is not None:
        return float(speed)
    return np.maximum(cell_speed, right(cell_speed))


def rusanov(q: np.ndarray, f: np.ndarray, speed) -> np.ndarray:
    """Local Lax-Friedrichs flux at faces j+1/2 from cell states and fluxes.

    ``q`` and ``f`` are (M, ...) arrays; ``speed`` is a scalar or (M,) array
    of face speeds.
    """
    s = np.asarray(speed, dtype=float)
    if s.ndim:
        s = s.reshape(s.shape + (1,) * (q.ndim - 1))
    return 0.5 * (f + right(f)) - 0.5 * s * (right(q) - q)


def divergence(face_flux: np.ndarray, dx: float) -> np.ndarray:
    """-(F_{j+1/2} - F_{j-1/2}) / dx."""
    return -(face_flux - np.roll(face_flux, 1, axis=0)) / dx


def check_cfl(cfl: float) -> float:
    cfl = float(cfl)
    if not 0.0 < cfl <= 1.0:
        raise CFLViolation(f"cfl must lie in (0, 1], got {cfl}")
    return cfl


def check_dt(dt: float, dt_max: float) -> float:
    dt = float(dt)
    if not dt > 0.0:
        raise CFLViolation(f"time step must be > 0, got {dt}")
    if dt > dt_max * (1.0 + 1e-12):
        raise CFLViolation(f"time step {dt:.6g} exceeds the stability bound {dt_max:.6g}")
    return dt
