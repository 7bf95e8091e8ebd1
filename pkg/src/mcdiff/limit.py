"""Periodic 1-D solver for the diffusion-limit system: Euler equations for
(rho, rho V) and epsilon-scaled cross-diffusion for rho_1..rho_{N-1}.

Convective terms use the same Rusanov routine as the relaxation solver.
The diffusion term is a conservative face-difference of the entropic
variables, weighted by D evaluated at the face-averaged state.
"""
from __future__ import annotations

import numpy as np

from . import fv
from .entropy import entropic_variable
from .errors import NonPositiveDensity
from .fields import FieldU1D
from .mixture import MixtureSpec, diffusion_matrix


def _densities(field: FieldU1D) -> np.ndarray:
    rho_s = field.densities
    bad = np.flatnonzero(~np.all(rho_s > 0, axis=1))
    if bad.size:
        raise NonPositiveDensity("limit step lost positivity", cell=int(bad[0]))
    return rho_s


def euler_flux(spec: MixtureSpec, field: FieldU1D) -> np.ndarray:
    """G(u) per cell, columns (rho V, rho V^2 + sum p_j, rho_i V)."""
    V = field.velocity
    p = spec.pressures(_densities(field)).sum(axis=1)
    return np.column_stack([field.momentum, field.momentum * V + p, field.partial * V[:, None]])


def cell_wave_speed(spec: MixtureSpec, field: FieldU1D) -> np.ndarray:
    rho_s = _densities(field)
    return np.abs(field.velocity) + np.sqrt(np.max(spec.pressure_derivatives(rho_s), axis=1))


def convective_rhs(spec: MixtureSpec, field: FieldU1D, speed=None) -> np.ndarray:
    lam = None if speed is not None else cell_wave_speed(spec, field)
    F = fv.rusanov(field.stacked(), euler_flux(spec, field), fv.face_speed(lam, speed))
    return fv.divergence(F, field.dx)


def face_states(field: FieldU1D) -> np.ndarray:
    """Species densities at faces j+1/2 from the arithmetic mean of u."""
    u = field.stacked()
    uf = 0.5 * (u + fv.right(u))
    part = uf[:, 2:]
    return np.concatenate([part, (uf[:, 0] - part.sum(axis=1))[:, None]], axis=1)


def diffusive_face_flux(spec: MixtureSpec, field: FieldU1D, epsilon=None) -> np.ndarray:
    """-eps D(u_face) (mu_{j+1} - mu_j) / dx at faces j+1/2, shape (M, N-1)."""
    eps = spec.epsilon if epsilon is None else float(epsilon)
    mu = entropic_variable(spec, _densities(field))
    grad_mu = (fv.right(mu) - mu) / field.dx
    D = diffusion_matrix(spec, face_states(field))
    return -eps * (D @ grad_mu[..., None])[..., 0]


def diffusion_tendency(spec: MixtureSpec, field: FieldU1D, epsilon=None) -> np.ndarray:
    """eps * d/dx (D d(mu)/dx) for each rho_i, shape (M, N-1)."""
    return fv.divergence(diffusive_face_flux(spec, field, epsilon), field.dx)


def diffusion_spectral_bound(spec: MixtureSpec, field: FieldU1D) -> float:
    """max over cells of ||D||_inf * max_i (p_i'/rho_i + p_N'/rho_N)."""
    rho_s = _densities(field)
    D = diffusion_matrix(spec, rho_s)
    dnorm = np.max(np.sum(np.abs(D), axis=-1), axis=-1)
    r = spec.pressure_derivatives(rho_s) / rho_s
    return float(np.max(dnorm * (np.max(r[:, :-1], axis=1) + r[:, -1])))


def stable_dt(spec: MixtureSpec, field: FieldU1D, cfl: float, speed=None, epsilon=None) -> float:
    cfl = fv.check_cfl(cfl)
    lam = float(np.max(cell_wave_speed(spec, field))) if speed is None else float(speed)
    eps = spec.epsilon if epsilon is None else float(epsilon)
    dt = field.dx / lam
    if eps > 0:
        dt = min(dt, field.dx**2 / (2.0 * eps * diffusion_spectral_bound(spec, field)))
    return cfl * dt


def limit_step(spec: MixtureSpec, field: FieldU1D, cfl: float, dt=None, speed=None,
               epsilon=None) -> FieldU1D:
    """Explicit Euler step of the limit system.

    ``epsilon`` overrides the mixture's value (0 switches diffusion off).
    """
    eps = spec.epsilon if epsilon is None else float(epsilon)
    bound = stable_dt(spec, field, 1.0, speed, eps)
    dt = fv.check_cfl(cfl) * bound if dt is None else fv.check_dt(dt, bound)
    rhs = convective_rhs(spec, field, speed)
    if eps > 0:
        rhs[:, 2:] += diffusion_tendency(spec, field, eps)
    u = field.stacked() + dt * rhs
    out = FieldU1D(u[:, 0], u[:, 1], u[:, 2:], field.length, field.time + dt)
    _densities(out)
    return out


def cell_entropy(spec: MixtureSpec, field: FieldU1D) -> np.ndarray:
    rho_s = _densities(field)
    return np.sum(rho_s * spec.potentials(rho_s), axis=1) + 0.5 * field.momentum**2 / field.rho


def limit_total_entropy(spec: MixtureSpec, field: FieldU1D) -> float:
    return float(np.sum(cell_entropy(spec, field)) * field.dx)


def advance(spec: MixtureSpec, field: FieldU1D, t_end: float, cfl: float, *,
            snapshot_times=(), speed=None, epsilon=None, on_step=None):
    """Run to ``t_end``; returns (final field, {time: snapshot})."""
    targets = sorted({float(t) for t in snapshot_times if 0.0 <= t <= t_end} | {float(t_end)})
    snaps = {}
    if targets and targets[0] <= field.time:
        snaps[targets[0]] = field.copy()
    for target in targets:
        while field.time < target - 1e-14 * max(1.0, target):
            dt = min(stable_dt(spec, field, cfl, speed, epsilon), target - field.time)
            field = limit_step(spec, field, cfl, dt=dt, speed=speed, epsilon=epsilon)
            if on_step is not None:
                on_step(field)
        field.time = target
        snaps[target] = field.copy()
    return field, snaps
