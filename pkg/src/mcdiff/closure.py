"""Maxwell-iteration diffusion closure and Lam's alternative law.

Everything here is pointwise algebra.  Spatial gradients are inputs; they
broadcast as densities (..., N) and gradients (..., N, d).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .entropy import ConservedU, entropic_force
from .errors import DegenerateOmega
from .fields import Field1D, FieldU1D, central_gradient
from .mixture import MixtureSpec, _inverse, _require_positive, assemble_K, diffusion_matrix


@dataclass(frozen=True, eq=False)
class FluxClosureResult:
    fluxes: np.ndarray
    forces: np.ndarray
    D: np.ndarray

    @property
    def last_flux(self) -> np.ndarray:
        """J_N = -sum_{i<N} J_i (zero net flux)."""
        return -self.fluxes.sum(axis=-2)

    @property
    def all_fluxes(self) -> np.ndarray:
        return np.concatenate([self.fluxes, self.last_flux[..., None, :]], axis=-2)


def _densities(u) -> np.ndarray:
    if isinstance(u, ConservedU):
        return u.densities
    return _require_positive(u)


def apply_diffusion_law(spec: MixtureSpec, D: np.ndarray, forces: np.ndarray) -> np.ndarray:
    """J_i = -eps * sum_j D_ij force_j, forces shaped (..., N-1, d)."""
    return -spec.epsilon * (D @ forces)


def maxwell_flux(spec: MixtureSpec, u, density_gradients) -> FluxClosureResult:
    """Diffusion fluxes of the truncated Maxwell iteration.

    ``u`` is a ConservedU or a densities array (..., N); the gradients of all
    N species densities come as (..., N, d).
    """
    rho = _densities(u)
    forces = entropic_force(spec, rho, density_gradients)
    D = diffusion_matrix(spec, rho)
    return FluxClosureResult(apply_diffusion_law(spec, D, forces), forces, D)


def maxwell_flux_from_pressure_gradients(spec: MixtureSpec, u, pressure_gradients) -> FluxClosureResult:
    """Same law written with grad(p_j)/rho_j - grad(p_N)/rho_N directly."""
    rho = _densities(u)
    per = np.asarray(pressure_gradients, dtype=float) / rho[..., None]
    forces = per[..., :-1, :] - per[..., -1:, :]
    D = diffusion_matrix(spec, rho)
    return FluxClosureResult(apply_diffusion_law(spec, D, forces), forces, D)


def well_prepared_state(spec: MixtureSpec, u_field: FieldU1D) -> Field1D:
    """Relaxation initial data whose fluxes equal the closure on the grid.

    The conserved mode is copied verbatim; gradients are second-order
    central differences, matching the relaxation scheme's own stencil.
    """
    u_field.validate()
    rho_s = u_field.densities
    grad = central_gradient(rho_s, u_field.dx)[:, :, None]
    J = maxwell_flux(spec, rho_s, grad).fluxes[:, :, 0]
    return Field1D(u_field.rho.copy(), u_field.momentum.copy(), u_field.partial.copy(),
                   u_field.length, u_field.time, J)


def lam_khat(spec: MixtureSpec, densities, omega) -> np.ndarray:
    """Rank-one regularisation Khat_ij = K_ij + omega_i rho_j."""
    rho = _require_positive(densities)
    omega = np.asarray(omega, dtype=float)
    if abs(omega.sum()) <= 1e-14 * max(1.0, np.max(np.abs(omega))):
        raise DegenerateOmega("Lam's weights must have a nonzero sum")
    K = assemble_K(spec, rho if spec.state_dependent else None)
    return K + omega[..., :, None] * rho[..., None, :]


def lam_diffusion_matrix(spec: MixtureSpec, densities, omega) -> np.ndarray:
    """Dbar = p * Khat^{-1} with p the total pressure."""
    rho = _require_positive(densities)
    p = spec.pressures(rho).sum(axis=-1)
    return p[..., None, None] * _inverse(lam_khat(spec, rho, omega))


def lam_forces(spec: MixtureSpec, densities, density_gradients) -> np.ndarray:
    """dbar_j = grad(p_j/p) + (p_j/p - rho_j/rho) grad(ln p), shape (..., N, d)."""
    rho = _require_positive(densities)
    grad_rho = np.asarray(density_gradients, dtype=float)
    p_s = spec.pressures(rho)
    grad_p_s = spec.pressure_derivatives(rho)[..., None] * grad_rho
    p = p_s.sum(axis=-1)[..., None, None]
    grad_p = grad_p_s.sum(axis=-2, keepdims=True)
    frac = p_s[..., None] / p
    grad_frac = grad_p_s / p - frac * grad_p / p
    mass_frac = (rho / rho.sum(axis=-1, keepdims=True))[..., None]
    return grad_frac + (frac - mass_frac) * (grad_p / p)


def lam_flux(spec: MixtureSpec, densities, density_gradients, omega) -> np.ndarray:
    """J_i = -eps * sum_j rho_i Dbar_ij dbar_j for all N species."""
    rho = _require_positive(densities)
    Dbar = lam_diffusion_matrix(spec, rho, omega)
    dbar = lam_forces(spec, rho, density_gradients)
    return -spec.epsilon * rho[..., :, None] * (Dbar @ dbar)


def lam_force_identity_residual(spec: MixtureSpec, densities, density_gradients) -> float:
    """max |p (dbar_j/rho_j - dbar_N/rho_N) - entropic force_j|, relative to
    max(1, |entropic force|)."""
    rho = _require_positive(densities)
    dbar = lam_forces(spec, rho, density_gradients)
    p = spec.pressures(rho).sum(axis=-1)[..., None, None]
    scaled = p * dbar / rho[..., None]
    lhs = scaled[..., :-1, :] - scaled[..., -1:, :]
    rhs = entropic_force(spec, rho, density_gradients)
    return float(np.max(np.abs(lhs - rhs)) / max(1.0, float(np.max(np.abs(rhs)))))
