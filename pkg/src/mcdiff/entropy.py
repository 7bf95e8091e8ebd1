"""Entropy, fluxes and source of the per-species Euler system, and the
numerical certification of its conservation-dissipation structure.

A state vector is ordered species by species: ``(rho_1, m_1, ..., rho_N,
m_N)`` with ``m_i = rho_i V_i`` a d-vector, so it has length (d+1)N.
Axis indices are 0-based.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConserved, NonPositiveDensity, ZeroFrequency
from .mixture import (
    MixtureSpec,
    PressureLaw,
    _require_positive,
    assemble_K,
    diffusion_matrix,
)

RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class StateU:
    """Per-species conservative state; ``rho`` is (N,), ``momentum`` (N, d)."""

    rho: np.ndarray
    momentum: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        mom = np.asarray(self.momentum, dtype=float)
        if mom.ndim == 1:
            mom = mom[:, None]
        if mom.shape[0] != rho.shape[0] or rho.ndim != 1:
            raise ValueError("momentum must have shape (N, d)")
        if not np.all(rho > 0):
            raise NonPositiveDensity("state outside O_U", cell=int(np.argmin(rho)))
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "momentum", mom)

    @property
    def N(self):
        return self.rho.shape[0]

    @property
    def d(self):
        return self.momentum.shape[1]

    @property
    def velocity(self):
        return self.momentum / self.rho[:, None]

    def vector(self) -> np.ndarray:
        return np.concatenate([self.rho[:, None], self.momentum], axis=1).ravel()

    @classmethod
    def from_vector(cls, vec, N: int, d: int) -> "StateU":
        blocks = np.asarray(vec, dtype=float).reshape(N, d + 1)
        return cls(blocks[:, 0], blocks[:, 1:])

    @classmethod
    def from_velocities(cls, rho, velocity) -> "StateU":
        rho = np.asarray(rho, dtype=float)
        vel = np.asarray(velocity, dtype=float)
        if vel.ndim == 1:
            vel = vel[:, None]
        return cls(rho, rho[:, None] * vel)


@dataclass(frozen=True, eq=False)
class ConservedU:
    """Equilibrium mode (rho, rho V, rho_1..rho_{N-1})."""

    rho: float
    momentum: np.ndarray
    partial: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "momentum", np.atleast_1d(np.asarray(self.momentum, dtype=float)))
        object.__setattr__(self, "partial", np.atleast_1d(np.asarray(self.partial, dtype=float)))
        if not self.rho > 0:
            raise InvalidConserved("total density must be > 0")
        if not np.all(self.partial > 0):
            raise InvalidConserved("partial densities must be > 0")
        if not self.rho - self.partial.sum() > 0:
            raise InvalidConserved("rho_N = rho - sum(partial) must be > 0")

    @property
    def densities(self) -> np.ndarray:
        return np.append(self.partial, self.rho - self.partial.sum())

    @property
    def velocity(self) -> np.ndarray:
        return self.momentum / self.rho

    def vector(self) -> np.ndarray:
        return np.concatenate([[self.rho], self.momentum, self.partial])

    @classmethod
    def from_vector(cls, vec, N: int, d: int) -> "ConservedU":
        vec = np.asarray(vec, dtype=float)
        return cls(vec[0], vec[1:1 + d], vec[1 + d:1 + d + N - 1])

    @classmethod
    def from_state(cls, U: StateU) -> "ConservedU":
        return cls(U.rho.sum(), U.momentum.sum(axis=0), U.rho[:-1])

    def to_state(self) -> StateU:
        """Equilibrium lift: every species moves with the mixture velocity."""
        rho = self.densities
        return StateU(rho, rho[:, None] * self.velocity[None, :])


def _state(spec: MixtureSpec, U) -> StateU:
    if isinstance(U, StateU):
        return U
    return StateU.from_vector(U, spec.N, spec.d)


def entropy(spec: MixtureSpec, U) -> float:
    U = _state(spec, U)
    internal = np.sum(U.rho * spec.potentials(U.rho))
    kinetic = np.sum(np.sum(U.momentum**2, axis=1) / (2.0 * U.rho))
    return float(internal + kinetic)


def entropy_gradient(spec: MixtureSpec, U) -> np.ndarray:
    U = _state(spec, U)
    vel = U.velocity
    drho = spec.enthalpies(U.rho) - 0.5 * np.sum(vel**2, axis=1)
    return np.concatenate([drho[:, None], vel], axis=1).ravel()


def entropy_hessian(spec: MixtureSpec, U) -> np.ndarray:
    U = _state(spec, U)
    N, d = U.N, U.d
    vel = U.velocity
    dp = spec.pressure_derivatives(U.rho)
    H = np.zeros(((d + 1) * N, (d + 1) * N))
    for i in range(N):
        blk = np.empty((d + 1, d + 1))
        blk[0, 0] = dp[i] + vel[i] @ vel[i]
        blk[0, 1:] = -vel[i]
        blk[1:, 0] = -vel[i]
        blk[1:, 1:] = np.eye(d)
        s = slice(i * (d + 1), (i + 1) * (d + 1))
        H[s, s] = blk / U.rho[i]
    return H


def flux(spec: MixtureSpec, U, axis: int) -> np.ndarray:
    """Flux along ``axis``: per species (rho_i V_ij, rho_i V_i V_ij + p_i e_j)."""
    U = _state(spec, U)
    if not 0 <= axis < U.d:
        raise ValueError(f"axis must be in [0, {U.d})")
    vj = U.velocity[:, axis]
    out = np.empty((U.N, U.d + 1))
    out[:, 0] = U.momentum[:, axis]
    out[:, 1:] = U.momentum * vj[:, None]
    out[:, 1 + axis] += spec.pressures(U.rho)
    return out.ravel()


def source_Q(spec: MixtureSpec, U) -> np.ndarray:
    """Collision source without the 1/epsilon factor: (0, -sum_k K_ik V_k)."""
    U = _state(spec, U)
    K = assemble_K(spec, U.rho if spec.state_dependent else None)
    out = np.zeros((U.N, U.d + 1))
    out[:, 1:] = -K @ U.velocity
    return out.ravel()


def L_matrix(spec: MixtureSpec, U) -> np.ndarray:
    U = _state(spec, U)
    K = assemble_K(spec, U.rho if spec.state_dependent else None)
    sel = np.zeros((U.d + 1, U.d + 1))
    sel[1:, 1:] = np.eye(U.d)
    return np.kron(K, sel)


def fd_steps(vec: np.ndarray, h: float) -> np.ndarray:
    return h * (1.0 + np.abs(vec))


def flux_jacobian_fd(spec: MixtureSpec, U, axis: int, h: float = 1e-6) -> np.ndarray:
    U = _state(spec, U)
    x = U.vector()
    steps = fd_steps(x, h)
    jac = np.empty((x.size, x.size))
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = steps[k]
        jac[:, k] = (flux(spec, x + e, axis) - flux(spec, x - e, axis)) / (2.0 * steps[k])
    return jac


def check_symmetry_condition(spec: MixtureSpec, U, axis: int, h: float = 1e-6) -> float:
    """Relative asymmetry of Hessian(eta) @ dF_axis/dU (max norm)."""
    A = entropy_hessian(spec, U) @ flux_jacobian_fd(spec, U, axis, h)
    return float(np.max(np.abs(A - A.T)) / np.max(np.abs(A)))


def matrix_rank(A: np.ndarray, rtol: float = RANK_RTOL) -> int:
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def equilibrium_null_basis(N: int, d: int) -> np.ndarray:
    """Columns span {w: density slots free, all velocity slots equal}."""
    basis = np.zeros(((d + 1) * N, N + d))
    for i in range(N):
        basis[i * (d + 1), i] = 1.0
    for a in range(d):
        basis[1 + a::d + 1, N + a] = 1.0
    return basis


def null_space_residual(spec: MixtureSpec, U) -> tuple[float, int]:
    """(max |L w| over the fixed basis, rank of L)."""
    L = L_matrix(spec, U)
    U = _state(spec, U)
    basis = equilibrium_null_basis(U.N, U.d)
    return float(np.max(np.abs(L @ basis))), matrix_rank(L)


def null_space_check(spec: MixtureSpec, samples: int, rng=None, atol: float = 1e-12) -> bool:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(rng)
    target = spec.d * (spec.N - 1)
    for _ in range(samples):
        resid, rank = null_space_residual(spec, random_state(rng, spec))
        if resid > atol or rank != target:
            return False
    return True


def equilibrium_entropy(spec: MixtureSpec, u: ConservedU) -> float:
    rho = u.densities
    return float(np.sum(rho * spec.potentials(rho)) + 0.5 * (u.momentum @ u.momentum) / u.rho)


def equilibrium_entropy_gradient(spec: MixtureSpec, u: ConservedU) -> np.ndarray:
    """Gradient in (rho, rho V, rho_1..rho_{N-1}) coordinates."""
    h = spec.enthalpies(u.densities)
    V = u.velocity
    return np.concatenate([[h[-1] - 0.5 * V @ V], V, h[:-1] - h[-1]])


def equilibrium_entropy_hessian(spec: MixtureSpec, u: ConservedU, h: float = 1e-4) -> np.ndarray:
    """Second-order central finite-difference Hessian of the equilibrium entropy."""
    x = u.vector()
    n = x.size
    N, d = spec.N, x.size - spec.N
    steps = fd_steps(x, h)

    def f(y):
        return equilibrium_entropy(spec, ConservedU.from_vector(y, N, d))

    H = np.empty((n, n))
    f0 = f(x)
    for a in range(n):
        ea = np.zeros(n)
        ea[a] = steps[a]
        H[a, a] = (f(x + ea) - 2.0 * f0 + f(x - ea)) / steps[a] ** 2
        for b in range(a + 1, n):
            eb = np.zeros(n)
            eb[b] = steps[b]
            H[a, b] = H[b, a] = (
                f(x + ea + eb) - f(x + ea - eb) - f(x - ea + eb) + f(x - ea - eb)
            ) / (4.0 * steps[a] * steps[b])
    return H


def entropic_variable(spec: MixtureSpec, densities) -> np.ndarray:
    """d(eta_eq)/d(rho_i) at fixed rho and V: h_i(rho_i) - h_N(rho_N)."""
    h = spec.enthalpies(_require_positive(densities))
    return h[..., :-1] - h[..., -1:]


def entropic_force(spec: MixtureSpec, densities, density_gradients) -> np.ndarray:
    """grad(p_i)/rho_i - grad(p_N)/rho_N for i < N.

    ``densities`` is (..., N), ``density_gradients`` is (..., N, d); the
    result is (..., N-1, d).
    """
    rho = _require_positive(densities)
    grad = np.asarray(density_gradients, dtype=float)
    per = (spec.pressure_derivatives(rho) / rho)[..., None] * grad
    return per[..., :-1, :] - per[..., -1:, :]


def symbol_matrix(spec: MixtureSpec, u: ConservedU, xi) -> np.ndarray:
    """diag(0_{d+1}, D(u)) |xi|^2."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    norm2 = float(xi @ xi)
    if norm2 == 0.0:
        raise ZeroFrequency("xi must be nonzero")
    d = xi.size
    D = diffusion_matrix(spec, u.densities)
    n = d + 1 + D.shape[0]
    B = np.zeros((n, n))
    B[d + 1:, d + 1:] = D * norm2
    return B


def symbol_matrix_nullspace(spec: MixtureSpec, u: ConservedU, xi) -> np.ndarray:
    """Orthonormal basis (columns) of the null space of the symbol matrix."""
    B = symbol_matrix(spec, u, xi)
    _, s, vt = np.linalg.svd(B)
    keep = s <= RANK_RTOL * s[0] if s[0] > 0 else np.ones_like(s, dtype=bool)
    return vt[keep].T


def projector(basis: np.ndarray) -> np.ndarray:
    return basis @ basis.T


# random sampling used by the certification batteries

def random_law(rng) -> PressureLaw:
    if rng.random() < 0.5:
        return PressureLaw.isothermal(rng.uniform(0.5, 2.0))
    return PressureLaw.power(rng.uniform(0.5, 2.0), rng.uniform(1.0, 2.0))


def random_spec(rng, N: int, d: int, epsilon: float = 0.01) -> MixtureSpec:
    sigma = rng.uniform(0.1, 5.0, size=(N, N))
    sigma = np.triu(sigma, 1)
    sigma = sigma + sigma.T
    laws = tuple(random_law(rng) for _ in range(N))
    return MixtureSpec(laws, rng.uniform(0.5, 1.5, size=N), sigma, epsilon, d)


def random_state(rng, spec: MixtureSpec) -> StateU:
    rho = rng.uniform(0.2, 2.0, size=spec.N)
    vel = rng.uniform(-1.0, 1.0, size=(spec.N, spec.d))
    return StateU.from_velocities(rho, vel)


def random_conserved(rng, spec: MixtureSpec) -> ConservedU:
    return ConservedU.from_state(random_state(rng, spec))
