"""Species, pressure laws and the Stefan-Maxwell matrix algebra.

Densities are always passed species-last, ``densities[..., i]`` for species
``i``, so that every matrix builder broadcasts over arbitrary leading batch
dimensions (grid cells, samples).  All returned matrices follow the same
convention: shape ``(..., n, n)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import InvalidSpec, NonPositiveDensity, SingularMatrix

SigmaLike = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


class PressureKind(str, enum.Enum):
    ISOTHERMAL_IDEAL = "IsothermalIdeal"
    POWER_LAW = "PowerLaw"


def _require_positive(rho, what="density"):
    rho = np.asarray(rho, dtype=float)
    if not np.all(rho > 0):
        bad = np.argwhere(~(rho > 0))
        cell = tuple(int(i) for i in bad[0]) if bad.size else None
        raise NonPositiveDensity(f"{what} must be > 0", cell=cell)
    return rho


@dataclass(frozen=True)
class PressureLaw:
    """Barotropic pressure law of one species.

    ``IsothermalIdeal``: p = c * rho.  ``PowerLaw``: p = kappa * rho**gamma,
    gamma >= 1.  For the isothermal kind ``coefficient`` is c and
    ``exponent`` is fixed at 1.
    """

    kind: PressureKind
    coefficient: float
    exponent: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PressureKind(self.kind))
        if not (np.isfinite(self.coefficient) and self.coefficient > 0):
            raise InvalidSpec(f"pressure coefficient must be > 0, got {self.coefficient}")
        if self.kind is PressureKind.ISOTHERMAL_IDEAL:
            if self.exponent != 1.0:
                raise InvalidSpec("IsothermalIdeal law has exponent 1")
        elif not (np.isfinite(self.exponent) and self.exponent >= 1.0):
            raise InvalidSpec(f"PowerLaw exponent must be >= 1, got {self.exponent}")

    @classmethod
    def isothermal(cls, c: float) -> "PressureLaw":
        return cls(PressureKind.ISOTHERMAL_IDEAL, float(c))

    @classmethod
    def power(cls, kappa: float, gamma: float) -> "PressureLaw":
        return cls(PressureKind.POWER_LAW, float(kappa), float(gamma))

    # The methods below skip the positivity check; the module-level
    # functions and the solvers validate once per call instead.

    def p(self, rho):
        if self.exponent == 1.0:
            return self.coefficient * rho
        return self.coefficient * rho**self.exponent

    def dp(self, rho):
        if self.exponent == 1.0:
            return self.coefficient * np.ones_like(rho)
        return self.coefficient * self.exponent * rho ** (self.exponent - 1.0)

    def potential(self, rho, ref):
        """Closed form of the integral of p(z)/z**2 from ``ref`` to ``rho``."""
        if self.exponent == 1.0:
            return self.coefficient * np.log(rho / ref)
        g1 = self.exponent - 1.0
        return self.coefficient * (rho**g1 - ref**g1) / g1

    def enthalpy(self, rho, ref):
        """d/drho of rho * potential(rho); its gradient is grad(p)/rho."""
        return self.potential(rho, ref) + self.p(rho) / rho

    def to_dict(self) -> dict:
        if self.kind is PressureKind.ISOTHERMAL_IDEAL:
            return {"kind": self.kind.value, "c": self.coefficient}
        return {"kind": self.kind.value, "kappa": self.coefficient, "gamma": self.exponent}

    @classmethod
    def from_dict(cls, data: dict) -> "PressureLaw":
        kind = PressureKind(data["kind"])
        if kind is PressureKind.ISOTHERMAL_IDEAL:
            return cls.isothermal(data["c"])
        return cls.power(data["kappa"], data["gamma"])


def pressure(law: PressureLaw, rho):
    return law.p(_require_positive(rho))


def pressure_derivative(law: PressureLaw, rho):
    return law.dp(_require_positive(rho))


def _check_sigma(sigma: np.ndarray, n: int) -> np.ndarray:
    sigma = np.array(sigma, dtype=float)
    if sigma.shape[-2:] != (n, n):
        raise InvalidSpec(f"sigma must be {n}x{n}, got {sigma.shape}")
    off = ~np.eye(n, dtype=bool)
    if not np.all(np.isfinite(sigma)):
        raise InvalidSpec("sigma has non-finite entries")
    if not np.allclose(sigma, np.swapaxes(sigma, -1, -2), rtol=1e-14, atol=0.0):
        raise InvalidSpec("sigma must be symmetric")
    if not np.all(sigma[..., off] > 0):
        raise InvalidSpec("off-diagonal sigma_ij must be > 0")
    sigma[..., ~off] = 0.0
    return sigma


@dataclass(frozen=True, eq=False)
class MixtureSpec:
    """N-species mixture: pressure laws, reference densities, collision
    coefficients sigma_ij and the relaxation ratio epsilon.

    ``sigma`` is either a constant symmetric N x N array or a callable
    mapping a densities array ``(..., N)`` to ``(..., N, N)`` coefficients.
    """

    laws: tuple
    ref_densities: np.ndarray
    sigma: SigmaLike
    epsilon: float
    d: int = 1
    _sigma_const: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        laws = tuple(self.laws)
        n = len(laws)
        if n < 2:
            raise InvalidSpec("a mixture needs at least 2 species")
        object.__setattr__(self, "laws", laws)
        ref = np.array(self.ref_densities, dtype=float)
        if ref.shape != (n,) or not np.all(ref > 0):
            raise InvalidSpec("ref_densities must be N positive values")
        ref.setflags(write=False)
        object.__setattr__(self, "ref_densities", ref)
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise InvalidSpec(f"epsilon must be > 0, got {self.epsilon}")
        if self.d not in (1, 2, 3):
            raise InvalidSpec(f"spatial dimension must be 1, 2 or 3, got {self.d}")
        if not callable(self.sigma):
            sig = _check_sigma(self.sigma, n)
            sig.setflags(write=False)
            object.__setattr__(self, "sigma", sig)
            object.__setattr__(self, "_sigma_const", sig)

    @property
    def N(self) -> int:
        return len(self.laws)

    @property
    def state_dependent(self) -> bool:
        return self._sigma_const is None

    def sigma_at(self, densities=None) -> np.ndarray:
        if self._sigma_const is not None:
            return self._sigma_const
        if densities is None:
            raise InvalidSpec("state-dependent sigma needs densities")
        return _check_sigma(self.sigma(np.asarray(densities, dtype=float)), self.N)

    def replace(self, **changes) -> "MixtureSpec":
        kw = dict(laws=self.laws, ref_densities=self.ref_densities, sigma=self.sigma,
                  epsilon=self.epsilon, d=self.d)
        kw.update(changes)
        return MixtureSpec(**kw)

    @classmethod
    def from_masses(cls, laws: Sequence[PressureLaw], ref_densities, masses, nu,
                    epsilon: float, d: int = 1) -> "MixtureSpec":
        """Build sigma_ij = m_i m_j / (m_i + m_j) * nu_ij from molecular masses
        and collision frequencies."""
        m = np.asarray(masses, dtype=float)
        if np.any(m <= 0):
            raise InvalidSpec("molecular masses must be > 0")
        reduced = np.outer(m, m) / (m[:, None] + m[None, :])
        sigma = reduced * np.asarray(nu, dtype=float)
        np.fill_diagonal(sigma, 0.0)
        return cls(tuple(laws), ref_densities, sigma, epsilon, d)

    # species-wise evaluation over arrays shaped (..., N)

    def pressures(self, densities):
        rho = np.asarray(densities, dtype=float)
        return np.stack([law.p(rho[..., i]) for i, law in enumerate(self.laws)], axis=-1)

    def pressure_derivatives(self, densities):
        rho = np.asarray(densities, dtype=float)
        return np.stack([law.dp(rho[..., i]) for i, law in enumerate(self.laws)], axis=-1)

    def potentials(self, densities):
        rho = np.asarray(densities, dtype=float)
        return np.stack([law.potential(rho[..., i], self.ref_densities[i])
                         for i, law in enumerate(self.laws)], axis=-1)

    def enthalpies(self, densities):
        rho = np.asarray(densities, dtype=float)
        return np.stack([law.enthalpy(rho[..., i], self.ref_densities[i])
                         for i, law in enumerate(self.laws)], axis=-1)


def assemble_K(spec: MixtureSpec, densities=None) -> np.ndarray:
    """K_ij = delta_ij * sum_k sigma_ik - sigma_ij (zero row sums)."""
    if densities is not None:
        densities = _require_positive(densities)
    sigma = spec.sigma_at(densities)
    K = -sigma.copy()
    idx = np.arange(spec.N)
    K[..., idx, idx] = sigma.sum(axis=-1)
    return K


def _inverse(A: np.ndarray) -> np.ndarray:
    # LAPACK gesv: LU with partial pivoting
    try:
        inv = np.linalg.solve(A, np.broadcast_to(np.eye(A.shape[-1]), A.shape))
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from exc
    if not np.all(np.isfinite(inv)):
        raise SingularMatrix("inverse has non-finite entries")
    return inv


def reduced_K_inverse(spec: MixtureSpec, densities=None) -> np.ndarray:
    """Inverse of the leading (N-1)x(N-1) block of K."""
    K = assemble_K(spec, densities)
    n = spec.N - 1
    return _inverse(K[..., :n, :n])


def phi_matrix(densities) -> np.ndarray:
    """Phi_ij = delta_ij / rho_j + 1 / rho_N for i, j < N."""
    rho = _require_positive(densities)
    n = rho.shape[-1] - 1
    phi = np.broadcast_to((1.0 / rho[..., -1])[..., None, None], rho.shape[:-1] + (n, n)).copy()
    idx = np.arange(n)
    phi[..., idx, idx] += 1.0 / rho[..., :n]
    return phi


def c_matrix(densities) -> np.ndarray:
    """C_ij = rho_j delta_ij - rho_i rho_j / rho, the inverse of Phi."""
    rho = _require_positive(densities)
    n = rho.shape[-1] - 1
    total = rho.sum(axis=-1)
    part = rho[..., :n]
    C = -part[..., :, None] * part[..., None, :] / total[..., None, None]
    idx = np.arange(n)
    C[..., idx, idx] += part
    return C


def diffusion_matrix(spec: MixtureSpec, densities) -> np.ndarray:
    """Multicomponent diffusion matrix D = C Kbar C.

    Kbar is the reduced collision inverse evaluated at equilibrium, i.e. at
    the given densities with all diffusion fluxes set to zero; for constant
    sigma it does not depend on the state at all.
    """
    rho = _require_positive(densities)
    C = c_matrix(rho)
    Kbar = reduced_K_inverse(spec, rho if spec.state_dependent else None)
    return C @ Kbar @ C


def closed_form_binary_D(densities, sigma12: float):
    """N = 2 reduction of D: (rho_1 rho_2 / rho)**2 / sigma_12."""
    rho = _require_positive(densities)
    return (rho[..., 0] * rho[..., 1] / rho.sum(axis=-1)) ** 2 / sigma12
