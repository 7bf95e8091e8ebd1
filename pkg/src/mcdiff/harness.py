"""Epsilon-sweep rate experiment and the structure-certification battery."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import entropy as es
from . import limit, relaxation
from .closure import well_prepared_state
from .errors import DegenerateFit
from .fields import FieldU1D, cell_centers
from .mixture import MixtureSpec, PressureLaw, c_matrix, diffusion_matrix, phi_matrix

STANDARD_MEANS = (1.0, 0.8, 1.2)
STANDARD_AMPLITUDES = (0.1, -0.05, 0.08)
STANDARD_PHASES = (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0)
STANDARD_SOUND = (1.0, 1.2, 0.8)
STANDARD_EPS = (0.02, 0.01, 0.005, 0.0025)


@dataclass(frozen=True)
class Profile:
    """Initial-condition descriptor for 1-D periodic runs.

    ``kind`` is ``"sine-mixture"`` (rho_i = a_i + b_i sin(2 pi x/L + phi_i),
    V = v sin(2 pi x/L)), ``"gaussian-bump"`` (rho_i = a_i + b_i exp(-(r/w)^2)
    with r the periodic distance to L phi_i / 2 pi, V = v) or ``"uniform"``
    (rho_i = a_i, V = v).
    """

    kind: str = "sine-mixture"
    means: tuple = STANDARD_MEANS
    amplitudes: tuple = STANDARD_AMPLITUDES
    phases: tuple = STANDARD_PHASES
    velocity_amplitude: float = 0.1
    width: float = 0.1

    def build(self, M: int, length: float = 1.0) -> FieldU1D:
        x = cell_centers(M, length)
        a = np.asarray(self.means, dtype=float)
        b = np.asarray(self.amplitudes, dtype=float)
        phi = np.asarray(self.phases, dtype=float)
        k = 2.0 * math.pi / length
        if self.kind == "sine-mixture":
            rho_s = a + b * np.sin(k * x[:, None] + phi)
            V = self.velocity_amplitude * np.sin(k * x)
        elif self.kind == "gaussian-bump":
            centers = length * phi / (2.0 * math.pi)
            r = (x[:, None] - centers + 0.5 * length) % length - 0.5 * length
            rho_s = a + b * np.exp(-((r / (self.width * length)) ** 2))
            V = np.full(M, self.velocity_amplitude)
        elif self.kind == "uniform":
            rho_s = np.broadcast_to(a, (M, a.size)).copy()
            V = np.full(M, self.velocity_amplitude)
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        fld = FieldU1D.from_densities(rho_s, V, length)
        fld.validate()
        return fld


def standard_spec(epsilon: float = 0.01) -> MixtureSpec:
    sigma = np.ones((3, 3)) - np.eye(3)
    laws = tuple(PressureLaw.isothermal(c) for c in STANDARD_SOUND)
    return MixtureSpec(laws, np.ones(3), sigma, epsilon, 1)


def l2_norm(a: np.ndarray, dx: float) -> float:
    return float(math.sqrt(np.sum(a**2) * dx))


def conserved_difference(relax_field, limit_field) -> float:
    """Discrete L2 norm of the conserved-mode difference, summed over components."""
    diff = relax_field.stacked() - limit_field.stacked()
    return float(sum(l2_norm(diff[:, k], relax_field.dx) for k in range(diff.shape[1])))


@dataclass
class SweepRow:
    epsilon: float
    error: float
    steps: int
    history: list = field(default_factory=list, repr=False)


def shared_speed(spec: MixtureSpec, u0: FieldU1D, margin: float = 1.2) -> float:
    """Global dissipation speed used by both solvers in a sweep run."""
    return margin * max(relaxation.max_wave_speed(spec, well_prepared_state(spec, u0)),
                        float(np.max(limit.cell_wave_speed(spec, u0))))


def compare_run(spec: MixtureSpec, u0: FieldU1D, t_end: float, cfl: float,
                samples: int = 20, speed=None, splitting: str = "relaxed-flux") -> SweepRow:
    """Advance the relaxation solver from well-prepared data and the limit
    solver from ``u0`` with identical time steps; record the conserved-mode
    difference at ``samples`` equally spaced times (plus t = 0)."""
    if speed is None:
        speed = shared_speed(spec, u0)
    w = well_prepared_state(spec, u0)
    u = u0.copy()
    dt_cfl = min(relaxation.stable_dt(spec, w, cfl, speed), limit.stable_dt(spec, u, cfl, speed))
    n = samples * max(1, math.ceil(t_end / dt_cfl / samples))
    dt = t_end / n
    history = [(0.0, conserved_difference(w, u))]
    for k in range(1, n + 1):
        w = relaxation.step(spec, w, cfl, dt=dt, speed=speed, splitting=splitting)
        u = limit.limit_step(spec, u, cfl, dt=dt, speed=speed)
        if k % (n // samples) == 0:
            history.append((k * dt, conserved_difference(w, u)))
    return SweepRow(spec.epsilon, max(e for _, e in history), n, history)


def epsilon_sweep(spec: MixtureSpec, initial: Profile, eps_list: Sequence[float], M: int,
                  t_end: float, cfl: float, *, length: float = 1.0, samples: int = 20,
                  workers: int = 1, splitting: str = "relaxed-flux") -> list[SweepRow]:
    """Sup-in-time conserved-mode error between the two solvers for each epsilon."""
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 3:
        raise ValueError("need at least 3 epsilon values")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    u0 = initial.build(M, length)

    def one(eps):
        return compare_run(spec.replace(epsilon=eps), u0, t_end, cfl, samples,
                           splitting=splitting)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, eps_list))
    return [one(e) for e in eps_list]


def fit_order(eps, errors=None) -> float:
    """Least-squares slope of log(error) against log(epsilon).

    Accepts either two sequences or a list of SweepRow.
    """
    if errors is None:
        rows = list(eps)
        eps = [r.epsilon for r in rows]
        errors = [r.error for r in rows]
    eps = np.asarray(eps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if eps.size < 3 or eps.size != errors.size:
        raise DegenerateFit("need at least 3 (epsilon, error) pairs")
    if np.any(errors <= 0) or np.any(eps <= 0):
        raise DegenerateFit("errors and epsilons must be positive")
    slope, _ = np.polyfit(np.log(eps), np.log(errors), 1)
    return float(slope)


def running_orders(rows) -> list:
    """Fitted order using rows[:k+1], or None while fewer than 3 rows."""
    out = []
    for k in range(len(rows)):
        out.append(fit_order(rows[:k + 1]) if k >= 2 else None)
    return out


# certification battery

def _max_rel_asym(A):
    return float(np.max(np.abs(A - A.T)) / np.max(np.abs(A)))


def _entry(condition, samples, max_violation, passed, **extra):
    out = {"condition": condition, "samples": int(samples),
           "max_violation": float(max_violation), "pass": bool(passed)}
    out.update(extra)
    return out


def certify_structure(spec: MixtureSpec, samples: int = 100, rng=None,
                      symmetry_tol: float = 1e-5, exact_tol: float = 1e-12) -> dict:
    """Run every structural check on ``samples`` random states of ``spec``.

    Returns a JSON-ready report with one entry per condition and an overall
    ``pass`` flag.
    """
    if samples < 100:
        raise ValueError("certification needs at least 100 samples")
    rng = np.random.default_rng(rng)
    N, d = spec.N, spec.d
    worst = dict(convexity=0.0, symmetry=0.0, factorization=0.0, psd=0.0, null=0.0,
                 d_sym=0.0, d_pd=0.0, cphi=0.0, isotropy=0.0, eq_convexity=0.0)
    ok = dict.fromkeys(worst, True)
    canonical = np.zeros((d + N, d + N))
    canonical[: d + 1, : d + 1] = np.eye(d + 1)
    for _ in range(samples):
        U = es.random_state(rng, spec)
        H = es.entropy_hessian(spec, U)
        eig_min = float(np.linalg.eigvalsh(H)[0])
        try:
            np.linalg.cholesky(H)
        except np.linalg.LinAlgError:
            ok["convexity"] = False
        worst["convexity"] = max(worst["convexity"], max(0.0, -eig_min))

        for axis in range(d):
            worst["symmetry"] = max(worst["symmetry"], es.check_symmetry_condition(spec, U, axis))

        grad = es.entropy_gradient(spec, U)
        L = es.L_matrix(spec, U)
        worst["factorization"] = max(worst["factorization"],
                                     float(np.max(np.abs(es.source_Q(spec, U) + L @ grad))))
        lam_min = float(np.linalg.eigvalsh(L)[0])
        worst["psd"] = max(worst["psd"], max(0.0, -lam_min), _max_rel_asym(L) if np.any(L) else 0.0)
        resid, rank = es.null_space_residual(spec, U)
        worst["null"] = max(worst["null"], resid)
        if rank != d * (N - 1):
            ok["null"] = False

        u = es.ConservedU.from_state(U)
        rho = u.densities
        D = diffusion_matrix(spec, rho)
        worst["d_sym"] = max(worst["d_sym"], _max_rel_asym(D))
        try:
            np.linalg.cholesky(D)
        except np.linalg.LinAlgError:
            ok["d_pd"] = False
        worst["d_pd"] = max(worst["d_pd"], max(0.0, -float(np.linalg.eigvalsh(D)[0])))
        worst["cphi"] = max(worst["cphi"],
                            float(np.max(np.abs(c_matrix(rho) @ phi_matrix(rho) - np.eye(N - 1)))))

        xi = rng.normal(size=d)
        basis = es.symbol_matrix_nullspace(spec, u, xi)
        if basis.shape[1] != d + 1:
            ok["isotropy"] = False
        worst["isotropy"] = max(worst["isotropy"],
                                float(np.max(np.abs(es.projector(basis) - canonical))))

        Heq = es.equilibrium_entropy_hessian(spec, u)
        try:
            np.linalg.cholesky(0.5 * (Heq + Heq.T))
        except np.linalg.LinAlgError:
            ok["eq_convexity"] = False

    checks = [
        _entry("entropy_strict_convexity", samples, worst["convexity"], ok["convexity"]),
        _entry("entropy_flux_symmetry", samples, worst["symmetry"],
               worst["symmetry"] <= symmetry_tol, tolerance=symmetry_tol),
        _entry("source_factorization", samples, worst["factorization"],
               worst["factorization"] <= exact_tol, tolerance=exact_tol),
        _entry("dissipation_matrix_symmetric_psd", samples, worst["psd"],
               worst["psd"] <= exact_tol, tolerance=exact_tol),
        _entry("null_space_state_independent", samples, worst["null"],
               ok["null"] and worst["null"] <= exact_tol, tolerance=exact_tol),
        _entry("diffusion_matrix_symmetric", samples, worst["d_sym"],
               worst["d_sym"] <= exact_tol, tolerance=exact_tol),
        _entry("diffusion_matrix_positive_definite", samples, worst["d_pd"], ok["d_pd"]),
        _entry("c_phi_identity", samples, worst["cphi"], worst["cphi"] <= exact_tol,
               tolerance=exact_tol),
        _entry("isotropy_null_space", samples, worst["isotropy"],
               ok["isotropy"] and worst["isotropy"] <= 1e-10, tolerance=1e-10),
        _entry("equilibrium_entropy_convexity", samples, 0.0, ok["eq_convexity"]),
    ]
    return {"N": N, "d": d, "samples": int(samples), "checks": checks,
            "pass": all(c["pass"] for c in checks)}
