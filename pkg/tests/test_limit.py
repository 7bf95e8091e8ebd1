import numpy as np
import pytest

from mcdiff import limit as lm
from mcdiff import relaxation as rx
from mcdiff.closure import maxwell_flux, well_prepared_state
from mcdiff.entropy import entropic_variable
from mcdiff.errors import CFLViolation
from mcdiff.fields import FieldU1D, cell_centers
from mcdiff.harness import Profile, l2_norm, standard_spec
from mcdiff.mixture import diffusion_matrix

from conftest import isothermal_spec


def test_uniform_equilibrium_is_fixed_point():
    spec = standard_spec()
    u = Profile(kind="uniform", velocity_amplitude=0.4).build(64)
    out = u
    for _ in range(10):
        out = lm.limit_step(spec, out, 0.5)
    assert np.max(np.abs(out.stacked() - u.stacked())) <= 1e-14


def test_conservation():
    spec = standard_spec()
    u = Profile().build(128)
    mass0 = u.densities.sum(axis=0)
    mom0 = u.momentum.sum()
    for _ in range(300):
        u = lm.limit_step(spec, u, 0.5)
    assert np.max(np.abs(u.densities.sum(axis=0) - mass0) / mass0) <= 1e-12
    assert abs(u.momentum.sum() - mom0) / np.abs(u.momentum).sum() <= 1e-12


def test_pure_advection_without_diffusion():
    # equal sound speeds and uniform total density: species are carried at V
    spec = isothermal_spec([1, 1], [[0, 1], [1, 0]])
    M, V, T = 1024, 0.5, 0.2
    x = cell_centers(M, 1.0)
    r1 = 1 + 0.1 * np.sin(2 * np.pi * x)
    u = FieldU1D.from_densities(np.column_stack([r1, 2 - r1]), np.full(M, V))
    u, _ = lm.advance(spec, u, T, 0.5, epsilon=0.0)
    exact = 1 + 0.1 * np.sin(2 * np.pi * (x - V * T))
    assert l2_norm(u.partial[:, 0] - exact, 1 / M) <= 2e-2
    assert np.allclose(u.velocity, V, atol=1e-12)


def test_diffusion_face_flux_two_paths(rng):
    # direct face formula vs closure applied to face-centred differences
    spec = standard_spec(0.01)
    u = Profile().build(64)
    F = lm.diffusive_face_flux(spec, u)
    rho_s = u.densities
    rho_f = lm.face_states(u)
    grad = (np.roll(rho_s, -1, axis=0) - rho_s) / u.dx
    mu = entropic_variable(spec, rho_s)
    dmu = (np.roll(mu, -1, axis=0) - mu) / u.dx
    D = diffusion_matrix(spec, rho_f)
    assert np.max(np.abs(F + 0.01 * np.einsum("mij,mj->mi", D, dmu))) <= 1e-12 * np.max(np.abs(F))
    # for isothermal laws d(mu)/dx is c_j grad(rho_j)/rho_j at first order; compare loosely
    close = maxwell_flux(spec, rho_f, grad[:, :, None]).fluxes[:, :, 0]
    assert np.max(np.abs(F - close)) <= 1e-3 * np.max(np.abs(F))


def test_diffusion_tendency_conservative():
    spec = standard_spec(0.01)
    u = Profile().build(128)
    assert np.max(np.abs(lm.diffusion_tendency(spec, u).sum(axis=0))) <= 1e-12


def test_time_step_respects_parabolic_bound():
    spec = standard_spec(0.5)
    u = Profile().build(512)
    dt = lm.stable_dt(spec, u, 1.0)
    assert dt < u.dx / np.max(lm.cell_wave_speed(spec, u))
    assert dt == pytest.approx(u.dx**2 / (2 * 0.5 * lm.diffusion_spectral_bound(spec, u)))
    with pytest.raises(CFLViolation):
        lm.limit_step(spec, u, 0.5, dt=1.01 * dt)


def test_entropy_non_increasing():
    spec = standard_spec(0.01)
    u = Profile().build(512)
    etas = [lm.limit_total_entropy(spec, u)]
    lm.advance(spec, u, 0.05, 0.5, on_step=lambda f: etas.append(lm.limit_total_entropy(spec, f)))
    assert np.all(np.diff(etas) <= 1e-8 * np.abs(etas[:-1]))


def test_entropy_gap_to_relaxation_is_second_order():
    # well-prepared fluxes are O(eps), so the kinetic gap is O(eps^2)
    u = Profile().build(256)
    gaps = []
    for eps in (0.02, 0.01):
        spec = standard_spec(eps)
        gaps.append(rx.total_entropy(spec, well_prepared_state(spec, u)) - lm.limit_total_entropy(spec, u))
    assert gaps[0] > 0 and gaps[0] / gaps[1] == pytest.approx(4.0, rel=1e-6)


def test_uniform_entropy_constant():
    spec = standard_spec()
    u = Profile(kind="uniform", velocity_amplitude=0.2).build(64)
    e0 = lm.limit_total_entropy(spec, u)
    u, _ = lm.advance(spec, u, 0.01, 0.5)
    assert lm.limit_total_entropy(spec, u) == pytest.approx(e0, rel=1e-14)


def restrict(a):
    return 0.5 * (a[0::2] + a[1::2])


def test_grid_self_convergence():
    spec = standard_spec(0.1)
    T = 0.02
    finals = {M: lm.advance(spec, Profile().build(M), T, 0.5)[0].stacked() for M in (256, 512, 1024)}
    e1 = l2_norm(finals[256] - restrict(finals[512]), 1 / 256)
    e2 = l2_norm(finals[512] - restrict(finals[1024]), 1 / 512)
    assert np.log2(e1 / e2) >= 0.9
