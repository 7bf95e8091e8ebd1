import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcdiff.errors import InvalidSpec, NonPositiveDensity
from mcdiff.mixture import (
    MixtureSpec,
    PressureLaw,
    assemble_K,
    c_matrix,
    closed_form_binary_D,
    diffusion_matrix,
    phi_matrix,
    pressure,
    pressure_derivative,
    reduced_K_inverse,
)

from conftest import isothermal_spec, sigma_from_pairs

SPEC3 = isothermal_spec([1, 1, 1], sigma_from_pairs(3, {(0, 1): 1, (0, 2): 2, (1, 2): 3}))

densities = st.integers(2, 6).flatmap(
    lambda n: st.lists(st.floats(0.05, 20.0), min_size=n, max_size=n)).map(np.array)


@st.composite
def spec_and_densities(draw):
    n = draw(st.integers(2, 6))
    upper = draw(st.lists(st.floats(0.05, 10.0), min_size=n * (n - 1) // 2,
                          max_size=n * (n - 1) // 2))
    sigma = np.zeros((n, n))
    sigma[np.triu_indices(n, 1)] = upper
    sigma = sigma + sigma.T
    rho = np.array(draw(st.lists(st.floats(0.05, 20.0), min_size=n, max_size=n)))
    return isothermal_spec([1.0] * n, sigma), rho


class TestPressure:
    def test_isothermal_unit(self):
        assert pressure(PressureLaw.isothermal(1.0), 1.0) == 1.0

    def test_power_law_at_unit_density(self):
        assert pressure(PressureLaw.power(2.0, 1.4), 1.0) == 2.0

    def test_isothermal_hand_value(self):
        assert pressure(PressureLaw.isothermal(1.5), 2.0) == pytest.approx(3.0, rel=1e-15)

    def test_derivative_positive(self):
        rho = np.linspace(0.1, 5, 20)
        assert np.all(pressure_derivative(PressureLaw.power(0.7, 1.6), rho) > 0)
        assert np.all(pressure_derivative(PressureLaw.isothermal(0.3), rho) == 0.3)

    @pytest.mark.parametrize("rho", [0.0, -1.0])
    def test_non_positive_density(self, rho):
        with pytest.raises(NonPositiveDensity):
            pressure(PressureLaw.isothermal(1.0), rho)

    @pytest.mark.parametrize("args", [("IsothermalIdeal", -1.0), ("PowerLaw", 1.0, 0.9),
                                      ("PowerLaw", 0.0, 1.2)])
    def test_invalid_law(self, args):
        with pytest.raises(InvalidSpec):
            PressureLaw(*args)

    def test_potential_closed_forms(self):
        # compare against trapezoidal quadrature of p(z)/z^2
        z = np.linspace(0.7, 1.9, 200001)
        for law in (PressureLaw.isothermal(1.3), PressureLaw.power(0.8, 1.7)):
            quad = np.trapezoid(law.p(z) / z**2, z)
            assert law.potential(1.9, 0.7) == pytest.approx(quad, rel=1e-9)


class TestSpec:
    def test_rejects_negative_sigma(self):
        with pytest.raises(InvalidSpec):
            isothermal_spec([1, 1], [[0, -1], [-1, 0]])

    def test_rejects_asymmetric_sigma(self):
        with pytest.raises(InvalidSpec):
            isothermal_spec([1, 1, 1], [[0, 1, 2], [1, 0, 1], [1, 1, 0]])

    def test_diagonal_ignored(self):
        spec = isothermal_spec([1, 1], [[5, 2], [2, 7]])
        assert np.array_equal(spec.sigma, [[0, 2], [2, 0]])

    @pytest.mark.parametrize("kw", [dict(epsilon=0.0), dict(d=4), dict(ref_densities=[1, -1])])
    def test_invalid_fields(self, kw):
        base = dict(laws=(PressureLaw.isothermal(1),) * 2, ref_densities=[1, 1],
                    sigma=[[0, 1], [1, 0]], epsilon=0.1, d=1)
        base.update(kw)
        with pytest.raises(InvalidSpec):
            MixtureSpec(**base)

    def test_from_masses(self):
        m = np.array([2.0, 4.0, 8.0])
        nu = np.array([[0, 3.0, 1.5], [3.0, 0, 6.0], [1.5, 6.0, 0]])
        spec = MixtureSpec.from_masses([PressureLaw.isothermal(1)] * 3, np.ones(3), m, nu, 0.1)
        assert spec.sigma[0, 1] == pytest.approx(2 * 4 / 6 * 3.0)
        assert spec.sigma[1, 2] == pytest.approx(4 * 8 / 12 * 6.0)


class TestK:
    def test_binary(self):
        spec = isothermal_spec([1, 1], [[0, 2], [2, 0]])
        assert np.array_equal(assemble_K(spec), [[2, -2], [-2, 2]])

    def test_three_species(self):
        assert np.array_equal(assemble_K(SPEC3), [[3, -1, -2], [-1, 4, -3], [-2, -3, 5]])

    @settings(max_examples=100, deadline=None)
    @given(spec_and_densities())
    def test_properties(self, sd):
        spec, _ = sd
        K = assemble_K(spec)
        n = spec.N
        assert np.allclose(K.sum(axis=1), 0.0, atol=1e-12 * np.abs(K).max())
        assert np.array_equal(K, K.T)
        off = ~np.eye(n, dtype=bool)
        assert np.all(K[off] < 0) and np.all(np.diag(K) > 0)
        s = np.linalg.svd(K, compute_uv=False)
        assert np.sum(s > 1e-10 * s[0]) == n - 1

    def test_state_dependent_hook(self):
        base = np.array([[0, 1.0, 2.0], [1.0, 0, 3.0], [2.0, 3.0, 0]])
        spec = isothermal_spec([1, 1, 1], base).replace(
            sigma=lambda rho: base * rho.sum(axis=-1)[..., None, None])
        rho = np.array([[1.0, 1.0, 1.0], [0.5, 0.5, 1.0]])
        K = assemble_K(spec, rho)
        assert K.shape == (2, 3, 3)
        assert np.allclose(K[0], 3 * assemble_K(SPEC3))
        assert np.allclose(K[1], 2 * assemble_K(SPEC3))
        D = diffusion_matrix(spec, rho)
        assert np.allclose(D[0], diffusion_matrix(SPEC3, rho[0]) / 3)


class TestReducedInverse:
    def test_three_species(self):
        assert np.allclose(reduced_K_inverse(SPEC3), np.array([[4, 1], [1, 3]]) / 11, rtol=1e-14)

    def test_binary(self):
        spec = isothermal_spec([1, 1], [[0, 4], [4, 0]])
        assert reduced_K_inverse(spec).item() == pytest.approx(0.25, rel=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(spec_and_densities())
    def test_inverse_identity_and_spd(self, sd):
        spec, _ = sd
        n = spec.N - 1
        Kinv = reduced_K_inverse(spec)
        assert np.allclose(Kinv @ assemble_K(spec)[:n, :n], np.eye(n), atol=1e-12 * np.abs(Kinv).max() * 10)
        np.linalg.cholesky(0.5 * (Kinv + Kinv.T))


class TestPhiC:
    def test_phi_hand(self):
        assert np.allclose(phi_matrix([1, 2, 3]), [[4 / 3, 1 / 3], [1 / 3, 5 / 6]], rtol=1e-15)

    def test_phi_binary(self):
        assert phi_matrix([2.0, 5.0]).item() == pytest.approx(0.5 + 0.2)

    def test_c_hand(self):
        assert np.allclose(c_matrix([1, 2, 3]), [[5 / 6, -1 / 3], [-1 / 3, 4 / 3]], rtol=1e-15)

    def test_c_binary(self):
        assert c_matrix([1, 3]).item() == pytest.approx(0.75)

    @settings(max_examples=200, deadline=None)
    @given(densities)
    def test_c_phi_identity(self, rho):
        P, C = phi_matrix(rho), c_matrix(rho)
        assert np.array_equal(P, P.T) and np.allclose(C, C.T, rtol=0, atol=1e-15 * rho.max())
        assert np.max(np.abs(C @ P - np.eye(rho.size - 1))) <= 1e-12

    def test_batched_shapes(self, rng):
        rho = rng.uniform(0.2, 2, size=(7, 5, 4))
        assert phi_matrix(rho).shape == (7, 5, 3, 3)
        assert np.allclose(c_matrix(rho) @ phi_matrix(rho), np.eye(3), atol=1e-12)

    def test_non_positive(self):
        with pytest.raises(NonPositiveDensity):
            phi_matrix([1.0, 0.0, 2.0])
        with pytest.raises(NonPositiveDensity):
            c_matrix([1.0, -2.0])


class TestDiffusionMatrix:
    def test_binary_hand_value(self):
        spec = isothermal_spec([1, 1], [[0, 2], [2, 0]])
        assert diffusion_matrix(spec, [1.0, 3.0]).item() == pytest.approx(9 / 32, rel=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(spec_and_densities())
    def test_symmetric_positive_definite(self, sd):
        spec, rho = sd
        D = diffusion_matrix(spec, rho)
        assert np.max(np.abs(D - D.T)) <= 1e-12 * np.max(np.abs(D))
        np.linalg.cholesky(D)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.05, 20), st.floats(0.05, 20), st.floats(0.05, 20))
    def test_binary_closed_form(self, r1, r2, s):
        spec = isothermal_spec([1, 1], [[0, s], [s, 0]])
        D = diffusion_matrix(spec, [r1, r2])[0, 0]
        assert D == pytest.approx(closed_form_binary_D(np.array([r1, r2]), s), rel=1e-12)
