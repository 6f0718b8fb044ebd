import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rattleback import model as m
from rattleback._validation import DomainError, ParameterError
from rattleback.lie_poisson import casimir_annihilation_residual, jacobi_residual

pos = st.floats(0.05, 3.0)
coord = st.floats(-3.0, 3.0)
lams = st.sampled_from([0.25, 1.0, 1.5, 4.0, 7.0])


def test_field_values():
    np.testing.assert_array_equal(m.prs_field([1, 2, 3], 4.0), [12, -6, 0])


@settings(max_examples=100)
@given(pos, pos, coord, lams)
def test_three_formulations_agree(p, r, s, lam):
    x = np.array([p, r, s])
    f = m.prs_field(x, lam)
    scale = np.maximum(np.abs(f), 1e-300)
    assert np.all(np.abs(m.hamiltonian_field(x, lam) - f) <= 1e-12 * np.maximum(scale, 1))
    assert np.all(np.abs(m.dual_field(x, lam) - f) <= 1e-12 * np.maximum(scale, 1))


@given(pos, pos, coord, lams)
def test_both_quantities_conserved_pointwise(p, r, s, lam):
    x = np.array([p, r, s])
    f = m.prs_field(x, lam)
    assert abs(m.grad_H(x) @ f) <= 1e-12 * (1 + np.linalg.norm(x)) ** 3
    assert abs(m.grad_C(x, lam) @ f) <= 1e-10 * (1 + np.linalg.norm(x)) ** (lam + 3)


def test_casimir_negative_roll():
    assert m.casimir_C([1.0, -2.0, 0.0], 4.0) == 16.0
    with pytest.raises(DomainError):
        m.casimir_C([1.0, -2.0, 0.0], 1.5)


@pytest.mark.parametrize("lam", [0.0, -1.0, float("nan")])
def test_bad_lambda(lam):
    with pytest.raises(ParameterError):
        m.casimir_C([1, 1, 1], lam)


def test_prs_structure_is_poisson_with_casimir():
    ps = m.prs_structure(4.0)
    rng = np.random.default_rng(2)
    for X in rng.uniform(-2, 2, (50, 3)):
        assert jacobi_residual(ps, X) <= 1e-12
        assert casimir_annihilation_residual(ps, X) <= 1e-12


def test_dual_structure_is_poisson_numerically():
    ps = m.dual_structure(4.0)
    rng = np.random.default_rng(4)
    # finite-difference roundoff grows like |K|**2, so keep R away from 0 where K ~ R**(1 - lam)
    for X in rng.uniform([-2, 0.5, -2], [2, 2, 2], (30, 3)):
        assert jacobi_residual(ps, X, probe_step=1e-6 * (1 + np.linalg.norm(X))) <= 1e-8
        assert casimir_annihilation_residual(ps, X) <= 1e-13


def test_dual_requires_positive_roll():
    with pytest.raises(DomainError):
        m.poisson_K([1.0, 0.0, 1.0])


class TestLinearization:
    def test_spectrum(self):
        assert m.linearized_spectrum(0.5, 4) == (2.0, -0.5, 0.0)

    @given(st.floats(1.01, 10), st.floats(0.01, 5) | st.floats(-5, -0.01))
    def test_rates_differ_for_lambda_above_one(self, lam, s):
        a, b, _ = m.linearized_spectrum(s, lam)
        assert abs(a) != abs(b)

    def test_no_krein_quadruple(self):
        # a regular linear Hamiltonian system would have mu and -mu together
        ev = m.linearized_spectrum(0.5, 4.0)
        assert -ev[0] not in ev

    def test_matches_jacobian(self):
        S = 0.7
        x0 = np.array([0.0, 0.0, S])
        Jfd = np.empty((3, 3))
        for k in range(3):
            e = np.zeros(3)
            e[k] = 1e-7
            Jfd[:, k] = (m.prs_field(x0 + e, 4.0) - m.prs_field(x0 - e, 4.0)) / 2e-7
        np.testing.assert_allclose(Jfd, m.linearization_matrix(S, 4.0), atol=1e-8)
        np.testing.assert_allclose(sorted(np.linalg.eigvals(Jfd).real), sorted(m.linearized_spectrum(S, 4.0)), atol=1e-8)

    def test_singular_axis(self):
        assert m.is_singular_equilibrium([0, 0, 3.0])
        assert not m.is_singular_equilibrium([1e-3, 0, 3.0])
        np.testing.assert_array_equal(m.poisson_J([0, 0, 3.0]), np.zeros((3, 3)))


def test_rocking_equilibria_are_fixed_points():
    for x in m.rocking_equilibria(1.0, 4.0):
        assert np.max(np.abs(m.prs_field(x, 4.0))) <= 1e-15
        assert m.energy_H(x) == pytest.approx(1.0)
        assert abs(x[1] / x[0]) == pytest.approx(2.0)


class TestPotential:
    def test_value_at_origin(self):
        assert m.potential_U(0.0, 1.0, 4.0) == 1.0

    def test_vectorized(self):
        z = np.linspace(-1, 1, 5)
        assert m.potential_U(z, 0.1).shape == (5,)

    @pytest.mark.parametrize("lam", [1.5, 4.0, 7.0])
    @pytest.mark.parametrize("C", [1.0, 0.1, 0.01, 0.001])
    def test_min_is_stationary(self, lam, C):
        z, U = m.potential_min(C, lam)
        assert abs(m.potential_dU(z, C, lam)) <= 1e-12 * max(1.0, U)
        assert m.potential_U(z, C, lam) == U

    def test_min_is_rocking_equilibrium(self):
        lam, C = 4.0, 0.3
        z, _ = m.potential_min(C, lam)
        p, r = C * math.exp(lam * z), math.exp(-z)
        assert r / p == pytest.approx(math.sqrt(lam))

    def test_no_min_at_zero_casimir(self):
        with pytest.raises(ParameterError):
            m.potential_min(0.0)

    def test_darboux_field_is_canonical(self):
        z = np.array([0.2, -0.3, 0.8])
        g = np.array([m.potential_dU(z[0], z[2], 4.0), z[1], 0.0])
        np.testing.assert_allclose(m.darboux_field(z, 4.0), m.J_DARBOUX @ g, atol=1e-15)


class TestExtended:
    def test_field_is_canonical(self):
        z = np.array([0.1, 0.2, -0.3, 0.4])
        for eps in (0.0, 2e-7, 0.5):
            np.testing.assert_allclose(
                m.extended_field(z, eps), m.J_CANONICAL_4D @ m.extended_energy_grad(z, eps), atol=1e-15
            )

    def test_energy_gradient(self):
        z = np.array([0.1, 0.2, -0.3, 0.4])
        g = np.empty(4)
        for k in range(4):
            e = np.zeros(4)
            e[k] = 1e-6
            g[k] = (m.extended_energy(z + e, 0.3) - m.extended_energy(z - e, 0.3)) / 2e-6
        np.testing.assert_allclose(m.extended_energy_grad(z, 0.3), g, rtol=1e-8)

    def test_phantom_variable_at_zero_coupling(self):
        z = np.array([0.1, 0.2, -0.3, 0.4])
        f4 = m.extended_field(z, 0.0)
        np.testing.assert_array_equal(f4[:2], m.darboux_field(z[:3])[:2])
        assert f4[2] == 0.0
