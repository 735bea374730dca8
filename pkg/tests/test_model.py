import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from eitcascade.errors import DegenerateInputError, InvalidInputError
from eitcascade.model import (GAMMA_DEFAULT, LENGTH_DEFAULT, TWO_PI, ControlEnvelope, DensityField,
                              LambdaParams, SpaceGrid, TimeGrid, dark_state, dissipator, hamiltonian,
                              lindblad_rhs, liouvillian, optical_depth, sigma, transfer_function)

finite = st.floats(-200, 200, allow_nan=False)


def random_rho(rng):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def test_defaults():
    p = LambdaParams()
    assert p.gamma31 == p.gamma32 == 3.0 * np.pi
    assert p.length_L == 7.0
    assert p.gamma12 == pytest.approx(TWO_PI * 1e-3)


@pytest.mark.parametrize("field,value", [("gamma31", 0.0), ("gamma32", -1.0), ("gamma12", -1e-3),
                                         ("length_L", 0.0), ("coupling_g", -1.0),
                                         ("delta1", np.nan)])
def test_params_validation(field, value):
    with pytest.raises(InvalidInputError):
        LambdaParams(**{field: value})


def test_sigma_units():
    assert sigma(3, 1)[2, 0] == 1 and sigma(3, 1).sum() == 1
    np.testing.assert_array_equal(sigma(1, 3), sigma(3, 1).T)


def test_hamiltonian_zero():
    np.testing.assert_array_equal(hamiltonian(LambdaParams(), 0.0, 0.0), np.zeros((3, 3)))


def test_hamiltonian_red_detuning():
    d = -TWO_PI * 100
    H = hamiltonian(LambdaParams(delta1=d, delta2=d), 0.3 + 0.1j, 5.0)
    assert H[2, 2] == d
    assert H[1, 1] == 0


def test_hamiltonian_terms():
    p = LambdaParams(delta1=1.5, delta2=0.5)
    wp, wc = 0.2 - 0.7j, 3.0
    H = hamiltonian(p, wp, wc)
    expect = (1.5 * sigma(3, 3) + 1.0 * sigma(2, 2) + wp * sigma(3, 1) + wc * sigma(3, 2))
    expect = expect + (wp * sigma(3, 1) + wc * sigma(3, 2)).conj().T
    np.testing.assert_array_equal(H, expect)


@given(finite, finite, finite, finite, st.floats(0, 100))
def test_hamiltonian_hermitian(d1, d2, re, im, wc):
    H = hamiltonian(LambdaParams(delta1=d1, delta2=d2), complex(re, im), wc)
    assert np.array_equal(H, H.conj().T)


def test_hamiltonian_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        hamiltonian(LambdaParams(), complex(np.inf, 0), 1.0)
    with pytest.raises(InvalidInputError):
        hamiltonian(LambdaParams(), 0.0, np.nan)


def test_rhs_ground_state_stationary():
    rho = sigma(1, 1).astype(complex)
    np.testing.assert_array_equal(lindblad_rhs(rho, np.zeros((3, 3)), LambdaParams()), 0)


def test_rhs_excited_decay():
    p = LambdaParams(gamma31=2.0, gamma32=5.0)
    d = lindblad_rhs(sigma(3, 3).astype(complex), np.zeros((3, 3)), p)
    assert d[2, 2] == pytest.approx(-2 * 7.0)
    assert d[0, 0] == pytest.approx(2 * 2.0)
    assert d[1, 1] == pytest.approx(2 * 5.0)


def test_rhs_dephasing_only_ground_coherence():
    p = LambdaParams(gamma12=0.3)
    rho = np.full((3, 3), 0.1, dtype=complex)
    rho[np.diag_indices(3)] = [0.5, 0.5, 0.0]
    d = lindblad_rhs(rho, np.zeros((3, 3)), p)
    assert d[0, 1] == pytest.approx(-0.3 * 0.1)
    assert d[1, 0] == pytest.approx(-0.3 * 0.1)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_rhs_traceless_hermitian(seed):
    rng = np.random.default_rng(seed)
    p = LambdaParams(delta1=rng.normal(0, 20), delta2=rng.normal(0, 20),
                     gamma31=rng.uniform(0.1, 20), gamma32=rng.uniform(0.1, 20),
                     gamma12=rng.uniform(0, 2))
    rho = random_rho(rng)
    H = hamiltonian(p, complex(*rng.normal(0, 5, 2)), rng.uniform(0, 30))
    d = lindblad_rhs(rho, H, p)
    assert abs(np.trace(d)) < 1e-12
    assert np.max(np.abs(d - d.conj().T)) < 1e-12


def test_liouvillian_matches_rhs(rng):
    for _ in range(20):
        p = LambdaParams(delta1=rng.normal(0, 10), gamma12=rng.uniform(0, 1))
        H = hamiltonian(p, complex(*rng.normal(0, 3, 2)), rng.uniform(0, 20))
        rho = random_rho(rng)
        np.testing.assert_allclose(liouvillian(H, p) @ rho.ravel(),
                                   lindblad_rhs(rho, H, p).ravel(), atol=1e-12)


def test_liouvillian_excited_decay_analytic():
    p = LambdaParams()
    L = liouvillian(np.zeros((3, 3)), p)
    rho = (expm(L * 0.05) @ sigma(3, 3).astype(complex).ravel()).reshape(3, 3)
    assert rho[2, 2].real == pytest.approx(np.exp(-2 * p.gamma3 * 0.05), rel=1e-12)


def test_evolution_is_completely_positive(rng):
    # Choi matrix of exp(L t) must be PSD; dephasing ρ12 alone would fail this
    for _ in range(20):
        p = LambdaParams(delta1=rng.normal(0, 5), delta2=rng.normal(0, 2),
                         gamma12=rng.uniform(0.1, 2))
        H = hamiltonian(p, complex(*rng.normal(0, 1, 2)), rng.uniform(0, 10))
        M = expm(liouvillian(H, p) * rng.uniform(0.05, 1.0))
        # row-major vec: M[3a+b, 3c+d] maps |c><d| to the (a, b) entry
        choi = M.reshape(3, 3, 3, 3).transpose(2, 0, 3, 1).reshape(9, 9)
        assert np.linalg.eigvalsh(0.5 * (choi + choi.conj().T)).min() > -1e-12


def test_ground_dephasing_rates():
    p = LambdaParams(gamma12=0.3)
    d = dissipator(np.ones((3, 3), dtype=complex), p.gamma31, p.gamma32, p.gamma12)
    assert d[0, 1] == pytest.approx(-0.3)
    assert d[1, 2] == pytest.approx(-p.gamma3 - 0.3)
    assert d[0, 2] == pytest.approx(-p.gamma3)


def test_dark_state_examples():
    np.testing.assert_allclose(dark_state(0.0, 1.0), [1, 0, 0])
    np.testing.assert_allclose(dark_state(1.0, 1.0), np.array([1, -1, 0]) / np.sqrt(2))
    with pytest.raises(DegenerateInputError):
        dark_state(0.0, 0.0)


@given(finite, finite, st.floats(0, 100), finite)
def test_dark_state_decoupled(re, im, wc, delta):
    wp = complex(re, im)
    if abs(wp) == 0 and wc == 0:
        return
    D = dark_state(wp, wc)
    H = hamiltonian(LambdaParams(delta1=delta, delta2=delta), wp, wc)
    assert abs((H @ D)[2]) < 1e-12 * max(1.0, abs(wp), wc)


def test_optical_depth():
    assert optical_depth(LambdaParams(coupling_g=0.0)) == 0.0
    p = LambdaParams(coupling_g=1234.0)
    assert optical_depth(LambdaParams(coupling_g=2468.0)) == pytest.approx(2 * optical_depth(p))
    assert optical_depth(LambdaParams.from_optical_depth(5.5)) == pytest.approx(5.5)
    assert optical_depth(p.with_optical_depth(3.0)) == pytest.approx(3.0)


def test_transfer_function_limits():
    p = LambdaParams.from_optical_depth(4.0)
    # control off, resonance: |T|^2 = e^-d
    assert abs(transfer_function(p, 0.0, 0.0)) ** 2 == pytest.approx(np.exp(-4.0))
    # no dephasing, two-photon resonance: perfect transparency at line centre
    q = LambdaParams.from_optical_depth(4.0, gamma12=0.0)
    assert abs(transfer_function(q, 10.0, 0.0)) == pytest.approx(1.0)
    # far off resonance: transparent
    assert abs(transfer_function(p, 0.0, 1e7)) == pytest.approx(1.0, abs=1e-5)


def test_grids():
    g = TimeGrid.span(0.0, 5.0, 1e-3)
    assert g.nt == 5001 and g.t_end == pytest.approx(5.0)
    assert g.index(2.0) == 2000
    z = SpaceGrid.for_length(LENGTH_DEFAULT, 128)
    assert z.length == pytest.approx(7.0) and z.z.size == 129
    with pytest.raises(InvalidInputError):
        TimeGrid(0.0, 0.0, 10)
    with pytest.raises(InvalidInputError):
        TimeGrid(0.0, 1e-3, 1)
    with pytest.raises(InvalidInputError):
        SpaceGrid(0.1, 1)


def test_control_envelope_validation():
    g = TimeGrid(0.0, 1e-3, 10)
    with pytest.raises(InvalidInputError):
        ControlEnvelope(np.ones(9), g)
    with pytest.raises(InvalidInputError):
        ControlEnvelope(-np.ones(10), g)
    assert ControlEnvelope.zeros(g).peak == 0.0


def test_density_field_violations():
    ok = DensityField.ground(4)
    assert ok.violations() is None
    bad = ok.rho.copy()
    bad[2, 0, 1] = 1e-6
    assert DensityField(bad).violations() == ("hermiticity", 2)
    bad = ok.rho.copy()
    bad[1, 0, 0] = 1.0 + 1e-6
    assert DensityField(bad).violations() == ("trace", 1)
    bad = ok.rho.copy()
    bad[3] = np.diag([1.1, -0.1, 0.0])
    assert DensityField(bad).violations() == ("positivity", 3)
    assert DensityField(bad).violations(check_positivity=False) is None


def test_density_field_pure():
    D = DensityField.pure([1, -1, 0], 3)
    assert len(D) == 3
    np.testing.assert_allclose(D.spinwave, -0.5)
    np.testing.assert_allclose(D.coherence31, 0.0)


def test_gamma_default_value():
    assert GAMMA_DEFAULT == pytest.approx(3.0 * np.pi)
