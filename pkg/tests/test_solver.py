import numpy as np
import pytest
from scipy.linalg import expm

from eitcascade.config import CALIBRATED_GAMMA12, CALIBRATED_OPTICAL_DEPTH
from eitcascade.errors import (GridMismatchError, IntegrationError, InvalidInputError,
                               StabilityError, UndefinedEfficiencyError)
from eitcascade.model import (ControlEnvelope, DensityField, FieldRecord, LambdaParams,
                              SpaceGrid, TimeGrid, dark_state, hamiltonian, liouvillian, sigma)
from eitcascade.shaping import EnvelopeSpec, Window, make_envelope
from eitcascade.solver import (default_rois, efficiency, energy, input_pulse, propagate_field,
                               roi_mask, simulate_interface, stable_dt, step_atoms)

CAL = LambdaParams.from_optical_depth(CALIBRATED_OPTICAL_DEPTH, gamma12=CALIBRATED_GAMMA12)


def storage_run(params, read_start=2.1, t_end=4.0, dt=1e-3, nz=128, read_amp=30.0,
                write_end=1.4, family="ttl_square", **kw):
    grid = TimeGrid.span(0.0, t_end, dt)
    spec = EnvelopeSpec(family, Window(0.0, write_end, 12.0), Window(read_start, 0.3, read_amp))
    ctl = make_envelope(spec, grid)
    E = input_pulse(grid, 0.5, 1.0, 8.0)
    return simulate_interface(params, E, ctl, grid, SpaceGrid.for_length(params.length_L, nz), **kw)


# --- step_atoms -------------------------------------------------------------

def test_step_zero_fields_ground_unchanged():
    atoms = DensityField.ground(5)
    out = step_atoms(atoms, 0.0, 0.0, LambdaParams(), 1e-3)
    np.testing.assert_array_equal(out.rho, atoms.rho)


def test_step_matches_matrix_exponential(rng):
    for _ in range(5):
        p = LambdaParams(delta1=rng.normal(0, 5), delta2=rng.normal(0, 5),
                         gamma12=rng.uniform(0, 1), probe_rabi_scale=1.0)
        E, wc = complex(*rng.normal(0, 2, 2)), rng.uniform(0, 10)
        dt = 0.2 * stable_dt(p, wc, abs(E))
        atoms = DensityField.ground(1)
        n = int(round(0.5 / dt))
        for _ in range(n):
            atoms = step_atoms(atoms, E, wc, p, dt)
        H = hamiltonian(p, np.conj(E), wc)
        ref = expm(liouvillian(H, p) * n * dt) @ sigma(1, 1).astype(complex).ravel()
        assert np.max(np.abs(atoms.rho[0].ravel() - ref)) < 1e-8


def test_step_excited_taylor():
    p = LambdaParams()
    dt = 1e-3
    out = step_atoms(DensityField.pure([0, 0, 1]), 0.0, 0.0, p, dt)
    first_order = 1 - 2 * p.gamma3 * dt
    assert abs(out.rho[0, 2, 2].real - first_order) < (2 * p.gamma3 * dt) ** 2


def test_analytic_excited_decay():
    p = LambdaParams()
    dt, n = 1e-3, 200
    atoms = DensityField.pure([0, 0, 1])
    for _ in range(n):
        atoms = step_atoms(atoms, 0.0, 0.0, p, dt)
    exact = np.exp(-2 * p.gamma3 * n * dt)
    assert abs(atoms.rho[0, 2, 2].real / exact - 1) < 1e-6


def test_dark_state_stationary():
    p = LambdaParams(gamma12=0.0, probe_rabi_scale=1.0)
    wp, wc = 0.8 - 0.3j, 4.0
    E = np.conj(wp)  # ω_p = κ conj(E)
    atoms = DensityField.pure(dark_state(wp, wc))
    worst = 0.0
    for _ in range(10_000):  # 10 μs
        atoms = step_atoms(atoms, E, wc, p, 1e-3, check=False)
        worst = max(worst, atoms.rho[0, 2, 2].real)
    assert worst < 1e-8


def test_step_stability_bound():
    p = LambdaParams()
    with pytest.raises(StabilityError):
        step_atoms(DensityField.ground(1), 0.0, 100.0, p, 2e-3)


def test_step_integration_error_carries_location():
    rho = DensityField.ground(3).rho.copy()
    rho[1, 0, 0] = 1.5  # trace 1.5 in cell 1
    with pytest.raises(IntegrationError) as info:
        step_atoms(DensityField(rho), 0.0, 0.0, LambdaParams(), 1e-3, t=2.0)
    assert info.value.cell == 1
    assert info.value.time == pytest.approx(2.001)


# --- propagate_field --------------------------------------------------------

def test_propagate_free():
    p = LambdaParams(coupling_g=50.0)
    np.testing.assert_array_equal(propagate_field(np.zeros(9), 0.4 + 0.1j, p), 0.4 + 0.1j)
    q = LambdaParams(coupling_g=0.0)
    np.testing.assert_array_equal(propagate_field(np.full(9, 0.3j), 2.0, q), 2.0)


def test_propagate_uniform_source():
    p = LambdaParams(coupling_g=3.0)
    s = 0.02 - 0.01j
    out = propagate_field(np.full(65, s), 1.0, p)
    assert out[-1] == pytest.approx(1.0 + 1j * 3.0 * s * p.length_L, abs=1e-13)
    atoms = DensityField.ground(65)
    atoms.rho[:, 0, 2] = s
    np.testing.assert_allclose(propagate_field(atoms, 1.0, p), out)


# --- simulate_interface -----------------------------------------------------

def test_empty_cell_is_identity():
    grid = TimeGrid.span(0.0, 4.0, 1e-3)
    spec = EnvelopeSpec("ttl_square", Window(0.0, 2.5, 10.0), Window(3.0, 0.3, 10.0))
    E = input_pulse(grid, 1.0, 1.0, 8.0)
    res = simulate_interface(LambdaParams(coupling_g=0.0), E, make_envelope(spec, grid), grid)
    np.testing.assert_array_equal(res.output, E)
    assert res.eta_leak == pytest.approx(1.0)
    assert res.eta_store == 0.0


def test_boundary_condition_and_record():
    res = storage_run(CAL)
    res.field.check()
    np.testing.assert_array_equal(res.field.envelope[0], res.field.input_envelope)
    assert res.field.envelope.shape == (129, res.field.tgrid.nt)


def test_grid_mismatch_and_stability():
    grid = TimeGrid.span(0.0, 1.0, 1e-3)
    other = TimeGrid.span(0.0, 1.0, 5e-4)
    ctl = ControlEnvelope.zeros(grid)
    with pytest.raises(GridMismatchError):
        simulate_interface(CAL, np.zeros(other.nt), ctl, grid)
    with pytest.raises(GridMismatchError):
        simulate_interface(CAL, np.zeros(other.nt), ControlEnvelope.zeros(other), grid)
    with pytest.raises(GridMismatchError):
        simulate_interface(CAL, np.zeros(grid.nt), ctl, grid, SpaceGrid(0.1, 10))
    coarse = TimeGrid.span(0.0, 1.0, 1e-2)
    with pytest.raises(StabilityError):
        simulate_interface(CAL, np.zeros(coarse.nt), ControlEnvelope.zeros(coarse), coarse)


def test_backends_agree():
    a = storage_run(CAL, nz=32, t_end=3.0)
    b = storage_run(CAL, nz=32, t_end=3.0, backend="numpy")
    np.testing.assert_allclose(a.field.envelope, b.field.envelope, rtol=0, atol=1e-12)
    np.testing.assert_allclose(a.final_atoms.rho, b.final_atoms.rho, rtol=0, atol=1e-12)
    with pytest.raises(InvalidInputError):
        storage_run(CAL, nz=8, t_end=3.0, backend="fortran")


def test_efficiency_bounds_and_spinwave():
    res = storage_run(CAL)
    assert res.eta_leak >= 0 and res.eta_store >= 0
    assert res.eta_leak + res.eta_store <= 1 + 1e-6
    assert res.field.output_energy <= res.field.input_energy * (1 + 1e-6)
    assert np.max(np.abs(res.spinwave)) > 0


def test_retrieval_peak_after_read_turn_on():
    res = storage_run(CAL)
    t = res.times
    m = roi_mask(res.field.tgrid, res.retrieval_roi)
    t_peak = t[m][np.argmax(np.abs(res.output[m]))]
    assert t_peak >= 2.1 - res.field.tgrid.dt


def test_classical_storage_band():
    # 1 μs input, ~1 μs dark time, shaped read control
    grid = TimeGrid.span(0.0, 4.0, 1e-3)
    spec = EnvelopeSpec("modulated_retrieval", Window(0.0, 1.4, 10.0), Window(2.5, 0.3, 30.0),
                        ((0.0, 0.4), (0.3, 1.0)))
    p = LambdaParams.from_optical_depth(CALIBRATED_OPTICAL_DEPTH, gamma12=CALIBRATED_GAMMA12,
                                        probe_rabi_scale=1e-7)
    res = simulate_interface(p, input_pulse(grid, 0.5, 1.0, 4e8), make_envelope(spec, grid), grid)
    assert 0.10 <= res.eta_store <= 0.15
    assert res.eta_leak > 0.05  # two-peak output: leakage then retrieval


def test_grid_convergence():
    base = storage_run(CAL).eta_store
    fine = storage_run(CAL, dt=5e-4, nz=256).eta_store
    assert abs(fine - base) / fine < 0.01


@pytest.mark.parametrize("gamma12", [0.0, CALIBRATED_GAMMA12])
def test_dark_interval_decay(gamma12):
    p = LambdaParams.from_optical_depth(CALIBRATED_OPTICAL_DEPTH, gamma12=gamma12)
    etas = [storage_run(p, read_start=1.4 + tau, t_end=4.0, nz=64).eta_store
            for tau in (0.6, 0.8, 1.0, 1.2)]
    if gamma12 == 0.0:
        assert max(etas) - min(etas) < 1e-6
    else:
        assert all(b < a for a, b in zip(etas, etas[1:]))


def test_default_rois():
    grid = TimeGrid.span(0.0, 5.0, 1e-3)
    spec = EnvelopeSpec("ttl_square", Window(0.0, 1.9, 10.0), Window(2.1, 0.3, 30.0))
    leak, ret = default_rois(make_envelope(spec, grid))
    assert leak == pytest.approx((0.0, 1.9))
    assert ret == pytest.approx((2.1, 2.1 + 4 * 0.3))
    # clipped at the end of the grid
    spec = EnvelopeSpec("ttl_square", Window(0.0, 1.9, 10.0), Window(4.5, 0.3, 30.0))
    _, ret = default_rois(make_envelope(spec, grid))
    assert ret[1] <= grid.t0 + grid.nt * grid.dt + 1e-9


def test_efficiency_examples():
    grid = TimeGrid.span(0.0, 4.0, 1e-3)
    z = SpaceGrid.for_length(7.0, 4)
    E = input_pulse(grid, 0.5, 1.0, 2.0)
    zero = FieldRecord(E, np.zeros((5, grid.nt), dtype=complex), grid, z)
    assert efficiency(zero, (2.0, 3.0)) == 0.0
    shifted = np.zeros((5, grid.nt), dtype=complex)
    shifted[-1] = np.roll(E, 2000)
    rec = FieldRecord(E, shifted, grid, z)
    assert efficiency(rec, (2.0, 4.0)) == pytest.approx(1.0)
    with pytest.raises(UndefinedEfficiencyError):
        efficiency(FieldRecord(np.zeros(grid.nt), shifted, grid, z), (2.0, 3.0))
    with pytest.raises(InvalidInputError):
        efficiency(rec, (2.0, 9.0))


def test_input_pulse_normalisation():
    grid = TimeGrid.span(0.0, 5.0, 1e-3)
    for shape in ("square", "gaussian"):
        E = input_pulse(grid, 1.0, 1.0, 8.0, shape=shape)
        assert energy(E, grid) == pytest.approx(8.0)
    assert energy(input_pulse(grid, 1.0, 1.0, 0.0), grid) == 0.0
    with pytest.raises(InvalidInputError):
        input_pulse(grid, 1.0, 1.0, 1.0, shape="triangle")


def test_roi_half_open():
    grid = TimeGrid(0.0, 0.5, 5)  # 0, .5, 1, 1.5, 2
    np.testing.assert_array_equal(roi_mask(grid, (0.5, 1.5)), [0, 1, 1, 0, 0])
