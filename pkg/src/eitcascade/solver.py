"""Maxwell-Bloch integration of one Λ interface.

Atoms evolve locally in time under the master equation with fixed-step RK4.
The probe is re-integrated along z at every RK4 stage from the current
⟨σ31(z)⟩ (retarded frame, transit time L/c neglected), so the field and the
atoms advance as one method-of-lines system.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (GridMismatchError, IntegrationError, InvalidInputError,
                     StabilityError, UndefinedEfficiencyError)
from .model import (ControlEnvelope, DensityField, FieldRecord, LambdaParams,
                    SpaceGrid, TimeGrid, hamiltonian_batch, lindblad_batch)

log = logging.getLogger(__name__)

STABILITY_FACTOR = 0.1
NZ_DEFAULT = 128
DT_DEFAULT = 1e-3
RETRIEVAL_ROI_FACTOR = 4.0


def max_rate(params: LambdaParams, control_peak: float, probe_peak: float = 0.0) -> float:
    return max(abs(params.delta1), params.gamma3, control_peak, probe_peak)


def stable_dt(params: LambdaParams, control_peak: float, probe_peak: float = 0.0) -> float:
    """Largest admissible RK4 step: 0.1 / max(|Δ1|, Γ31+Γ32, Ω_c, |ω_p|)."""
    return STABILITY_FACTOR / max_rate(params, control_peak, probe_peak)


def default_dt(params: LambdaParams, control_peak: float) -> float:
    return min(DT_DEFAULT, stable_dt(params, control_peak))


def _check_stability(dt, params, control_peak, probe_peak=0.0):
    bound = stable_dt(params, control_peak, probe_peak)
    if dt > bound * (1 + 1e-12):
        raise StabilityError(f"dt = {dt:.3g} us exceeds stability bound {bound:.3g} us")


def _check_atoms(rho: np.ndarray, t: float, positivity: bool = True) -> None:
    bad = DensityField(rho).violations(positivity)
    if bad is not None:
        raise IntegrationError(f"{bad[0]} invariant violated", bad[1], t)


def step_atoms(atoms: DensityField, field_slice, control: float, params: LambdaParams,
               dt: float, t: float = 0.0, check: bool = True) -> DensityField:
    """Advance every node by one RK4 step with the field held at ``field_slice``.

    ``field_slice`` is the probe envelope E(z) at the current time, one value
    per node (a scalar is broadcast).  ``control`` is Ω_c at this time.
    """
    rho = atoms.rho
    E = np.broadcast_to(np.asarray(field_slice, dtype=complex), (rho.shape[0],))
    omega_p = params.probe_rabi_scale * np.conj(E)
    if not (np.all(np.isfinite(omega_p)) and np.isfinite(control)):
        raise InvalidInputError("non-finite field or control")
    _check_stability(dt, params, control, float(np.abs(omega_p).max(initial=0.0)))
    H = hamiltonian_batch(params, omega_p, control)
    k1 = lindblad_batch(rho, H, params)
    k2 = lindblad_batch(rho + 0.5 * dt * k1, H, params)
    k3 = lindblad_batch(rho + 0.5 * dt * k2, H, params)
    k4 = lindblad_batch(rho + dt * k3, H, params)
    new = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if check:
        _check_atoms(new, t + dt)
    return DensityField(new)


def propagate_field(atoms, boundary: complex, params: LambdaParams) -> np.ndarray:
    """Integrate dE/dz = i g ⟨σ31(z)⟩ from z = 0 with trapezoidal accumulation.

    ``atoms`` is a :class:`DensityField` or directly the array of ⟨σ31⟩ on the
    nodes, which span [0, L] uniformly.
    """
    s = atoms.coherence31 if isinstance(atoms, DensityField) else np.asarray(atoms)
    n = s.shape[0]
    dz = params.length_L / (n - 1)
    out = np.empty(n, dtype=complex)
    out[0] = 0.0
    np.cumsum(0.5 * dz * (s[1:] + s[:-1]), out=out[1:])
    return boundary + 1j * params.coupling_g * out


def _field_batch(s: np.ndarray, boundary: complex, coef: complex, half_dz: float,
                 out: np.ndarray) -> np.ndarray:
    # propagate_field without the allocations; called 4x per time step
    np.cumsum((s[1:] + s[:-1]) * half_dz, out=out[1:])
    out[1:] *= coef
    out[1:] += boundary
    out[0] = boundary
    return out


_FAILURES = {1: "hermiticity", 2: "trace", 3: "positivity", 4: "finiteness"}


def _run_numpy(rho, E0, E_mid, Om, Om_mid, params, tgrid, coef, half_dz, snap_index,
               check_every, envelope, spinwave):
    n = rho.shape[0]
    nt = tgrid.nt
    dt = tgrid.dt
    kappa = params.probe_rabi_scale
    Ez = np.empty(n, dtype=complex)
    H = hamiltonian_batch(params, np.zeros(n, dtype=complex), 0.0)

    def rhs(r, boundary, om):
        _field_batch(r[:, 0, 2], boundary, coef, half_dz, Ez)
        H[:, 2, 0] = kappa * np.conj(Ez)
        H[:, 0, 2] = kappa * Ez
        H[:, 2, 1] = om
        H[:, 1, 2] = om
        return lindblad_batch(r, H, params)

    for k in range(nt - 1):
        k1 = rhs(rho, E0[k], Om[k])
        envelope[:, k] = Ez
        if k == snap_index:
            spinwave[:] = rho[:, 1, 0]
        k2 = rhs(rho + 0.5 * dt * k1, E_mid[k], Om_mid[k])
        k3 = rhs(rho + 0.5 * dt * k2, E_mid[k], Om_mid[k])
        k4 = rhs(rho + dt * k3, E0[k + 1], Om[k + 1])
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if check_every and (k + 1) % check_every == 0:
            _check_atoms(rho, tgrid.t0 + (k + 1) * dt)
    envelope[:, nt - 1] = _field_batch(rho[:, 0, 2], E0[nt - 1], coef, half_dz, Ez)
    if snap_index >= nt - 1:
        spinwave[:] = rho[:, 1, 0]
    return rho


@dataclass
class InterfaceResult:
    """Outcome of :func:`simulate_interface`."""

    field: FieldRecord
    final_atoms: DensityField
    eta_leak: float
    eta_store: float
    spinwave: np.ndarray
    leak_roi: tuple[float, float]
    retrieval_roi: tuple[float, float]
    control: ControlEnvelope = field(repr=False)

    @property
    def output(self) -> np.ndarray:
        return self.field.output

    @property
    def times(self) -> np.ndarray:
        return self.field.tgrid.times

    @property
    def transmission(self) -> float:
        """Total output energy over input energy."""
        return self.field.output_energy / self.field.input_energy


def stage_windows(control: ControlEnvelope, threshold: float = 1e-6):
    """Write and read windows of a control envelope as ``(start, end)`` pairs.

    Explicit windows attached to the envelope win; otherwise the first and
    last on-segments of the samples are used.  The read window is None when
    the control never switches on again after the write stage.
    """
    if control.write_window is not None:
        return control.write_window, control.read_window
    on = control.samples > threshold * max(control.peak, 1e-300)
    if not on.any():
        return None, None
    t = control.grid.times
    edges = np.flatnonzero(np.diff(on.astype(int)))
    starts = [0] if on[0] else []
    ends = []
    for e in edges:
        if on[e + 1]:
            starts.append(e + 1)
        else:
            ends.append(e + 1)
    if len(ends) < len(starts):
        ends.append(control.grid.nt)
    dt = control.grid.dt
    segs = [(t[a], t[0] + b * dt) for a, b in zip(starts, ends)]
    write = segs[0]
    read = segs[-1] if len(segs) > 1 else None
    return write, read


def default_rois(control: ControlEnvelope):
    """Leakage ROI = write-stage support, retrieval ROI = [read on, read on + 4 x read duration]."""
    write, read = stage_windows(control)
    t_end = control.grid.t0 + control.grid.nt * control.grid.dt
    leak = write if write is not None else (control.grid.t0, control.grid.t0)
    if read is None:
        retrieval = (t_end, t_end)
    else:
        start, end = read
        retrieval = (start, min(start + RETRIEVAL_ROI_FACTOR * (end - start), t_end))
    return leak, retrieval


def roi_mask(grid: TimeGrid, roi: tuple[float, float]) -> np.ndarray:
    """Samples with roi[0] <= t < roi[1] (half-open so adjacent ROIs partition)."""
    t = grid.times
    eps = 1e-9 * grid.dt
    return (t >= roi[0] - eps) & (t < roi[1] - eps)


def energy(trace: np.ndarray, grid: TimeGrid, roi=None) -> float:
    """∫ |E|^2 dt over ``roi`` (whole grid when None) by the rectangle rule."""
    p = np.abs(trace) ** 2
    if roi is not None:
        p = p[roi_mask(grid, roi)]
    return float(np.sum(p) * grid.dt)


def efficiency(field: FieldRecord, roi: tuple[float, float]) -> float:
    """∫_roi |E_OUT|^2 dt / ∫ |E_o|^2 dt."""
    if roi[0] < field.tgrid.t0 - 1e-12 or roi[1] > field.tgrid.t0 + field.tgrid.nt * field.tgrid.dt + 1e-9:
        raise InvalidInputError(f"roi {roi} outside the time grid")
    e_in = field.input_energy
    if e_in <= 0.0:
        raise UndefinedEfficiencyError("input pulse carries no energy")
    return energy(field.output, field.tgrid, roi) / e_in


def input_pulse(grid: TimeGrid, start: float, duration: float, photons: float,
                edge: float = 0.05, shape: str = "square") -> np.ndarray:
    """Probe input E_o(t) normalised so that ∫ |E_o|^2 dt = ``photons``.

    ``square`` has raised-cosine edges of width ``edge`` (μs) inside the
    duration; ``gaussian`` uses ``duration`` as the intensity FWHM centred
    at ``start + duration``.
    """
    t = grid.times
    if shape == "square":
        amp = ((t >= start) & (t <= start + duration)).astype(float)
        if edge > 0:
            rise = (t >= start) & (t < start + edge)
            amp[rise] = 0.5 * (1 - np.cos(np.pi * (t[rise] - start) / edge))
            fall = (t > start + duration - edge) & (t <= start + duration)
            amp[fall] = 0.5 * (1 - np.cos(np.pi * (start + duration - t[fall]) / edge))
    elif shape == "gaussian":
        sigma_i = duration / (2.0 * np.sqrt(2.0 * np.log(2.0)))
        amp = np.exp(-((t - start - duration) ** 2) / (4.0 * sigma_i**2))
    else:
        raise InvalidInputError(f"unknown pulse shape {shape!r}")
    norm = np.sum(amp**2) * grid.dt
    if norm == 0:
        return np.zeros(grid.nt, dtype=complex)
    return (amp * np.sqrt(photons / norm)).astype(complex)


def simulate_interface(params: LambdaParams, input_envelope, control: ControlEnvelope,
                       tgrid: TimeGrid, zgrid: SpaceGrid | None = None,
                       leak_roi=None, retrieval_roi=None, check: bool = True,
                       check_every: int = 1, backend: str = "numba") -> InterfaceResult:
    """Co-integrate atoms and probe through one write / dark / read sequence.

    Parameters
    ----------
    params : LambdaParams
    input_envelope : array of complex, shape (nt,)
        Boundary field E(0, t) in sqrt(photons/μs).
    control : ControlEnvelope
        Must live on ``tgrid``.
    tgrid, zgrid : TimeGrid, SpaceGrid
        ``zgrid`` defaults to 128 cells over ``params.length_L``.
    leak_roi, retrieval_roi : (start, end) in μs, optional
        Override the control-edge ROIs from :func:`default_rois`.
    check : bool
        Verify density-matrix invariants every ``check_every`` steps.
    backend : {"numba", "numpy"}
        Compiled loop or the plain numpy reference; results agree to rounding.

    Returns
    -------
    InterfaceResult
    """
    E0 = np.asarray(input_envelope, dtype=complex)
    if E0.shape != (tgrid.nt,):
        raise GridMismatchError(f"input has {E0.size} samples, grid has {tgrid.nt}")
    if control.grid != tgrid:
        raise GridMismatchError("control and input must share the time grid")
    if not np.all(np.isfinite(E0)):
        raise InvalidInputError("non-finite input envelope")
    if zgrid is None:
        zgrid = SpaceGrid.for_length(params.length_L, NZ_DEFAULT)
    elif abs(zgrid.length - params.length_L) > 1e-9 * params.length_L:
        raise GridMismatchError("space grid must span the ensemble length")
    dt = tgrid.dt
    kappa = params.probe_rabi_scale
    _check_stability(dt, params, control.peak, kappa * float(np.abs(E0).max(initial=0.0)))

    n = zgrid.nz + 1
    nt = tgrid.nt
    Om = control.samples
    Om_mid = 0.5 * (Om[1:] + Om[:-1])
    E_mid = 0.5 * (E0[1:] + E0[:-1])
    coef = 1j * params.coupling_g
    half_dz = 0.5 * zgrid.dz

    leak, retrieval = default_rois(control)
    leak = leak_roi if leak_roi is not None else leak
    retrieval = retrieval_roi if retrieval_roi is not None else retrieval
    write, _ = stage_windows(control)
    snap_index = tgrid.index(write[1]) if write is not None else 0

    rho = DensityField.ground(n).rho
    envelope = np.empty((n, nt), dtype=complex)
    spinwave = np.zeros(n, dtype=complex)
    every = check_every if check else 0
    if backend == "numba":
        from . import _kernels
        status, step, cell = _kernels.run(
            rho, E0, E_mid, Om, Om_mid, dt, params.delta1, params.delta1 - params.delta2,
            params.gamma31, params.gamma32, params.gamma12, coef, kappa, half_dz,
            snap_index, every, envelope, spinwave)
        if status != _kernels.OK:
            raise IntegrationError(f"{_FAILURES[status]} invariant violated", cell,
                                   tgrid.t0 + step * dt)
    elif backend == "numpy":
        rho = _run_numpy(rho, E0, E_mid, Om, Om_mid, params, tgrid, coef, half_dz,
                         snap_index, every, envelope, spinwave)
    else:
        raise InvalidInputError(f"unknown backend {backend!r}")
    if check:
        _check_atoms(rho, tgrid.t_end)

    record = FieldRecord(E0.copy(), envelope, tgrid, zgrid)
    if not np.all(np.isfinite(envelope)):
        raise IntegrationError("non-finite field", int(np.argwhere(~np.isfinite(envelope))[0, 0]), tgrid.t_end)
    e_in = record.input_energy
    if e_in > 0:
        eta_leak = efficiency(record, leak)
        eta_store = efficiency(record, retrieval)
    else:
        eta_leak = eta_store = 0.0
    return InterfaceResult(record, DensityField(rho), eta_leak, eta_store, spinwave,
                           tuple(leak), tuple(retrieval), control)
