"""Three-level Λ-system model: parameters, grids, Hamiltonian and master equation.

Basis ordering is |1⟩, |2⟩, |3⟩ -> indices 0, 1, 2.  |1⟩ holds the atoms
initially, the probe drives |1⟩ <-> |3⟩ and the control drives |2⟩ <-> |3⟩.

Units: time in μs, every rate and detuning in rad/μs, lengths in cm.  The
probe envelope E(z, t) is photon-flux normalised (|E|^2 in photons/μs) and the
local probe Rabi amplitude is ``probe_rabi_scale * conj(E)``.  With that
convention ⟨σ31⟩ = Tr(ρ σ31) = ρ[0, 2] is proportional to E, and the
propagation law dE/dz = i g ⟨σ31⟩ attenuates an unshielded probe.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateInputError, InvalidInputError

TWO_PI = 2.0 * np.pi

#: Excited-state decay rates used in all simulations (3.0π x 10^6 s^-1).
GAMMA_DEFAULT = 3.0 * np.pi
#: Ensemble length in cm.
LENGTH_DEFAULT = 7.0
#: Ground-state coherence decay, 2π x 1 kHz.
GAMMA12_DEFAULT = TWO_PI * 1e-3
#: Rabi amplitude (rad/μs) per sqrt(photon/μs) of probe flux.
PROBE_RABI_SCALE_DEFAULT = 1e-3

SIGMA = np.zeros((3, 3, 3, 3), dtype=complex)
for _i in range(3):
    for _j in range(3):
        SIGMA[_i, _j, _i, _j] = 1.0
del _i, _j


def sigma(i: int, j: int) -> np.ndarray:
    """Matrix unit |i⟩⟨j| with 1-based level labels."""
    return SIGMA[i - 1, j - 1].copy()


@dataclass(frozen=True)
class LambdaParams:
    """Physical constants of one Λ interface.

    ``coupling_g`` is the lumped propagation constant multiplying ⟨σ31⟩ in
    dE/dz; only the product ``coupling_g * probe_rabi_scale`` is observable
    (see :func:`optical_depth`).
    """

    delta1: float = 0.0
    delta2: float = 0.0
    gamma31: float = GAMMA_DEFAULT
    gamma32: float = GAMMA_DEFAULT
    gamma12: float = GAMMA12_DEFAULT
    coupling_g: float = 0.0
    length_L: float = LENGTH_DEFAULT
    probe_rabi_scale: float = PROBE_RABI_SCALE_DEFAULT

    def __post_init__(self):
        for name in ("delta1", "delta2", "gamma31", "gamma32", "gamma12",
                     "coupling_g", "length_L", "probe_rabi_scale"):
            if not np.isfinite(getattr(self, name)):
                raise InvalidInputError(f"{name} must be finite")
        if self.gamma31 <= 0 or self.gamma32 <= 0:
            raise InvalidInputError("gamma31 and gamma32 must be > 0")
        if self.gamma12 < 0:
            raise InvalidInputError("gamma12 must be >= 0")
        if self.length_L <= 0:
            raise InvalidInputError("length_L must be > 0")
        if self.coupling_g < 0:
            raise InvalidInputError("coupling_g must be >= 0")
        if self.probe_rabi_scale <= 0:
            raise InvalidInputError("probe_rabi_scale must be > 0")

    @property
    def gamma3(self) -> float:
        """Total decay rate of the optical coherences ρ31, ρ32."""
        return self.gamma31 + self.gamma32

    @classmethod
    def from_optical_depth(cls, depth: float, **kwargs) -> "LambdaParams":
        """Build parameters whose resonant optical depth equals ``depth``."""
        base = cls(**kwargs)
        g = depth * base.gamma3 / (2.0 * base.probe_rabi_scale * base.length_L)
        return replace(base, coupling_g=g)

    def with_optical_depth(self, depth: float) -> "LambdaParams":
        g = depth * self.gamma3 / (2.0 * self.probe_rabi_scale * self.length_L)
        return replace(self, coupling_g=g)


def optical_depth(params: LambdaParams) -> float:
    """Resonant weak-probe intensity attenuation exponent with the control off.

    Linearising the master equation about ρ = |1⟩⟨1| gives the steady-state
    coherence ⟨σ31⟩ = i κ E / (Γ31 + Γ32) on resonance, so the intensity
    decays as exp(-2 g κ z / (Γ31 + Γ32)).
    """
    return 2.0 * params.coupling_g * params.probe_rabi_scale * params.length_L / params.gamma3


def transfer_function(params: LambdaParams, omega_c: float, nu) -> np.ndarray:
    """Steady-state amplitude transmission of the whole cell for a weak probe.

    ``nu`` is the probe offset (rad/μs) for a field component ∝ exp(-i nu t).
    Returns the complex factor multiplying that component at z = L.
    """
    nu = np.asarray(nu, dtype=float)
    optical = params.gamma3 - 1j * (params.delta1 + nu)
    ground = params.gamma12 - 1j * (params.delta1 - params.delta2 + nu)
    # ⟨σ31⟩ / (i κ E) = ground / (optical * ground + Ω_c^2); finite at exact EIT resonance
    chi = ground / (optical * ground + omega_c**2)
    gk = params.coupling_g * params.probe_rabi_scale
    return np.exp(-gk * params.length_L * chi)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid t_n = t0 + n dt, n = 0 .. nt-1 (μs)."""

    t0: float
    dt: float
    nt: int

    def __post_init__(self):
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise InvalidInputError("dt must be > 0")
        if self.nt < 2:
            raise InvalidInputError("nt must be >= 2")

    @classmethod
    def span(cls, t0: float, t1: float, dt: float) -> "TimeGrid":
        return cls(t0, dt, int(round((t1 - t0) / dt)) + 1)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.nt)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (self.nt - 1)

    def index(self, t: float) -> int:
        """Index of the first sample at or after ``t`` (clipped to the grid)."""
        n = int(np.ceil((t - self.t0) / self.dt - 1e-9))
        return min(max(n, 0), self.nt - 1)


@dataclass(frozen=True)
class SpaceGrid:
    """nz uniform cells of width dz spanning [0, nz*dz]; atoms sit on the nz+1 nodes."""

    dz: float
    nz: int

    def __post_init__(self):
        if not (self.dz > 0 and np.isfinite(self.dz)):
            raise InvalidInputError("dz must be > 0")
        if self.nz < 2:
            raise InvalidInputError("nz must be >= 2")

    @classmethod
    def for_length(cls, length: float, nz: int = 128) -> "SpaceGrid":
        return cls(length / nz, nz)

    @property
    def length(self) -> float:
        return self.dz * self.nz

    @property
    def z(self) -> np.ndarray:
        return self.dz * np.arange(self.nz + 1)


@dataclass(frozen=True)
class ControlEnvelope:
    """Real, non-negative control Rabi amplitude Ω_c(t) sampled on ``grid``.

    ``write_window`` and ``read_window`` are optional ``(start, end)`` stage
    boundaries in μs; when absent they are inferred from the samples.
    """

    samples: np.ndarray
    grid: TimeGrid
    write_window: tuple[float, float] | None = None
    read_window: tuple[float, float] | None = None

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.shape != (self.grid.nt,):
            raise InvalidInputError(
                f"control has {s.size} samples, grid has {self.grid.nt}")
        if not np.all(np.isfinite(s)) or np.any(s < 0):
            raise InvalidInputError("control samples must be finite and >= 0")
        object.__setattr__(self, "samples", s)

    @classmethod
    def zeros(cls, grid: TimeGrid) -> "ControlEnvelope":
        return cls(np.zeros(grid.nt), grid)

    @property
    def peak(self) -> float:
        return float(self.samples.max())


@dataclass
class FieldRecord:
    """Probe envelope on the (z, t) grid plus the boundary input E_o(t)."""

    input_envelope: np.ndarray
    envelope: np.ndarray
    tgrid: TimeGrid
    zgrid: SpaceGrid

    @property
    def output(self) -> np.ndarray:
        """E_OUT(t) = E(L, t)."""
        return self.envelope[-1]

    @property
    def input_energy(self) -> float:
        return float(np.sum(np.abs(self.input_envelope) ** 2) * self.tgrid.dt)

    @property
    def output_energy(self) -> float:
        return float(np.sum(np.abs(self.output) ** 2) * self.tgrid.dt)

    def check(self) -> None:
        if not np.all(np.isfinite(self.envelope)):
            raise InvalidInputError("non-finite field envelope")
        if not np.array_equal(self.envelope[0], self.input_envelope):
            raise InvalidInputError("boundary condition E(0, t) = E_o(t) violated")


@dataclass
class DensityField:
    """One 3x3 density matrix per spatial node, ``rho.shape == (n, 3, 3)``."""

    rho: np.ndarray = field(repr=False)

    HERMITIAN_TOL = 1e-10
    TRACE_TOL = 1e-9
    POSITIVITY_TOL = -1e-8

    @classmethod
    def ground(cls, n: int) -> "DensityField":
        rho = np.zeros((n, 3, 3), dtype=complex)
        rho[:, 0, 0] = 1.0
        return cls(rho)

    @classmethod
    def pure(cls, state, n: int = 1) -> "DensityField":
        psi = np.asarray(state, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.broadcast_to(np.outer(psi, psi.conj()), (n, 3, 3)).copy())

    def __len__(self):
        return self.rho.shape[0]

    @property
    def coherence31(self) -> np.ndarray:
        """⟨σ31⟩ = Tr(ρ σ31) per node."""
        return self.rho[:, 0, 2]

    @property
    def spinwave(self) -> np.ndarray:
        """Ground-state coherence ρ21 per node."""
        return self.rho[:, 1, 0]

    def violations(self, check_positivity: bool = True) -> tuple[str, int] | None:
        """Return ``(what, first_cell)`` for the first broken invariant, else None."""
        rho = self.rho
        herm = np.abs(rho - np.conj(np.swapaxes(rho, -1, -2))).max(axis=(1, 2))
        bad = np.flatnonzero(~(herm < self.HERMITIAN_TOL))
        if bad.size:
            return "hermiticity", int(bad[0])
        tr = np.abs(np.trace(rho, axis1=1, axis2=2) - 1.0)
        bad = np.flatnonzero(~(tr < self.TRACE_TOL))
        if bad.size:
            return "trace", int(bad[0])
        if check_positivity:
            ev = np.linalg.eigvalsh(0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2))))
            bad = np.flatnonzero(~(ev[:, 0] > self.POSITIVITY_TOL))
            if bad.size:
                return "positivity", int(bad[0])
        return None


def _check_finite(*values) -> None:
    for v in values:
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("non-finite input")


def hamiltonian(params: LambdaParams, omega_p: complex, omega_c: float) -> np.ndarray:
    """Rotating-frame Λ Hamiltonian.

    H = Δ1 σ33 + (Δ1 - Δ2) σ22 + (ω_p σ31 + ω_c σ32 + h.c.)
    """
    _check_finite(omega_p, omega_c)
    H = np.zeros((3, 3), dtype=complex)
    H[2, 2] = params.delta1
    H[1, 1] = params.delta1 - params.delta2
    H[2, 0] = omega_p
    H[0, 2] = np.conj(omega_p)
    H[2, 1] = omega_c
    H[1, 2] = np.conj(omega_c)
    return H


def hamiltonian_batch(params: LambdaParams, omega_p: np.ndarray, omega_c) -> np.ndarray:
    """Vectorised :func:`hamiltonian` over an array of probe amplitudes."""
    omega_p = np.asarray(omega_p)
    H = np.zeros(omega_p.shape + (3, 3), dtype=complex)
    H[..., 2, 2] = params.delta1
    H[..., 1, 1] = params.delta1 - params.delta2
    H[..., 2, 0] = omega_p
    H[..., 0, 2] = np.conj(omega_p)
    H[..., 2, 1] = omega_c
    H[..., 1, 2] = np.conj(omega_c)
    return H


def dissipator(rho: np.ndarray, gamma31: float, gamma32: float, gamma12: float) -> np.ndarray:
    """Decay and dephasing part of the master equation, batched over leading axes.

    Ground-state dephasing uses the Lindblad operator sqrt(2 γ12) σ22: it damps
    ρ12 at γ12 and, as complete positivity requires, also ρ23.  ρ13 (the probe
    coherence) is untouched, so weak-probe linear response is unaffected.
    """
    g3 = gamma31 + gamma32
    out = np.zeros_like(rho)
    p3 = rho[..., 2, 2]
    out[..., 0, 0] = 2.0 * gamma31 * p3
    out[..., 1, 1] = 2.0 * gamma32 * p3
    # -(Γ31+Γ32)(σ33 ρ + ρ σ33)
    out[..., 2, :] -= g3 * rho[..., 2, :]
    out[..., :, 2] -= g3 * rho[..., :, 2]
    out[..., 0, 1] -= gamma12 * rho[..., 0, 1]
    out[..., 1, 0] -= gamma12 * rho[..., 1, 0]
    out[..., 1, 2] -= gamma12 * rho[..., 1, 2]
    out[..., 2, 1] -= gamma12 * rho[..., 2, 1]
    return out


def lindblad_batch(rho: np.ndarray, H: np.ndarray, params: LambdaParams) -> np.ndarray:
    """dρ/dt for stacks of density matrices and Hamiltonians (shape (..., 3, 3))."""
    comm = H @ rho - rho @ H
    return -1j * comm + dissipator(rho, params.gamma31, params.gamma32, params.gamma12)


def lindblad_rhs(rho: np.ndarray, H: np.ndarray, params: LambdaParams) -> np.ndarray:
    """Master-equation right-hand side for a single 3x3 density matrix.

    -i[H, ρ] + Σ_m Γ3m (2 σm3 ρ σ3m - σ33 ρ - ρ σ33) + 2γ12 (σ22 ρ σ22 - (σ22 ρ + ρ σ22)/2)
    """
    rho = np.asarray(rho, dtype=complex)
    H = np.asarray(H, dtype=complex)
    if rho.shape != (3, 3) or H.shape != (3, 3):
        raise InvalidInputError("rho and H must be 3x3")
    _check_finite(rho, H)
    return lindblad_batch(rho, H, params)


def liouvillian(H: np.ndarray, params: LambdaParams) -> np.ndarray:
    """9x9 superoperator L with vec(dρ/dt) = L vec(ρ) (row-major vec).

    Assembled from Kronecker products, vec(A ρ B) = (A ⊗ B^T) vec(ρ), so it
    shares no code with :func:`lindblad_rhs`.
    """
    eye = np.eye(3)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    s33 = sigma(3, 3)
    for m, rate in ((1, params.gamma31), (2, params.gamma32)):
        down = sigma(m, 3)
        L += rate * (2.0 * np.kron(down, down) - np.kron(s33, eye) - np.kron(eye, s33))
    s22 = sigma(2, 2)
    L += 2.0 * params.gamma12 * (np.kron(s22, s22) - 0.5 * np.kron(s22, eye) - 0.5 * np.kron(eye, s22))
    return L


def dark_state(omega_p: complex, omega_c: float) -> np.ndarray:
    """Normalised dark state |D⟩ ∝ ω_c |1⟩ - ω_p |2⟩."""
    _check_finite(omega_p, omega_c)
    vec = np.array([omega_c, -omega_p, 0.0], dtype=complex)
    scale = np.abs(vec).max()
    if scale == 0.0:
        raise DegenerateInputError("dark state undefined for zero probe and control")
    vec /= scale  # avoids underflow in the norm for tiny amplitudes
    return vec / np.linalg.norm(vec)
