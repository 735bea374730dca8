"""Few-photon bookkeeping: filter chains, backgrounds, photon-count histograms and SBR."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .model import ControlEnvelope, TimeGrid
from .solver import roi_mask

HISTOGRAM_KINDS = ("signal_plus_background", "background_only")
# trials per independent RNG stream in simulate_counts
TRIAL_CHUNK = 10_000


@dataclass(frozen=True)
class FilterStage:
    name: str
    control_suppression_db: float
    probe_transmission: float

    def __post_init__(self):
        if not self.control_suppression_db >= 0:
            raise InvalidInputError(f"stage {self.name!r}: suppression must be >= 0 dB")
        if not (0.0 < self.probe_transmission <= 1.0):
            raise InvalidInputError(f"stage {self.name!r}: probe transmission must lie in (0, 1]")


@dataclass(frozen=True)
class FilterChain:
    stages: tuple[FilterStage, ...]

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))

    @classmethod
    def single(cls, suppression_db: float, probe_transmission: float, name: str = "chain"):
        return cls((FilterStage(name, suppression_db, probe_transmission),))

    @property
    def control_suppression_db(self) -> float:
        return float(sum(s.control_suppression_db for s in self.stages))

    @property
    def probe_transmission(self) -> float:
        return float(np.prod([s.probe_transmission for s in self.stages]))

    @property
    def control_transmission(self) -> float:
        return 10.0 ** (-self.control_suppression_db / 10.0)


def chain_metrics(chain: FilterChain) -> tuple[float, float, float]:
    """(total control suppression dB, total probe transmission, effective dB).

    Effective suppression is the control suppression less the probe's own
    insertion loss through the same chain.
    """
    if not chain.stages:
        raise InvalidInputError("filter chain has no stages")
    total_db = chain.control_suppression_db
    probe_t = chain.probe_transmission
    return total_db, probe_t, total_db + 10.0 * math.log10(probe_t)


def sbr(signal_plus_background: float, background: float) -> float:
    """[(S+B) - B] / B; a zero background returns ``math.inf`` instead of raising."""
    if background == 0:
        return math.inf
    return (signal_plus_background - background) / background


def background_filter_factor(model: "BackgroundModel") -> float:
    """Fraction of the broadband memory-1 background accepted by memory 2."""
    if model.spectral_width_background <= 0 or model.memory_acceptance_width <= 0:
        raise InvalidInputError("spectral widths must be > 0")
    return min(1.0, model.memory_acceptance_width / model.spectral_width_background)


@dataclass(frozen=True)
class BackgroundModel:
    """Phenomenological noise sources for both detection arms.

    control_photons_per_pulse : control photons co-propagating with the probe,
        attenuated by the arm's filter chain (control leakage).
    atomic_background_rate : noise photons/μs emitted into the probe mode at a
        cell output while that cell's control sits at ``reference_rabi``;
        scales with control power, i.e. with (Ω_c / reference_rabi)^2.
    spectral_width_background, memory_acceptance_width : MHz, set the share
        of memory-1 noise that memory 2 stores and replays.
    dark_rate : flat detector counts/μs.
    """

    control_photons_per_pulse: float = 1e8
    atomic_background_rate: float = 0.0
    reference_rabi: float = 30.0
    spectral_width_background: float = 100.0
    memory_acceptance_width: float = 1.0
    dark_rate: float = 0.0

    def __post_init__(self):
        for name in ("control_photons_per_pulse", "atomic_background_rate", "reference_rabi",
                     "spectral_width_background", "memory_acceptance_width", "dark_rate"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise InvalidInputError(f"{name} must be finite and >= 0")

    def atomic_rate(self, control: ControlEnvelope) -> np.ndarray:
        """Noise photons/μs leaving a cell driven by ``control``."""
        if self.reference_rabi == 0:
            return np.zeros(control.grid.nt)
        return self.atomic_background_rate * (control.samples / self.reference_rabi) ** 2

    def control_leak_rate(self, control: ControlEnvelope, chain: FilterChain) -> np.ndarray:
        """Detected control photons/μs after the filter chain."""
        power = control.samples**2
        norm = np.sum(power) * control.grid.dt
        if norm == 0:
            return np.zeros(control.grid.nt)
        return self.control_photons_per_pulse * chain.control_transmission * power / norm


@dataclass
class CountHistogram:
    edges: np.ndarray
    counts: np.ndarray
    trials: int
    kind: str

    def __post_init__(self):
        if self.kind not in HISTOGRAM_KINDS:
            raise InvalidInputError(f"unknown histogram kind {self.kind!r}")
        if np.any(self.counts < 0):
            raise InvalidInputError("counts must be >= 0")

    @property
    def bin_width(self) -> float:
        return float(self.edges[1] - self.edges[0])

    def roi_counts(self, roi: tuple[float, float]) -> int:
        """Counts in bins whose start lies in [roi[0], roi[1])."""
        starts = self.edges[:-1]
        eps = 1e-9 * self.bin_width
        sel = (starts >= roi[0] - eps) & (starts < roi[1] - eps)
        return int(self.counts[sel].sum())


def bin_edges(grid: TimeGrid, bins: int) -> np.ndarray:
    """``bins`` uniform bins spanning the sampled window [t0, t_end]."""
    return np.linspace(grid.t0, grid.t_end, bins + 1)


def expected_bin_counts(rate: np.ndarray, grid: TimeGrid, edges: np.ndarray) -> np.ndarray:
    """Integrate a per-trial rate (counts/μs on ``grid``) into histogram bins."""
    rate = np.asarray(rate, dtype=float)
    cum = np.concatenate([[0.0], np.cumsum(rate) * grid.dt])
    tt = grid.t0 + grid.dt * np.arange(grid.nt + 1)
    return np.diff(np.interp(edges, tt, cum))


def simulate_counts(signal_rate, background_rate, grid: TimeGrid, bins: int | np.ndarray = 1000,
                    trials: int = 100_000, seed: int = 0,
                    kind: str = "signal_plus_background") -> CountHistogram:
    """Poisson photon-count histogram accumulated over ``trials`` repetitions.

    Rates are detected counts/μs per trial on ``grid``.  Trials are split into
    chunks with independent streams spawned from ``seed``; per-bin totals are
    integer sums, so the result does not depend on evaluation order.
    """
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")
    rate = np.asarray(signal_rate, dtype=float) + np.asarray(background_rate, dtype=float)
    if np.any(rate < 0) or not np.all(np.isfinite(rate)):
        raise InvalidInputError("rates must be finite and >= 0")
    edges = bin_edges(grid, bins) if np.ndim(bins) == 0 else np.asarray(bins, dtype=float)
    lam = np.clip(expected_bin_counts(rate, grid, edges), 0.0, None)
    n_chunks = -(-trials // TRIAL_CHUNK)
    streams = np.random.SeedSequence(seed).spawn(n_chunks)
    counts = np.zeros(lam.size, dtype=np.int64)
    for i, ss in enumerate(streams):
        n = min(TRIAL_CHUNK, trials - i * TRIAL_CHUNK)
        counts += np.random.default_rng(ss).poisson(lam * n)
    return CountHistogram(edges, counts, trials, kind)


def photon_budget(input_mean: float, eta1: float, link_T: float, chain_a: FilterChain,
                  chain_b: FilterChain, eta2: float = 1.0) -> dict[str, float]:
    """Mean photon numbers along the pipeline.

    Detector 1 sees the memory-1 output through ``chain_a``; detector 2 sees
    the memory-2 output (memory-2 input times ``eta2``) through ``chain_b``.
    """
    if input_mean < 0:
        raise InvalidInputError("input_mean must be >= 0")
    for name, v in (("eta1", eta1), ("link_T", link_T), ("eta2", eta2)):
        if not (0.0 <= v <= 1.0):
            raise InvalidInputError(f"{name} must lie in [0, 1]")
    out1 = input_mean * eta1
    in2 = out1 * link_T
    out2 = in2 * eta2
    return {
        "input": input_mean,
        "memory1_output": out1,
        "memory2_input": in2,
        "memory2_output": out2,
        "detector1": out1 * chain_a.probe_transmission,
        "detector2": out2 * chain_b.probe_transmission,
    }


@dataclass
class DetectionArm:
    """Expected per-trial count rates at one detector, split by origin."""

    signal: np.ndarray
    background: np.ndarray
    roi: tuple[float, float]
    grid: TimeGrid = field(repr=False)

    def expected_counts(self, roi=None) -> tuple[float, float]:
        """(signal + background, background) expected per trial in ``roi``."""
        m = roi_mask(self.grid, roi or self.roi)
        s = float(np.sum(self.signal[m]) * self.grid.dt)
        b = float(np.sum(self.background[m]) * self.grid.dt)
        return s + b, b

    @property
    def expected_sbr(self) -> float:
        sb, b = self.expected_counts()
        return sbr(sb, b)

    def histograms(self, bins=1000, trials=100_000, seed=0):
        """Signal+background and background-only histograms from independent seeds."""
        ss = np.random.SeedSequence(seed).spawn(2)
        sig = simulate_counts(self.signal, self.background, self.grid, bins, trials,
                              int(ss[0].generate_state(1)[0]), "signal_plus_background")
        bkg = simulate_counts(np.zeros_like(self.signal), self.background, self.grid, bins,
                              trials, int(ss[1].generate_state(1)[0]), "background_only")
        return sig, bkg

    def measured_sbr(self, bins=1000, trials=100_000, seed=0) -> float:
        sig, bkg = self.histograms(bins, trials, seed)
        return sbr(sig.roi_counts(self.roi), bkg.roi_counts(self.roi))


def first_stage_arm(cascade, background: BackgroundModel, chain: FilterChain) -> DetectionArm:
    """Detector 1: memory-1 output through ``chain`` over the stage-1 retrieval ROI."""
    grid = cascade.stage1.field.tgrid
    c1 = cascade.stage1.control
    t = chain.probe_transmission
    signal = t * np.abs(cascade.stage1.output) ** 2
    bkg = (t * background.atomic_rate(c1) + background.control_leak_rate(c1, chain)
           + background.dark_rate)
    return DetectionArm(signal, bkg, cascade.stage1.retrieval_roi, grid)


def cascaded_arm(cascade, background: BackgroundModel, chain: FilterChain) -> DetectionArm:
    """Detector 2: memory-2 output through ``chain`` over the C window.

    Memory-1 noise reaches memory 2 through the link; the accepted share
    (:func:`background_filter_factor`) is stored and replayed with the signal's
    η2 and the C-peak time profile, the rest passes during the B window.
    """
    grid = cascade.stage2.field.tgrid
    c1, c2 = cascade.stage1.control, cascade.stage2.control
    t = chain.probe_transmission
    signal = t * np.abs(cascade.stage2.output) ** 2
    noise1 = cascade.link.transmission * background.atomic_rate(c1)
    n1 = float(np.sum(noise1) * grid.dt)
    f = background_filter_factor(background)
    c_roi = cascade.peak("C").roi
    c_mask = roi_mask(grid, c_roi)
    c_shape = np.zeros(grid.nt)
    c_power = np.abs(cascade.stage2.output[c_mask]) ** 2
    if c_power.sum() > 0:
        c_shape[c_mask] = c_power / (c_power.sum() * grid.dt)
    replayed = f * cascade.eta2 * n1 * c_shape
    passed = (1.0 - f) * noise1 * ~c_mask
    bkg = (t * (background.atomic_rate(c2) + replayed + passed)
           + background.control_leak_rate(c2, chain) + background.dark_rate)
    return DetectionArm(signal, bkg, c_roi, grid)
