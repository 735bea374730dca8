"""Two memories in series: interface 1 -> lossy link -> interface 2."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InvalidInputError
from .model import ControlEnvelope, LambdaParams, SpaceGrid, TimeGrid
from .solver import (InterfaceResult, energy, roi_mask, simulate_interface,
                     stage_windows)

PEAK_LABELS = ("A", "B", "C")


@dataclass(frozen=True)
class LinkBudget:
    """Lumped transmission and delay between the output of memory 1 and the input of memory 2."""

    splitter_transmission: float = 0.9
    propagation_transmission: float = 1.0
    delay: float = 0.0

    def __post_init__(self):
        for name in ("splitter_transmission", "propagation_transmission"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise InvalidInputError(f"{name} must lie in [0, 1], got {v}")
        if not np.isfinite(self.delay):
            raise InvalidInputError("delay must be finite")

    @classmethod
    def from_total_loss(cls, loss: float, splitter_transmission: float = 0.9,
                        delay: float = 0.0) -> "LinkBudget":
        """Split a total loss fraction into the splitter and the remaining propagation stage."""
        total = 1.0 - loss
        return cls(splitter_transmission, total / splitter_transmission, delay)

    @property
    def transmission(self) -> float:
        return self.splitter_transmission * self.propagation_transmission

    @property
    def loss(self) -> float:
        return 1.0 - self.transmission


def apply_link(field: np.ndarray, budget: LinkBudget, grid: TimeGrid) -> np.ndarray:
    """Scale the amplitude by sqrt(T) and delay by ``budget.delay``.

    Energy scales exactly as T; samples shifted past the end of the grid are lost.
    """
    out = np.sqrt(budget.transmission) * np.asarray(field, dtype=complex)
    if budget.delay == 0.0:
        return out
    shift = budget.delay / grid.dt
    if abs(shift - round(shift)) < 1e-9:
        k = int(round(shift))
        shifted = np.zeros_like(out)
        if k >= 0:
            shifted[k:] = out[: out.size - k] if k < out.size else 0.0
        else:
            shifted[:k] = out[-k:]
        return shifted
    t = grid.times
    src = t - budget.delay
    re = np.interp(src, t, out.real, left=0.0, right=0.0)
    im = np.interp(src, t, out.imag, left=0.0, right=0.0)
    return re + 1j * im


@dataclass(frozen=True)
class Peak:
    label: str
    roi: tuple[float, float]
    energy: float


def peak_rois(control1: ControlEnvelope, control2: ControlEnvelope):
    """A/B/C windows anchored to control edges.

    A runs from the start of the write-1 stage to the read-1 turn-on, B from
    read-1 turn-on to read-2 turn-on, C from read-2 turn-on for four read-2
    durations (clipped to the grid).
    """
    grid = control1.grid
    t_end = grid.t0 + grid.nt * grid.dt
    w1, r1 = stage_windows(control1)
    _, r2 = stage_windows(control2)
    a0 = w1[0] if w1 is not None else grid.t0
    r1_on = r1[0] if r1 is not None else t_end
    if r2 is None:
        r2_on, c_end = t_end, t_end
    else:
        r2_on = r2[0]
        c_end = min(r2_on + 4.0 * (r2[1] - r2[0]), t_end)
    b_end = max(r2_on, r1_on)
    return {"A": (a0, r1_on), "B": (r1_on, b_end), "C": (r2_on, c_end)}


def detect_peaks(trace, control1: ControlEnvelope, control2: ControlEnvelope) -> list[Peak]:
    """Integrate a power trace |E(t)|^2 over the A, B and C windows.

    Windows come from the control stage edges, never from local maxima, so a
    missing peak simply integrates to (near) zero.
    """
    grid = control1.grid
    power = np.asarray(trace, dtype=float)
    if power.shape != (grid.nt,):
        raise InvalidInputError("trace must be sampled on the control grid")
    if not np.all(np.isfinite(power)):
        raise InvalidInputError("trace must be finite")
    rois = peak_rois(control1, control2)
    return [Peak(lab, rois[lab], float(np.sum(power[roi_mask(grid, rois[lab])]) * grid.dt))
            for lab in PEAK_LABELS]


@dataclass
class CascadeResult:
    stage1: InterfaceResult
    stage2: InterfaceResult
    peaks: list[Peak]
    eta1: float
    eta2: float
    eta_T: float
    link: LinkBudget
    linked_input: np.ndarray = field(repr=False)

    @property
    def input_energy(self) -> float:
        return self.stage1.field.input_energy

    @property
    def output2(self) -> np.ndarray:
        return self.stage2.output

    def peak(self, label: str) -> Peak:
        return next(p for p in self.peaks if p.label == label)

    def summary(self) -> dict:
        return {
            "eta1": self.eta1,
            "eta2": self.eta2,
            "etaT": self.eta_T,
            "eta_leak1": self.stage1.eta_leak,
            "link_transmission": self.link.transmission,
            "input_photons": self.input_energy,
            "peaks": {p.label: {"roi_us": list(p.roi), "energy": p.energy} for p in self.peaks},
            "rois": {
                "stage1_leak": list(self.stage1.leak_roi),
                "stage1_retrieval": list(self.stage1.retrieval_roi),
                "stage2_leak": list(self.stage2.leak_roi),
                "stage2_retrieval": list(self.stage2.retrieval_roi),
            },
        }


def check_timing(control2: ControlEnvelope, retrieval_roi: tuple[float, float]) -> None:
    """Control 2 must be writing while the retrieval from memory 1 arrives."""
    w2, _ = stage_windows(control2)
    if w2 is None or w2[1] <= retrieval_roi[0] or w2[0] >= retrieval_roi[1]:
        raise ConfigurationError(
            f"control-2 write stage {w2} does not overlap the stage-1 retrieval window {retrieval_roi}")


def run_cascade(params1: LambdaParams, params2: LambdaParams, input_envelope,
                control1: ControlEnvelope, control2: ControlEnvelope, budget: LinkBudget,
                tgrid: TimeGrid, zgrid1: SpaceGrid | None = None,
                zgrid2: SpaceGrid | None = None, **sim_kwargs) -> CascadeResult:
    """Store in memory 1, route the output through ``budget``, store again in memory 2.

    η1 is the stage-1 retrieval-window energy over the input; η2 is the
    stage-2 C-window energy over the linked stage-1 retrieval energy; η_T is
    the C-window energy over the original input, so η_T = η1 · T · η2.
    """
    stage1 = simulate_interface(params1, input_envelope, control1, tgrid, zgrid1, **sim_kwargs)
    check_timing(control2, stage1.retrieval_roi)
    linked = apply_link(stage1.output, budget, tgrid)
    rois = peak_rois(control1, control2)
    stage2 = simulate_interface(params2, linked, control2, tgrid, zgrid2,
                                retrieval_roi=rois["C"], **sim_kwargs)
    peaks = detect_peaks(np.abs(stage2.output) ** 2, control1, control2)
    e_in = stage1.field.input_energy
    e_ret1 = energy(stage1.output, tgrid, stage1.retrieval_roi)
    e_c = peaks[2].energy
    eta1 = e_ret1 / e_in
    delivered = budget.transmission * e_ret1
    eta2 = e_c / delivered if delivered > 0 else 0.0
    eta_T = e_c / e_in
    return CascadeResult(stage1, stage2, peaks, eta1, eta2, eta_T, budget, linked)
