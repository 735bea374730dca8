"""Control-envelope families and deterministic grid scans over them."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InvalidInputError
from .model import ControlEnvelope, TimeGrid

FAMILIES = ("ttl_square", "smoothed_square", "modulated_retrieval")


@dataclass(frozen=True)
class Window:
    start: float
    duration: float
    amplitude: float

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass(frozen=True)
class EnvelopeSpec:
    """Write / dark / read control sequence.

    ``modulation`` knots are ``(offset, fraction)`` pairs: offset in μs from
    the read turn-on, fraction of the read amplitude.  They shape the read
    stage of the ``modulated_retrieval`` family and are ignored otherwise.
    ``edge`` is the raised-cosine rise time of ``smoothed_square``.
    """

    family: str
    write_window: Window
    read_window: Window
    modulation: tuple[tuple[float, float], ...] = ()
    edge: float = 0.02

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidInputError(f"unknown envelope family {self.family!r}")
        for w in (self.write_window, self.read_window):
            if w.amplitude < 0 or w.duration < 0 or not np.isfinite([w.start, w.duration, w.amplitude]).all():
                raise InvalidInputError(f"invalid window {w}")
        if self.read_window.start <= self.write_window.end:
            raise ConfigurationError("read stage must start after the write stage ends")
        if self.family == "modulated_retrieval":
            if len(self.modulation) < 2:
                raise InvalidInputError("modulated_retrieval needs at least two knots")
            offs = [k[0] for k in self.modulation]
            if any(b <= a for a, b in zip(offs, offs[1:])):
                raise InvalidInputError("modulation knot offsets must increase")
            if any(k[1] < 0 for k in self.modulation):
                raise InvalidInputError("modulation fractions must be >= 0")

    @property
    def peak_amplitude(self) -> float:
        read = self.read_window.amplitude
        if self.family == "modulated_retrieval":
            read *= max(k[1] for k in self.modulation)
        return max(self.write_window.amplitude, read)


def _square(t, w: Window, edge: float) -> np.ndarray:
    out = ((t >= w.start) & (t < w.end)).astype(float)
    if edge > 0:
        rise = (t >= w.start) & (t < w.start + edge)
        out[rise] = 0.5 * (1 - np.cos(np.pi * (t[rise] - w.start) / edge))
        fall = (t > w.end - edge) & (t < w.end)
        out[fall] = 0.5 * (1 - np.cos(np.pi * (w.end - t[fall]) / edge))
    return w.amplitude * out


def make_envelope(spec: EnvelopeSpec, grid: TimeGrid) -> ControlEnvelope:
    """Sample ``spec`` on ``grid``; stage windows travel with the envelope."""
    t = grid.times
    t_end = grid.t0 + grid.nt * grid.dt
    for w in (spec.write_window, spec.read_window):
        if w.start < grid.t0 - 1e-12 or w.end > t_end + 1e-9:
            raise ConfigurationError(f"window [{w.start}, {w.end}] outside grid [{grid.t0}, {t_end}]")
    edge = spec.edge if spec.family == "smoothed_square" else 0.0
    samples = _square(t, spec.write_window, edge)
    if spec.family == "modulated_retrieval":
        r = spec.read_window
        inside = (t >= r.start) & (t < r.end)
        offs = np.array([k[0] for k in spec.modulation])
        frac = np.array([k[1] for k in spec.modulation])
        samples[inside] += r.amplitude * np.interp(t[inside] - r.start, offs, frac)
    else:
        samples += _square(t, spec.read_window, edge)
    w, r = spec.write_window, spec.read_window
    return ControlEnvelope(samples, grid, (w.start, w.end), (r.start, r.end))
