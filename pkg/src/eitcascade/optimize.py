"""Deterministic grid scans and exhaustive argmax over config parameters."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import METRICS, ExperimentConfig
from .errors import EITError, InvalidInputError
from .pipeline import evaluate

OBJECTIVES = ("eta1", "etaT", "sbr_cascaded")
MAX_GRID_POINTS = 10_000


@dataclass
class ScanResult:
    """Metrics on a 1-D or 2-D parameter grid.

    ``metrics[name]`` has the grid shape; failed points are NaN and listed in
    ``holes`` as ``(index, error message)``.
    """

    axes: list[tuple[str, np.ndarray]]
    metrics: dict[str, np.ndarray]
    holes: list[tuple[tuple[int, ...], str]] = field(default_factory=list)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(v) for _, v in self.axes)

    def argmax(self, metric: str) -> tuple[int, ...] | None:
        """Grid index of the maximum; ties go to the lowest index, first axis first."""
        vals = self.metrics[metric]
        if np.all(np.isnan(vals)):
            return None
        flat = np.where(np.isnan(vals), -np.inf, vals).ravel()
        return tuple(int(i) for i in np.unravel_index(int(np.argmax(flat)), vals.shape))

    def params(self, index: tuple[int, ...]) -> dict[str, float]:
        return {path: float(vals[i]) for (path, vals), i in zip(self.axes, index)}

    def best(self, metric: str) -> tuple[dict[str, float], float]:
        idx = self.argmax(metric)
        if idx is None:
            raise EITError(f"every scan point failed; no maximum for {metric}")
        return self.params(idx), float(self.metrics[metric][idx])

    def points(self):
        """Yield ``(index, params, {metric: value})`` in row-major order."""
        for idx in itertools.product(*(range(n) for n in self.shape)):
            yield idx, self.params(idx), {m: float(v[idx]) for m, v in self.metrics.items()}

    def summary(self) -> dict:
        out = {}
        for m in self.metrics:
            idx = self.argmax(m)
            if idx is None:
                out[m] = None
            else:
                out[m] = {"index": list(idx), "params": self.params(idx),
                          "value": float(self.metrics[m][idx])}
        return out


def _point(args):
    config, settings, metrics = args
    cfg = config
    try:
        for path, value in settings:
            cfg = cfg.with_value(path, value)
        values = evaluate(cfg)
    except (EITError, ValueError, ZeroDivisionError) as err:
        return None, f"{type(err).__name__}: {err}"
    return {m: values[m] for m in metrics}, None


def _axes(axes) -> list[tuple[str, np.ndarray]]:
    if isinstance(axes, tuple) and len(axes) == 2 and isinstance(axes[0], str):
        axes = [axes]
    out = [(str(path), np.asarray(values, dtype=float).ravel()) for path, values in axes]
    if not 1 <= len(out) <= 2:
        raise InvalidInputError("scan takes one or two axes")
    for path, values in out:
        if values.size == 0:
            raise InvalidInputError(f"axis {path!r} has no values")
    return out


def scan(base_config: ExperimentConfig, axes, metrics=METRICS, workers: int = 1) -> ScanResult:
    """Evaluate ``metrics`` at every grid point of ``axes``.

    ``axes`` is ``(path, values)`` or a list of up to two of them; paths are
    dotted config locations such as ``"control1.read.amplitude"``.  With
    ``workers > 1`` points run in separate processes; results are assembled in
    grid order, so the outcome does not depend on completion order.
    """
    axes = _axes(axes)
    metrics = tuple(metrics)
    unknown = set(metrics) - set(METRICS)
    if unknown or not metrics:
        raise InvalidInputError(f"unknown or empty metric set {sorted(unknown)}")
    shape = tuple(v.size for _, v in axes)
    grid = list(itertools.product(*(range(n) for n in shape)))
    jobs = [(base_config, tuple((p, float(v[i])) for (p, v), i in zip(axes, idx)), metrics)
            for idx in grid]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_point, jobs))
    else:
        results = [_point(j) for j in jobs]
    values = {m: np.full(shape, np.nan) for m in metrics}
    holes = []
    for idx, (res, err) in zip(grid, results):
        if res is None:
            holes.append((idx, err))
            continue
        for m in metrics:
            values[m][idx] = res[m]
    return ScanResult(axes, values, holes)


def optimize(base_config: ExperimentConfig, axes, objective: str = "etaT",
             workers: int = 1) -> tuple[dict[str, float], float, ScanResult]:
    """Exhaustive argmax of ``objective`` over up to two parameter grids."""
    if objective not in OBJECTIVES:
        raise InvalidInputError(f"objective must be one of {OBJECTIVES}")
    axes = _axes(axes)
    size = math.prod(v.size for _, v in axes)
    if size > MAX_GRID_POINTS:
        raise InvalidInputError(f"grid has {size} points; limit is {MAX_GRID_POINTS}")
    result = scan(base_config, axes, (objective,), workers)
    params, value = result.best(objective)
    return params, value, result


def config_axes(config: ExperimentConfig) -> list[tuple[str, list[float]]]:
    if config.scan is None:
        raise InvalidInputError("config has no scan section")
    return [(a.path, list(a.values)) for a in config.scan.axes]
