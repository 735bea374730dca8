"""Experiment configuration: strict JSON schema, parsing and conversion to model objects."""

from __future__ import annotations

import json
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import model
from .cascade import LinkBudget
from .errors import EITError
from .photometry import BackgroundModel, FilterChain, FilterStage
from .shaping import EnvelopeSpec, Window

FORMAT = "eitcascade.config/1"

# Cell calibration shared by both rails (see calibration.py for the fit).
CALIBRATED_OPTICAL_DEPTH = 5.8642
CALIBRATED_GAMMA12 = 0.20937


class ConfigSyntaxError(EITError, ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class ConfigSchemaError(EITError, ValueError):
    """All schema violations found in one pass, as ``(location, message)`` pairs."""

    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = violations
        lines = "\n".join(f"  {loc}: {msg}" for loc, msg in violations)
        super().__init__(f"{len(violations)} schema violation(s):\n{lines}")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class MemoryConfig(_Strict):
    delta1: float = 0.0
    delta2: float = 0.0
    gamma31: float = Field(model.GAMMA_DEFAULT, gt=0)
    gamma32: float = Field(model.GAMMA_DEFAULT, gt=0)
    gamma12: float = Field(CALIBRATED_GAMMA12, ge=0)
    length_L: float = Field(model.LENGTH_DEFAULT, gt=0)
    probe_rabi_scale: float = Field(model.PROBE_RABI_SCALE_DEFAULT, gt=0)
    coupling_g: Optional[float] = Field(None, ge=0)
    optical_depth: Optional[float] = Field(None, ge=0)

    @model_validator(mode="after")
    def _one_coupling(self):
        if self.coupling_g is not None and self.optical_depth is not None:
            raise ValueError("give either coupling_g or optical_depth, not both")
        return self

    def to_params(self) -> model.LambdaParams:
        fields = self.model_dump(exclude={"coupling_g", "optical_depth"})
        if self.coupling_g is not None:
            return model.LambdaParams(coupling_g=self.coupling_g, **fields)
        depth = CALIBRATED_OPTICAL_DEPTH if self.optical_depth is None else self.optical_depth
        return model.LambdaParams.from_optical_depth(depth, **fields)


class PulseConfig(_Strict):
    shape: Literal["square", "gaussian"] = "square"
    start: float = 1.0
    duration: float = Field(1.0, gt=0)
    mean_photons: float = Field(8.0, ge=0)
    edge: float = Field(0.05, ge=0)


class WindowConfig(_Strict):
    start: float
    duration: float = Field(ge=0)
    amplitude: float = Field(ge=0)


class ControlConfig(_Strict):
    family: Literal["ttl_square", "smoothed_square", "modulated_retrieval"] = "ttl_square"
    write: WindowConfig
    read: WindowConfig
    modulation: list[tuple[float, float]] = []
    edge: float = Field(0.02, ge=0)

    def to_spec(self) -> EnvelopeSpec:
        return EnvelopeSpec(self.family, Window(**self.write.model_dump()),
                            Window(**self.read.model_dump()),
                            tuple(tuple(k) for k in self.modulation), self.edge)


def _default_control1():
    return ControlConfig(family="modulated_retrieval",
                         write=WindowConfig(start=0.0, duration=1.9, amplitude=10.0),
                         read=WindowConfig(start=2.1, duration=0.3, amplitude=30.0),
                         modulation=[(0.0, 0.4), (0.3, 1.0)])


def _default_control2():
    return ControlConfig(write=WindowConfig(start=0.0, duration=2.4, amplitude=10.0),
                         read=WindowConfig(start=3.0, duration=0.4, amplitude=22.0))


class TimingConfig(_Strict):
    # control-2 write stage ends this long after the read-1 window ends; None keeps control2 as given
    match_control2_write: Optional[float] = None


class LinkConfig(_Strict):
    splitter_transmission: float = Field(0.9, ge=0, le=1)
    propagation_transmission: float = Field(1.0, ge=0, le=1)
    delay: float = 0.0

    def to_budget(self) -> LinkBudget:
        return LinkBudget(**self.model_dump())


class StageConfig(_Strict):
    name: str
    control_suppression_db: float = Field(ge=0)
    probe_transmission: float = Field(gt=0, le=1)


class FiltersConfig(_Strict):
    spcm1: list[StageConfig] = Field(
        default_factory=lambda: [StageConfig(name="filtering_setup", control_suppression_db=154.0,
                                             probe_transmission=0.0039)], min_length=1)
    spcm2: list[StageConfig] = Field(
        default_factory=lambda: [StageConfig(name="filtering_setup", control_suppression_db=154.0,
                                             probe_transmission=0.0022)], min_length=1)

    def chain(self, arm: str) -> FilterChain:
        return FilterChain(tuple(FilterStage(**s.model_dump()) for s in getattr(self, arm)))


class BackgroundConfig(_Strict):
    control_photons_per_pulse: float = Field(1e8, ge=0)
    atomic_background_rate: float = Field(0.0, ge=0)
    reference_rabi: float = Field(30.0, gt=0)
    spectral_width_background: float = Field(100.0, gt=0)
    memory_acceptance_width: float = Field(1.0, gt=0)
    dark_rate: float = Field(0.0, ge=0)

    def to_model(self) -> BackgroundModel:
        return BackgroundModel(**self.model_dump())


class DetectionConfig(_Strict):
    bins: int = Field(1000, ge=1)
    trials: int = Field(100_000, ge=1)


class BudgetConfig(_Strict):
    # measured efficiencies to budget with; None means "simulate"
    eta1: Optional[float] = Field(None, ge=0, le=1)
    eta2: Optional[float] = Field(None, ge=0, le=1)


class GridConfig(_Strict):
    t0: float = 0.0
    t_end: float = 5.0
    dt: float = Field(1e-3, gt=0)
    nz: int = Field(128, ge=2)

    @model_validator(mode="after")
    def _span(self):
        if self.t_end <= self.t0 + self.dt:
            raise ValueError("t_end must exceed t0 by at least one time step")
        return self


class AxisConfig(_Strict):
    path: str
    values: list[float] = Field(min_length=1)


METRICS = ("eta1", "eta2", "etaT", "sbr1", "sbr_cascaded")


class ScanConfig(_Strict):
    axes: list[AxisConfig] = Field(min_length=1, max_length=2)
    metrics: list[Literal["eta1", "eta2", "etaT", "sbr1", "sbr_cascaded"]] = list(METRICS)
    objective: Optional[Literal["eta1", "etaT", "sbr_cascaded"]] = None
    power_label_uw_per_rabi2: Optional[float] = Field(None, gt=0)


class ExperimentConfig(_Strict):
    format: Literal["eitcascade.config/1"] = FORMAT
    seed: int = Field(0, ge=0, lt=2**64)
    memory1: MemoryConfig = MemoryConfig()
    memory2: Optional[MemoryConfig] = None
    input_pulse: PulseConfig = PulseConfig()
    control1: ControlConfig = Field(default_factory=_default_control1)
    control2: ControlConfig = Field(default_factory=_default_control2)
    timing: TimingConfig = TimingConfig()
    link: LinkConfig = LinkConfig()
    filters: FiltersConfig = FiltersConfig()
    background: BackgroundConfig = BackgroundConfig()
    detection: DetectionConfig = DetectionConfig()
    budget: BudgetConfig = BudgetConfig()
    grids: GridConfig = GridConfig()
    scan: Optional[ScanConfig] = None

    def memory(self, which: int) -> MemoryConfig:
        if which == 2 and self.memory2 is not None:
            return self.memory2
        return self.memory1

    def with_value(self, path: str, value) -> "ExperimentConfig":
        """Copy with the dotted ``path`` set to ``value`` (re-validated)."""
        data = self.model_dump(mode="json")
        keys = path.split(".")
        node = data
        for k in keys[:-1]:
            if k not in node:
                raise ConfigSchemaError([(path, "unknown path")])
            if node[k] is None:
                node[k] = {}
            node = node[k]
        if keys[-1] not in node and not isinstance(node, dict):
            raise ConfigSchemaError([(path, "unknown path")])
        node[keys[-1]] = value
        return validate_config(data)


def _violations(err: ValidationError) -> list[tuple[str, str]]:
    out = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        out.append((loc, e["msg"]))
    return out


def validate_config(data) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigSchemaError(_violations(err)) from None


def parse_config(text: str) -> ExperimentConfig:
    """Parse JSON text into a validated config.

    Raises :class:`ConfigSyntaxError` (with line/column) for malformed JSON and
    :class:`ConfigSchemaError` listing every violation otherwise.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigSyntaxError(err.msg, err.lineno, err.colno) from None
    return validate_config(data)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def serialize_config(config: ExperimentConfig) -> str:
    return json.dumps(config.model_dump(mode="json"), indent=2, sort_keys=False) + "\n"


def time_grid(config: ExperimentConfig) -> model.TimeGrid:
    g = config.grids
    return model.TimeGrid.span(g.t0, g.t_end, g.dt)


def space_grid(config: ExperimentConfig, which: int = 1) -> model.SpaceGrid:
    return model.SpaceGrid.for_length(config.memory(which).length_L, config.grids.nz)


def control_specs(config: ExperimentConfig) -> tuple[EnvelopeSpec, EnvelopeSpec]:
    spec1 = config.control1.to_spec()
    c2 = config.control2
    if config.timing.match_control2_write is not None:
        end = spec1.read_window.end + config.timing.match_control2_write
        c2 = c2.model_copy(update={"write": c2.write.model_copy(
            update={"duration": end - c2.write.start})})
    return spec1, c2.to_spec()


def example_path(name: str):
    """Path of a shipped example config (``classical``, ``few_photon_8``, ``power_scan``)."""
    from importlib.resources import files
    return files("eitcascade") / "configs" / f"{name}.json"


def load_example(name: str) -> ExperimentConfig:
    return parse_config(example_path(name).read_text(encoding="utf-8"))
