"""Simulator for cascaded EIT quantum memories in Λ-type atomic ensembles."""

from .cascade import CascadeResult, LinkBudget, Peak, run_cascade
from .cli import run_command
from .config import (CALIBRATED_GAMMA12, CALIBRATED_OPTICAL_DEPTH, ExperimentConfig, example_path,
                     load_config, load_example, parse_config, serialize_config)
from .errors import (ConfigurationError, DegenerateInputError, EITError, GridMismatchError,
                     IntegrationError, InvalidInputError, StabilityError,
                     UndefinedEfficiencyError)
from .model import (ControlEnvelope, DensityField, FieldRecord, LambdaParams, SpaceGrid,
                    TimeGrid, dark_state, hamiltonian, lindblad_rhs, liouvillian, optical_depth,
                    transfer_function)
from .optimize import ScanResult, optimize, scan
from .photometry import (BackgroundModel, FilterChain, FilterStage, background_filter_factor,
                         chain_metrics, photon_budget, sbr, simulate_counts)
from .pipeline import Experiment, evaluate
from .shaping import EnvelopeSpec, Window, make_envelope
from .solver import InterfaceResult, input_pulse, propagate_field, simulate_interface, step_atoms

__version__ = "0.1.0"
