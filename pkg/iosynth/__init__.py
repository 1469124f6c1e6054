"""
iosynth: interval observer synthesis for nonlinear discrete-time systems
"""

from .config import MonitorSettings, RunConfig, SynthesisSettings
from .errors import (AssumptionViolation, BracketError, DiscretizationBoundExceeded, EigenDecompositionError,
                     InputError, IOSynthError, ShapeError, SolverFailure, StageError)
from .matops import MatInterval, bilinear_bounds, interval_product, is_schur, neg_part, pos_part, spectral_radius
from .model import SystemModel, check_jacobian_bounds, load_model, save_model
from .nonlinearities import NonlinearitySpec
from .observer import (DirectObserverGains, ObserverTrace, TransformedObserverGains, back_transform,
                       init_transformed, simulate, simulate_many, step_direct, step_transformed)
from .program import FeasibilityProgram
from .sampled import SampledDataConfig, discretize, simulate_sampled
from .solver import CvxpyBackend, solve_feasibility
from .synthesis import (Certificate, SynthesisVariables, assemble_direct, assemble_transformed,
                        certificate_from_gains, grid_synthesize, max_alpha, verify_certificate)
from .transform import (TransformPair, build_transform, check_assumption3, diagnose_direct,
                        place_observer_gain)

__version__ = "0.1.0"
