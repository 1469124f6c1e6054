"""
Settings for synthesis, monitoring and experiment runs

All tunables live here as dataclass fields with their defaults, so the CLI only
has to override what the user passes on the command line.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .errors import InputError

DEFAULT_LAMBDA_GRID: List[float] = [round(0.05 * i, 2) for i in range(1, 20)]
DEFAULT_TAU_GRID: List[float] = [10.0 ** e for e in range(-3, 4)]

# Interior-point tolerances tight enough for the post-solve entrywise checks
CLARABEL_OPTIONS: Dict[str, Any] = {
    "tol_gap_abs": 1e-9,
    "tol_gap_rel": 1e-9,
    "tol_feas": 1e-9,
    "tol_infeas_abs": 1e-9,
    "tol_infeas_rel": 1e-9,
    "max_iter": 500,
}


@dataclass
class SynthesisSettings:
    tau_grid: List[float] = field(default_factory=lambda: list(DEFAULT_TAU_GRID))
    lambda_grid: List[float] = field(default_factory=lambda: list(DEFAULT_LAMBDA_GRID))
    eps_pos: float = 1e-6
    eps_pd: float = 1e-6
    feasibility_tol: float = 1e-7
    solver: Optional[str] = "CLARABEL"
    solver_options: Optional[Dict[str, Any]] = None
    max_workers: int = 4

    def __post_init__(self):
        if not self.tau_grid or not self.lambda_grid:
            raise InputError("grids must be nonempty")
        if any(t <= 0 for t in self.tau_grid):
            raise InputError(f"tau grid must be positive: {self.tau_grid}")
        if any(not 0.0 <= lam < 1.0 for lam in self.lambda_grid):
            raise InputError(f"lambda grid must lie in [0, 1): {self.lambda_grid}")
        if self.eps_pos <= 0 or self.eps_pd <= 0:
            raise InputError("margins eps_pos and eps_pd must be positive")
        # Smallest lambda first: the grid search stops at the first feasible row
        self.lambda_grid = sorted(float(v) for v in self.lambda_grid)
        self.tau_grid = [float(v) for v in self.tau_grid]


@dataclass
class MonitorSettings:
    positivity_tol: float = 1e-9
    quadratic_tol: float = 1e-7
    ultimate_window: float = 0.2


@dataclass
class RunConfig:
    """Everything one CLI invocation needs"""

    command: str
    model_path: Optional[str] = None
    mode: str = "direct"
    synthesis: SynthesisSettings = field(default_factory=SynthesisSettings)
    monitors: MonitorSettings = field(default_factory=MonitorSettings)
    seeds: List[int] = field(default_factory=lambda: [0])
    horizon: int = 1000
    out_dir: str = "results"
    gains_path: Optional[str] = None
    lambda_gain: Optional[np.ndarray] = None
    transform_S: Optional[np.ndarray] = None
    auto_transform: bool = False
    poles: Optional[List[float]] = None
    h: float = 0.065
    x0: Optional[List[float]] = None
    radius: float = 0.1
