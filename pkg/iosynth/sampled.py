"""
Sampled-data estimation

A continuous plant ẋ = A_c x + p_c(x) measured every h seconds is observed by
the discrete observer designed for its forward-Euler model

    x[k+1] = (I + h·A_c) x[k] + h·p_c(x[k]) + w[k],   ‖w[k]‖ ≤ h·ϱ(h)

where w collects the Euler defect. The exact sample map is unknown, so the
ground truth is a fine RK4 integration and the defect it implies is measured
against the declared bound at every sample.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .config import MonitorSettings
from .errors import DiscretizationBoundExceeded, InputError
from .matops import as_mat
from .model import SystemModel
from .nonlinearities import NonlinearitySpec
from .observer import ObserverGains, ObserverTrace, run_observer

logger = logging.getLogger(__name__)


def sqrt2_rho(h: float) -> float:
    return math.sqrt(2.0) * h


@dataclass
class SampledDataConfig:
    A_c: np.ndarray
    C: np.ndarray
    nonlinearity: NonlinearitySpec
    h: float = 0.065
    rho: Callable[[float], float] = field(default=sqrt2_rho, repr=False)
    truth_substeps: int = 50
    D_lo_c: Optional[np.ndarray] = None
    D_hi_c: Optional[np.ndarray] = None
    name: str = "sampled"

    def __post_init__(self):
        self.A_c = as_mat(self.A_c, "A_c")
        self.C = as_mat(self.C, "C")
        if not self.h > 0:
            raise InputError(f"sampling step h must be positive, got {self.h}")
        if self.truth_substeps < 10:
            raise InputError(f"truth_substeps must be at least 10, got {self.truth_substeps}")
        n = self.A_c.shape[0]
        if self.D_lo_c is None or self.D_hi_c is None:
            bounds = self.nonlinearity.declared_bounds(n)
            if bounds is None:
                raise InputError("custom continuous nonlinearity needs explicit D_lo_c and D_hi_c")
            self.D_lo_c, self.D_hi_c = bounds
        self.D_lo_c = as_mat(self.D_lo_c, "D_lo_c")
        self.D_hi_c = as_mat(self.D_hi_c, "D_hi_c")

    @property
    def n(self) -> int:
        return self.A_c.shape[0]

    @property
    def disturbance_bound(self) -> float:
        """h·ϱ(h)"""
        return self.h * float(self.rho(self.h))

    def vector_field(self) -> Callable[[np.ndarray], np.ndarray]:
        p_c = self.nonlinearity.build(self.n)
        A_c = self.A_c
        return lambda x: A_c @ x + p_c(x)


def discretize(config: SampledDataConfig, Lambda=None, S=None) -> SystemModel:
    """Forward-Euler model with Jacobian bounds scaled by h and w̄ = −w̲ = h·ϱ(h)·1"""
    n, h = config.n, config.h
    w_bar = np.full(n, config.disturbance_bound)
    return SystemModel(
        n=n, m=config.C.shape[0],
        A=np.eye(n) + h * config.A_c,
        C=config.C,
        nonlinearity=config.nonlinearity.scaled(h),
        D_lo=h * config.D_lo_c,
        D_hi=h * config.D_hi_c,
        w_lo=-w_bar,
        w_hi=w_bar,
        name=f"{config.name}(h={h:g})",
        Lambda=Lambda,
        S=S,
    )


def rk4_flow(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float, substeps: int) -> np.ndarray:
    """Classical RK4 over one sample interval of length h"""
    dt = h / substeps
    for _ in range(substeps):
        k1 = f(x)
        k2 = f(x + 0.5 * dt * k1)
        k3 = f(x + 0.5 * dt * k2)
        k4 = f(x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


def simulate_sampled(config: SampledDataConfig, gains: ObserverGains, x0, upper0, lower0,
                     horizon: int = 1000, cert=None, monitors: MonitorSettings = MonitorSettings(),
                     model: Optional[SystemModel] = None) -> ObserverTrace:
    """
    Observer on the Euler model against RK4 ground truth.

    The recorded w[k] is the measured defect truth − Euler; a defect above
    h·ϱ(h) invalidates the run and raises DiscretizationBoundExceeded.
    """
    model = model or discretize(config)
    f = config.vector_field()

    def plant_step(k: int, x: np.ndarray):
        truth = rk4_flow(f, x, config.h, config.truth_substeps)
        return truth, truth - model.step(x)

    trace = run_observer(model, gains, x0, upper0, lower0, horizon, plant_step, seed=0,
                         cert=cert, monitors=monitors)
    defects = np.linalg.norm(trace.w[:-1], axis=1)
    bound = config.disturbance_bound
    trace.summary.max_defect = float(np.max(defects))
    trace.summary.defect_bound = bound
    if trace.summary.max_defect > bound:
        k = int(np.argmax(defects))
        logger.error(f"Euler defect {trace.summary.max_defect:.4g} at sample {k} exceeds h·rho(h) = {bound:.4g}")
        raise DiscretizationBoundExceeded(
            f"discretization error {trace.summary.max_defect:.4g} at sample {k} exceeds declared bound {bound:.4g}")
    logger.info(f"Max Euler defect {trace.summary.max_defect:.3g} within bound {bound:.3g}")
    return trace
