"""
System model: x[k+1] = A x[k] + p(x[k]) + w[k],  y[k] = C x[k]

Loads and saves declarative model files, validates the Jacobian-bound and
disturbance-bound assumptions, and checks declared Jacobian bounds against
finite differences of the actual nonlinearity.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from .errors import InputError, ShapeError
from .matops import as_mat, as_vec
from .nonlinearities import NonlinearitySpec

logger = logging.getLogger(__name__)

BOUND_TOL = 1e-12


@dataclass(frozen=True)
class SystemModel:
    n: int
    m: int
    A: np.ndarray
    C: np.ndarray
    nonlinearity: NonlinearitySpec
    D_lo: np.ndarray
    D_hi: np.ndarray
    w_lo: np.ndarray
    w_hi: np.ndarray
    region: Optional[np.ndarray] = None
    name: str = "model"
    Lambda: Optional[np.ndarray] = None
    S: Optional[np.ndarray] = None

    def __post_init__(self):
        n, m = int(self.n), int(self.m)
        if n <= 0 or m <= 0:
            raise InputError(f"dimensions must be positive, got n={n}, m={m}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)
        expected = {"A": (n, n), "C": (m, n), "D_lo": (n, n), "D_hi": (n, n)}
        for key, shape in expected.items():
            M = as_mat(getattr(self, key), key)
            if M.shape != shape:
                raise ShapeError(f"{key} must be {shape[0]}x{shape[1]}, got {M.shape[0]}x{M.shape[1]}")
            object.__setattr__(self, key, M)
        for key in ("w_lo", "w_hi"):
            v = as_vec(getattr(self, key), key)
            if v.shape != (n,):
                raise ShapeError(f"{key} must have length {n}, got {v.shape[0]}")
            object.__setattr__(self, key, v)

        if np.any(self.D_lo > BOUND_TOL):
            raise InputError("D_lo has a positive entry (Jacobian lower bound must be <= 0)")
        if np.any(self.D_hi < -BOUND_TOL):
            raise InputError("D_hi has a negative entry (Jacobian upper bound must be >= 0)")
        if np.any(self.w_lo > self.w_hi):
            raise InputError("disturbance bounds inverted")

        if self.region is not None:
            R = as_mat(self.region, "region")
            if R.shape != (n, 2) or np.any(R[:, 0] > R[:, 1]):
                raise InputError(f"region must be {n} rows of [lo, hi] with lo <= hi")
            object.__setattr__(self, "region", R)
        if self.Lambda is not None:
            L = np.array(self.Lambda, dtype=float)
            if L.size != n * m:
                raise ShapeError(f"Lambda must be {n}x{m}, got {L.size} entries")
            object.__setattr__(self, "Lambda", as_mat(L.reshape(n, m), "Lambda"))
        if self.S is not None:
            S = as_mat(self.S, "S")
            if S.shape != (n, n):
                raise ShapeError(f"S must be {n}x{n}, got {S.shape}")
            object.__setattr__(self, "S", S)

    @cached_property
    def p(self) -> Callable[[np.ndarray], np.ndarray]:
        return self.nonlinearity.build(self.n)

    def step(self, x: np.ndarray, w: Optional[np.ndarray] = None) -> np.ndarray:
        """One plant step x⁺ = A x + p(x) + w"""
        x_next = self.A @ x + self.p(x)
        return x_next if w is None else x_next + w

    def output(self, x: np.ndarray) -> np.ndarray:
        return self.C @ x

    @property
    def sampling_region(self) -> np.ndarray:
        if self.region is not None:
            return self.region
        return np.tile([-math.pi, math.pi], (self.n, 1))

    def with_bounds(self, D_lo=None, D_hi=None, w_lo=None, w_hi=None) -> "SystemModel":
        return SystemModel(
            n=self.n, m=self.m, A=self.A, C=self.C, nonlinearity=self.nonlinearity,
            D_lo=self.D_lo if D_lo is None else D_lo,
            D_hi=self.D_hi if D_hi is None else D_hi,
            w_lo=self.w_lo if w_lo is None else w_lo,
            w_hi=self.w_hi if w_hi is None else w_hi,
            region=self.region, name=self.name, Lambda=self.Lambda, S=self.S,
        )

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "name": self.name,
            "n": self.n,
            "m": self.m,
            "A": self.A.tolist(),
            "C": self.C.tolist(),
            "D_lo": self.D_lo.tolist(),
            "D_hi": self.D_hi.tolist(),
            "w_lo": self.w_lo.tolist(),
            "w_hi": self.w_hi.tolist(),
            "nonlinearity": self.nonlinearity.to_dict(),
        }
        if self.region is not None:
            data["region"] = self.region.tolist()
        if self.Lambda is not None:
            data["Lambda"] = self.Lambda.tolist()
        if self.S is not None:
            data["S"] = self.S.tolist()
        return data


def model_from_dict(data: Dict[str, Any]) -> SystemModel:
    if not isinstance(data, dict):
        raise InputError("model file must contain a JSON object")
    missing = [k for k in ("n", "m", "A", "C", "D_lo", "D_hi", "w_lo", "w_hi", "nonlinearity") if k not in data]
    if missing:
        raise InputError(f"model file is missing fields: {missing}")
    nl = data["nonlinearity"]
    if not isinstance(nl, dict) or "name" not in nl:
        raise InputError("nonlinearity must be an object with a 'name'")
    try:
        return SystemModel(
            n=data["n"],
            m=data["m"],
            A=data["A"],
            C=data["C"],
            nonlinearity=NonlinearitySpec(nl["name"], dict(nl.get("params", {}))),
            D_lo=data["D_lo"],
            D_hi=data["D_hi"],
            w_lo=data["w_lo"],
            w_hi=data["w_hi"],
            region=data.get("region"),
            name=data.get("name", "model"),
            Lambda=data.get("Lambda"),
            S=data.get("S"),
        )
    except InputError:
        raise
    except (TypeError, ValueError) as e:
        raise InputError(f"invalid model data: {e}") from e


def load_model(path) -> SystemModel:
    path = Path(path)
    try:
        with open(path) as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise InputError(f"model file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"cannot parse model file {path}: {e}") from e
    model = model_from_dict(data)
    logger.info(f"Loaded model '{model.name}' (n={model.n}, m={model.m}) from {path}")
    return model


def save_model(model: SystemModel, path):
    with open(path, "w") as f:
        json.dump(model.to_dict(), f, indent=2)
    logger.info(f"Saved model '{model.name}' to {path}")


@dataclass
class JacobianViolation:
    x: List[float]
    row: int
    col: int
    value: float
    lo: float
    hi: float


@dataclass
class JacobianReport:
    samples: int
    violations: List[JacobianViolation] = field(default_factory=list)
    max_excess: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations


def finite_difference_jacobian(p: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> np.ndarray:
    """Central differences with step 1e-6·(1+|x_j|) per coordinate"""
    n = x.size
    J = np.empty((p(x).size, n))
    for j in range(n):
        step = 1e-6 * (1.0 + abs(x[j]))
        e = np.zeros(n)
        e[j] = step
        J[:, j] = (p(x + e) - p(x - e)) / (2.0 * step)
    return J


def check_jacobian_bounds(model: SystemModel, sample_count: int = 10_000,
                          region: Optional[np.ndarray] = None, seed: int = 0,
                          tol: float = 1e-6) -> JacobianReport:
    """Sample the region uniformly and compare finite-difference Jacobians to [D_lo, D_hi]"""
    box = model.sampling_region if region is None else as_mat(region, "region")
    rng = np.random.default_rng(seed)
    report = JacobianReport(samples=sample_count)
    samples = rng.uniform(box[:, 0], box[:, 1], size=(sample_count, model.n))
    for x in samples:
        J = finite_difference_jacobian(model.p, x)
        excess = np.maximum(model.D_lo - J, J - model.D_hi)
        report.max_excess = max(report.max_excess, float(excess.max()))
        for i, j in zip(*np.nonzero(excess > tol)):
            report.violations.append(JacobianViolation(
                x=x.tolist(), row=int(i), col=int(j), value=float(J[i, j]),
                lo=float(model.D_lo[i, j]), hi=float(model.D_hi[i, j])))
    if report.violations:
        logger.warning(f"Jacobian bounds of '{model.name}' violated at {len(report.violations)} entries "
                       f"(max excess {report.max_excess:.3g})")
    return report
