"""
Named nonlinearity registry

Model files refer to a nonlinearity by name plus numeric parameters, so they
stay fully declarative. Every entry also declares the Jacobian bounds it
satisfies globally, and accepts a `scale` parameter (p = scale · base), which is
how the Euler discretization multiplies a continuous-time vector field by h.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from .errors import InputError
from .matops import neg_part, pos_part

logger = logging.getLogger(__name__)

Bounds = Tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    factory: Callable[[Dict[str, Any], int], Callable[[np.ndarray], np.ndarray]]
    bounds: Callable[[Dict[str, Any], int], Bounds]
    description: str = ""


REGISTRY: Dict[str, RegistryEntry] = {}


def register(name: str, factory, bounds, description: str = "") -> RegistryEntry:
    entry = RegistryEntry(name, factory, bounds, description)
    REGISTRY[name] = entry
    return entry


def _gain(params: Dict[str, Any], n: int) -> np.ndarray:
    if "gain" not in params:
        raise InputError("parameter 'gain' is required")
    M = np.array(params["gain"], dtype=float)
    if M.shape != (n, n):
        raise InputError(f"parameter 'gain' must be {n}x{n}, got {M.shape}")
    return M


def _scale(params: Dict[str, Any]) -> float:
    return float(params.get("scale", 1.0))


# zero: p(x) = 0

def _zero_factory(params, n):
    return lambda x: np.zeros(n)


def _zero_bounds(params, n):
    return np.zeros((n, n)), np.zeros((n, n))


register("zero", _zero_factory, _zero_bounds, "identically zero (linear system)")


# pendulum_sin: p(x) = scale · [0; −sin(x[arg])]

def _pendulum_arg(params, n) -> int:
    if n != 2:
        raise InputError(f"pendulum_sin needs n = 2, got n = {n}")
    arg = int(params.get("arg", 0))
    if arg not in (0, 1):
        raise InputError(f"pendulum_sin 'arg' must be 0 or 1, got {arg}")
    return arg


def _pendulum_factory(params, n):
    arg, s = _pendulum_arg(params, n), _scale(params)
    return lambda x: np.array([0.0, -s * np.sin(x[arg])])


def _pendulum_bounds(params, n):
    arg, s = _pendulum_arg(params, n), abs(_scale(params))
    D_hi = np.zeros((2, 2))
    D_hi[1, arg] = s
    return -D_hi, D_hi


register("pendulum_sin", _pendulum_factory, _pendulum_bounds, "scale·[0; −sin(x_arg)]")


# affine_saturation: p(x) = scale · limit · tanh((M x + b) / limit)

def _saturation_factory(params, n):
    M, s = _gain(params, n), _scale(params)
    b = np.array(params.get("offset", np.zeros(n)), dtype=float).reshape(n)
    limit = float(params.get("limit", 1.0))
    if limit <= 0:
        raise InputError("affine_saturation 'limit' must be positive")
    return lambda x: s * limit * np.tanh((M @ x + b) / limit)


def _saturation_bounds(params, n):
    # Jacobian = scale · diag(sech²) · M with sech² ∈ (0, 1]
    sM = _scale(params) * _gain(params, n)
    return -neg_part(sM), pos_part(sM)


register("affine_saturation", _saturation_factory, _saturation_bounds,
         "smooth saturation of an affine map")


# sine_coupling: p(x) = scale · M sin(x)

def _sine_factory(params, n):
    sM = _scale(params) * _gain(params, n)
    return lambda x: sM @ np.sin(x)


def _sine_bounds(params, n):
    sM = np.abs(_scale(params) * _gain(params, n))
    return -sM, sM


register("sine_coupling", _sine_factory, _sine_bounds,
         "scale·M·sin(x), Jacobian spans [−|M|, |M|]")


@dataclass(frozen=True)
class NonlinearitySpec:
    """A registry name plus parameters, or an arbitrary callable when built in code"""

    name: str
    params: Dict[str, Any] = field(default_factory=dict)
    func: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.func is None and self.name not in REGISTRY:
            raise InputError(f"unknown nonlinearity '{self.name}'; known: {sorted(REGISTRY)}")

    @classmethod
    def custom(cls, func: Callable[[np.ndarray], np.ndarray], name: str = "custom") -> "NonlinearitySpec":
        return cls(name=name, params={}, func=func)

    @property
    def is_custom(self) -> bool:
        return self.func is not None

    def build(self, n: int) -> Callable[[np.ndarray], np.ndarray]:
        if self.func is not None:
            return self.func
        return REGISTRY[self.name].factory(self.params, n)

    def declared_bounds(self, n: int) -> Optional[Bounds]:
        if self.func is not None:
            return None
        return REGISTRY[self.name].bounds(self.params, n)

    def scaled(self, factor: float) -> "NonlinearitySpec":
        if self.func is not None:
            f = self.func
            return NonlinearitySpec.custom(lambda x: factor * f(x), name=self.name)
        params = dict(self.params)
        params["scale"] = factor * _scale(params)
        return NonlinearitySpec(self.name, params)

    def to_dict(self) -> Dict[str, Any]:
        if self.func is not None:
            raise InputError(f"nonlinearity '{self.name}' is a Python callable and cannot be saved")
        params = {k: (np.asarray(v).tolist() if isinstance(v, (list, tuple, np.ndarray)) else v)
                  for k, v in self.params.items()}
        return {"name": self.name, "params": params}
