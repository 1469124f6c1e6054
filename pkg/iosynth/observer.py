"""
Interval observers and runtime monitors

Two observer structures are supported:

- direct: bounds x̲ ≤ x ≤ x̄ propagated with gains (L, K, F, G)
- transformed: bounds on z = Sx propagated with (Λ, S, H, Φ, Γ), then mapped
  back to x with U = S⁻¹

`simulate` runs an observer against the plant with seeded uniform disturbances
and records every quantity the synthesis certificate makes a promise about:
the error ε stays nonnegative, the incremental quadratic constraint
(Ψε − Δp)ᵀΔp ≥ 0 holds and V(ε) = εᵀPε decreases as
V(ε[k+1]) ≤ λV(ε[k]) + γ‖Δw[k]‖².
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from dataclasses_json import dataclass_json
from tqdm import tqdm

from .config import MonitorSettings
from .errors import InputError, ShapeError
from .matops import as_mat, as_vec, block2x2, mixing_matrix, neg_part, pos_part
from .model import SystemModel
from .transform import inverse_of

logger = logging.getLogger(__name__)


def _warn_negative(name: str, M: np.ndarray):
    if np.any(M < -1e-9):
        logger.warning(f"{name} has negative entries (min {M.min():.3g}); positivity is not guaranteed")


@dataclass
class DirectObserverGains:
    L: np.ndarray
    K: np.ndarray
    F: np.ndarray
    G: np.ndarray

    mode: ClassVar[str] = "direct"

    def __post_init__(self):
        for key in ("L", "K", "F", "G"):
            setattr(self, key, as_mat(getattr(self, key), key))
        n, m = self.L.shape
        if self.K.shape != (n, m):
            raise ShapeError(f"K must be {n}x{m}, got {self.K.shape}")
        for key in ("F", "G"):
            if getattr(self, key).shape != (n, n):
                raise ShapeError(f"{key} must be {n}x{n}, got {getattr(self, key).shape}")
        _warn_negative("F", self.F)
        _warn_negative("G", self.G)

    @property
    def n(self) -> int:
        return self.L.shape[0]

    @property
    def m(self) -> int:
        return self.L.shape[1]

    def check_dims(self, model: SystemModel):
        if (self.n, self.m) != (model.n, model.m):
            raise ShapeError(f"gains are for n={self.n}, m={self.m} but model '{model.name}' "
                             f"has n={model.n}, m={model.m}")

    def block_matrix(self, model: SystemModel) -> np.ndarray:
        """Error-dynamics matrix [[A−LC+F, F], [F, A−LC+F]]"""
        M = model.A - self.L @ model.C + self.F
        return block2x2(M, self.F, self.F, M)

    def to_dict(self) -> Dict[str, object]:
        return {"mode": self.mode, "L": self.L.tolist(), "K": self.K.tolist(),
                "F": self.F.tolist(), "G": self.G.tolist()}


@dataclass
class TransformedObserverGains:
    Lambda: np.ndarray
    S: np.ndarray
    H: np.ndarray
    Phi: np.ndarray
    Gamma: np.ndarray
    U: Optional[np.ndarray] = None

    mode: ClassVar[str] = "transformed"

    def __post_init__(self):
        for key in ("Lambda", "S", "H", "Phi", "Gamma"):
            setattr(self, key, as_mat(getattr(self, key), key))
        n, m = self.Lambda.shape
        if self.H.shape != (n, m):
            raise ShapeError(f"H must be {n}x{m}, got {self.H.shape}")
        for key in ("S", "Phi", "Gamma"):
            if getattr(self, key).shape != (n, n):
                raise ShapeError(f"{key} must be {n}x{n}, got {getattr(self, key).shape}")
        if self.U is None:
            self.U = inverse_of(self.S)
        else:
            self.U = as_mat(self.U, "U")
            if not np.allclose(self.S @ self.U, np.eye(n), atol=1e-10, rtol=0.0):
                raise ShapeError("U must be the inverse of S")
        _warn_negative("Phi", self.Phi)
        _warn_negative("Gamma", self.Gamma)

    @property
    def n(self) -> int:
        return self.Lambda.shape[0]

    @property
    def m(self) -> int:
        return self.Lambda.shape[1]

    check_dims = DirectObserverGains.check_dims

    def aleph(self, model: SystemModel) -> np.ndarray:
        return self.S @ (model.A - self.Lambda @ model.C) @ self.U

    def block_matrix(self, model: SystemModel) -> np.ndarray:
        M = self.aleph(model) + self.Phi
        return block2x2(M, self.Phi, self.Phi, M)

    @property
    def Xi(self) -> np.ndarray:
        return mixing_matrix(self.S)

    def to_dict(self) -> Dict[str, object]:
        return {"mode": self.mode, "Lambda": self.Lambda.tolist(), "S": self.S.tolist(),
                "U": self.U.tolist(), "H": self.H.tolist(), "Phi": self.Phi.tolist(),
                "Gamma": self.Gamma.tolist()}


ObserverGains = Union[DirectObserverGains, TransformedObserverGains]


def gains_from_dict(data: Dict[str, object]) -> ObserverGains:
    try:
        if data.get("mode", "direct") == "direct":
            return DirectObserverGains(L=data["L"], K=data["K"], F=data["F"], G=data["G"])
        return TransformedObserverGains(Lambda=data["Lambda"], S=data["S"], H=data["H"],
                                        Phi=data["Phi"], Gamma=data["Gamma"])
    except KeyError as e:
        raise InputError(f"gains are missing field {e}") from e
    except (TypeError, AttributeError) as e:
        raise InputError(f"invalid gains data: {e}") from e


# Update laws

def decomposition(gains: DirectObserverGains, model: SystemModel, x1, x2, y) -> np.ndarray:
    """π(x₁, x₂, y) = p((I − KC)x₁ + Ky) + G(x₁ − x₂)"""
    return model.p(x1 - gains.K @ (model.C @ x1) + gains.K @ y) + gains.G @ (x1 - x2)


def transformed_decomposition(gains: TransformedObserverGains, model: SystemModel, z1, z2, y) -> np.ndarray:
    """π̃(z₁, z₂, y) = S·p((U − HCU)z₁ + Hy) + Γ(z₁ − z₂)"""
    Uz = gains.U @ z1
    return gains.S @ model.p(Uz - gains.H @ (model.C @ Uz) + gains.H @ y) + gains.Gamma @ (z1 - z2)


def step_direct(gains: DirectObserverGains, model: SystemModel, upper, lower, y) -> Tuple[np.ndarray, np.ndarray]:
    M = model.A - gains.L @ model.C
    Ly = gains.L @ y
    coupling = gains.F @ (upper - lower)
    upper_next = M @ upper + decomposition(gains, model, upper, lower, y) + Ly + coupling + model.w_hi
    lower_next = M @ lower + decomposition(gains, model, lower, upper, y) + Ly - coupling + model.w_lo
    return upper_next, lower_next


def step_transformed(gains: TransformedObserverGains, model: SystemModel, upper, lower, y) -> Tuple[np.ndarray, np.ndarray]:
    aleph = gains.aleph(model)
    Sp, Sn = pos_part(gains.S), neg_part(gains.S)
    SLy = gains.S @ (gains.Lambda @ y)
    coupling = gains.Phi @ (upper - lower)
    upper_next = (aleph @ upper + transformed_decomposition(gains, model, upper, lower, y) + SLy + coupling
                  + Sp @ model.w_hi - Sn @ model.w_lo)
    lower_next = (aleph @ lower + transformed_decomposition(gains, model, lower, upper, y) + SLy - coupling
                  + Sp @ model.w_lo - Sn @ model.w_hi)
    return upper_next, lower_next


def back_transform(U, z_upper, z_lower, tol: float = 1e-9) -> Tuple[np.ndarray, np.ndarray]:
    """Bounds on x = Uz from bounds on z"""
    z_upper, z_lower = np.asarray(z_upper, dtype=float), np.asarray(z_lower, dtype=float)
    if np.any(z_lower > z_upper + tol):
        logger.warning(f"back_transform got z_lower > z_upper (by {np.max(z_lower - z_upper):.3g})")
    Up, Un = pos_part(U), neg_part(U)
    return Up @ z_upper - Un @ z_lower, Up @ z_lower - Un @ z_upper


def init_transformed(S, x_upper, x_lower) -> Tuple[np.ndarray, np.ndarray]:
    Sp, Sn = pos_part(S), neg_part(S)
    x_upper, x_lower = np.asarray(x_upper, dtype=float), np.asarray(x_lower, dtype=float)
    return Sp @ x_upper - Sn @ x_lower, Sp @ x_lower - Sn @ x_upper


# Traces

@dataclass_json
@dataclass
class TraceSummary:
    mode: str
    seed: int
    horizon: int
    positivity_violations: int
    min_error: float
    qc_violations: int
    min_qc: float
    iss_violations: int
    min_iss_margin: float
    eps_from_xi_violations: int = 0
    max_width: float = 0.0
    final_width: float = 0.0
    ultimate_bound: float = 0.0
    empirical_decay: float = 0.0
    max_defect: Optional[float] = None
    defect_bound: Optional[float] = None

    @property
    def ok(self) -> bool:
        return (self.positivity_violations == 0 and self.qc_violations == 0
                and self.iss_violations == 0 and self.eps_from_xi_violations == 0)


@dataclass
class ObserverTrace:
    """Per-step records; every array has horizon + 1 rows (w, Δw and the ISS margin end with NaN)"""

    mode: str
    seed: int
    x: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    eps: np.ndarray
    w: np.ndarray
    delta_w: np.ndarray
    delta_p: np.ndarray
    V: np.ndarray
    qc: np.ndarray
    iss_margin: np.ndarray
    z: Optional[np.ndarray] = None
    z_upper: Optional[np.ndarray] = None
    z_lower: Optional[np.ndarray] = None
    xi: Optional[np.ndarray] = None
    eps_from_xi_error: Optional[np.ndarray] = None
    summary: Optional[TraceSummary] = None

    @property
    def horizon(self) -> int:
        return self.x.shape[0] - 1

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contained(self, tol: float = 1e-9) -> bool:
        return bool(np.all(self.eps >= -tol))


def summarize(trace: ObserverTrace, monitors: MonitorSettings = MonitorSettings()) -> TraceSummary:
    widths = np.max(trace.width, axis=1)
    k = max(1, int(round(monitors.ultimate_window * (trace.horizon + 1))))
    first, last = float(np.mean(widths[:k])), float(np.mean(widths[-k:]))
    qc = trace.qc[~np.isnan(trace.qc)]
    iss = trace.iss_margin[~np.isnan(trace.iss_margin)]
    summary = TraceSummary(
        mode=trace.mode,
        seed=trace.seed,
        horizon=trace.horizon,
        positivity_violations=int(np.sum(trace.eps < -monitors.positivity_tol)),
        min_error=float(np.min(trace.eps)),
        qc_violations=int(np.sum(qc < -monitors.quadratic_tol)),
        min_qc=float(np.min(qc)) if qc.size else float("nan"),
        iss_violations=int(np.sum(iss < -monitors.quadratic_tol)),
        min_iss_margin=float(np.min(iss)) if iss.size else float("nan"),
        max_width=float(np.max(widths)),
        final_width=float(widths[-1]),
        ultimate_bound=last,
        empirical_decay=last / first if first > 0 else 0.0,
    )
    if trace.eps_from_xi_error is not None:
        summary.eps_from_xi_violations = int(np.sum(trace.eps_from_xi_error > monitors.positivity_tol))
    return summary


PlantStep = Callable[[int, np.ndarray], Tuple[np.ndarray, np.ndarray]]


def run_observer(model: SystemModel, gains: ObserverGains, x0, upper0, lower0, horizon: int,
                 plant_step: PlantStep, seed: int = 0, cert=None,
                 monitors: MonitorSettings = MonitorSettings()) -> ObserverTrace:
    """
    Drive plant and observer together for `horizon` steps.

    `plant_step(k, x)` returns (x[k+1], w[k]); the disturbance enters the
    recorded Δw and so the ISS monitor. `cert` supplies P, λ, γ and Ψ for the
    quadratic monitors; without it those monitors are NaN.
    """
    gains.check_dims(model)
    n = model.n
    x0, upper0, lower0 = as_vec(x0, "x0"), as_vec(upper0, "upper0"), as_vec(lower0, "lower0")
    for name, v in (("x0", x0), ("upper0", upper0), ("lower0", lower0)):
        if v.shape != (n,):
            raise ShapeError(f"{name} must have length {n}, got {v.shape[0]}")
    if np.any(lower0 > x0 + monitors.positivity_tol) or np.any(x0 > upper0 + monitors.positivity_tol):
        raise InputError("initial ordering violated: need lower0 <= x0 <= upper0")
    if horizon < 1:
        raise InputError(f"horizon must be positive, got {horizon}")

    transformed = gains.mode == "transformed"
    rows = horizon + 1
    x = np.empty((rows, n))
    upper = np.empty((rows, n))
    lower = np.empty((rows, n))
    w = np.full((rows, n), np.nan)
    x[0] = x0
    if transformed:
        zu = np.empty((rows, n))
        zl = np.empty((rows, n))
        zu[0], zl[0] = init_transformed(gains.S, upper0, lower0)
        upper[0], lower[0] = back_transform(gains.U, zu[0], zl[0], monitors.positivity_tol)
    else:
        upper[0], lower[0] = upper0, lower0

    for k in range(horizon):
        y = model.output(x[k])
        x[k + 1], w[k] = plant_step(k, x[k])
        if transformed:
            zu[k + 1], zl[k + 1] = step_transformed(gains, model, zu[k], zl[k], y)
            upper[k + 1], lower[k + 1] = back_transform(gains.U, zu[k + 1], zl[k + 1], monitors.positivity_tol)
        else:
            upper[k + 1], lower[k + 1] = step_direct(gains, model, upper[k], lower[k], y)

    eps = np.hstack([upper - x, x - lower])
    delta_w_x = np.hstack([model.w_hi - w, w - model.w_lo])
    px = np.array([model.p(xk) for xk in x])
    y_all = x @ model.C.T

    if transformed:
        S = gains.S
        z = x @ S.T
        xi = np.hstack([zu - z, z - zl])
        Spx = px @ S.T
        hi = np.array([transformed_decomposition(gains, model, zu[k], zl[k], y_all[k]) for k in range(rows)])
        lo = np.array([transformed_decomposition(gains, model, zl[k], zu[k], y_all[k]) for k in range(rows)])
        delta_p = np.hstack([hi - Spx, Spx - lo])
        delta_w = delta_w_x @ gains.Xi.T
        state_err = xi
        eps_from_xi_error = np.max(np.abs(eps - xi @ mixing_matrix(gains.U).T), axis=1)
    else:
        hi = np.array([decomposition(gains, model, upper[k], lower[k], y_all[k]) for k in range(rows)])
        lo = np.array([decomposition(gains, model, lower[k], upper[k], y_all[k]) for k in range(rows)])
        delta_p = np.hstack([hi - px, px - lo])
        delta_w = delta_w_x
        state_err = eps
        z = xi = eps_from_xi_error = None
        zu = zl = None

    V = np.full(rows, np.nan)
    qc = np.full(rows, np.nan)
    iss = np.full(rows, np.nan)
    if cert is not None:
        P, Psi = cert.P, cert.Psi
        V = np.einsum("ki,ij,kj->k", state_err, P, state_err)
        qc = np.einsum("ki,ki->k", state_err @ Psi.T - delta_p, delta_p)
        iss[:-1] = cert.lam * V[:-1] + cert.gamma * np.sum(delta_w[:-1] ** 2, axis=1) - V[1:]

    trace = ObserverTrace(
        mode=gains.mode, seed=seed, x=x, upper=upper, lower=lower, eps=eps, w=w,
        delta_w=delta_w, delta_p=delta_p, V=V, qc=qc, iss_margin=iss,
        z=z, z_upper=zu, z_lower=zl, xi=xi, eps_from_xi_error=eps_from_xi_error,
    )
    trace.summary = summarize(trace, monitors)
    if trace.summary.positivity_violations:
        logger.warning(f"seed {seed}: {trace.summary.positivity_violations} containment violations "
                       f"(min error {trace.summary.min_error:.3g})")
    return trace


def simulate(model: SystemModel, gains: ObserverGains, x0, upper0, lower0, horizon: int = 1000,
             seed: int = 0, cert=None, monitors: MonitorSettings = MonitorSettings()) -> ObserverTrace:
    """Plant x⁺ = Ax + p(x) + w with w uniform on [w_lo, w_hi], seeded"""
    rng = np.random.default_rng(seed)

    def plant_step(k: int, x: np.ndarray):
        w = rng.uniform(model.w_lo, model.w_hi)
        return model.step(x, w), w

    return run_observer(model, gains, x0, upper0, lower0, horizon, plant_step, seed, cert, monitors)


def simulate_many(model: SystemModel, gains: ObserverGains, initial: Callable[[int], Tuple],
                  seeds: Sequence[int], horizon: int = 1000, cert=None,
                  monitors: MonitorSettings = MonitorSettings(), max_workers: int = 4,
                  progress: bool = True) -> List[ObserverTrace]:
    """
    One `simulate` per seed, run concurrently; traces come back in seed order.

    `initial(seed)` returns (x0, upper0, lower0) for that seed.
    """
    traces: Dict[int, ObserverTrace] = {}
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {}
        for seed in seeds:
            x0, upper0, lower0 = initial(seed)
            future = executor.submit(simulate, model, gains, x0, upper0, lower0, horizon, seed, cert, monitors)
            futures[future] = seed
        for future in tqdm(as_completed(futures), total=len(futures), desc="seeds", disable=not progress):
            seed = futures[future]
            try:
                traces[seed] = future.result()
            except Exception as e:
                logger.error(f"Simulation for seed {seed} failed: {e}")
                raise
    return [traces[s] for s in seeds]
