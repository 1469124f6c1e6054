"""
Interval observer synthesis

For fixed (τ, λ) the observer design problem is a semidefinite feasibility
program in (J, Y, K, W, Υ̲, Ῡ, G, P, γ):

    𝒬 ≥ 0                                   entrywise
    −Υ̲ ≤ I − KC ≤ Ῡ
    D̲Ῡ − D̄Υ̲ + G ≥ 0
    [ −λP     𝒬ᵀ       (τ/2)Ψᵀ   0   ]
    [ 𝒬       P−𝒥−𝒥ᵀ   𝒥         𝒥   ]  ⪯ 0
    [ (τ/2)Ψ  𝒥ᵀ       −τI       0   ]
    [ 0       𝒥ᵀ       0         −γI ]

with 𝒬 = [[JA−YC+W, W], [W, JA−YC+W]], Ψ = [[D̄Ῡ−D̲Υ̲+G, G], [G, ·]] and
𝒥 = blkdiag(J, J). Gains come back as L = J⁻¹Y, F = J⁻¹W.

The transformed variant replaces A − LC by ℵ = S(A − ΛC)U (Λ fixed, so Y
disappears), I − KC by U − HCU and (D̄, D̲) by (Θ̄, Θ̲) = (S⁺D̄ − S⁻D̲, S⁺D̲ − S⁻D̄).
Both variants go through the same assembly path.

Every certificate is re-verified from raw matrices before it is accepted.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg

from .config import SynthesisSettings
from .errors import BracketError, InputError, ShapeError, SolverFailure
from .matops import (as_mat, is_mmatrix_structure, is_nonneg, is_schur, max_sym_eig,
                     min_sym_eig, neg_part, pos_part)
from .model import SystemModel
from .observer import DirectObserverGains, ObserverGains, TransformedObserverGains
from .program import AffineMatrix, FeasibilityProgram, VariableLayout
from .solver import CvxpyBackend, FeasibilityBackend, solve_outcome
from .transform import check_assumption3, transform_pair

logger = logging.getLogger(__name__)

# Post-solve check tolerances
ENTRY_TOL = 1e-6
STRUCT_TOL = 1e-8
LMI_TOL = 1e-7
BISECTION_WIDTH = 5e-3


@dataclass
class SynthesisVariables:
    """Solved decision variables; K holds H and G holds Γ in the transformed form"""

    J: np.ndarray
    K: np.ndarray
    W: np.ndarray
    Ups_lo: np.ndarray
    Ups_hi: np.ndarray
    G: np.ndarray
    P: Optional[np.ndarray] = None
    gamma: Optional[float] = None
    Y: Optional[np.ndarray] = None
    mode: str = "direct"

    @property
    def H(self) -> np.ndarray:
        return self.K

    @property
    def Gamma(self) -> np.ndarray:
        return self.G

    def to_dict(self) -> Dict[str, object]:
        out = {k: getattr(self, k).tolist() for k in ("J", "K", "W", "Ups_lo", "Ups_hi", "G")}
        if self.Y is not None:
            out["Y"] = self.Y.tolist()
        out["P"] = None if self.P is None else self.P.tolist()
        out["gamma"] = self.gamma
        return out


@dataclass
class Certificate:
    variables: SynthesisVariables
    tau: float
    lam: float
    Psi: np.ndarray
    residuals: Dict[str, float] = field(default_factory=dict)
    post_checks: Dict[str, bool] = field(default_factory=dict)
    label: str = ""

    @property
    def mode(self) -> str:
        return self.variables.mode

    @property
    def P(self) -> Optional[np.ndarray]:
        return self.variables.P

    @property
    def gamma(self) -> Optional[float]:
        return self.variables.gamma

    @property
    def accepted(self) -> bool:
        return bool(self.post_checks) and all(self.post_checks.values())

    def failed_checks(self) -> List[str]:
        return [name for name, ok in self.post_checks.items() if not ok]


@dataclass
class SynthesisResult:
    gains: ObserverGains
    certificate: Certificate


@dataclass
class GridStats:
    points_total: int = 0
    points_solved: int = 0
    feasible: int = 0
    infeasible: int = 0
    failures: int = 0
    rejected: int = 0
    failed_points: List[Tuple[float, float]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return {
            "points_total": self.points_total,
            "points_solved": self.points_solved,
            "feasible": self.feasible,
            "infeasible": self.infeasible,
            "numerical_failures": self.failures,
            "rejected_by_verification": self.rejected,
            "failed_points": [list(p) for p in self.failed_points],
        }


@dataclass
class GridOutcome:
    found: Optional[SynthesisResult]
    stats: GridStats

    @property
    def numerical_failure(self) -> bool:
        """Nothing usable came back and no grid point was declared infeasible"""
        return self.found is None and self.stats.failures > 0 and self.stats.infeasible == 0


# Assembly

@dataclass(frozen=True)
class _Frame:
    """Constant data of one synthesis problem, direct or transformed"""

    mode: str
    n: int
    m: int
    base: np.ndarray                 # A, A − L₀C, or ℵ
    C_free: Optional[np.ndarray]     # C when L is a decision variable (through Y)
    sandwich: np.ndarray             # I or U
    sandwich_C: np.ndarray           # C or CU
    D_hi: np.ndarray                 # D̄ or Θ̄
    D_lo: np.ndarray                 # D̲ or Θ̲
    L0: Optional[np.ndarray] = None
    Lambda: Optional[np.ndarray] = None
    S: Optional[np.ndarray] = None


def _direct_frame(model: SystemModel, fixed_L=None) -> _Frame:
    n, m = model.n, model.m
    L0 = None
    base, C_free = model.A, model.C
    if fixed_L is not None:
        L0 = as_mat(fixed_L, "fixed_L")
        if L0.shape != (n, m):
            raise ShapeError(f"fixed_L must be {n}x{m}, got {L0.shape}")
        base, C_free = model.A - L0 @ model.C, None
    return _Frame("direct", n, m, base, C_free, np.eye(n), model.C, model.D_hi, model.D_lo, L0=L0)


def theta_bounds(S, D_hi, D_lo) -> Tuple[np.ndarray, np.ndarray]:
    """(Θ̄, Θ̲) = (S⁺D̄ − S⁻D̲, S⁺D̲ − S⁻D̄), enclosing S·D for D̲ ≤ D ≤ D̄"""
    Sp, Sn = pos_part(S), neg_part(S)
    return Sp @ D_hi - Sn @ D_lo, Sp @ D_lo - Sn @ D_hi


def _transformed_frame(model: SystemModel, Lambda, S) -> _Frame:
    pair = transform_pair(model.A, model.C, Lambda, S)
    Theta_hi, Theta_lo = theta_bounds(pair.S, model.D_hi, model.D_lo)
    return _Frame("transformed", model.n, model.m, pair.aleph, None, pair.U, model.C @ pair.U,
                  Theta_hi, Theta_lo, Lambda=pair.Lambda, S=pair.S)


def _coupled(diag, off):
    return [[diag, off], [off, diag]]


def _lmi_grid(Q, Psi, P, Jb, tau: float, lam: float, gamma_I, r: int):
    Z, I = np.zeros((r, r)), np.eye(r)
    return [[-lam * P, Q.T, (tau / 2.0) * Psi.T, Z],
            [Q, P - Jb - Jb.T, Jb, Jb],
            [(tau / 2.0) * Psi, Jb.T, -tau * I, Z],
            [Z, Jb.T, Z, -gamma_I]]


def _check_scalars(tau: float, lam: float):
    if not tau > 0:
        raise InputError(f"tau must be positive, got {tau}")
    if not 0.0 <= lam < 1.0:
        raise InputError(f"lambda must lie in [0, 1), got {lam}")


def _assemble(frame: _Frame, tau: float, lam: float, eps_pos: float, eps_pd: float,
              allow_K: bool = True) -> FeasibilityProgram:
    _check_scalars(tau, lam)
    n, m, r = frame.n, frame.m, 2 * frame.n

    layout = VariableLayout()
    layout.add("J", (n, n))
    if frame.C_free is not None:
        layout.add("Y", (n, m))
    if allow_K:
        layout.add("K", (n, m))
    for name in ("W", "Ups_lo", "Ups_hi", "G"):
        layout.add(name, (n, n))
    layout.add("P", (r, r), symmetric=True)
    layout.add("gamma", (1, 1))
    size = layout.size

    J, W, G, P, gamma = (layout.expr(k) for k in ("J", "W", "G", "P", "gamma"))
    Ups_lo, Ups_hi = layout.expr("Ups_lo"), layout.expr("Ups_hi")
    K = layout.expr("K") if allow_K else AffineMatrix.constant(np.zeros((n, m)), size)

    core = J @ frame.base
    if frame.C_free is not None:
        core = core - layout.expr("Y") @ frame.C_free
    Q = AffineMatrix.block(_coupled(core + W, W), size)
    Psi = AffineMatrix.block(_coupled(frame.D_hi @ Ups_hi - frame.D_lo @ Ups_lo + G, G), size)
    Jb = AffineMatrix.blkdiag([J, J])
    lmi = AffineMatrix.block(_lmi_grid(Q, Psi, P, Jb, tau, lam, gamma.times_matrix(np.eye(r)), r), size)
    sandwich = frame.sandwich - K @ frame.sandwich_C

    program = FeasibilityProgram(layout, tau=tau, lam=lam,
                                 label=f"{frame.mode}(tau={tau:g}, lambda={lam:g})")
    program.add_linear("Q_nonneg", Q)
    program.add_linear("Upsilon_lower", sandwich + Ups_lo)
    program.add_linear("Upsilon_upper", Ups_hi - sandwich)
    program.add_linear("G_positivity", frame.D_lo @ Ups_hi - frame.D_hi @ Ups_lo + G)
    program.add_linear("J_diagonal", J.diagonal() - eps_pos)
    program.add_linear("J_offdiagonal", -J.masked(1.0 - np.eye(n)))
    for name, expr in (("W_nonneg", W), ("Ups_lo_nonneg", Ups_lo), ("Ups_hi_nonneg", Ups_hi), ("G_nonneg", G)):
        program.add_linear(name, expr)
    program.add_linear("gamma_positive", gamma - eps_pos)
    program.add_psd("P_pd", P - eps_pd * np.eye(r))
    program.add_psd("lmi", lmi, sense="<<")

    program.exprs.update({"Q": Q, "Psi": Psi, "LMI": lmi, "Jb": Jb})
    if frame.L0 is not None:
        program.exprs["Y"] = J @ frame.L0
    if not allow_K:
        program.exprs["K"] = K
    return program


def assemble_direct(model: SystemModel, tau: float, lam: float, eps_pos: float = 1e-6,
                    eps_pd: float = 1e-6, allow_K: bool = True, fixed_L=None) -> FeasibilityProgram:
    """Program for the direct observer; `allow_K=False` pins K = 0, `fixed_L` pins L"""
    return _assemble(_direct_frame(model, fixed_L), tau, lam, eps_pos, eps_pd, allow_K)


def assemble_transformed(model: SystemModel, Lambda, S, tau: float, lam: float, eps_pos: float = 1e-6,
                         eps_pd: float = 1e-6, allow_K: bool = True) -> FeasibilityProgram:
    """Program for the observer in coordinates z = Sx with Luenberger gain Λ fixed"""
    _check_scalars(tau, lam)
    return _assemble(_transformed_frame(model, Lambda, S), tau, lam, eps_pos, eps_pd, allow_K)


# Recovery

def _variables(program: FeasibilityProgram, x: np.ndarray, mode: str) -> SynthesisVariables:
    values = program.layout.unpack(x)
    n = values["J"].shape[0]
    K = values["K"] if "K" in values else program.evaluate("K", x)
    Y = values.get("Y")
    if Y is None:
        Y = program.evaluate("Y", x)
    P = values["P"]
    return SynthesisVariables(
        J=values["J"], K=K, W=values["W"], Ups_lo=values["Ups_lo"], Ups_hi=values["Ups_hi"],
        G=values["G"], P=0.5 * (P + P.T), gamma=float(values["gamma"][0, 0]), Y=Y, mode=mode,
    )


def _gains(frame: _Frame, v: SynthesisVariables) -> ObserverGains:
    F = scipy.linalg.solve(v.J, v.W)
    if frame.mode == "transformed":
        return TransformedObserverGains(Lambda=frame.Lambda, S=frame.S, H=v.K, Phi=F, Gamma=v.G)
    L = frame.L0 if frame.L0 is not None else scipy.linalg.solve(v.J, v.Y)
    return DirectObserverGains(L=L, K=v.K, F=F, G=v.G)


# Verification

def _frame_for(model: SystemModel, gains: ObserverGains) -> _Frame:
    if gains.mode == "transformed":
        Theta_hi, Theta_lo = theta_bounds(gains.S, model.D_hi, model.D_lo)
        return _Frame("transformed", model.n, model.m, gains.aleph(model), None, gains.U,
                      model.C @ gains.U, Theta_hi, Theta_lo, Lambda=gains.Lambda, S=gains.S)
    return _direct_frame(model)


def psi_matrix(D_hi, D_lo, Ups_hi, Ups_lo, G) -> np.ndarray:
    return np.block(_coupled(D_hi @ Ups_hi - D_lo @ Ups_lo + G, G))


def verify_certificate(model: SystemModel, gains: ObserverGains, cert: Certificate) -> Dict[str, bool]:
    """
    Recompute every certified property from the raw matrices.

    W and Y are rebuilt from the gains (W = JF, Y = JL), so the checks describe
    the observer that will actually run, not the solver's internal point.
    """
    gains.check_dims(model)
    frame = _frame_for(model, gains)
    v = cert.variables
    n, r = model.n, 2 * model.n
    transformed = gains.mode == "transformed"
    J = as_mat(v.J, "J")
    F, Gc, K = (gains.Phi, gains.Gamma, gains.H) if transformed else (gains.F, gains.G, gains.K)

    W = J @ F
    core = J @ frame.base if transformed else J @ model.A - (J @ gains.L) @ model.C
    Q = np.block(_coupled(core + W, W))
    Psi = psi_matrix(frame.D_hi, frame.D_lo, v.Ups_hi, v.Ups_lo, Gc)
    sandwich = frame.sandwich - K @ frame.sandwich_C
    A_blk = gains.block_matrix(model)
    Jb = scipy.linalg.block_diag(J, J)

    checks: Dict[str, bool] = {
        "J_mmatrix": is_mmatrix_structure(J, tol=0.0),
        "W_nonneg": is_nonneg(W, ENTRY_TOL),
        "F_nonneg": is_nonneg(F, ENTRY_TOL),
        "G_nonneg": is_nonneg(Gc, ENTRY_TOL),
        "Upsilon_nonneg": is_nonneg(v.Ups_lo, ENTRY_TOL) and is_nonneg(v.Ups_hi, ENTRY_TOL),
        "Q_nonneg": is_nonneg(Q, ENTRY_TOL),
        "Upsilon_sandwich": is_nonneg(sandwich + v.Ups_lo, ENTRY_TOL) and is_nonneg(v.Ups_hi - sandwich, ENTRY_TOL),
        "G_positivity": is_nonneg(frame.D_lo @ v.Ups_hi - frame.D_hi @ v.Ups_lo + Gc, ENTRY_TOL),
        "A_schur": is_schur(A_blk),
        "tau_positive": cert.tau > 0,
        "lambda_range": 0.0 <= cert.lam < 1.0,
    }
    try:
        J_inv = scipy.linalg.inv(J)
        A_from_Q = scipy.linalg.block_diag(J_inv, J_inv) @ Q
        checks["J_inverse_nonneg"] = is_nonneg(J_inv, STRUCT_TOL)
        checks["A_nonneg"] = is_nonneg(A_from_Q, STRUCT_TOL)
        checks["A_matches_block_form"] = bool(
            np.max(np.abs(A_from_Q - A_blk)) <= STRUCT_TOL * (1.0 + np.max(np.abs(A_blk))))
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError):
        checks["J_inverse_nonneg"] = checks["A_nonneg"] = checks["A_matches_block_form"] = False

    if v.P is not None and v.gamma is not None:
        lmi = np.block(_lmi_grid(Q, Psi, v.P, Jb, cert.tau, cert.lam, v.gamma * np.eye(r), r))
        checks["P_pd"] = min_sym_eig(v.P) > 0.0
        checks["gamma_positive"] = v.gamma > 0.0
        checks["lmi_nsd"] = max_sym_eig(lmi) <= LMI_TOL
    if transformed:
        checks["assumption3"] = check_assumption3(model.A, model.C, gains.Lambda, gains.S).ok

    failed = [k for k, ok in checks.items() if not ok]
    if failed:
        logger.debug(f"Certificate {cert.label or ''} failed checks: {failed}")
    return checks


def certificate_from_gains(model: SystemModel, gains: ObserverGains, tau: float = 1.0, lam: float = 0.5,
                           P=None, gamma: Optional[float] = None) -> Certificate:
    """
    Certificate for externally supplied gains: J = I, W = F (or Φ), tightest Υ.

    Without P and γ the LMI checks are left out of post_checks.
    """
    gains.check_dims(model)
    frame = _frame_for(model, gains)
    transformed = gains.mode == "transformed"
    F, Gc, K = (gains.Phi, gains.Gamma, gains.H) if transformed else (gains.F, gains.G, gains.K)
    sandwich = frame.sandwich - K @ frame.sandwich_C
    v = SynthesisVariables(
        J=np.eye(model.n), K=K, W=F.copy(), Ups_lo=neg_part(sandwich), Ups_hi=pos_part(sandwich), G=Gc,
        P=None if P is None else as_mat(P, "P"), gamma=gamma,
        Y=None if transformed else gains.L.copy(), mode=gains.mode,
    )
    cert = Certificate(variables=v, tau=tau, lam=lam,
                       Psi=psi_matrix(frame.D_hi, frame.D_lo, v.Ups_hi, v.Ups_lo, Gc),
                       label="from gains")
    cert.post_checks = verify_certificate(model, gains, cert)
    return cert


def certificate_from_report(model: SystemModel, gains: ObserverGains, data: Dict[str, object]) -> Certificate:
    """Rebuild a certificate saved by the synthesize command (tau, lambda, variables)"""
    try:
        raw = data["variables"]
        P = raw.get("P")
        Y = raw.get("Y")
        v = SynthesisVariables(
            J=as_mat(raw["J"], "J"), K=as_mat(raw["K"], "K"), W=as_mat(raw["W"], "W"),
            Ups_lo=as_mat(raw["Ups_lo"], "Ups_lo"), Ups_hi=as_mat(raw["Ups_hi"], "Ups_hi"),
            G=as_mat(raw["G"], "G"), P=None if P is None else as_mat(P, "P"),
            gamma=None if raw.get("gamma") is None else float(raw["gamma"]),
            Y=None if Y is None else as_mat(Y, "Y"), mode=gains.mode,
        )
        tau, lam = float(data["tau"]), float(data["lam"])
    except (KeyError, TypeError, AttributeError) as e:
        raise InputError(f"invalid certificate data: {e}") from e
    frame = _frame_for(model, gains)
    cert = Certificate(variables=v, tau=tau, lam=lam,
                       Psi=psi_matrix(frame.D_hi, frame.D_lo, v.Ups_hi, v.Ups_lo, v.G), label="from report")
    cert.post_checks = verify_certificate(model, gains, cert)
    return cert


# Grid search

def _solve_point(frame: _Frame, model: SystemModel, settings: SynthesisSettings, tau: float, lam: float,
                 allow_K: bool, backend: FeasibilityBackend) -> Optional[SynthesisResult]:
    program = _assemble(frame, tau, lam, settings.eps_pos, settings.eps_pd, allow_K)
    outcome = solve_outcome(program, backend, settings.feasibility_tol)
    if outcome.x is None:
        return None
    v = _variables(program, outcome.x, frame.mode)
    gains = _gains(frame, v)
    cert = Certificate(variables=v, tau=tau, lam=lam, Psi=program.evaluate("Psi", outcome.x),
                       residuals=program.residuals(outcome.x), label=program.label)
    cert.post_checks = verify_certificate(model, gains, cert)
    return SynthesisResult(gains, cert)


def grid_search(model: SystemModel, settings: Optional[SynthesisSettings] = None, mode: str = "direct",
                Lambda=None, S=None, allow_K: bool = True, fixed_L=None,
                backend: Optional[FeasibilityBackend] = None) -> GridOutcome:
    """
    Sweep λ ascending; at each λ solve every τ concurrently and keep the
    accepted certificate with the smallest γ. The first λ with one wins.
    """
    settings = settings or SynthesisSettings()
    backend = backend or CvxpyBackend(settings.solver, settings.solver_options)
    if mode == "direct":
        frame = _direct_frame(model, fixed_L)
    elif mode == "transformed":
        if Lambda is None or S is None:
            raise InputError("transformed mode needs both Lambda and S")
        frame = _transformed_frame(model, Lambda, S)
    else:
        raise InputError(f"unknown synthesis mode '{mode}'")

    stats = GridStats(points_total=len(settings.tau_grid) * len(settings.lambda_grid))
    for lam in settings.lambda_grid:
        candidates: List[SynthesisResult] = []
        with ThreadPoolExecutor(max_workers=settings.max_workers) as executor:
            futures = {executor.submit(_solve_point, frame, model, settings, tau, lam, allow_K, backend): tau
                       for tau in settings.tau_grid}
            for future in as_completed(futures):
                tau = futures[future]
                stats.points_solved += 1
                try:
                    result = future.result()
                except SolverFailure as e:
                    stats.failures += 1
                    stats.failed_points.append((tau, lam))
                    logger.warning(f"Numerical failure at tau={tau:g}, lambda={lam:g}: {e}")
                    continue
                if result is None:
                    stats.infeasible += 1
                    continue
                stats.feasible += 1
                if result.certificate.accepted:
                    candidates.append(result)
                else:
                    stats.rejected += 1
                    logger.warning(f"Solver point at tau={tau:g}, lambda={lam:g} failed verification: "
                                   f"{result.certificate.failed_checks()}")
        if candidates:
            best = min(candidates, key=lambda res: (res.certificate.gamma, res.certificate.tau))
            stats.failed_points.sort()
            logger.info(f"Feasible at lambda={lam:g}, tau={best.certificate.tau:g}, "
                        f"gamma={best.certificate.gamma:.4g}")
            return GridOutcome(best, stats)
    stats.failed_points.sort()
    logger.info(f"No feasible grid point ({stats.infeasible} infeasible, {stats.failures} numerical failures)")
    return GridOutcome(None, stats)


def grid_synthesize(model: SystemModel, settings: Optional[SynthesisSettings] = None, mode: str = "direct",
                    Lambda=None, S=None, allow_K: bool = True, fixed_L=None,
                    backend: Optional[FeasibilityBackend] = None) -> Optional[SynthesisResult]:
    return grid_search(model, settings, mode, Lambda, S, allow_K, fixed_L, backend).found


# Largest admissible nonlinearity

@dataclass
class AlphaSearch:
    alpha: float
    bracket: Tuple[float, float]
    probes: List[Tuple[float, bool]] = field(default_factory=list)
    failures: int = 0


def alpha_search(model_at: Callable[[float], SystemModel], K_allowed: bool = True,
                 bracket: Tuple[float, float] = (0.0, 1.0), settings: Optional[SynthesisSettings] = None,
                 width: float = BISECTION_WIDTH, backend: Optional[FeasibilityBackend] = None) -> AlphaSearch:
    """
    Bisection on α for the family `model_at(α)`; relies on feasibility being
    monotone in α. Returns the feasible end of the final bracket.
    """
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise BracketError(f"bracket must satisfy low < high, got {bracket}")
    search = AlphaSearch(alpha=lo, bracket=(lo, hi))

    def feasible(alpha: float) -> bool:
        outcome = grid_search(model_at(alpha), settings, allow_K=K_allowed, backend=backend)
        search.failures += outcome.stats.failures
        ok = outcome.found is not None
        search.probes.append((alpha, ok))
        logger.debug(f"alpha={alpha:.4f}: {'feasible' if ok else 'infeasible'}")
        return ok

    if not feasible(lo):
        raise BracketError(f"program infeasible at the low end alpha={lo:g}")
    if feasible(hi):
        raise BracketError(f"program still feasible at the high end alpha={hi:g}")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    search.alpha = lo
    search.bracket = (lo, hi)
    return search


def max_alpha(model_at: Callable[[float], SystemModel], K_allowed: bool = True,
              bracket: Tuple[float, float] = (0.0, 1.0), settings: Optional[SynthesisSettings] = None,
              width: float = BISECTION_WIDTH, backend: Optional[FeasibilityBackend] = None) -> float:
    return alpha_search(model_at, K_allowed, bracket, settings, width, backend).alpha
