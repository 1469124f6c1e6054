"""
Coordinate transformations for interval observers

Direct synthesis needs every diagonal entry of A − LC inside (−1, 1). When a
column of C is zero that entry cannot be moved by L at all, and `diagnose_direct`
reports it. The usual way out is to pick a Luenberger gain Λ by hand (or by pole
placement), diagonalize A − ΛC and run the observer in the eigen-coordinates.

The diagnostic is sound but not complete: a flag proves direct synthesis
infeasible, the absence of flags proves nothing.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import control
import numpy as np
import scipy.linalg

from .errors import AssumptionViolation, InputError, ShapeError
from .matops import DEFAULT_TOL, as_mat, condition_number, eigenvalues, spectral_radius

logger = logging.getLogger(__name__)

SINGULAR_COND = 1e12
INVERSE_TOL = 1e-10


def _check_dims(A: np.ndarray, C: np.ndarray, Lambda: np.ndarray = None):
    n = A.shape[0]
    if A.shape != (n, n):
        raise ShapeError(f"A must be square, got {A.shape}")
    if C.shape[1] != n:
        raise ShapeError(f"C must have {n} columns, got {C.shape}")
    if Lambda is not None and Lambda.shape != (n, C.shape[0]):
        raise ShapeError(f"Lambda must be {n}x{C.shape[0]}, got {Lambda.shape}")


def inverse_of(S: np.ndarray) -> np.ndarray:
    """S⁻¹, refusing numerically singular S"""
    S = as_mat(S, "S")
    if S.shape[0] != S.shape[1]:
        raise ShapeError(f"S must be square, got {S.shape}")
    cond = condition_number(S)
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise AssumptionViolation(f"singular S (condition number {cond:.3g})")
    return scipy.linalg.inv(S)


@dataclass(frozen=True)
class TransformPair:
    Lambda: np.ndarray
    S: np.ndarray
    U: np.ndarray
    aleph: np.ndarray

    def __post_init__(self):
        n = self.S.shape[0]
        if not np.allclose(self.S @ self.U, np.eye(n), atol=INVERSE_TOL, rtol=0.0):
            raise AssumptionViolation("S·U differs from the identity; U must be S⁻¹")


@dataclass
class DiagonalFlag:
    index: int    # 0-based state index
    value: float  # the fixed value of (A − LC)_ii


@dataclass
class DirectDiagnostic:
    """Column-zero structural test on (A, C)"""

    fixed: List[int] = field(default_factory=list)
    flags: List[DiagonalFlag] = field(default_factory=list)

    @property
    def infeasible(self) -> bool:
        return bool(self.flags)

    def message(self) -> str:
        if not self.flags:
            return "no structural obstruction found (test is sound but not complete)"
        parts = ", ".join(f"(A−LC)[{f.index + 1},{f.index + 1}] = {f.value:g}" for f in self.flags)
        return f"direct synthesis infeasible: {parts} for every L, outside (−1, 1)"


def diagnose_direct(A, C) -> DirectDiagnostic:
    A, C = as_mat(A, "A"), as_mat(C, "C")
    _check_dims(A, C)
    report = DirectDiagnostic()
    for i in range(A.shape[0]):
        if np.all(np.abs(C[:, i]) <= DEFAULT_TOL):
            report.fixed.append(i)
            value = float(A[i, i])
            if not -1.0 < value < 1.0:
                report.flags.append(DiagonalFlag(i, value))
    if report.flags:
        logger.info(report.message())
    return report


@dataclass
class Assumption3Report:
    ok: bool
    aleph: np.ndarray
    spectral_radius: float
    diagonal: List[float]
    failures: List[str] = field(default_factory=list)


def check_assumption3(A, C, Lambda, S, tol: float = DEFAULT_TOL) -> Assumption3Report:
    """ℵ = S(A − ΛC)S⁻¹ must be Schur with every ℵ_ii in (−1, 1)"""
    A, C, Lambda = as_mat(A, "A"), as_mat(C, "C"), as_mat(Lambda, "Lambda")
    _check_dims(A, C, Lambda)
    S = as_mat(S, "S")
    U = inverse_of(S)
    aleph = S @ (A - Lambda @ C) @ U
    rho = spectral_radius(aleph)
    diag = np.diag(aleph)
    failures = []
    if rho >= 1.0 - tol:
        failures.append(f"ℵ is not Schur (spectral radius {rho:.6g})")
    for i, d in enumerate(diag):
        if not -1.0 + tol < d < 1.0 - tol:
            failures.append(f"ℵ[{i + 1},{i + 1}] = {d:.6g} outside (−1, 1)")
    return Assumption3Report(ok=not failures, aleph=aleph, spectral_radius=rho,
                             diagonal=diag.tolist(), failures=failures)


def build_transform(A, C, Lambda, tol: float = DEFAULT_TOL) -> TransformPair:
    """Eigen-coordinates of A − ΛC: ascending real eigenvalues, unit eigenvectors, largest entry positive"""
    A, C, Lambda = as_mat(A, "A"), as_mat(C, "C"), as_mat(Lambda, "Lambda")
    _check_dims(A, C, Lambda)
    M = A - Lambda @ C
    try:
        ev, V = scipy.linalg.eig(M)
    except scipy.linalg.LinAlgError as e:
        raise AssumptionViolation(f"eigendecomposition of A − ΛC failed: {e}") from e

    scale = 1.0 + float(np.max(np.abs(ev)))
    if np.any(np.abs(ev.imag) > tol * scale):
        raise AssumptionViolation("complex eigenvalues: supply S")
    ev, V = ev.real, V.real
    order = np.argsort(ev, kind="stable")
    ev, V = ev[order], V[:, order]
    if ev.size > 1 and np.min(np.diff(ev)) <= 1e-9 * scale:
        raise AssumptionViolation("repeated eigenvalues: supply S")

    V = V / np.linalg.norm(V, axis=0)
    for j in range(V.shape[1]):
        if V[np.argmax(np.abs(V[:, j])), j] < 0:
            V[:, j] = -V[:, j]

    S = inverse_of(V)
    report = check_assumption3(A, C, Lambda, S, tol)
    if not report.ok:
        raise AssumptionViolation("; ".join(report.failures))
    logger.debug(f"Transform built, ℵ diagonal {report.diagonal}")
    return TransformPair(Lambda=Lambda, S=S, U=V, aleph=report.aleph)


def transform_pair(A, C, Lambda, S, tol: float = DEFAULT_TOL) -> TransformPair:
    """Validate a user-supplied S"""
    report = check_assumption3(A, C, Lambda, S, tol)
    if not report.ok:
        raise AssumptionViolation("; ".join(report.failures))
    S = as_mat(S, "S")
    return TransformPair(Lambda=as_mat(Lambda, "Lambda"), S=S, U=inverse_of(S), aleph=report.aleph)


def place_observer_gain(A, C, poles: Sequence[float]) -> np.ndarray:
    """Λ with σ(A − ΛC) = poles, by pole placement on the dual pair (Aᵀ, Cᵀ)"""
    A, C = as_mat(A, "A"), as_mat(C, "C")
    _check_dims(A, C)
    poles = np.asarray(poles, dtype=complex if np.iscomplexobj(poles) else float)
    if poles.size != A.shape[0]:
        raise InputError(f"need {A.shape[0]} poles, got {poles.size}")
    try:
        Lambda = np.asarray(control.place(A.T, C.T, poles)).T
    except (ValueError, np.linalg.LinAlgError) as e:
        raise InputError(f"pole placement failed: {e}") from e
    logger.info(f"Placed observer poles {np.sort(eigenvalues(A - Lambda @ C).real).tolist()}")
    return Lambda
