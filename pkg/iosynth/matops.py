"""
Matrix utilities and interval-analysis primitives

Features:
- Entrywise positive / negative splitting (A = A⁺ − A⁻)
- Interval enclosure of A·B for an interval matrix B
- Bilinear enclosure of A·B when both factors are sign-bounded
- Spectral radius, Schur and M-matrix structure predicates
- 2×2 block assembly

Matrices are plain 2-D float numpy arrays.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import EigenDecompositionError, InputError, ShapeError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9


def as_mat(A, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float array"""
    M = np.array(A, dtype=float)
    if M.ndim == 1:
        M = M.reshape(1, -1) if M.size else M.reshape(0, 0)
    if M.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError(f"{name} has non-finite entries")
    return M


def as_vec(v, name: str = "vector") -> np.ndarray:
    x = np.array(v, dtype=float).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise InputError(f"{name} has non-finite entries")
    return x


def _require_square(A: np.ndarray, name: str = "matrix"):
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {A.shape}")


@dataclass(frozen=True)
class MatInterval:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape:
            raise ShapeError(f"interval bounds differ in shape: {lo.shape} vs {hi.shape}")
        if np.any(lo > hi + DEFAULT_TOL):
            raise InputError("interval lower bound exceeds upper bound")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def shape(self):
        return self.lo.shape

    @property
    def width(self) -> np.ndarray:
        return self.hi - self.lo

    def contains(self, M, tol: float = DEFAULT_TOL) -> bool:
        M = np.asarray(M, dtype=float)
        return bool(np.all(M >= self.lo - tol) and np.all(M <= self.hi + tol))


def pos_part(A) -> np.ndarray:
    return np.maximum(np.asarray(A, dtype=float), 0.0)


def neg_part(A) -> np.ndarray:
    return np.maximum(-np.asarray(A, dtype=float), 0.0)


def interval_product(A, B: MatInterval) -> MatInterval:
    """Enclose {A·B : B.lo ≤ B ≤ B.hi} with A⁺B.lo − A⁻B.hi ≤ AB ≤ A⁺B.hi − A⁻B.lo"""
    A = as_mat(A, "A")
    if A.shape[1] != B.lo.shape[0]:
        raise ShapeError(f"cannot multiply {A.shape} by interval of shape {B.shape}")
    Ap, An = pos_part(A), neg_part(A)
    return MatInterval(Ap @ B.lo - An @ B.hi, Ap @ B.hi - An @ B.lo)


def bilinear_bounds(A_hi, A_lo, B_hi, B_lo) -> MatInterval:
    """Enclose A·B for −A_lo ≤ A ≤ A_hi and −B_lo ≤ B ≤ B_hi (all bounds nonnegative)"""
    mats = {name: as_mat(M, name) for name, M in
            (("A_hi", A_hi), ("A_lo", A_lo), ("B_hi", B_hi), ("B_lo", B_lo))}
    for name, M in mats.items():
        if np.any(M < 0):
            raise InputError(f"{name} has a negative entry; bound matrices must be nonnegative")
    if mats["A_hi"].shape != mats["A_lo"].shape or mats["B_hi"].shape != mats["B_lo"].shape:
        raise ShapeError("upper and lower bound matrices must share a shape")
    if mats["A_hi"].shape[1] != mats["B_hi"].shape[0]:
        raise ShapeError(f"cannot multiply {mats['A_hi'].shape} by {mats['B_hi'].shape}")
    A_hi, A_lo, B_hi, B_lo = mats["A_hi"], mats["A_lo"], mats["B_hi"], mats["B_lo"]
    return MatInterval(-A_lo @ B_hi - A_hi @ B_lo, A_hi @ B_hi + A_lo @ B_lo)


def eigenvalues(A) -> np.ndarray:
    A = as_mat(A, "A")
    _require_square(A)
    try:
        return scipy.linalg.eigvals(A)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise EigenDecompositionError(f"eigenvalue computation failed: {e}") from e


def spectral_radius(A) -> float:
    ev = eigenvalues(A)
    return float(np.max(np.abs(ev))) if ev.size else 0.0


def is_schur(A, tol: float = DEFAULT_TOL) -> bool:
    return spectral_radius(A) < 1.0 - tol


def is_nonneg(A, tol: float = DEFAULT_TOL) -> bool:
    return bool(np.all(np.asarray(A, dtype=float) >= -tol))


def is_mmatrix_structure(A, tol: float = 0.0) -> bool:
    """Strictly positive diagonal and nonpositive off-diagonal entries"""
    A = as_mat(A, "A")
    _require_square(A)
    off = A - np.diag(np.diag(A))
    return bool(np.all(np.diag(A) > tol) and np.all(off <= tol))


def block2x2(A, B, C, D) -> np.ndarray:
    return np.block([[as_mat(A, "A"), as_mat(B, "B")], [as_mat(C, "C"), as_mat(D, "D")]])


def sym(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def max_sym_eig(M) -> float:
    """Largest eigenvalue of the symmetric part"""
    S = sym(M)
    try:
        return float(scipy.linalg.eigvalsh(S)[-1])
    except scipy.linalg.LinAlgError as e:
        raise EigenDecompositionError(f"symmetric eigenvalue computation failed: {e}") from e


def min_sym_eig(M) -> float:
    S = sym(M)
    try:
        return float(scipy.linalg.eigvalsh(S)[0])
    except scipy.linalg.LinAlgError as e:
        raise EigenDecompositionError(f"symmetric eigenvalue computation failed: {e}") from e


def mixing_matrix(S) -> np.ndarray:
    """[[S⁺, S⁻], [S⁻, S⁺]], the map carrying sign-split errors between coordinates"""
    Sp, Sn = pos_part(S), neg_part(S)
    return block2x2(Sp, Sn, Sn, Sp)


def condition_number(A) -> float:
    A = as_mat(A, "A")
    _require_square(A)
    return float(np.linalg.cond(A))
