"""
Vectorized feasibility programs

A program is a flat decision vector x, a layout naming slices of x, and a list
of constraints, each an affine matrix expression M(x) = M0 + Σ_i x_i M_i that
must be entrywise >= 0, == 0, or PSD / NSD. Expressions are stored densely as
(const, coef) pairs so they can be assembled with ordinary matrix algebra and
evaluated again for independent residual checks.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from .errors import ShapeError

logger = logging.getLogger(__name__)

Operand = Union["AffineMatrix", np.ndarray, float, int]


@dataclass(frozen=True)
class AffineMatrix:
    const: np.ndarray  # (r, c)
    coef: np.ndarray   # (N, r, c)

    # Make numpy defer to the reflected operators (ndarray @ AffineMatrix etc.)
    __array_ufunc__ = None

    @classmethod
    def constant(cls, M, size: int) -> "AffineMatrix":
        M = np.atleast_2d(np.asarray(M, dtype=float))
        return cls(M, np.zeros((size,) + M.shape))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.const.shape

    @property
    def size(self) -> int:
        return self.coef.shape[0]

    def _lift(self, other: Operand) -> "AffineMatrix":
        if isinstance(other, AffineMatrix):
            return other
        M = np.asarray(other, dtype=float)
        if M.ndim == 0:
            M = np.full(self.shape, float(M))
        return AffineMatrix.constant(M, self.size)

    def __add__(self, other: Operand) -> "AffineMatrix":
        o = self._lift(other)
        if o.shape != self.shape:
            raise ShapeError(f"cannot add {self.shape} and {o.shape}")
        return AffineMatrix(self.const + o.const, self.coef + o.coef)

    __radd__ = __add__

    def __neg__(self) -> "AffineMatrix":
        return AffineMatrix(-self.const, -self.coef)

    def __sub__(self, other: Operand) -> "AffineMatrix":
        return self + (-self._lift(other))

    def __rsub__(self, other: Operand) -> "AffineMatrix":
        return self._lift(other) - self

    def __mul__(self, scalar: float) -> "AffineMatrix":
        return AffineMatrix(float(scalar) * self.const, float(scalar) * self.coef)

    __rmul__ = __mul__

    def __matmul__(self, M) -> "AffineMatrix":
        M = np.atleast_2d(np.asarray(M, dtype=float))
        return AffineMatrix(self.const @ M, self.coef @ M)

    def __rmatmul__(self, M) -> "AffineMatrix":
        M = np.atleast_2d(np.asarray(M, dtype=float))
        return AffineMatrix(M @ self.const, M @ self.coef)

    @property
    def T(self) -> "AffineMatrix":
        return AffineMatrix(self.const.T, self.coef.transpose(0, 2, 1))

    def diagonal(self) -> "AffineMatrix":
        """Diagonal entries as an (r, 1) column"""
        return AffineMatrix(np.diagonal(self.const).reshape(-1, 1).copy(),
                            np.diagonal(self.coef, axis1=1, axis2=2)[:, :, None].copy())

    def masked(self, mask) -> "AffineMatrix":
        """Entrywise product with a constant 0/1 mask"""
        mask = np.asarray(mask, dtype=float)
        return AffineMatrix(self.const * mask, self.coef * mask)

    def times_matrix(self, M) -> "AffineMatrix":
        """s·M for a scalar (1×1) expression s"""
        if self.shape != (1, 1):
            raise ShapeError(f"times_matrix needs a 1x1 expression, got {self.shape}")
        M = np.atleast_2d(np.asarray(M, dtype=float))
        return AffineMatrix(self.const[0, 0] * M, self.coef[:, 0, 0][:, None, None] * M)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.const + np.tensordot(x, self.coef, axes=1)

    def rows(self) -> Tuple[np.ndarray, np.ndarray]:
        """(G, h) with vec(M(x)) = G x + h, row-major vec"""
        return self.coef.reshape(self.size, -1).T, self.const.ravel()

    @staticmethod
    def block(rows: Sequence[Sequence[Operand]], size: int) -> "AffineMatrix":
        """Block assembly; plain arrays in the grid are lifted to constants"""
        lifted = [[b if isinstance(b, AffineMatrix) else AffineMatrix.constant(b, size) for b in row]
                  for row in rows]
        try:
            const = np.block([[b.const for b in row] for row in lifted])
            coef = np.block([[b.coef for b in row] for row in lifted])
        except ValueError as e:
            raise ShapeError(f"inconsistent block sizes: {e}") from e
        return AffineMatrix(const, coef)

    @staticmethod
    def blkdiag(blocks: Sequence["AffineMatrix"]) -> "AffineMatrix":
        size = blocks[0].size
        grid = []
        for i, b in enumerate(blocks):
            row = []
            for j, other in enumerate(blocks):
                row.append(b if i == j else np.zeros((b.shape[0], other.shape[1])))
            grid.append(row)
        return AffineMatrix.block(grid, size)


@dataclass
class VariableSlot:
    name: str
    shape: Tuple[int, int]
    start: int
    stop: int
    symmetric: bool = False


class VariableLayout:
    """Names → index ranges in the flat decision vector"""

    def __init__(self):
        self.slots: Dict[str, VariableSlot] = {}
        self.size = 0
        self._frozen = False

    def add(self, name: str, shape: Tuple[int, int], symmetric: bool = False) -> VariableSlot:
        if self._frozen:
            raise RuntimeError("layout is frozen; declare all variables before building expressions")
        r, c = shape
        if symmetric and r != c:
            raise ShapeError(f"symmetric variable {name} must be square")
        count = r * (r + 1) // 2 if symmetric else r * c
        slot = VariableSlot(name, (r, c), self.size, self.size + count, symmetric)
        self.slots[name] = slot
        self.size += count
        return slot

    def __contains__(self, name: str) -> bool:
        return name in self.slots

    def expr(self, name: str) -> AffineMatrix:
        self._frozen = True
        slot = self.slots[name]
        r, c = slot.shape
        coef = np.zeros((self.size, r, c))
        idx = slot.start
        if slot.symmetric:
            for i in range(r):
                for j in range(i, r):
                    coef[idx, i, j] = 1.0
                    coef[idx, j, i] = 1.0
                    idx += 1
        else:
            for i in range(r):
                for j in range(c):
                    coef[idx, i, j] = 1.0
                    idx += 1
        return AffineMatrix(np.zeros((r, c)), coef)

    def unpack(self, x: np.ndarray) -> Dict[str, np.ndarray]:
        return {name: self.expr(name).evaluate(x) for name in self.slots}


@dataclass
class LinearConstraint:
    name: str
    expr: AffineMatrix
    kind: str = ">="  # entrywise expr >= 0, or "==" for expr == 0

    def residual(self, x: np.ndarray) -> float:
        """Worst violation (0 when satisfied)"""
        v = self.expr.evaluate(x)
        if self.kind == "==":
            return float(np.max(np.abs(v))) if v.size else 0.0
        return float(max(0.0, -np.min(v))) if v.size else 0.0


@dataclass
class PsdConstraint:
    name: str
    expr: AffineMatrix
    sense: str = ">>"  # ">>": expr ⪰ 0, "<<": expr ⪯ 0

    def signed(self) -> AffineMatrix:
        """The expression oriented so that it must be PSD"""
        return self.expr if self.sense == ">>" else -self.expr

    def residual(self, x: np.ndarray) -> float:
        M = self.signed().evaluate(x)
        M = 0.5 * (M + M.T)
        return float(max(0.0, -scipy.linalg.eigvalsh(M)[0]))


@dataclass
class FeasibilityProgram:
    layout: VariableLayout
    tau: float
    lam: float
    linear: List[LinearConstraint] = field(default_factory=list)
    psd: List[PsdConstraint] = field(default_factory=list)
    label: str = ""
    # Named affine expressions kept for gain recovery and reporting
    exprs: Dict[str, AffineMatrix] = field(default_factory=dict)

    def add_linear(self, name: str, expr: AffineMatrix, kind: str = ">="):
        self.linear.append(LinearConstraint(name, expr, kind))

    def add_psd(self, name: str, expr: AffineMatrix, sense: str = ">>"):
        if expr.shape[0] != expr.shape[1]:
            raise ShapeError(f"PSD block {name} must be square, got {expr.shape}")
        self.psd.append(PsdConstraint(name, expr, sense))

    @property
    def num_variables(self) -> int:
        return self.layout.size

    def residuals(self, x: np.ndarray) -> Dict[str, float]:
        """Worst violation per named constraint, recomputed from x"""
        out = {c.name: c.residual(x) for c in self.linear}
        out.update({c.name: c.residual(x) for c in self.psd})
        return out

    def max_residual(self, x: np.ndarray) -> float:
        res = self.residuals(x)
        return max(res.values()) if res else 0.0

    def describe(self) -> Dict[str, object]:
        return {
            "label": self.label,
            "tau": self.tau,
            "lambda": self.lam,
            "num_variables": self.num_variables,
            "variables": {s.name: [s.start, s.stop] for s in self.layout.slots.values()},
            "linear_rows": int(sum(c.expr.const.size for c in self.linear)),
            "psd_blocks": [c.expr.shape[0] for c in self.psd],
        }

    def evaluate(self, name: str, x: np.ndarray) -> Optional[np.ndarray]:
        if name in self.exprs:
            return self.exprs[name].evaluate(x)
        if name in self.layout:
            return self.layout.expr(name).evaluate(x)
        return None
