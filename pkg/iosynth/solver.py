"""
Feasibility backends

`solve_feasibility` is an oracle: hand it a FeasibilityProgram, get back a
decision vector satisfying every constraint, or None when the backend declares
the program infeasible. Numerical trouble raises SolverFailure instead, so a
caller can tell "no solution exists" from "the solver gave up".

Any point a backend returns is re-checked by brute force against the program's
own affine expressions before it is accepted.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Protocol

import cvxpy as cp
import numpy as np
import scipy.sparse as sp

from .config import CLARABEL_OPTIONS
from .errors import SolverFailure
from .program import FeasibilityProgram

logger = logging.getLogger(__name__)

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"


@dataclass
class SolveOutcome:
    status: str
    x: Optional[np.ndarray] = None
    solver_status: str = ""
    max_residual: float = float("nan")


class FeasibilityBackend(Protocol):
    name: str

    def solve(self, program: FeasibilityProgram) -> SolveOutcome:
        ...


def _upper_selector(r: int) -> sp.csr_matrix:
    """Rows picking the upper triangle (i <= j) out of a column-major vec of an r×r matrix"""
    rows, cols = [], []
    k = 0
    for i in range(r):
        for j in range(i, r):
            rows.append(k)
            cols.append(j * r + i)
            k += 1
    return sp.csr_matrix((np.ones(k), (rows, cols)), shape=(k, r * r))


class CvxpyBackend:
    """Conic backend on top of cvxpy (CLARABEL by default, SCS by name)"""

    def __init__(self, solver: Optional[str] = "CLARABEL", solver_options: Optional[Dict[str, Any]] = None):
        self.solver = solver
        if solver_options is None:
            solver_options = dict(CLARABEL_OPTIONS) if (solver or "").upper() == "CLARABEL" else {}
        self.solver_options = solver_options
        self.name = f"cvxpy/{solver or 'default'}"

    def build(self, program: FeasibilityProgram):
        x = cp.Variable(program.num_variables)
        constraints = []
        for c in program.linear:
            G, h = c.expr.rows()
            if not h.size:
                continue
            if c.kind == "==":
                constraints.append(G @ x + h == 0)
            else:
                constraints.append(G @ x + h >= 0)
        for c in program.psd:
            signed = c.signed()
            r = signed.shape[0]
            # Z is PSD by construction; tie its upper triangle to the affine block
            Z = cp.Variable((r, r), PSD=True)
            sel = _upper_selector(r)
            G_full = signed.coef.transpose(0, 2, 1).reshape(program.num_variables, -1).T  # column-major vec
            h_full = signed.const.T.ravel()
            constraints.append(sel @ cp.vec(Z) == sel @ G_full @ x + sel @ h_full)
        return cp.Problem(cp.Minimize(0), constraints), x

    def solve(self, program: FeasibilityProgram) -> SolveOutcome:
        problem, x = self.build(program)
        try:
            problem.solve(solver=self.solver, **self.solver_options)
        except cp.error.SolverError as e:
            raise SolverFailure(f"{self.name} failed on {program.label}: {e}") from e

        status = problem.status
        if status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
            return SolveOutcome(INFEASIBLE, solver_status=status)
        if status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) or x.value is None:
            raise SolverFailure(f"{self.name} returned status '{status}' on {program.label}")
        return SolveOutcome(FEASIBLE, x=np.asarray(x.value, dtype=float), solver_status=status)


def solve_feasibility(program: FeasibilityProgram, backend: Optional[FeasibilityBackend] = None,
                      tol: float = 1e-7) -> Optional[Dict[str, np.ndarray]]:
    """Variable assignment satisfying the program within `tol`, or None if infeasible"""
    outcome = solve_outcome(program, backend, tol)
    if outcome.status != FEASIBLE:
        return None
    return program.layout.unpack(outcome.x)


def solve_outcome(program: FeasibilityProgram, backend: Optional[FeasibilityBackend] = None,
                  tol: float = 1e-7) -> SolveOutcome:
    backend = backend or CvxpyBackend()
    outcome = backend.solve(program)
    if outcome.status != FEASIBLE:
        logger.debug(f"{program.label}: infeasible ({outcome.solver_status})")
        return outcome
    outcome.max_residual = program.max_residual(outcome.x)
    if outcome.max_residual > tol:
        worst = max(program.residuals(outcome.x).items(), key=lambda kv: kv[1])
        raise SolverFailure(
            f"{backend.name} returned a point violating '{worst[0]}' by {worst[1]:.3g} "
            f"(tolerance {tol:g}) on {program.label}")
    return outcome
