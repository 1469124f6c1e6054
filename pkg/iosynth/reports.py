"""
Report records and file export

JSON records are dataclass_json dataclasses written with indent=2 and no
timestamps, so identical runs produce identical bytes. Traces go to CSV via
numpy with full float precision.
"""

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from dataclasses_json import dataclass_json

from .config import MonitorSettings
from .model import JacobianReport, SystemModel
from .observer import ObserverTrace, TraceSummary
from .synthesis import GridOutcome
from .transform import DirectDiagnostic

logger = logging.getLogger(__name__)


@dataclass_json
@dataclass
class SynthesisReport:
    model: str
    mode: str
    status: str
    gains: Optional[Dict[str, Any]] = None
    tau: Optional[float] = None
    lam: Optional[float] = None
    gamma: Optional[float] = None
    variables: Optional[Dict[str, Any]] = None
    residuals: Dict[str, float] = field(default_factory=dict)
    post_checks: Dict[str, bool] = field(default_factory=dict)
    grid: Dict[str, Any] = field(default_factory=dict)
    diagnostic: Optional[Dict[str, Any]] = None
    notes: List[str] = field(default_factory=list)


@dataclass_json
@dataclass
class Table1Cell:
    dtilde: List[List[float]]
    K_allowed: bool
    alpha: Optional[float]
    reference: float
    bracket: List[float] = field(default_factory=list)
    probes: List[List[float]] = field(default_factory=list)
    numerical_failures: int = 0
    error: Optional[str] = None


@dataclass_json
@dataclass
class Table1Report:
    cells: List[Table1Cell] = field(default_factory=list)

    def value(self, column: int, K_allowed: bool) -> Optional[float]:
        row = [c for c in self.cells if c.K_allowed == K_allowed]
        return row[column].alpha


@dataclass_json
@dataclass
class PendulumReport:
    h: float
    disturbance_bound: float
    direct: SynthesisReport
    transformed: SynthesisReport
    summary: Optional[TraceSummary] = None


@dataclass_json
@dataclass
class JacobianSummary:
    samples: int
    violations: int
    max_excess: float
    first_violations: List[Dict[str, Any]] = field(default_factory=list)


@dataclass_json
@dataclass
class DiagnosticReport:
    model: str
    structural: Dict[str, Any]
    jacobian: JacobianSummary


def diagnostic_dict(diag: DirectDiagnostic) -> Dict[str, Any]:
    return {
        "infeasible": diag.infeasible,
        "fixed_indices": [i + 1 for i in diag.fixed],
        "flags": [{"index": f.index + 1, "value": f.value} for f in diag.flags],
        "message": diag.message(),
    }


def diagnostic_report(model: SystemModel, diag: DirectDiagnostic, jac: JacobianReport,
                      keep: int = 20) -> DiagnosticReport:
    """Structural test plus the sampled Jacobian check, first `keep` violations listed with 1-based indices"""
    return DiagnosticReport(
        model=model.name,
        structural=diagnostic_dict(diag),
        jacobian=JacobianSummary(samples=jac.samples, violations=len(jac.violations), max_excess=jac.max_excess,
                                 first_violations=[{**asdict(v), "row": v.row + 1, "col": v.col + 1}
                                                   for v in jac.violations[:keep]]),
    )


def _status(outcome: GridOutcome) -> str:
    if outcome.found is not None:
        return "feasible"
    return "numerical_failure" if outcome.numerical_failure else "infeasible"


def synthesis_report(model: SystemModel, mode: str, outcome: GridOutcome,
                     diagnostic: Optional[DirectDiagnostic] = None) -> SynthesisReport:
    report = SynthesisReport(model=model.name, mode=mode,
                             status=_status(outcome),
                             grid=outcome.stats.to_dict())
    if diagnostic is not None:
        report.diagnostic = diagnostic_dict(diagnostic)
        if diagnostic.infeasible:
            report.notes.append("Structural test: " + diagnostic.message())
    if outcome.found is not None:
        cert = outcome.found.certificate
        report.gains = outcome.found.gains.to_dict()
        report.tau, report.lam, report.gamma = cert.tau, cert.lam, cert.gamma
        report.variables = cert.variables.to_dict()
        report.residuals = {k: float(v) for k, v in cert.residuals.items()}
        report.post_checks = dict(cert.post_checks)
    return report


def write_json(record, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(record.to_json(indent=2) + "\n")
    logger.info(f"Wrote {path}")
    return path


def trace_columns(trace: ObserverTrace, monitors: MonitorSettings = MonitorSettings()):
    n = trace.x.shape[1]
    names = ["k"] + [f"x_{i + 1}" for i in range(n)] + [f"xbar_{i + 1}" for i in range(n)] \
        + [f"xlow_{i + 1}" for i in range(n)] + ["positivity_ok", "qc_ok", "iss_ok"]
    k = np.arange(trace.horizon + 1, dtype=float)
    pos_ok = np.all(trace.eps >= -monitors.positivity_tol, axis=1)
    # NaN monitors (no certificate, or the final row) count as passing
    qc_ok = ~(trace.qc < -monitors.quadratic_tol)
    iss_ok = ~(trace.iss_margin < -monitors.quadratic_tol)
    data = np.column_stack([k, trace.x, trace.upper, trace.lower,
                            pos_ok.astype(float), qc_ok.astype(float), iss_ok.astype(float)])
    return names, data


def write_trace_csv(trace: ObserverTrace, path, monitors: MonitorSettings = MonitorSettings()) -> Path:
    names, data = trace_columns(trace, monitors)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=",".join(names), comments="")
    logger.info(f"Wrote {path}")
    return path


def write_plot_data(trace: ObserverTrace, h: float, path) -> Path:
    """Bounds against time t = k·h, one row per sample"""
    n = trace.x.shape[1]
    t = h * np.arange(trace.horizon + 1)
    names = ["t"] + [f"x_{i + 1}" for i in range(n)] + [f"xbar_{i + 1}" for i in range(n)] \
        + [f"xlow_{i + 1}" for i in range(n)] + [f"width_{i + 1}" for i in range(n)]
    data = np.column_stack([t, trace.x, trace.upper, trace.lower, trace.width])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=",".join(names), comments="")
    logger.info(f"Wrote {path}")
    return path


def write_table_csv(table: Table1Report, path) -> Path:
    """2×6 grid of max-α values: rows 'K = 0' and 'K free'"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for K_allowed, label in ((False, "K=0"), (True, "K free")):
        row = [c for c in table.cells if c.K_allowed == K_allowed]
        lines.append(",".join([label] + ["" if c.alpha is None else f"{c.alpha:.4f}" for c in row]))
    path.write_text("row," + ",".join(f"D{i + 1}" for i in range(len(table.cells) // 2)) + "\n"
                    + "\n".join(lines) + "\n")
    logger.info(f"Wrote {path}")
    return path
