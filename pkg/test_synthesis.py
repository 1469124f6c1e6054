"""Program assembly, the feasibility oracle, certificates and the grid/bisection drivers"""

import json
from functools import partial

import numpy as np
import pytest

from iosynth.config import SynthesisSettings
from iosynth.errors import AssumptionViolation, BracketError, InputError, SolverFailure
from iosynth.experiments import (PENDULUM_LAMBDA, PENDULUM_S, TABLE1_DTILDES, TABLE1_REFERENCE,
                                 reported_pendulum_gains, table1_model)
from iosynth.observer import DirectObserverGains
from iosynth.program import FeasibilityProgram, VariableLayout
from iosynth.reports import synthesis_report
from iosynth.solver import FEASIBLE, SolveOutcome, solve_feasibility, solve_outcome
from iosynth.synthesis import (alpha_search, assemble_direct, assemble_transformed, certificate_from_gains,
                               certificate_from_report, grid_search, grid_synthesize, max_alpha)

TABLE1_COLUMN_1 = TABLE1_DTILDES[0]


def _psd_program(eps=1e-3):
    layout = VariableLayout()
    layout.add("P", (2, 2), symmetric=True)
    program = FeasibilityProgram(layout, tau=1.0, lam=0.0, label="P only")
    program.add_psd("P_pd", layout.expr("P") - eps * np.eye(2))
    return program


class _ZeroBackend:
    """Claims feasibility and returns the zero vector"""

    name = "zero"

    def solve(self, program):
        return SolveOutcome(FEASIBLE, x=np.zeros(program.num_variables), solver_status="optimal")


class _FailingBackend:
    name = "failing"

    def solve(self, program):
        raise SolverFailure(f"diverged on {program.label}")


class TestAssembly:
    def test_direct_layout(self, pendulum):
        program = assemble_direct(pendulum, tau=1.0, lam=0.5)
        info = program.describe()
        assert info["num_variables"] == 4 + 2 + 2 + 4 * 4 + 10 + 1
        assert info["psd_blocks"] == [4, 16]
        assert [c.name for c in program.psd] == ["P_pd", "lmi"]

    def test_pinned_K_removes_variable(self, pendulum):
        program = assemble_direct(pendulum, tau=1.0, lam=0.5, allow_K=False)
        assert "K" not in program.layout
        np.testing.assert_array_equal(program.evaluate("K", np.ones(program.num_variables)), np.zeros((2, 1)))

    def test_zero_jacobian_bounds_reduce_psi(self, linear_model, rng):
        program = assemble_direct(linear_model, tau=1.0, lam=0.5)
        x = rng.normal(size=program.num_variables)
        G = program.layout.unpack(x)["G"]
        np.testing.assert_allclose(program.evaluate("Psi", x), np.block([[G, G], [G, G]]))

    @pytest.mark.parametrize("tau, lam", [(0.0, 0.5), (-1.0, 0.5), (1.0, 1.0), (1.0, -0.1)])
    def test_invalid_scalars(self, linear_model, tau, lam):
        with pytest.raises(InputError):
            assemble_direct(linear_model, tau=tau, lam=lam)

    def test_identity_transform_reproduces_fixed_L(self, linear_model):
        L0 = 0.2 * np.eye(2)
        direct = assemble_direct(linear_model, tau=0.5, lam=0.3, fixed_L=L0)
        transformed = assemble_transformed(linear_model, L0, np.eye(2), tau=0.5, lam=0.3)
        assert direct.num_variables == transformed.num_variables
        for a, b in zip(direct.linear + direct.psd, transformed.linear + transformed.psd):
            assert a.name == b.name
            np.testing.assert_array_equal(a.expr.const, b.expr.const)
            np.testing.assert_array_equal(a.expr.coef, b.expr.coef)

    def test_transformed_needs_diagonal_schur(self, pendulum):
        with pytest.raises(AssumptionViolation):
            assemble_transformed(pendulum, PENDULUM_LAMBDA, np.eye(2), tau=1.0, lam=0.5)

    def test_transformed_rejects_singular_S(self, pendulum):
        with pytest.raises(AssumptionViolation, match="singular S"):
            assemble_transformed(pendulum, PENDULUM_LAMBDA, [[1.0, 2.0], [2.0, 4.0]], tau=1.0, lam=0.5)


class TestOracle:
    def test_psd_only_program(self):
        values = solve_feasibility(_psd_program())
        assert values is not None
        assert np.linalg.eigvalsh(values["P"])[0] >= 1e-3 - 1e-7

    def test_contradictory_program_is_infeasible(self):
        program = _psd_program(eps=1.0)
        program.add_psd("P_nsd", program.layout.expr("P"), sense="<<")
        assert solve_feasibility(program) is None

    def test_bad_backend_point_is_caught(self):
        with pytest.raises(SolverFailure, match="P_pd"):
            solve_outcome(_psd_program(), backend=_ZeroBackend())


class TestCertificates:
    def test_hand_gains_for_linear_plant(self, linear_model):
        gains = DirectObserverGains(L=0.5 * np.eye(2), K=np.zeros((2, 2)), F=np.zeros((2, 2)), G=np.zeros((2, 2)))
        cert = certificate_from_gains(linear_model, gains)
        assert cert.accepted, cert.failed_checks()
        assert "lmi_nsd" not in cert.post_checks

    def test_negative_F_fails_verification(self, linear_model):
        F = np.array([[0.0, -0.5], [0.0, 0.0]])
        gains = DirectObserverGains(L=0.5 * np.eye(2), K=np.zeros((2, 2)), F=F, G=np.zeros((2, 2)))
        cert = certificate_from_gains(linear_model, gains)
        assert not cert.post_checks["W_nonneg"]
        assert not cert.post_checks["F_nonneg"]
        assert not cert.accepted

    def test_unstable_gains_fail_schur(self, linear_model):
        gains = DirectObserverGains(L=np.zeros((2, 2)), K=np.zeros((2, 2)), F=np.full((2, 2), 0.4),
                                    G=np.zeros((2, 2)))
        cert = certificate_from_gains(linear_model, gains)
        assert not cert.post_checks["A_schur"]

    def test_reference_pendulum_solution(self, pendulum):
        cert = certificate_from_gains(pendulum, reported_pendulum_gains())
        assert cert.post_checks["Upsilon_sandwich"]
        assert cert.post_checks["G_positivity"]
        assert cert.post_checks["assumption3"]


class TestGridSearch:
    def test_linear_plant(self, linear_model, coarse_settings):
        outcome = grid_search(linear_model, coarse_settings)
        assert outcome.found is not None
        cert = outcome.found.certificate
        assert cert.accepted, cert.failed_checks()
        assert cert.post_checks["A_matches_block_form"]
        assert cert.post_checks["lmi_nsd"]
        assert outcome.stats.points_solved >= len(coarse_settings.tau_grid)

    def test_certificate_survives_report_round_trip(self, linear_model, coarse_settings):
        outcome = grid_search(linear_model, coarse_settings)
        result = outcome.found
        data = json.loads(synthesis_report(linear_model, "direct", outcome).to_json())
        rebuilt = certificate_from_report(linear_model, result.gains, data)
        assert rebuilt.accepted, rebuilt.failed_checks()

    def test_table1_inside_region(self):
        result = grid_synthesize(table1_model(TABLE1_COLUMN_1, 0.3))
        assert result is not None and result.certificate.accepted
        assert np.all(result.gains.F >= -1e-6) and np.all(result.gains.G >= -1e-6)

    def test_table1_without_injection(self):
        result = grid_synthesize(table1_model(TABLE1_COLUMN_1, 0.2), allow_K=False)
        assert result is not None
        np.testing.assert_array_equal(result.gains.K, np.zeros((2, 1)))

    @pytest.mark.parametrize("alpha", [0.7, 1.0])
    def test_table1_outside_region(self, alpha):
        assert grid_synthesize(table1_model(TABLE1_COLUMN_1, alpha)) is None

    def test_pendulum_direct_is_empty(self, pendulum, coarse_settings):
        assert grid_synthesize(pendulum, coarse_settings) is None

    def test_pendulum_transformed(self, pendulum):
        settings = SynthesisSettings(lambda_grid=[0.95, 0.97, 0.99])
        result = grid_synthesize(pendulum, settings, "transformed", Lambda=PENDULUM_LAMBDA, S=PENDULUM_S)
        assert result is not None
        cert = result.certificate
        assert cert.accepted, cert.failed_checks()
        assert np.all(result.gains.Phi >= -1e-6) and np.all(result.gains.Gamma >= -1e-6)

    def test_all_points_failing_is_a_numerical_failure(self, linear_model, coarse_settings):
        outcome = grid_search(linear_model, coarse_settings, backend=_FailingBackend())
        assert outcome.found is None
        assert outcome.numerical_failure
        assert outcome.stats.failures == outcome.stats.points_total
        assert synthesis_report(linear_model, "direct", outcome).status == "numerical_failure"

    def test_declared_infeasibility_is_not_a_numerical_failure(self, coarse_settings):
        outcome = grid_search(table1_model(TABLE1_COLUMN_1, 1.0), coarse_settings)
        assert outcome.found is None
        assert outcome.stats.infeasible > 0
        assert not outcome.numerical_failure

    def test_transformed_mode_needs_inputs(self, pendulum):
        with pytest.raises(InputError, match="Lambda and S"):
            grid_search(pendulum, mode="transformed")


class TestAlphaSearch:
    def test_bracket_order(self):
        with pytest.raises(BracketError):
            alpha_search(lambda a: table1_model(TABLE1_COLUMN_1, a), bracket=(0.5, 0.4))

    def test_bracket_low_end_infeasible(self, coarse_settings):
        with pytest.raises(BracketError, match="low end"):
            alpha_search(lambda a: table1_model(TABLE1_COLUMN_1, a), False, (0.9, 1.0), coarse_settings)

    def test_feasibility_is_monotone(self):
        model_at = partial(table1_model, TABLE1_COLUMN_1)
        feasible = [grid_synthesize(model_at(a)) is not None for a in (0.15, 0.3, 0.7, 1.0)]
        assert feasible == [True, True, False, False]

    @pytest.mark.slow
    @pytest.mark.parametrize("K_allowed", [False, True])
    def test_feasibility_never_returns_above_boundary(self, K_allowed):
        model_at = partial(table1_model, TABLE1_COLUMN_1)
        alphas = np.round(np.arange(0.05, 1.0, 0.1), 2)
        feasible = [grid_synthesize(model_at(a), allow_K=K_allowed) is not None for a in alphas]
        assert feasible[0] and not feasible[-1]
        first_fail = feasible.index(False)
        assert not any(feasible[first_fail:]), dict(zip(alphas, feasible))

        search = alpha_search(model_at, K_allowed)
        lo, hi = search.bracket
        assert alphas[first_fail - 1] <= hi
        assert alphas[first_fail] >= lo
        feasible_at = [a for a, ok in search.probes if ok]
        infeasible_at = [a for a, ok in search.probes if not ok]
        assert max(feasible_at) < min(infeasible_at)

    @pytest.mark.slow
    @pytest.mark.parametrize("column", range(6))
    def test_table1_column(self, column):
        model_at = partial(table1_model, TABLE1_DTILDES[column])
        without_K = max_alpha(model_at, K_allowed=False)
        with_K = max_alpha(model_at, K_allowed=True)
        assert without_K == pytest.approx(TABLE1_REFERENCE[False][column], abs=0.05)
        assert with_K == pytest.approx(TABLE1_REFERENCE[True][column], abs=0.05)
        assert with_K >= without_K - 5e-3
