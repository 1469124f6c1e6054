"""Sampled-data pendulum: discretization, RK4 truth and the end-to-end pipeline"""

import math

import numpy as np
import pytest

from iosynth.config import SynthesisSettings
from iosynth.errors import DiscretizationBoundExceeded, InputError
from iosynth.experiments import pendulum_config, run_pendulum
from iosynth.sampled import SampledDataConfig, discretize, rk4_flow, simulate_sampled

FAST = SynthesisSettings(lambda_grid=[0.95, 0.97, 0.99])


@pytest.fixture(scope="module")
def pendulum_run():
    return run_pendulum(settings=FAST, horizon=300)


class TestDiscretize:
    def test_disturbance_bound(self):
        config = pendulum_config(0.065)
        assert config.disturbance_bound == pytest.approx(math.sqrt(2.0) * 0.065 ** 2)
        assert config.disturbance_bound == pytest.approx(0.005975, abs=1e-6)

    def test_euler_model(self):
        model = discretize(pendulum_config(0.065))
        np.testing.assert_allclose(model.A, [[1.0, 0.065], [0.0, 1.0]])
        np.testing.assert_allclose(model.D_hi, [[0.0, 0.0], [0.065, 0.0]])
        np.testing.assert_allclose(model.D_lo, -model.D_hi)
        np.testing.assert_allclose(model.w_hi, np.full(2, 0.005975), atol=1e-6)
        np.testing.assert_allclose(model.p(np.array([math.pi / 2, 0.0])), [0.0, -0.065])

    @pytest.mark.parametrize("kwargs", [{"h": 0.0}, {"h": -0.1}, {"truth_substeps": 5}])
    def test_invalid_config(self, kwargs):
        with pytest.raises(InputError):
            SampledDataConfig(A_c=[[0.0, 1.0], [0.0, 0.0]], C=[[1.0, 0.0]],
                              nonlinearity=pendulum_config().nonlinearity, **kwargs)

    def test_rk4_exact_on_double_integrator(self):
        A_c = np.array([[0.0, 1.0], [0.0, 0.0]])
        x = rk4_flow(lambda v: A_c @ v, np.array([0.5, 0.3]), 0.065, 50)
        np.testing.assert_allclose(x, [0.5 + 0.065 * 0.3, 0.3], atol=1e-14)

    def test_rk4_conserves_pendulum_energy(self):
        f = pendulum_config().vector_field()

        def energy(v):
            return 0.5 * v[1] ** 2 - math.cos(v[0])

        x = np.array([0.5, 0.3])
        e0 = energy(x)
        for _ in range(200):
            x = rk4_flow(f, x, 0.065, 50)
        assert energy(x) == pytest.approx(e0, abs=1e-9)


class TestPipeline:
    def test_direct_form_skipped(self, pendulum_run):
        assert pendulum_run.diagnostic.infeasible
        assert pendulum_run.direct.found is None

    def test_transformed_synthesis(self, pendulum_run):
        result = pendulum_run.transformed.found
        assert result is not None
        assert result.certificate.accepted, result.certificate.failed_checks()

    def test_default_run_contains_truth(self, pendulum_run):
        s = pendulum_run.trace.summary
        assert pendulum_run.trace.contained()
        assert s.positivity_violations == 0
        assert s.max_defect <= s.defect_bound
        assert s.qc_violations == 0
        assert s.iss_violations == 0
        assert s.ok, s
        assert s.ultimate_bound < s.max_width

    def test_equilibrium_stays_put(self, pendulum_run):
        config = pendulum_run.config
        result = pendulum_run.transformed.found
        trace = simulate_sampled(config, result.gains, np.zeros(2), np.full(2, 0.1), np.full(2, -0.1),
                                 horizon=200, cert=result.certificate, model=pendulum_run.model)
        np.testing.assert_array_equal(trace.x, 0.0)
        assert trace.contained()

    def test_several_initial_conditions(self, pendulum_run, rng):
        result = pendulum_run.transformed.found
        for _ in range(5):
            x0 = rng.uniform(-0.8, 0.8, 2)
            trace = simulate_sampled(pendulum_run.config, result.gains, x0, x0 + 0.1, x0 - 0.1, horizon=300,
                                     cert=result.certificate, model=pendulum_run.model)
            s = trace.summary
            assert s.positivity_violations == 0
            assert s.qc_violations == 0, s.min_qc
            assert s.iss_violations == 0, s.min_iss_margin
            assert s.eps_from_xi_violations == 0

    def test_defect_above_declared_bound(self, pendulum_run):
        tight = SampledDataConfig(A_c=[[0.0, 1.0], [0.0, 0.0]], C=[[1.0, 0.0]],
                                  nonlinearity=pendulum_config().nonlinearity, h=0.065, rho=lambda h: 1e-6)
        gains = pendulum_run.transformed.found.gains
        x0 = np.array([0.5, 0.3])
        with pytest.raises(DiscretizationBoundExceeded):
            simulate_sampled(tight, gains, x0, x0 + 0.1, x0 - 0.1, horizon=20)


@pytest.mark.slow
class TestReproduction:
    def test_hundred_initial_conditions(self, pendulum_run):
        result = pendulum_run.transformed.found
        rng = np.random.default_rng(100)
        for _ in range(100):
            x0 = rng.uniform(-1.0, 1.0, 2)
            trace = simulate_sampled(pendulum_run.config, result.gains, x0, x0 + 0.1, x0 - 0.1, horizon=1000,
                                     cert=result.certificate, model=pendulum_run.model)
            assert trace.summary.positivity_violations == 0
            assert trace.summary.ok, trace.summary

    def test_width_grows_with_sampling_step(self):
        widths = []
        for h in (0.03, 0.065, 0.1):
            run = run_pendulum(h=h, settings=FAST, horizon=1000)
            assert run.trace is not None, f"transformed synthesis infeasible at h={h}"
            widths.append(run.trace.summary.ultimate_bound)
        assert widths[0] < widths[1] < widths[2]
