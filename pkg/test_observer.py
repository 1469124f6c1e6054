"""Observer update laws, coordinate maps and the simulation monitors"""

from dataclasses import replace

import numpy as np
import pytest

from iosynth.config import MonitorSettings
from iosynth.errors import InputError, ShapeError
from iosynth.observer import (DirectObserverGains, TransformedObserverGains, back_transform, gains_from_dict,
                              init_transformed, simulate, simulate_many, step_direct, step_transformed)
from iosynth.synthesis import certificate_from_gains, grid_synthesize


def _direct(n=2, m=2, L=0.0, F=0.0, G=0.0):
    """Scalar L means L·I; scalar F and G fill the whole matrix"""
    return DirectObserverGains(L=L * np.eye(n, m) if np.isscalar(L) else L, K=np.zeros((n, m)),
                               F=np.full((n, n), F) if np.isscalar(F) else F,
                               G=np.full((n, n), G) if np.isscalar(G) else G)


def _pendulum_direct_gains(pendulum):
    """L = 0 and G = D̄: positive error dynamics but not Schur"""
    return DirectObserverGains(L=np.zeros((2, 1)), K=np.zeros((2, 1)), F=np.zeros((2, 2)), G=pendulum.D_hi)


class TestGains:
    def test_shape_checks(self):
        with pytest.raises(ShapeError):
            DirectObserverGains(L=np.zeros((2, 1)), K=np.zeros((2, 2)), F=np.zeros((2, 2)), G=np.zeros((2, 2)))

    def test_dimension_mismatch_with_model(self, pendulum, linear_model):
        with pytest.raises(ShapeError):
            _direct(n=2, m=2).check_dims(pendulum)
        _direct(n=2, m=2).check_dims(linear_model)

    def test_from_dict(self):
        gains = gains_from_dict({"mode": "transformed", "Lambda": [[0.9], [0.5]], "S": np.eye(2).tolist(),
                                 "H": [[1.0], [0.0]], "Phi": np.zeros((2, 2)).tolist(),
                                 "Gamma": np.zeros((2, 2)).tolist()})
        assert isinstance(gains, TransformedObserverGains)
        np.testing.assert_array_equal(gains.U, np.eye(2))

    def test_from_dict_missing_field(self):
        with pytest.raises(InputError, match="missing field"):
            gains_from_dict({"mode": "direct", "L": [[0.0]]})

    def test_block_matrix(self, linear_model):
        gains = _direct(L=0.0, F=0.1)
        block = gains.block_matrix(linear_model)
        np.testing.assert_allclose(block[:2, :2], 0.5 * np.eye(2) + 0.1)
        np.testing.assert_allclose(block[:2, 2:], np.full((2, 2), 0.1))


class TestDirectStep:
    def test_linear_reduction(self, linear_model):
        """Zero p, K, G, F and w: both bounds follow a Luenberger observer"""
        model = linear_model.with_bounds(w_lo=np.zeros(2), w_hi=np.zeros(2))
        L = np.array([[0.2, 0.0], [0.1, 0.3]])
        gains = _direct(L=L)
        upper, lower, y = np.array([1.0, 2.0]), np.array([-1.0, 0.5]), np.array([0.3, -0.4])
        up, lo = step_direct(gains, model, upper, lower, y)
        M = model.A - L @ model.C
        np.testing.assert_allclose(up, M @ upper + L @ y)
        np.testing.assert_allclose(lo, M @ lower + L @ y)

    def test_collapsed_bounds_stay_collapsed(self, pendulum):
        model = pendulum.with_bounds(w_lo=np.full(2, 0.01), w_hi=np.full(2, 0.01))
        gains = _pendulum_direct_gains(pendulum)
        x = np.array([0.4, -0.2])
        up, lo = step_direct(gains, model, x, x, model.output(x))
        np.testing.assert_allclose(up, lo, atol=1e-15)
        np.testing.assert_allclose(up, model.step(x, np.full(2, 0.01)), atol=1e-15)

    def test_one_step_containment(self, pendulum, rng):
        gains = _pendulum_direct_gains(pendulum)
        for _ in range(200):
            x = rng.uniform(-1.0, 1.0, 2)
            upper = x + rng.uniform(0.0, 0.5, 2)
            lower = x - rng.uniform(0.0, 0.5, 2)
            w = rng.uniform(pendulum.w_lo, pendulum.w_hi)
            up, lo = step_direct(gains, pendulum, upper, lower, pendulum.output(x))
            x_next = pendulum.step(x, w)
            assert np.all(lo <= x_next + 1e-12) and np.all(x_next <= up + 1e-12)


class TestTransformedStep:
    def test_identity_S_matches_direct(self, pendulum, rng):
        direct = DirectObserverGains(L=[[0.9], [0.5]], K=[[0.3], [0.1]], F=np.full((2, 2), 0.01), G=pendulum.D_hi)
        transformed = TransformedObserverGains(Lambda=direct.L, S=np.eye(2), H=direct.K, Phi=direct.F,
                                               Gamma=direct.G)
        upper, lower = rng.uniform(0.5, 1.0, 2), rng.uniform(-1.0, -0.5, 2)
        y = np.array([0.1])
        for a, b in zip(step_direct(direct, pendulum, upper, lower, y),
                        step_transformed(transformed, pendulum, upper, lower, y)):
            np.testing.assert_allclose(a, b, atol=1e-14)

    def test_collapsed_z_bounds(self, pendulum):
        model = pendulum.with_bounds(w_lo=np.zeros(2), w_hi=np.zeros(2))
        gains = TransformedObserverGains(Lambda=[[0.9], [0.5]], S=[[0.6063, -0.0457], [-0.6063, 1.0457]],
                                         H=[[1.0], [0.5798]], Phi=np.zeros((2, 2)), Gamma=np.zeros((2, 2)))
        x = np.array([0.3, 0.1])
        z = gains.S @ x
        up, lo = step_transformed(gains, model, z, z, model.output(x))
        np.testing.assert_allclose(up, lo, atol=1e-14)
        np.testing.assert_allclose(gains.U @ up, model.step(x), atol=1e-12)


class TestBackTransform:
    def test_identity(self):
        up, lo = back_transform(np.eye(2), [1.0, 2.0], [-1.0, 0.0])
        np.testing.assert_array_equal(up, [1.0, 2.0])
        np.testing.assert_array_equal(lo, [-1.0, 0.0])

    def test_negative_identity_swaps(self):
        up, lo = back_transform(-np.eye(2), [1.0, 2.0], [-1.0, 0.0])
        np.testing.assert_array_equal(up, [1.0, 0.0])
        np.testing.assert_array_equal(lo, [-1.0, -2.0])

    def test_encloses_random_points(self, rng):
        U = rng.normal(size=(3, 3))
        z_lower = rng.normal(size=3)
        z_upper = z_lower + rng.uniform(0.0, 1.0, 3)
        up, lo = back_transform(U, z_upper, z_lower)
        x = rng.uniform(z_lower, z_upper, size=(10_000, 3)) @ U.T
        assert np.all(x <= up + 1e-12) and np.all(x >= lo - 1e-12)

    def test_init_then_back_transform_contains_state(self, rng):
        S = np.array([[0.6063, -0.0457], [-0.6063, 1.0457]])
        x = np.array([0.5, 0.3])
        zu, zl = init_transformed(S, x + 0.1, x - 0.1)
        z = S @ x
        assert np.all(zl <= z) and np.all(z <= zu)
        up, lo = back_transform(np.linalg.inv(S), zu, zl)
        assert np.all(lo <= x + 1e-12) and np.all(x <= up + 1e-12)


class TestSimulate:
    def test_zero_disturbance_exact_start(self, linear_model):
        model = linear_model.with_bounds(w_lo=np.zeros(2), w_hi=np.zeros(2))
        gains = _direct(L=0.25)
        cert = certificate_from_gains(model, gains, lam=0.5, P=np.eye(4), gamma=1.0)
        x0 = np.array([0.3, -0.7])
        trace = simulate(model, gains, x0, x0, x0, horizon=50, cert=cert)
        np.testing.assert_allclose(trace.eps, 0.0, atol=1e-15)
        assert trace.summary.ok
        assert trace.horizon == 50
        assert trace.x.shape == (51, 2)

    def test_initial_ordering_violated(self, linear_model):
        x0 = np.zeros(2)
        with pytest.raises(InputError, match="initial ordering violated"):
            simulate(linear_model, _direct(), x0, x0 - 0.1, x0 + 0.1, horizon=5)

    def test_monitors_pass_for_valid_certificate(self, linear_model):
        gains = _direct(L=0.5)
        cert = certificate_from_gains(linear_model, gains, tau=10.0, lam=0.5, P=np.eye(4), gamma=10.0)
        assert cert.accepted
        trace = simulate(linear_model, gains, np.zeros(2), np.full(2, 0.1), np.full(2, -0.1), horizon=200,
                         seed=3, cert=cert)
        s = trace.summary
        assert s.positivity_violations == 0
        assert s.qc_violations == 0
        assert s.iss_violations == 0

    def test_corrupted_P_trips_iss_monitor(self, linear_model):
        gains = _direct(L=0.5)
        cert = certificate_from_gains(linear_model, gains, lam=0.5, P=100.0 * np.eye(4), gamma=1.0)
        trace = simulate(linear_model, gains, np.zeros(2), np.full(2, 0.1), np.full(2, -0.1), horizon=200,
                         seed=3, cert=cert)
        assert trace.summary.positivity_violations == 0
        assert trace.summary.iss_violations > 0

    def test_zeroed_psi_trips_qc_monitor(self, linear_model):
        gains = _direct(L=0.5, G=0.05)
        cert = certificate_from_gains(linear_model, gains, tau=10.0, lam=0.5, P=np.eye(4), gamma=10.0)
        args = (linear_model, gains, np.zeros(2), np.full(2, 0.1), np.full(2, -0.1))
        intact = simulate(*args, horizon=50, seed=3, cert=cert)
        assert intact.summary.qc_violations == 0
        # with Ψ = 0 the constraint reads −‖Δp‖² ≥ 0 and Δp ≥ G·width never vanishes
        broken = simulate(*args, horizon=50, seed=3, cert=replace(cert, Psi=np.zeros_like(cert.Psi)))
        assert broken.summary.positivity_violations == 0
        assert broken.summary.qc_violations == broken.horizon + 1
        assert broken.summary.min_qc < -1e-5

    def test_ultimate_bound_scales_with_disturbance(self, linear_model):
        gains = _direct(L=0.25)
        widths = []
        for bound in (0.02, 0.01):
            model = linear_model.with_bounds(w_lo=np.full(2, -bound), w_hi=np.full(2, bound))
            trace = simulate(model, gains, np.zeros(2), np.full(2, 0.1), np.full(2, -0.1), horizon=300, seed=1)
            widths.append(trace.summary.ultimate_bound)
        assert widths[1] <= 0.5 * widths[0] + 1e-12

    def test_contains_synthesized_table1_observer(self, table1_instance, coarse_settings):
        result = grid_synthesize(table1_instance, coarse_settings)
        assert result is not None and result.certificate.accepted
        for seed in range(5):
            trace = simulate(table1_instance, result.gains, [0.4, -0.3], [0.6, -0.1], [0.2, -0.5], horizon=300,
                             seed=seed, cert=result.certificate)
            assert trace.contained()
            assert trace.summary.ok, trace.summary

    @pytest.mark.slow
    def test_table1_observer_over_many_disturbances(self, table1_instance, coarse_settings):
        result = grid_synthesize(table1_instance, coarse_settings)
        assert result is not None

        def initial(seed):
            return np.array([0.4, -0.3]), np.array([0.6, -0.1]), np.array([0.2, -0.5])

        traces = simulate_many(table1_instance, result.gains, initial, range(100), horizon=1000,
                               cert=result.certificate, progress=False)
        assert len(traces) == 100
        for trace in traces:
            s = trace.summary
            assert trace.contained(), trace.seed
            assert np.all(trace.upper >= trace.lower)
            assert s.positivity_violations == 0
            assert s.qc_violations == 0, (trace.seed, s.min_qc)
            assert s.iss_violations == 0, (trace.seed, s.min_iss_margin)

    def test_transformed_run_tracks_eps_from_xi(self, linear_model):
        gains = TransformedObserverGains(Lambda=0.25 * np.eye(2), S=[[1.0, 0.2], [0.0, 1.0]],
                                         H=np.zeros((2, 2)), Phi=np.zeros((2, 2)), Gamma=np.zeros((2, 2)))
        trace = simulate(linear_model, gains, np.zeros(2), np.full(2, 0.1), np.full(2, -0.1), horizon=100)
        assert trace.xi is not None and trace.xi.shape == (101, 4)
        assert trace.contained()
        assert np.max(trace.eps_from_xi_error) < 1e-12
        assert trace.summary.eps_from_xi_violations == 0

    def test_simulate_many_is_deterministic(self, linear_model):
        gains = _direct(L=0.25)

        def initial(seed):
            return np.zeros(2), np.full(2, 0.1), np.full(2, -0.1)

        first = simulate_many(linear_model, gains, initial, [2, 0, 1], horizon=50, max_workers=3, progress=False)
        second = simulate_many(linear_model, gains, initial, [2, 0, 1], horizon=50, max_workers=1, progress=False)
        assert [t.seed for t in first] == [2, 0, 1]
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.upper, b.upper)
            np.testing.assert_array_equal(a.x, b.x)

    def test_monitor_tolerances_are_configurable(self, linear_model):
        gains = _direct(L=0.5)
        cert = certificate_from_gains(linear_model, gains, lam=0.5, P=100.0 * np.eye(4), gamma=1.0)
        loose = MonitorSettings(quadratic_tol=1.0)
        trace = simulate(linear_model, gains, np.zeros(2), np.full(2, 0.1), np.full(2, -0.1), horizon=200,
                         seed=3, cert=cert, monitors=loose)
        assert trace.summary.iss_violations == 0
