import dataclasses
import math
import types

import numpy as np
import pytest

from libelcontrol import simulation
from libelcontrol.config_utils import build_experiment, parse_config
from libelcontrol.feasibility import ConstraintSpec
from libelcontrol.simulation import (COLUMNS, PAPER_DISTURBANCE, PAPER_REFERENCE, AssumptionGateError,
                                     BarrierViolation, DisturbanceProfile, DisturbanceSegment,
                                     EmptyLogError, SimLog, check_assumptions, closed_loop_rhs,
                                     compute_metrics, disturbance_eval, persistent_disturbance,
                                     reference_eval, rk4_step, run, step_limit)

SPEC = ConstraintSpec(Q_bar=2.5, V_bar=1.0, tau_bar=30., d_bar=5.)


def test_reference_at_zero():
    q_d, dq_d, ddq_d = reference_eval(PAPER_REFERENCE, 0.)
    np.testing.assert_allclose(q_d, [0., 2.], atol=1e-12)
    np.testing.assert_allclose(dq_d, [0.5, 0.], atol=1e-12)
    np.testing.assert_allclose(ddq_d, [0., -0.125], atol=1e-12)
    assert reference_eval(PAPER_REFERENCE, 2 * math.pi)[0][1] != pytest.approx(2.)
    with pytest.raises(ValueError):
        reference_eval(PAPER_REFERENCE, -1.)


def test_reference_derivatives_match_finite_differences():
    h = 1e-4
    for t in np.linspace(0.1, 50., 200):
        q_plus, dq_plus, _ = PAPER_REFERENCE.evaluate(t + h)
        q_minus, dq_minus, _ = PAPER_REFERENCE.evaluate(t - h)
        _, dq_d, ddq_d = PAPER_REFERENCE.evaluate(t)
        assert np.abs((q_plus - q_minus) / (2 * h) - dq_d).max() < 1e-6
        assert np.abs((dq_plus - dq_minus) / (2 * h) - ddq_d).max() < 1e-6


def test_reference_vectorized():
    t = np.linspace(0., 10., 7)
    q_d, _, _ = PAPER_REFERENCE.evaluate(t)
    assert q_d.shape == (7, 2)
    np.testing.assert_allclose(q_d[3], PAPER_REFERENCE.evaluate(t[3])[0])


def test_disturbance_branches():
    np.testing.assert_array_equal(disturbance_eval(PAPER_DISTURBANCE, 50.), [0., 0.])
    np.testing.assert_allclose(disturbance_eval(PAPER_DISTURBANCE, 150.), [3 * math.sin(150.), 3 * math.cos(150.)])
    for t in np.linspace(200., 299.99, 50):
        assert np.linalg.norm(disturbance_eval(PAPER_DISTURBANCE, t)) == pytest.approx(5.)
    # the last segment keeps acting after the horizon
    np.testing.assert_allclose(disturbance_eval(PAPER_DISTURBANCE, 350.), [5 * math.sin(350.), 5 * math.cos(350.)])
    cut = dataclasses.replace(PAPER_DISTURBANCE, persist_last_segment=False)
    np.testing.assert_array_equal(disturbance_eval(cut, 350.), [0., 0.])
    with pytest.raises(ValueError):
        disturbance_eval(PAPER_DISTURBANCE, -0.5)


def test_disturbance_sup_norm():
    assert PAPER_DISTURBANCE.sup_norm(50.) == 0.
    assert PAPER_DISTURBANCE.sup_norm(150.) == 3.
    assert PAPER_DISTURBANCE.sup_norm(300.) == 5.
    assert persistent_disturbance((5., 5.)).sup_norm() == 5.
    with pytest.raises(ValueError):
        DisturbanceProfile(segments=(DisturbanceSegment(0., 10., (1., 1.)), DisturbanceSegment(5., 20., (1., 1.))))
    with pytest.raises(ValueError):
        DisturbanceSegment(10., 10., (1., 1.))


def test_config_keeps_last_disturbance_segment_by_default():
    assert build_experiment({'silent': True}).sim.disturbance.persist_last_segment
    sim = build_experiment({'silent': True, 'persist_last_segment': False}).sim
    assert not sim.disturbance.persist_last_segment
    np.testing.assert_array_equal(disturbance_eval(sim.disturbance, 350.), [0., 0.])


def test_metrics_submodule_is_not_shadowed():
    assert isinstance(simulation.metrics, types.ModuleType)
    assert simulation.metrics.compute_metrics is compute_metrics


def test_rk4_exponential():
    x = rk4_step(lambda t, x: -x, 0., np.array([1.]), 0.1)
    assert x[0] == pytest.approx(0.9048375, abs=1e-7)
    assert abs(x[0] - math.exp(-0.1)) < 1e-7
    np.testing.assert_array_equal(rk4_step(lambda t, x: np.zeros_like(x), 0., np.array([1., 2.]), 0.1), [1., 2.])
    with pytest.raises(ValueError):
        rk4_step(lambda t, x: -x, 0., np.array([1.]), 0.)


def test_rk4_convergence_order():
    def global_error(n):
        dt = 1. / n
        x = np.array([1.])
        for k in range(n):
            x = rk4_step(lambda t, y: -y, k * dt, x, dt)
        return abs(x[0] - math.exp(-1.))

    errors = [global_error(n) for n in (10, 20, 40)]
    orders = [math.log2(a / b) for a, b in zip(errors, errors[1:])]
    assert min(orders) >= 3.9


def test_rhs_on_reference(paper_experiment):
    sim = paper_experiment.sim
    x0 = sim.initial_state()
    xdot = closed_loop_rhs(sim, 0., x0)
    np.testing.assert_array_equal(xdot[:2], x0[2:4])
    np.testing.assert_array_equal(xdot[4:], np.zeros(5))
    np.testing.assert_array_equal(closed_loop_rhs(sim, 0., x0), xdot)


def test_rhs_exact_cancellation(paper_experiment):
    sim = dataclasses.replace(paper_experiment.sim, theta_hat0=paper_experiment.model.theta)
    for t in (0., 1.3, 7.):
        q_d, dq_d, ddq_d = sim.reference.evaluate(t)
        x = np.concatenate([q_d, dq_d, sim.theta_hat0])
        xdot = closed_loop_rhs(sim, t, x)
        np.testing.assert_allclose(xdot[2:4], ddq_d, atol=1e-10)


def test_assumptions_on_bundled_config(paper_experiment):
    report = check_assumptions(paper_experiment.sim)
    assert report.passed
    checks = {c.name: c for c in report.checks}
    assert checks['C1'].passed and checks['gain condition'].passed
    assert checks['initial tracking error'].lhs == 0.
    assert checks['initial filtered error'].lhs == 0.
    advisory = {c.name for c in report.advisory_failures}
    assert 'parameter norm bound' in advisory
    assert 'reference acceleration bound' in advisory
    assert checks['parameter norm bound'].lhs == pytest.approx(6.4388, abs=1e-3)
    assert 'FAIL' not in report.tabulate()


def test_assumption_gate_blocks_run():
    experiment = build_experiment({'d_bar': 4.0, 'silent': True})
    report = check_assumptions(experiment.sim)
    assert [c.name for c in report.blocking_failures] == ['disturbance bound']
    with pytest.raises(AssumptionGateError) as excinfo:
        run(experiment.sim)
    assert not excinfo.value.report.passed


def test_barrier_violation_at_start_is_raised():
    experiment = build_experiment({'dq0': [0.6, 0.], 't_end': 0.1, 'assumption_gate': 'warn', 'silent': True})
    report = check_assumptions(experiment.sim)
    assert 'initial filtered error' in {c.name for c in report.blocking_failures}
    with pytest.raises(BarrierViolation) as excinfo:
        run(experiment.sim)
    assert excinfo.value.t == 0.


def test_short_run(paper_experiment):
    log, result = run(paper_experiment.sim)
    assert len(log) == paper_experiment.sim.n_rows == 101
    assert np.all(np.diff(log.t) > 0)
    assert log.t[-1] == pytest.approx(1.0)
    assert log.barrier_violation is None
    for name in ('position', 'velocity', 'input', 'barrier'):
        assert not result[f'{name}_violation']
    kappa = paper_experiment.controller.kappa
    assert np.all(log.column('norm_tau') <= 30. + 1e-9)
    assert np.all(log.column('norm_r') < kappa)
    assert np.all(np.isfinite(log.column('V')))
    assert result.max_tau == pytest.approx(log.column('norm_tau').max())


def test_three_second_run():
    experiment = build_experiment({'t_end': 3.0, 'decimation': 100, 'silent': True})
    log, result = run(experiment.sim)
    assert len(log) == 31
    assert log.barrier_violation is None
    assert not any(result[f'{name}_violation'] for name in ('position', 'velocity', 'input', 'barrier'))
    assert result.max_r < experiment.controller.kappa
    assert np.all(log.column('norm_theta_hat') <= experiment.controller.theta_hat_bound * (1 + 1e-6))


def test_run_matches_finer_grid():
    coarse = build_experiment({'t_end': 0.5, 'decimation': 1, 'silent': True})
    fine = build_experiment({'t_end': 0.5, 'dt': 2.5e-4, 'decimation': 4, 'silent': True})
    coarse_log, coarse_result = run(coarse.sim)
    fine_log, fine_result = run(fine.sim)
    assert coarse_log.barrier_violation is None and fine_log.barrier_violation is None
    assert len(coarse_log) == len(fine_log) == 501
    np.testing.assert_allclose(coarse_log.t, fine_log.t, atol=1e-12)
    assert np.abs(coarse_log.columns('q', 2) - fine_log.columns('q', 2)).max() < 1e-4
    assert coarse_result.max_r == pytest.approx(fine_result.max_r, rel=1e-2)


def test_step_limit_shrinks_near_barrier(paper_experiment):
    sim = paper_experiment.sim
    x0 = sim.initial_state()
    assert step_limit(sim, 0., x0) > sim.dt
    near = x0.copy()
    near[2] += 0.99 * paper_experiment.controller.kappa
    assert step_limit(sim, 0., near) < sim.dt
    assert step_limit(sim, 0., near) < 0.25 * step_limit(sim, 0., x0)


def test_run_leaves_config_unchanged():
    experiment = build_experiment({'t_end': 0.05, 'silent': True})
    log, _ = run(experiment.sim, 'baseline')
    assert log.law == 'baseline'
    assert experiment.sim.law == 'proposed'


def test_run_is_deterministic():
    experiment = build_experiment({'t_end': 0.2, 'silent': True})
    first, _ = run(experiment.sim)
    second, _ = run(experiment.sim)
    np.testing.assert_array_equal(first.data, second.data)


def test_row_count_follows_decimation():
    experiment = build_experiment({'t_end': 0.01, 'decimation': 1, 'silent': True})
    log, _ = run(experiment.sim)
    assert len(log) == 11
    experiment = build_experiment({'t_end': 0.01, 'silent': True})
    log, _ = run(experiment.sim)
    assert len(log) == 2


def test_zero_order_hold_stays_close(paper_experiment):
    log, _ = run(paper_experiment.sim)
    held, _ = run(dataclasses.replace(paper_experiment.sim, zoh=True))
    assert len(held) == len(log)
    assert np.abs(held.columns('q', 2) - log.columns('q', 2)).max() < 1e-2


def test_baseline_short_run(paper_experiment):
    log, result = run(paper_experiment.sim, 'baseline')
    assert log.law == 'baseline'
    assert 'barrier_violation' in result
    with pytest.raises(ValueError):
        run(paper_experiment.sim, 'pid')


def test_exact_cancellation():
    experiment = build_experiment({'theta_hat0': list(build_experiment({}).model.theta),
                                   'disturbance': [], 't_end': 10.0, 'decimation': 100, 'silent': True})
    log, result = run(experiment.sim)
    assert len(log) == 101
    assert result.max_e < 1e-6


def _log(**columns):
    n = len(next(iter(columns.values())))
    data = np.zeros((n, len(COLUMNS)))
    data[:, 0] = np.arange(n) * 0.01
    for name, values in columns.items():
        data[:, COLUMNS.index(name)] = values
    return SimLog(data)


def test_metrics_flags():
    result = compute_metrics(_log(norm_q=[1., 1., 1.]), SPEC)
    assert not result.position_violation
    assert np.isnan(result.position_first_violation)

    result = compute_metrics(_log(norm_tau=[0., 30. + 1e-6, 0.]), SPEC)
    assert result.input_violation
    assert result.input_first_violation == pytest.approx(0.01)
    assert not compute_metrics(_log(norm_tau=[30. + 1e-10]), SPEC).input_violation
    assert compute_metrics(_log(norm_q=[2.5]), SPEC).position_violation


def test_metrics_rms_and_barrier():
    result = compute_metrics(_log(norm_e=[0.3] * 5), SPEC)
    assert result.rms_e == pytest.approx(0.3)
    assert result.max_e == pytest.approx(0.3)

    log = _log(norm_r=[0.01, 0.02])
    log.barrier_violation = 0.025
    result = compute_metrics(log, SPEC, kappa=0.043)
    assert result.barrier_violation
    assert result.barrier_first_violation == 0.025


def test_metrics_empty_log():
    with pytest.raises(EmptyLogError):
        compute_metrics(SimLog(np.zeros((0, len(COLUMNS)))), SPEC)


@pytest.mark.slow
def test_bundled_tracking_run(example_config):
    experiment = parse_config(example_config('paper_sec5.yml'), silent=True)
    log, result = run(experiment.sim)
    kappa = experiment.controller.kappa
    if log.barrier_violation is None:
        assert len(log) == 30001
    else:
        # the disturbance only starts at t = 100 s
        assert log.barrier_violation > 100.
        assert log.t[-1] < log.barrier_violation
        assert result.barrier_violation
    assert not result.position_violation
    assert not result.velocity_violation
    assert not result.input_violation
    assert np.all(log.column('norm_r') < kappa)
    assert result.max_d <= 5. * (1 + 1e-9)
    assert np.all(log.column('norm_theta_hat') <= 6.2 * math.sqrt(1.05) * (1 + 1e-6))


@pytest.mark.slow
def test_compare_scenario(example_config):
    experiment = parse_config(example_config('sec5_compare.yml'), t_end=20.0, silent=True)
    proposed_log, proposed = run(experiment.sim, 'proposed')
    baseline_log, baseline = run(experiment.sim, 'baseline')
    assert len(baseline_log) == 2001
    assert baseline.velocity_violation
    assert baseline.max_dq > 1.
    # |Y theta_hat| with |theta_hat| <= 6.2 * sqrt(1.05) is far below the 5 N m applied at t = 0
    assert proposed.barrier_violation
    assert proposed_log.barrier_violation < 0.1
    assert np.all(proposed_log.column('norm_tau') <= 30. + 1e-9)
    assert np.all(proposed_log.column('norm_r') < experiment.controller.kappa)
