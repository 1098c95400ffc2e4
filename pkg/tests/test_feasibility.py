import numpy as np
import pytest

from libelcontrol import feasibility
from libelcontrol.feasibility import (ConstraintSpec, DesignGains, GainConditionError,
                                      InfeasibleReferenceError, NoFeasibleValueError, ReferenceBounds)
from libelcontrol.simulation import PAPER_REFERENCE

K1 = np.diag([1.5, 1.])
GAINS = DesignGains(K1, alpha=0.5, theta_bar=6.2)
SPEC = ConstraintSpec(Q_bar=2.5, V_bar=1.0, tau_bar=30., d_bar=5.)
REFBOUNDS = ReferenceBounds(Qd_bar=2., Vd_bar=0.707, alpha3=0.3)
MARGINS = (0.5, 0.293)


def test_error_margins():
    E_Q, E_V = feasibility.error_margins(SPEC, REFBOUNDS)
    assert E_Q == pytest.approx(0.5)
    assert E_V == pytest.approx(0.293)
    with pytest.raises(InfeasibleReferenceError, match='reference exceeds state constraint'):
        feasibility.error_margins(SPEC.replace(Q_bar=2.), REFBOUNDS)


def test_alpha_max_and_kappa():
    assert feasibility.alpha_max(0.5, 0.293) == pytest.approx(0.586)
    assert feasibility.alpha_max(0.4, 0.4) == 1.
    assert feasibility.alpha_max(0.5, 0.586) == pytest.approx(2 * feasibility.alpha_max(0.5, 0.293))
    assert feasibility.kappa_of(0.293, 0.5, 0.5) == pytest.approx(0.043)
    assert feasibility.kappa_of(0.293, 0., 0.5) == 0.293
    with pytest.raises(GainConditionError):
        feasibility.kappa_of(0.293, 0.6, 0.5)


def test_kappa_positive_iff_alpha_admissible(rng):
    for _ in range(10000):
        E_Q, E_V = rng.uniform(0.01, 5., 2)
        alpha = rng.uniform(0., 3.)
        admissible = alpha < feasibility.alpha_max(E_Q, E_V)
        try:
            kappa = feasibility.kappa_of(E_V, alpha, E_Q)
        except GainConditionError:
            assert not admissible
        else:
            assert admissible and kappa > 0


def test_omegas():
    omega1, omega2, omega3 = feasibility.omegas(6.2, 0.5, K1, REFBOUNDS, 5.)
    assert omega2 == pytest.approx(25.3)
    assert omega3 == pytest.approx(8.0)
    assert omega1 == pytest.approx(21.7563)
    assert feasibility.omegas(0., 0.5, 2 * np.eye(2), REFBOUNDS, 5.)[1:] == pytest.approx((0., 0.))


def test_psi_xi_and_u_bound():
    Psi, xi = feasibility.psi_xi(6.2, 0.5, K1, REFBOUNDS, MARGINS)
    assert Psi == pytest.approx(26.3)
    assert xi == pytest.approx(20.5685)
    assert feasibility.u_bound(0.043, Psi, xi) == pytest.approx(26.3 * 0.043 + 20.5685)


def test_tau_min_paper_values():
    assert feasibility.tau_min(6.2, 0.5, K1, REFBOUNDS, MARGINS, 5.) == pytest.approx(27.0563, abs=1e-6)
    assert feasibility.tau_min(0., 0.5, 3 * np.eye(2), REFBOUNDS, MARGINS, 0.) == pytest.approx(0., abs=1e-12)
    base = feasibility.tau_min(6.2, 0.5, K1, REFBOUNDS, MARGINS, 5.)
    assert feasibility.tau_min(6.2, 0.5, K1, REFBOUNDS, MARGINS, 7.5) == pytest.approx(base + 2.5, abs=1e-12)


def test_tau_min_forms_agree(rng):
    for _ in range(10000):
        refbounds = ReferenceBounds(*rng.uniform(0.1, 5., 3))
        E_Q, E_V = rng.uniform(0.01, 3., 2)
        alpha = rng.uniform(0., 0.999) * E_V / E_Q
        a = rng.normal(size=(2, 2))
        K = a @ a.T + 0.1 * np.eye(2)
        theta_bar, d_bar = rng.uniform(0., 20., 2)
        # raises InconsistentBoundError when the two forms disagree
        value = feasibility.tau_min(theta_bar, alpha, K, refbounds, (E_Q, E_V), d_bar)
        other = feasibility.tau_min_omega_form(theta_bar, alpha, K, refbounds, (E_Q, E_V), d_bar)
        assert abs(value - other) <= 1e-9 * max(1., abs(value))


def test_check_c1_paper_configuration():
    report = feasibility.check_c1(SPEC, REFBOUNDS, GAINS)
    assert report.feasible
    assert report.reasons == []
    assert report.kappa == pytest.approx(0.043)
    assert report.alpha_max == pytest.approx(0.586)
    assert report.tau_min == pytest.approx(27.0563, abs=1e-6)
    assert report.tau_min_c11 == pytest.approx(26.6564, abs=1e-6)
    assert report.tau_min_c11 <= report.tau_min
    assert report.kappa_ok


def test_check_c1_infeasible():
    report = feasibility.check_c1(SPEC.replace(tau_bar=20.), REFBOUNDS, GAINS)
    assert not report.feasible
    assert 'C1: tau_bar 20 <= tau_min 27.06' in report.reasons

    report = feasibility.check_c1(SPEC.replace(Q_bar=1.5), REFBOUNDS, GAINS)
    assert not report.feasible
    assert any('reference exceeds state constraint' in reason for reason in report.reasons)

    report = feasibility.check_c1(SPEC, REFBOUNDS, DesignGains(K1, 0.6, 6.2))
    assert not report.feasible
    assert any(reason.startswith('gain condition') for reason in report.reasons)


def test_c1_implies_kappa_condition(rng):
    for _ in range(2000):
        spec = ConstraintSpec(Q_bar=rng.uniform(2.05, 3.), V_bar=rng.uniform(0.75, 2.),
                              tau_bar=rng.uniform(1., 80.), d_bar=5.)
        report = feasibility.check_c1(spec, REFBOUNDS, GAINS)
        if report.feasible:
            assert report.kappa_ok


def test_tau_min_monotone():
    values_q = [feasibility.check_c1(SPEC.replace(Q_bar=q), REFBOUNDS, GAINS).tau_min
                for q in np.linspace(2.05, 2.55, 20)]
    assert np.all(np.diff(values_q) < 0)
    values_v = [feasibility.check_c1(SPEC.replace(V_bar=v), REFBOUNDS, GAINS).tau_min
                for v in np.linspace(0.96, 2., 20)]
    assert np.all(np.diff(values_v) > 0)


def test_min_feasible_tau():
    value = feasibility.min_feasible('tau_bar', SPEC, REFBOUNDS, GAINS)
    assert value == pytest.approx(27.0563, abs=1e-5)
    tol = 2e-6
    assert not feasibility.check_c1(SPEC.replace(tau_bar=value - tol), REFBOUNDS, GAINS).feasible
    assert feasibility.check_c1(SPEC.replace(tau_bar=value + tol), REFBOUNDS, GAINS).feasible
    assert feasibility.max_feasible('tau_bar', SPEC, REFBOUNDS, GAINS) == np.inf


def test_min_feasible_position():
    assert feasibility.min_feasible('Q_bar', SPEC, REFBOUNDS, GAINS) == pytest.approx(2.13204, abs=1e-5)
    # with a loose input bound the position floor is the reference bound
    loose = SPEC.replace(tau_bar=1e6)
    assert feasibility.min_feasible('Q_bar', loose, REFBOUNDS, GAINS) == pytest.approx(2., abs=1e-6)
    # the gain condition caps Q_bar at Qd_bar + E_V / alpha
    assert feasibility.max_feasible('Q_bar', SPEC, REFBOUNDS, GAINS) == pytest.approx(2.586, abs=1e-5)


def test_velocity_range():
    assert feasibility.min_feasible('V_bar', SPEC, REFBOUNDS, GAINS) == pytest.approx(0.957, abs=1e-5)
    assert feasibility.max_feasible('V_bar', SPEC, REFBOUNDS, GAINS) == pytest.approx(28.2437 / 25.3, abs=1e-5)
    near_floor = SPEC.replace(Q_bar=2.001)
    assert feasibility.min_feasible('V_bar', near_floor, REFBOUNDS, GAINS) == pytest.approx(0.7075, abs=1e-5)


def test_max_disturbance():
    # tau_min grows one for one with d_bar
    value = feasibility.max_feasible('d_bar', SPEC, REFBOUNDS, GAINS)
    assert value == pytest.approx(30. - 27.0563 + 5., abs=1e-5)


def test_no_feasible_value():
    with pytest.raises(NoFeasibleValueError):
        feasibility.min_feasible('tau_bar', SPEC.replace(Q_bar=3.), REFBOUNDS, GAINS)
    with pytest.raises(ValueError):
        feasibility.min_feasible('alpha', SPEC, REFBOUNDS, GAINS)


def test_sweep_small_grid():
    grid = feasibility.sweep('tau-q', ((20., 30., 2), (2.2, 2.5, 2)), SPEC, REFBOUNDS, GAINS)
    assert grid.feasible.shape == (2, 2)
    # tau_bar = 20 is infeasible everywhere, tau_bar = 30 everywhere
    np.testing.assert_array_equal(grid.feasible, [[False, False], [True, True]])
    np.testing.assert_allclose(grid.boundary[1], 27.0563, atol=1e-6)
    with pytest.raises(ValueError):
        feasibility.sweep('tau-q', ((20., 30., 1), (2.2, 2.5, 2)), SPEC, REFBOUNDS, GAINS)
    with pytest.raises(ValueError):
        feasibility.sweep('q-tau', ((20., 30., 2), (2.2, 2.5, 2)), SPEC, REFBOUNDS, GAINS)


@pytest.mark.parametrize('case,grid', [('tau-q', ((1., 60., 50), (2., 3., 50))),
                                       ('tau_vs_V', ((1., 60., 50), (0.7, 2., 50))),
                                       ('q-v', ((2., 3., 50), (0.7, 2., 50)))])
def test_sweep_monotone(case, grid):
    result = feasibility.sweep(case, grid, SPEC, REFBOUNDS, GAINS)
    boundary = result.boundary[np.isfinite(result.boundary)]
    if result.case == 'tau-q':
        assert np.all(np.diff(boundary) < 0)
    else:
        assert np.all(np.diff(boundary) > 0)
    if result.case in ('tau-q', 'tau-v'):
        # feasibility is upward closed in tau_bar
        feasible = result.feasible.astype(int)
        assert np.all(np.diff(feasible, axis=0) >= 0)


def test_sweep_q_v_boundary_and_floors():
    omega1, omega2, omega3 = feasibility.omegas(6.2, 0.5, K1, REFBOUNDS, 5.)
    result = feasibility.sweep('Q_vs_V', ((2., 3., 50), (0.7, 2., 50)), SPEC, REFBOUNDS, GAINS)
    valid = ~np.isnan(result.boundary)
    np.testing.assert_allclose(omega1 + omega2 * result.boundary[valid] - omega3 * result.axis1[valid],
                               SPEC.tau_bar, atol=1e-9)
    np.testing.assert_allclose(result.floor[valid], 0.707 + 0.5 * (result.axis1[valid] - 2.), atol=1e-12)

    feasible_q = result.axis1[result.feasible.any(axis=1)]
    feasible_v = result.axis2[result.feasible.any(axis=0)]
    q_step = result.axis1[1] - result.axis1[0]
    v_step = result.axis2[1] - result.axis2[0]
    assert feasible_q.min() - 2. <= q_step + 1e-12
    assert feasible_v.min() - 0.707 <= v_step + 1e-12


def test_sweep_gain_infeasible_columns_have_no_boundary():
    # alpha = 0.5 breaks alpha < E_V / E_Q once Q_bar > 2.586 (V_bar = 1) or V_bar < 0.957 (Q_bar = 2.5)
    grid = feasibility.sweep('tau-q', ((1., 60., 5), (2.5, 2.7, 3)), SPEC, REFBOUNDS, GAINS)
    np.testing.assert_allclose(grid.boundary[0], 27.0563, atol=1e-4)
    assert np.all(np.isinf(grid.boundary[1:]))
    assert not grid.feasible[:, 1:].any()
    assert grid.feasible[-1, 0]

    grid = feasibility.sweep('tau-v', ((1., 60., 5), (0.9, 1.0, 2)), SPEC, REFBOUNDS, GAINS)
    assert np.isinf(grid.boundary[0])
    assert np.isfinite(grid.boundary[1])
    assert not grid.feasible[:, 0].any()


def test_sweep_q_v_boundary_floored_at_reference_velocity():
    # at tau_bar = 10 the C1 equality puts V_bar below Vd_bar for every Q_bar on the grid
    spec = SPEC.replace(tau_bar=10.)
    result = feasibility.sweep('q-v', ((2.1, 2.5, 3), (0.7, 2., 5)), spec, REFBOUNDS, GAINS)
    np.testing.assert_allclose(result.boundary, 0.707)
    assert not result.feasible.any()


def test_sweep_volume_matches_check_c1():
    volume = feasibility.sweep_volume(((20., 40., 5), (2.2, 2.7, 6), (0.8, 1.3, 6)), SPEC, REFBOUNDS, GAINS)
    assert volume.feasible.shape == (5, 6, 6)
    assert volume.feasible.any() and not volume.feasible.all()
    for i, tau_bar in enumerate(volume.tau_bar):
        for j, Q_bar in enumerate(volume.Q_bar):
            for k, V_bar in enumerate(volume.V_bar):
                point = SPEC.replace(tau_bar=float(tau_bar), Q_bar=float(Q_bar), V_bar=float(V_bar))
                assert volume.feasible[i, j, k] == feasibility.check_c1(point, REFBOUNDS, GAINS).feasible


def test_sweep_volume_boundary():
    volume = feasibility.sweep_volume(((1., 60., 4), (2., 3., 3), (0.5, 1., 3)), SPEC, REFBOUNDS, GAINS)
    assert np.all(np.isnan(volume.boundary[0]))
    assert np.all(np.isnan(volume.boundary[:, 0]))
    np.testing.assert_allclose(volume.boundary[1, 2], 27.0563, atol=1e-4)
    assert np.isinf(volume.boundary[2, 2])
    np.testing.assert_array_equal(volume.feasible[:, 1, 2], volume.tau_bar > volume.boundary[1, 2])
    with pytest.raises(ValueError):
        feasibility.sweep_volume(((1., 60., 4), (2., 3., 3)), SPEC, REFBOUNDS, GAINS)


def test_gain_scan():
    scan = feasibility.gain_scan(((0.1, 0.6, 6), (0.5, 2., 4)), SPEC, REFBOUNDS, GAINS)
    assert scan.tau_min.shape == scan.feasible.shape == (6, 4)
    # alpha = 0.6 exceeds E_V / E_Q = 0.586
    assert np.all(np.isinf(scan.tau_min[5]))
    assert np.isnan(scan.kappa[5])
    assert not scan.feasible[5].any()
    np.testing.assert_allclose(scan.tau_min[4, 1], 27.0563, atol=1e-4)
    np.testing.assert_allclose(scan.kappa[4], 0.043, atol=1e-9)
    # the K1 eigenvalue spread grows with k
    assert np.all(np.diff(scan.tau_min[:5], axis=1) > 0)
    np.testing.assert_array_equal(scan.feasible, 30. > scan.tau_min)
    alpha, k, t_min = scan.best()
    assert k == 0.5
    assert t_min == scan.tau_min[np.isfinite(scan.tau_min)].min()


def test_gain_scan_isotropic_feedback():
    gains = DesignGains(2. * np.eye(2), alpha=0.5, theta_bar=6.2)
    scan = feasibility.gain_scan(((0.1, 0.5, 5), (0.5, 2., 4)), SPEC, REFBOUNDS, gains)
    np.testing.assert_allclose(scan.tau_min, np.broadcast_to(scan.tau_min[:, :1], scan.tau_min.shape))
    with pytest.raises(ValueError):
        feasibility.gain_scan(((0., 0.5, 5), (0.5, 2., 4)), SPEC, REFBOUNDS, gains)


def test_gain_scan_without_gain_feasible_point():
    scan = feasibility.gain_scan(((0.7, 0.9, 3), (1., 2., 2)), SPEC, REFBOUNDS, GAINS)
    assert scan.best() is None
    assert not scan.feasible.any()


def test_reference_bounds_oracle():
    q_sup, dq_sup, ddq_sup = feasibility.reference_bounds_oracle(PAPER_REFERENCE, 300., 1e-3)
    assert q_sup == pytest.approx(2., abs=1e-6)
    assert dq_sup == pytest.approx(np.sqrt(0.5), rel=1e-4)
    assert dq_sup == pytest.approx(0.707, rel=1e-3)
    assert ddq_sup > 0.5 > REFBOUNDS.alpha3
    with pytest.raises(ValueError):
        feasibility.reference_bounds_oracle(PAPER_REFERENCE, 0.)


def test_paper_comparison(caplog):
    report = feasibility.check_c1(SPEC, REFBOUNDS, GAINS)
    rows = {name: (value, quoted, rel) for name, value, quoted, rel in feasibility.paper_comparison(report)}
    assert rows['tau_min'][1] == 28.5
    assert rows['tau_min'][2] == pytest.approx((28.5 - 27.0563) / 28.5, abs=1e-6)
    assert rows['tau_min'][2] <= 0.1
    assert 'tau_min' in caplog.text
