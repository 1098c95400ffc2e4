from __future__ import annotations

import dataclasses
import logging
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from tqdm import tqdm

from ..controller import (BarrierDomainError, ControllerConfig, adaptation_rhs,
                          baseline_adaptation_rhs, control_pipeline, filtered_error)
from ..dynamics import JointState, TwoLinkModel
from ..feasibility import (ConstraintSpec, DesignGains, ReferenceBounds, check_c1,
                           reference_bounds_oracle)
from .integrator import rk4_step
from .log_utils import COLUMNS, SimLog, log_row
from .metrics import Metrics, compute_metrics
from .signals import DisturbanceProfile, ReferenceSignal

__all__ = ['SimConfig',
           'AssumptionCheck',
           'AssumptionReport',
           'BarrierViolation',
           'NumericOverflowError',
           'AssumptionGateError',
           'LAWS',
           'closed_loop_rhs',
           'step_limit',
           'check_assumptions',
           'run']

LAWS = ('proposed', 'baseline')
ORACLE_RTOL = 1e-3
DISTURBANCE_RTOL = 1e-9
N_STATE = 4
# RK4 stays stable for |h * lambda| < 2.78 on both the real and the imaginary axis
RK4_STABILITY_RADIUS = 2.78
STABILITY_MARGIN = 0.25
MAX_HALVINGS = 10


class BarrierViolation(RuntimeError):
    def __init__(self, t: float, r_norm: float = None) -> None:
        super().__init__(f'filtered error reached the barrier at t = {t:.6g} s')
        self.t = t
        self.r_norm = r_norm


class NumericOverflowError(RuntimeError):
    pass


class AssumptionGateError(RuntimeError):
    def __init__(self, report: 'AssumptionReport') -> None:
        names = ', '.join(c.name for c in report.blocking_failures)
        super().__init__(f'assumption gate failed: {names}')
        self.report = report


@dataclass
class SimConfig:
    """Everything one closed-loop run depends on.

    Args:
        model (TwoLinkModel): Plant with the true parameters.
        controller (ControllerConfig): Gains and bounds of the proposed law.
        spec (ConstraintSpec): State, input and disturbance bounds.
        refbounds (ReferenceBounds): Declared reference bounds.
        reference (ReferenceSignal): Desired trajectory.
        disturbance (DisturbanceProfile): External torque schedule.
        t_end (float): Horizon in seconds. Defaults to 300.
        dt (float): Logging grid step in seconds. Each step is split into RK4 substeps when the
            adaptation loop is stiffer than dt allows. Defaults to 1e-3.
        q0, dq0 (np.ndarray, optional): Initial state. None matches the reference at t = 0.
        theta_hat0 (np.ndarray, optional): Initial estimate. Defaults to zeros.
        decimation (int): Log every decimation-th step. Defaults to 10.
        assumption_gate (str): 'enforce' refuses to run on a blocking failure, 'warn' only logs it.
        law (str): 'proposed' or 'baseline'.
        Gamma_c (np.ndarray, optional): Adaptation gain of the baseline law.
        baseline_saturate (bool): Pass the baseline input through the saturation.
        baseline_projection (bool): Project the baseline update onto the parameter ball.
            Defaults to True.
        zoh (bool): Hold the applied input over each dt step.
        silent (bool): Disable the progress bar.
    """
    model: TwoLinkModel
    controller: ControllerConfig
    spec: ConstraintSpec
    refbounds: ReferenceBounds
    reference: ReferenceSignal = field(default_factory=ReferenceSignal)
    disturbance: DisturbanceProfile = field(default_factory=DisturbanceProfile)
    t_end: float = 300.
    dt: float = 1e-3
    q0: np.ndarray = None
    dq0: np.ndarray = None
    theta_hat0: np.ndarray = None
    decimation: int = 10
    assumption_gate: str = 'enforce'
    law: str = 'proposed'
    Gamma_c: np.ndarray = None
    baseline_saturate: bool = False
    baseline_projection: bool = True
    zoh: bool = False
    silent: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f'dt must be positive, got {self.dt}')
        if not self.t_end >= self.dt:
            raise ValueError(f't_end must be at least dt, got {self.t_end}')
        if int(self.decimation) < 1:
            raise ValueError(f'decimation must be a positive integer, got {self.decimation}')
        if self.assumption_gate not in {'enforce', 'warn'}:
            raise ValueError(f'assumption_gate must be enforce or warn, got {self.assumption_gate}')
        if self.law not in LAWS:
            raise ValueError(f'unsupported controller {self.law}')
        if self.theta_hat0 is None:
            self.theta_hat0 = np.zeros(5)
        self.theta_hat0 = np.asarray(self.theta_hat0, dtype='d')
        assert self.theta_hat0.shape == (5,)
        if self.Gamma_c is None:
            self.Gamma_c = 20 * np.eye(5)
        self.Gamma_c = np.asarray(self.Gamma_c, dtype='d')

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def n_rows(self) -> int:
        return self.n_steps // int(self.decimation) + 1

    def initial_state(self) -> np.ndarray:
        q_d, dq_d, _ = self.reference.evaluate(0.)
        q0 = q_d if self.q0 is None else np.asarray(self.q0, dtype='d')
        dq0 = dq_d if self.dq0 is None else np.asarray(self.dq0, dtype='d')
        return np.concatenate([q0, dq0, self.theta_hat0])


@dataclass
class AssumptionCheck:
    name: str
    passed: bool
    lhs: float
    rhs: float
    blocking: bool
    detail: str = ''


@dataclass
class AssumptionReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.blocking_failures

    @property
    def blocking_failures(self) -> list:
        return [c for c in self.checks if c.blocking and not c.passed]

    @property
    def advisory_failures(self) -> list:
        return [c for c in self.checks if not c.blocking and not c.passed]

    def tabulate(self) -> str:
        msg = '====== assumption checks =======\n'
        for c in self.checks:
            status = 'pass' if c.passed else ('FAIL' if c.blocking else 'warn')
            msg += f'|{c.name:<28}|{status:^6}|{c.lhs:>14.6g} vs {c.rhs:<14.6g}| {c.detail}\n'
        return msg


def _evaluate(sim: SimConfig, t: float, x: np.ndarray, events: Counter = None):
    """Control output, disturbance and the augmented state derivative at (t, x)."""
    if not np.all(np.isfinite(x)):
        raise NumericOverflowError(f'state became non-finite at t = {t:.6g} s')
    state = JointState(x[:2], x[2:N_STATE])
    theta_hat = x[N_STATE:]
    reference = sim.reference.evaluate(t)
    ctrl = sim.controller
    if sim.law == 'proposed':
        try:
            out = control_pipeline(sim.model, ctrl, state, reference, theta_hat, t=t)
        except BarrierDomainError as e:
            raise BarrierViolation(t, e.r_norm)
        theta_dot = adaptation_rhs(out.Y, out.r, ctrl.Gamma, ctrl.kappa_m, ctrl.m_bar,
                                   theta_hat, ctrl.theta_bar, ctrl.proj_eps, events)
    else:
        out = control_pipeline(sim.model, ctrl, state, reference, theta_hat, t=t,
                               saturate_input=sim.baseline_saturate, check_barrier=False)
        theta_dot = baseline_adaptation_rhs(out.Y, out.r, sim.Gamma_c, theta_hat,
                                            ctrl.theta_bar, ctrl.proj_eps,
                                            project=sim.baseline_projection)
    d = sim.disturbance.evaluate(t)
    return out, d, reference, theta_dot


def _plant_rhs(sim: SimConfig, t: float, x: np.ndarray, tau, theta_dot) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise NumericOverflowError(f'state became non-finite at t = {t:.6g} s')
    state = JointState(x[:2], x[2:N_STATE])
    ddq = sim.model.forward_dynamics(state, tau, sim.disturbance.evaluate(t))
    return np.concatenate([state.dq, ddq, theta_dot])


def closed_loop_rhs(sim: SimConfig, t: float, x, events: Counter = None, hold=None) -> np.ndarray:
    """Derivative of the augmented state x = [q; dq; theta_hat].

    Args:
        sim (SimConfig): Plant, controller, reference and disturbance.
        t (float): Time.
        x (np.ndarray): Augmented state.
        events (Counter, optional): Counts barrier-floor activations. Defaults to None.
        hold (np.ndarray, optional): Input held from the start of the step. The estimate rate is
            still evaluated at (t, x). Defaults to None.

    Returns:
        np.ndarray: [dq; ddq; theta_hat_dot].
    """
    x = np.asarray(x, dtype='d')
    out, _, _, theta_dot = _evaluate(sim, t, x, events)
    tau = out.tau if hold is None else hold
    return _plant_rhs(sim, t, x, tau, theta_dot)


def _filtered_state(sim: SimConfig, t: float, x: np.ndarray):
    if not np.all(np.isfinite(x)):
        raise NumericOverflowError(f'state became non-finite at t = {t:.6g} s')
    q, dq = x[:2], x[2:N_STATE]
    q_d, dq_d, ddq_d = sim.reference.evaluate(t)
    de = dq - dq_d
    r = filtered_error(q - q_d, de, sim.controller.alpha)
    return q, dq, de, ddq_d, r


def step_limit(sim: SimConfig, t: float, x) -> float:
    """Largest RK4 step that keeps the linearized closed loop stable at (t, x).

    Two rates are bounded. The estimate and the filtered error exchange energy through
    M(q) r_dot = -Y theta_tilde + ... and the update law; the squared loop frequency is
    |Gamma| |Y|_F^2 / lambda_min(M(q)) times the sensitivity of the update to r, which for the
    barrier law is (kappa_m^2 + m_bar |r|^2) / gap^2 and grows without bound as |r| approaches
    kappa. The velocity feedback of -Y theta_hat - K1 r adds a real decay rate that grows with
    |theta_hat|.

    Args:
        sim (SimConfig): Simulation setup.
        t (float): Time.
        x (np.ndarray): Augmented state.

    Returns:
        float: Step size in seconds.
    """
    x = np.asarray(x, dtype='d')
    q, dq, de, ddq_d, r = _filtered_state(sim, t, x)
    ctrl = sim.controller
    theta_hat = x[N_STATE:]
    Y = sim.model.Y(q, dq, de, ddq_d, r, ctrl.alpha)
    m_min = float(np.linalg.eigvalsh(sim.model.M(q))[0])
    if sim.law == 'proposed':
        r_sq = float(r @ r)
        gap = max(ctrl.kappa_m**2 - ctrl.m_bar * r_sq, ctrl.den_floor)
        gain = np.linalg.norm(ctrl.Gamma, 2) * (ctrl.kappa_m**2 + ctrl.m_bar * r_sq) / gap**2
    else:
        gain = np.linalg.norm(sim.Gamma_c, 2)
    omega = math.sqrt(gain * np.linalg.norm(Y, 'fro')**2 / m_min)
    feedback = (np.linalg.norm(ctrl.K1, 2)
                + np.linalg.norm(theta_hat) * (1 + 3 * ctrl.alpha + 2 * np.linalg.norm(r - dq)))
    rate = max(omega, feedback / m_min)
    return STABILITY_MARGIN * RK4_STABILITY_RADIUS / rate


def _guarded_step(sim: SimConfig, t: float, x: np.ndarray, h: float, h_min: float,
                  events: Counter, hold) -> np.ndarray:
    """One RK4 step that is retried as two half steps when it crosses the barrier."""
    def rhs(s, y):
        return closed_loop_rhs(sim, s, y, events, hold)

    try:
        x_next = rk4_step(rhs, t, x, h)
        if sim.law == 'proposed':
            *_, r = _filtered_state(sim, t + h, x_next)
            if sim.controller.m_bar * float(r @ r) >= sim.controller.kappa_m**2:
                raise BarrierViolation(t + h, float(np.linalg.norm(r)))
    except BarrierViolation:
        if h / 2 < h_min:
            raise
        x_mid = _guarded_step(sim, t, x, h / 2, h_min, events, hold)
        return _guarded_step(sim, t + h / 2, x_mid, h / 2, h_min, events, hold)
    events['substeps'] += 1
    return x_next


def _advance(sim: SimConfig, t: float, x: np.ndarray, dt: float, events: Counter,
             hold=None) -> np.ndarray:
    """Integrates from t to t + dt in RK4 substeps no longer than `step_limit`.

    Substeps are never shorter than dt / 2**MAX_HALVINGS; the state is only returned at t + dt.
    """
    h_min = dt / 2**MAX_HALVINGS
    t_stop = t + dt
    while t_stop - t > 1e-9 * dt:
        remaining = t_stop - t
        limit = max(step_limit(sim, t, x), h_min)
        h = remaining / max(1, math.ceil(remaining / limit))
        x = _guarded_step(sim, t, x, h, h_min, events, hold)
        t += h
    return x


def check_assumptions(sim: SimConfig) -> AssumptionReport:
    """Verifies the standing assumptions before a run.

    Blocking items are the initial-error bounds, C1, the gain condition, positive error margins
    and the disturbance bound. The reference-bound oracle and the parameter-norm bound are
    advisory: their failures are reported but never block a run.
    """
    spec, refbounds, ctrl = sim.spec, sim.refbounds, sim.controller
    checks = []
    horizon = sim.t_end

    q_sup, dq_sup, ddq_sup = reference_bounds_oracle(sim.reference, horizon, sim.dt)
    for name, sup, declared in (('reference position bound', q_sup, refbounds.Qd_bar),
                                ('reference velocity bound', dq_sup, refbounds.Vd_bar),
                                ('reference acceleration bound', ddq_sup, refbounds.alpha3)):
        checks.append(AssumptionCheck(name, sup <= declared * (1 + ORACLE_RTOL), sup, declared,
                                      blocking=False, detail='sup over the horizon vs declared'))

    theta_norm = float(np.linalg.norm(sim.model.theta))
    checks.append(AssumptionCheck('parameter norm bound', theta_norm < ctrl.theta_bar,
                                  theta_norm, ctrl.theta_bar, blocking=False, detail='|theta| < theta_bar'))

    E_Q = spec.Q_bar - refbounds.Qd_bar
    E_V = spec.V_bar - refbounds.Vd_bar
    checks.append(AssumptionCheck('error margins', E_Q > 0 and E_V > 0, min(E_Q, E_V), 0.,
                                  blocking=True, detail='min(E_Q, E_V) > 0'))

    report = check_c1(spec, refbounds, DesignGains(ctrl.K1, ctrl.alpha, ctrl.theta_bar))
    if E_Q > 0 and E_V > 0:
        checks.append(AssumptionCheck('gain condition', ctrl.alpha < report.alpha_max,
                                      ctrl.alpha, report.alpha_max, blocking=True, detail='alpha < E_V/E_Q'))
        checks.append(AssumptionCheck('C1', spec.tau_bar > report.tau_min, spec.tau_bar, report.tau_min,
                                      blocking=True, detail='tau_bar > tau_min'))

        x0 = sim.initial_state()
        q_d, dq_d, _ = sim.reference.evaluate(0.)
        e0 = x0[:2] - q_d
        r0 = x0[2:N_STATE] - dq_d + ctrl.alpha * e0
        kappa = ctrl.kappa
        e_norm, r_norm = float(np.linalg.norm(e0)), float(np.linalg.norm(r0))
        checks.append(AssumptionCheck('initial tracking error', e_norm <= E_Q - kappa / ctrl.alpha,
                                      e_norm, E_Q - kappa / ctrl.alpha, blocking=True,
                                      detail='|e(0)| <= E_Q - kappa/alpha'))
        checks.append(AssumptionCheck('initial filtered error', r_norm < kappa, r_norm, kappa,
                                      blocking=True, detail='|r(0)| < kappa'))

    d_sup = sim.disturbance.sup_norm(horizon)
    checks.append(AssumptionCheck('disturbance bound', d_sup <= spec.d_bar * (1 + DISTURBANCE_RTOL),
                                  d_sup, spec.d_bar, blocking=True, detail='sup |d| <= d_bar'))

    result = AssumptionReport(checks)
    for c in result.advisory_failures:
        logging.warning(f'{c.name} not satisfied: {c.lhs:.6g} vs {c.rhs:.6g} ({c.detail})')
    for c in result.blocking_failures:
        logging.warning(f'{c.name} failed: {c.lhs:.6g} vs {c.rhs:.6g} ({c.detail})')
    return result


def run(sim: SimConfig, controller: str = None) -> 'tuple[SimLog, Metrics]':
    """Integrates the closed loop from 0 to t_end with RK4.

    Rows are logged on the dt grid. Each dt step is split into substeps no longer than
    `step_limit`, so the adaptation loop stays stable as the filtered error nears the barrier.
    The controller is re-evaluated inside every RK4 stage; `sim.zoh` only holds the applied input.
    A barrier violation of the proposed law truncates the log and is recorded on it; a non-finite
    state raises NumericOverflowError.

    Args:
        sim (SimConfig): Simulation setup. Left unchanged.
        controller (str, optional): Overrides `sim.law`. Defaults to None.

    Returns:
        tuple[SimLog, Metrics]: The decimated log and its summary.
    """
    if controller is not None and controller != sim.law:
        if controller not in LAWS:
            raise ValueError(f'unsupported controller {controller}')
        sim = dataclasses.replace(sim, law=controller)

    report = check_assumptions(sim)
    if not report.passed:
        if sim.assumption_gate == 'enforce':
            raise AssumptionGateError(report)
        logging.warning('Blocking assumptions failed; running anyway (assumption_gate = warn).')

    decimation = int(sim.decimation)
    theta_true = sim.model.theta
    rows = np.full((sim.n_rows, len(COLUMNS)), np.nan)
    events = Counter()
    x = sim.initial_state()
    n_logged = 0
    violation = None

    logging.info(f'Simulating the {sim.law} controller for {sim.t_end} s ({sim.n_steps} steps).')
    try:
        for k in tqdm(range(sim.n_steps + 1), disable=sim.silent):
            t = k * sim.dt
            logged = k % decimation == 0
            if logged or sim.zoh:
                out, d, (q_d, dq_d, _), _ = _evaluate(sim, t, x, events)
            if logged:
                rows[n_logged] = log_row(t, x[:2], x[2:N_STATE], q_d, dq_d, x[N_STATE:],
                                         out, d, sim.controller, theta_true)
                n_logged += 1
            if k == sim.n_steps:
                break
            x = _advance(sim, t, x, sim.dt, events, out.tau if sim.zoh else None)
            if not np.all(np.isfinite(x)):
                raise NumericOverflowError(f'state became non-finite at t = {t + sim.dt:.6g} s')
    except BarrierViolation as e:
        violation = e.t
        logging.warning(f'Barrier violation at t = {e.t:.6g} s; the log is truncated.')

    if events['substeps'] > sim.n_steps:
        logging.info(f'Used {events["substeps"]} RK4 substeps for {sim.n_steps} steps.')
    floor_events = events['barrier_floor']
    if floor_events:
        logging.warning(f'Barrier denominator was floored {floor_events} times.')

    if n_logged == 0:
        raise BarrierViolation(violation)
    log = SimLog(rows[:n_logged], law=sim.law, barrier_violation=violation, floor_events=floor_events)
    result = compute_metrics(log, sim.spec, kappa=sim.controller.kappa,
                             margins=(sim.spec.Q_bar - sim.refbounds.Qd_bar,
                                      sim.spec.V_bar - sim.refbounds.Vd_bar))
    return log, result
