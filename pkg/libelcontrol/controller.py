from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .dynamics import JointState, TwoLinkModel

__all__ = ['ControllerConfig',
           'AdaptiveState',
           'ControlOutput',
           'BarrierDomainError',
           'filtered_error',
           'auxiliary_control',
           'saturate',
           'blf_value',
           'lyapunov_value',
           'projection',
           'adaptation_rhs',
           'control_pipeline',
           'baseline_control',
           'baseline_adaptation_rhs']

DEN_FLOOR_RATIO = 1e-9


class BarrierDomainError(ValueError):
    """The filtered error reached the barrier, m_bar * |r|^2 >= kappa_m^2."""

    def __init__(self, message: str, t: float = None, r_norm: float = None) -> None:
        super().__init__(message)
        self.t = t
        self.r_norm = r_norm


def _is_spd(a: np.ndarray) -> bool:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    if not np.allclose(a, a.T):
        return False
    return bool(np.linalg.eigvalsh(0.5 * (a + a.T)).min() > 0)


@dataclass
class ControllerConfig:
    """Gains and bounds of the saturated adaptive controller.

    Args:
        K1 (np.ndarray): Symmetric positive-definite 2 x 2 feedback gain.
        alpha (float): Filter gain of r = de + alpha * e.
        Gamma (np.ndarray): Positive-definite 5 x 5 adaptation gain.
        theta_bar (float): Bound on the norm of the true parameter vector.
        tau_bar (float): Bound on the norm of the applied input (N m).
        kappa (float): Bound on the norm of the filtered error, E_V - alpha * E_Q.
        m_bar (float): Certified upper bound of r^T M r / |r|^2.
        proj_eps (float): Projection margin in (0, 0.1]. Defaults to 0.05.
    """
    K1: np.ndarray
    alpha: float
    Gamma: np.ndarray
    theta_bar: float
    tau_bar: float
    kappa: float
    m_bar: float
    proj_eps: float = 0.05

    def __post_init__(self):
        self.K1 = np.asarray(self.K1, dtype='d')
        self.Gamma = np.asarray(self.Gamma, dtype='d')
        if not _is_spd(self.K1):
            raise ValueError('K1 must be symmetric positive definite')
        if not _is_spd(self.Gamma):
            raise ValueError('Gamma must be symmetric positive definite')
        for name in ('alpha', 'theta_bar', 'tau_bar', 'kappa', 'm_bar'):
            if not getattr(self, name) > 0:
                raise ValueError(f'{name} must be positive, got {getattr(self, name)}')
        if not 0 < self.proj_eps <= 0.1:
            raise ValueError(f'proj_eps must lie in (0, 0.1], got {self.proj_eps}')

    @property
    def kappa_m(self) -> float:
        return self.kappa * math.sqrt(self.m_bar)

    @property
    def den_floor(self) -> float:
        return DEN_FLOOR_RATIO * self.kappa_m**2

    @property
    def theta_hat_bound(self) -> float:
        """Radius of the ball the projection keeps the estimate in."""
        return self.theta_bar * math.sqrt(1 + self.proj_eps)


@dataclass
class AdaptiveState:
    theta_hat: np.ndarray = field(default_factory=lambda: np.zeros(5))

    def __post_init__(self):
        self.theta_hat = np.asarray(self.theta_hat, dtype='d')


@dataclass
class ControlOutput:
    """Signals computed by one pass of the control law."""
    e: np.ndarray
    de: np.ndarray
    r: np.ndarray
    Y: np.ndarray
    u: np.ndarray
    tau: np.ndarray
    delta_tau: np.ndarray


def filtered_error(e, de, alpha: float) -> np.ndarray:
    e, de = np.asarray(e, dtype='d'), np.asarray(de, dtype='d')
    assert e.shape == de.shape
    return de + alpha * e


def auxiliary_control(Y: np.ndarray, theta_hat, K1: np.ndarray, r) -> np.ndarray:
    """u = -Y theta_hat - K1 r."""
    return -Y @ theta_hat - K1 @ r


def saturate(u, tau_bar: float) -> np.ndarray:
    """Scales u onto the ball of radius tau_bar. Inputs with |u| <= tau_bar pass through unchanged."""
    u = np.asarray(u, dtype='d')
    norm = float(np.linalg.norm(u))
    if norm <= tau_bar:
        return u.copy()
    return (tau_bar / norm) * u


def _barrier_gap(r, kappa_m: float, m_bar: float) -> float:
    r = np.asarray(r, dtype='d')
    gap = kappa_m**2 - m_bar * float(r @ r)
    if gap <= 0:
        r_norm = float(np.linalg.norm(r))
        raise BarrierDomainError(
            f'filtered error |r| = {r_norm:.6g} reached the barrier kappa = {kappa_m / math.sqrt(m_bar):.6g}',
            r_norm=r_norm)
    return gap


def blf_value(r, kappa_m: float, m_bar: float) -> float:
    """Barrier Lyapunov function 0.5 * log(kappa_m^2 / (kappa_m^2 - m_bar |r|^2))."""
    gap = _barrier_gap(r, kappa_m, m_bar)
    return 0.5 * math.log(kappa_m**2 / gap)


def lyapunov_value(r, theta_tilde, Gamma: np.ndarray, kappa_m: float, m_bar: float) -> float:
    """Composite Lyapunov value: barrier term plus 0.5 * theta_tilde^T Gamma^-1 theta_tilde."""
    theta_tilde = np.asarray(theta_tilde, dtype='d')
    quadratic = float(theta_tilde @ np.linalg.solve(Gamma, theta_tilde))
    return blf_value(r, kappa_m, m_bar) + 0.5 * quadratic


def projection(theta_hat, y, theta_bar: float, eps: float) -> np.ndarray:
    """Smooth projection of the update direction `y` for the ball |theta_hat| <= theta_bar.

    With f(theta) = (|theta|^2 - theta_bar^2) / (eps * theta_bar^2), the direction is returned
    unchanged when f <= 0 or when it points inward; otherwise its component along grad f is
    scaled by (1 - f). The estimate can therefore never leave |theta| <= theta_bar * sqrt(1 + eps).

    Args:
        theta_hat (np.ndarray): Current estimate.
        y (np.ndarray): Unprojected update direction.
        theta_bar (float): Nominal radius.
        eps (float): Projection margin in (0, 0.1].

    Returns:
        np.ndarray: The projected direction.
    """
    theta_hat = np.asarray(theta_hat, dtype='d')
    y = np.asarray(y, dtype='d')
    scale = eps * theta_bar**2
    f = (float(theta_hat @ theta_hat) - theta_bar**2) / scale
    grad = 2 * theta_hat / scale
    grad_y = float(grad @ y)
    if f <= 0 or grad_y <= 0:
        return y.copy()
    return y - f * grad_y / float(grad @ grad) * grad


def adaptation_rhs(Y: np.ndarray, r, Gamma: np.ndarray, kappa_m: float, m_bar: float,
                   theta_hat, theta_bar: float, eps: float, events: Counter = None) -> np.ndarray:
    """Projected BLF update law Gamma Y^T r / (kappa_m^2 - m_bar |r|^2).

    The denominator is floored at 1e-9 * kappa_m^2. Floor activations are counted under
    'barrier_floor' in `events` when a Counter is given, otherwise logged as warnings.
    """
    r = np.asarray(r, dtype='d')
    gap = kappa_m**2 - m_bar * float(r @ r)
    floor = DEN_FLOOR_RATIO * kappa_m**2
    if gap < floor:
        if events is not None:
            events['barrier_floor'] += 1
        else:
            logging.warning(f'barrier denominator {gap:.3g} floored at {floor:.3g}')
        gap = floor
    return projection(theta_hat, Gamma @ (Y.T @ r) / gap, theta_bar, eps)


def control_pipeline(model: TwoLinkModel, config: ControllerConfig, state: JointState,
                     reference, theta_hat, t: float = None, saturate_input: bool = True,
                     check_barrier: bool = True) -> ControlOutput:
    """Evaluates the tracking errors, regressor, auxiliary input and saturated input in one pass.

    Args:
        model (TwoLinkModel): Model providing the regressor structure.
        config (ControllerConfig): Controller gains and bounds.
        state (JointState): Measured position and velocity.
        reference (tuple): Desired (q_d, dq_d, ddq_d) at time t.
        theta_hat (np.ndarray): Current parameter estimate.
        t (float, optional): Time stamp attached to a barrier error. Defaults to None.
        saturate_input (bool, optional): Whether to apply the norm saturation. Defaults to True.
        check_barrier (bool, optional): Whether |r| >= kappa raises. Defaults to True.

    Returns:
        ControlOutput: e, de, r, Y, u, tau and delta_tau = tau - u.
    """
    q_d, dq_d, ddq_d = reference
    e = state.q - q_d
    de = state.dq - dq_d
    r = filtered_error(e, de, config.alpha)
    if check_barrier and config.m_bar * float(r @ r) >= config.kappa_m**2:
        r_norm = float(np.linalg.norm(r))
        raise BarrierDomainError(
            f'filtered error |r| = {r_norm:.6g} reached kappa = {config.kappa:.6g} at t = {t}',
            t=t, r_norm=r_norm)

    Y = model.Y(state.q, state.dq, de, ddq_d, r, config.alpha)
    u = auxiliary_control(Y, theta_hat, config.K1, r)
    tau = saturate(u, config.tau_bar) if saturate_input else u.copy()
    return ControlOutput(e=e, de=de, r=r, Y=Y, u=u, tau=tau, delta_tau=tau - u)


def baseline_control(Y: np.ndarray, theta_hat, K1: np.ndarray, r) -> np.ndarray:
    """Classical robust adaptive law u = -Y theta_hat - K1 r, applied without saturation."""
    return auxiliary_control(Y, theta_hat, K1, r)


def baseline_adaptation_rhs(Y: np.ndarray, r, Gamma_c: np.ndarray, theta_hat,
                            theta_bar: float, eps: float, project: bool = True) -> np.ndarray:
    """Gradient update Gamma_c Y^T r without the barrier denominator.

    With `project` off this is the plain gradient law, whose estimate is free to drift.
    """
    y = Gamma_c @ (Y.T @ np.asarray(r, dtype='d'))
    if not project:
        return y
    return projection(theta_hat, y, theta_bar, eps)
