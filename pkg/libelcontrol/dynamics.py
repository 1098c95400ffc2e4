from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ['JointState',
           'TwoLinkParams',
           'ModelBounds',
           'TwoLinkModel',
           'SingularInertiaError',
           'NonPositiveDefiniteError',
           'PAPER_PARAMS',
           'mass_matrix',
           'mass_matrix_derivative',
           'coriolis_matrix',
           'friction',
           'gravity',
           'forward_dynamics',
           'regressor',
           'inertia_bounds',
           'skew_defect']

FRICTION_MODELS = {'viscous', 'constant'}
MAX_CONDITION = 1e12


class SingularInertiaError(RuntimeError):
    pass


class NonPositiveDefiniteError(ValueError):
    pass


@dataclass(frozen=True)
class JointState:
    """Generalized position `q` (rad) and velocity `dq` (rad/s)."""
    q: np.ndarray
    dq: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'q', np.asarray(self.q, dtype='d'))
        object.__setattr__(self, 'dq', np.asarray(self.dq, dtype='d'))
        if self.q.shape != self.dq.shape:
            raise ValueError(f'q and dq differ in dimension: {self.q.shape} vs {self.dq.shape}')
        if not (np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.dq))):
            raise ValueError('joint state has non-finite entries')


@dataclass(frozen=True)
class TwoLinkParams:
    """Inertia parameters p1, p2, p3 (kg m) and friction coefficients fd1, fd2 (N s)
    of the planar two-link arm.
    """
    p1: float
    p2: float
    p3: float
    fd1: float
    fd2: float
    friction_model: str = 'viscous'

    def __post_init__(self):
        if self.friction_model not in FRICTION_MODELS:
            raise ValueError(f'unsupported friction model {self.friction_model}')
        if self.p1 <= 0 or self.p2 <= 0:
            raise NonPositiveDefiniteError(f'p1 and p2 must be positive, got {self.p1}, {self.p2}')
        # det M(q) = p1*p2 - p2**2 - p3**2*cos(q2)**2 is smallest at cos(q2) = +-1
        if self.p1 * self.p2 - self.p2**2 - self.p3**2 <= 0:
            raise NonPositiveDefiniteError(
                'p1*p2 - p2^2 - p3^2 must be positive for M(q) to be positive definite')

    @property
    def theta(self) -> np.ndarray:
        """Parameter vector ordered as [p1, p2, p3, fd1, fd2]."""
        return np.array([self.p1, self.p2, self.p3, self.fd1, self.fd2])

    @classmethod
    def from_theta(cls, theta, friction_model: str = 'viscous') -> 'TwoLinkParams':
        p1, p2, p3, fd1, fd2 = (float(x) for x in theta)
        return cls(p1, p2, p3, fd1, fd2, friction_model)


@dataclass(frozen=True)
class ModelBounds:
    """Eigenvalue bounds of M(q): m1 <= lambda(M(q)) <= m2 <= m_bar for all q."""
    m1: float
    m2: float
    m_bar: float


PAPER_PARAMS = TwoLinkParams(p1=3.473, p2=0.196, p3=0.242, fd1=5.3, fd2=1.1)


def mass_matrix(params: TwoLinkParams, q) -> np.ndarray:
    c2 = math.cos(q[1])
    m12 = params.p2 + params.p3 * c2
    return np.array([[params.p1 + 2 * params.p3 * c2, m12],
                     [m12, params.p2]])


def mass_matrix_derivative(params: TwoLinkParams, q, dq) -> np.ndarray:
    """Time derivative of M(q) along dq, i.e. (dM/dq2) * dq2."""
    s2 = math.sin(q[1])
    a = -params.p3 * s2 * dq[1]
    return np.array([[2 * a, a],
                     [a, 0.]])


def coriolis_matrix(params: TwoLinkParams, q, dq) -> np.ndarray:
    s2 = math.sin(q[1])
    h = params.p3 * s2
    return np.array([[-h * dq[1], -h * (dq[0] + dq[1])],
                     [h * dq[0], 0.]])


def friction(params: TwoLinkParams, dq) -> np.ndarray:
    """Friction torque Fd. The viscous model is diag(fd1, fd2) @ dq; the constant model
    returns [fd1, fd2] regardless of the velocity.
    """
    if params.friction_model == 'constant':
        return np.array([params.fd1, params.fd2])
    return np.array([params.fd1 * dq[0], params.fd2 * dq[1]])


def gravity(params: TwoLinkParams, q) -> np.ndarray:
    # planar arm, no gravity loading
    return np.zeros(2)


def forward_dynamics(params: TwoLinkParams, state: JointState, tau, d) -> np.ndarray:
    """Solves M(q) ddq = tau + d - Vm(q, dq) dq - Gr(q) - Fd(dq) for the joint acceleration.

    Args:
        params (TwoLinkParams): Plant parameters.
        state (JointState): Current position and velocity.
        tau (np.ndarray): Applied input torque.
        d (np.ndarray): External disturbance torque.

    Returns:
        np.ndarray: Joint acceleration in rad/s^2.
    """
    q, dq = state.q, state.dq
    M = mass_matrix(params, q)
    lam_min, lam_max = np.linalg.eigvalsh(M)
    if lam_min <= 0 or lam_max / lam_min > MAX_CONDITION:
        raise SingularInertiaError(f'inertia matrix is ill-conditioned at q = {q}')
    rhs = (np.asarray(tau, dtype='d') + np.asarray(d, dtype='d')
           - coriolis_matrix(params, q, dq) @ dq
           - gravity(params, q)
           - friction(params, dq))
    return np.linalg.solve(M, rhs)


def regressor(q, dq, e_dot, ddq_d, r, alpha: float, friction_model: str = 'viscous') -> np.ndarray:
    """Known regressor Y with Y @ theta = M(q)(alpha*e_dot - ddq_d) + Vm(q, dq)(r - dq) - Fd(dq) - Gr(q)
    for theta = [p1, p2, p3, fd1, fd2].

    Args:
        q (np.ndarray): Joint position.
        dq (np.ndarray): Joint velocity.
        e_dot (np.ndarray): Velocity tracking error dq - dq_d.
        ddq_d (np.ndarray): Desired acceleration.
        r (np.ndarray): Filtered tracking error.
        alpha (float): Filter gain.
        friction_model (str): 'viscous' or 'constant'. Defaults to 'viscous'.

    Returns:
        np.ndarray: The 2 x 5 regressor.
    """
    c2, s2 = math.cos(q[1]), math.sin(q[1])
    a1 = alpha * e_dot[0] - ddq_d[0]
    a2 = alpha * e_dot[1] - ddq_d[1]
    b1 = r[0] - dq[0]
    b2 = r[1] - dq[1]
    if friction_model == 'constant':
        f1, f2 = -1., -1.
    else:
        f1, f2 = -dq[0], -dq[1]

    Y = np.zeros((2, 5))
    Y[0, 0] = a1
    Y[0, 1] = a2
    Y[0, 2] = c2 * (2 * a1 + a2) - s2 * (dq[1] * b1 + (dq[0] + dq[1]) * b2)
    Y[0, 3] = f1
    Y[1, 1] = a1 + a2
    Y[1, 2] = c2 * a1 + s2 * dq[0] * b1
    Y[1, 4] = f2
    return Y


def inertia_bounds(params: TwoLinkParams, num: int = 10001, margin: float = 0.01) -> ModelBounds:
    """Certifies the eigenvalue bounds of M(q) by a dense sweep of q2 over [0, 2*pi].
    M depends on q only through q2, so the sweep covers every configuration.

    Args:
        params (TwoLinkParams): Plant parameters.
        num (int): Number of grid points. Defaults to 10001.
        margin (float): Relative margin added on top of the largest eigenvalue. Defaults to 0.01.

    Returns:
        ModelBounds: m1, m2 and m_bar = m2 * (1 + margin).
    """
    c2 = np.cos(np.linspace(0, 2 * np.pi, num))
    m12 = params.p2 + params.p3 * c2
    M = np.empty((num, 2, 2))
    M[:, 0, 0] = params.p1 + 2 * params.p3 * c2
    M[:, 0, 1] = m12
    M[:, 1, 0] = m12
    M[:, 1, 1] = params.p2
    eigvals = np.linalg.eigvalsh(M)  # ascending, shape (num, 2)

    m1 = float(eigvals[:, 0].min())
    m2 = float(eigvals[:, 1].max())
    if m1 <= 0:
        raise NonPositiveDefiniteError(f'inertia matrix is not positive definite (lambda_min = {m1})')
    return ModelBounds(m1=m1, m2=m2, m_bar=m2 * (1 + margin))


def skew_defect(params: TwoLinkParams, q, dq, mu) -> float:
    """mu^T (dM/dt - 2 Vm) mu, which vanishes for a skew-symmetric dM/dt - 2 Vm."""
    mu = np.asarray(mu, dtype='d')
    N = mass_matrix_derivative(params, q, dq) - 2 * coriolis_matrix(params, q, dq)
    return float(mu @ N @ mu)


class TwoLinkModel:
    """Evaluators for the two-link arm bound to one set of parameters.

    Args:
        params (TwoLinkParams): Plant parameters.
    """

    def __init__(self, params: TwoLinkParams = PAPER_PARAMS) -> None:
        self.params = params

    @property
    def theta(self) -> np.ndarray:
        return self.params.theta

    def M(self, q) -> np.ndarray:
        return mass_matrix(self.params, q)

    def Vm(self, q, dq) -> np.ndarray:
        return coriolis_matrix(self.params, q, dq)

    def Fd(self, dq) -> np.ndarray:
        return friction(self.params, dq)

    def Gr(self, q) -> np.ndarray:
        return gravity(self.params, q)

    def Y(self, q, dq, e_dot, ddq_d, r, alpha) -> np.ndarray:
        return regressor(q, dq, e_dot, ddq_d, r, alpha, self.params.friction_model)

    def forward_dynamics(self, state: JointState, tau, d) -> np.ndarray:
        return forward_dynamics(self.params, state, tau, d)

    def bounds(self, **kwargs) -> ModelBounds:
        return inertia_bounds(self.params, **kwargs)
