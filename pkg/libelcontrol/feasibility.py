"""Feasibility condition C1 and the derived bounds of the constrained controller.

The state constraints |q| < Q_bar, |dq| < V_bar become bounds on the tracking errors
through the margins E_Q = Q_bar - Qd_bar and E_V = V_bar - Vd_bar. The filter gain alpha
must satisfy alpha < E_V / E_Q, the filtered error is kept below kappa = E_V - alpha * E_Q, and
C1 requires

    tau_bar > omega1 + omega2 * V_bar - omega3 * Q_bar.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from tqdm import tqdm

__all__ = ['ConstraintSpec',
           'ReferenceBounds',
           'DesignGains',
           'FeasibilityReport',
           'FeasibilityGrid',
           'FeasibilityVolume',
           'GainScan',
           'InfeasibleReferenceError',
           'GainConditionError',
           'InconsistentBoundError',
           'NoFeasibleValueError',
           'PAPER_QUOTED',
           'CASES',
           'error_margins',
           'alpha_max',
           'kappa_of',
           'omegas',
           'psi_xi',
           'tau_min',
           'tau_min_omega_form',
           'u_bound',
           'check_c1',
           'sweep',
           'sweep_volume',
           'gain_scan',
           'min_feasible',
           'max_feasible',
           'reference_bounds_oracle',
           'paper_comparison']

CONSISTENCY_TOL = 1e-9
BISECT_XTOL = 1e-6
BISECT_MAXITER = 200

# values quoted alongside the simulation example, kept for side-by-side reporting
PAPER_QUOTED = {'alpha_max': 0.58, 'kappa': 0.04, 'tau_min': 28.5}

# case -> (axis1, axis2, axis the boundary is a function of)
CASES = {'tau-q': ('tau_bar', 'Q_bar', 'Q_bar'),
         'tau-v': ('tau_bar', 'V_bar', 'V_bar'),
         'q-v': ('Q_bar', 'V_bar', 'Q_bar')}
CASE_ALIASES = {'tau_vs_Q': 'tau-q', 'tau_vs_V': 'tau-v', 'Q_vs_V': 'q-v'}


class InfeasibleReferenceError(ValueError):
    pass


class GainConditionError(ValueError):
    pass


class InconsistentBoundError(RuntimeError):
    pass


class NoFeasibleValueError(ValueError):
    pass


@dataclass(frozen=True)
class ConstraintSpec:
    """User constraints: |q| < Q_bar, |dq| < V_bar, |tau| <= tau_bar, |d| <= d_bar."""
    Q_bar: float
    V_bar: float
    tau_bar: float
    d_bar: float

    def __post_init__(self):
        for name in ('Q_bar', 'V_bar', 'tau_bar', 'd_bar'):
            if not getattr(self, name) > 0:
                raise ValueError(f'{name} must be strictly positive, got {getattr(self, name)}')

    def replace(self, **changes) -> 'ConstraintSpec':
        values = dict(Q_bar=self.Q_bar, V_bar=self.V_bar, tau_bar=self.tau_bar, d_bar=self.d_bar)
        values.update(changes)
        return ConstraintSpec(**values)


@dataclass(frozen=True)
class ReferenceBounds:
    """Declared bounds |q_d| <= Qd_bar, |dq_d| <= Vd_bar, |ddq_d| <= alpha3."""
    Qd_bar: float
    Vd_bar: float
    alpha3: float


@dataclass(frozen=True)
class DesignGains:
    """Design quantities C1 depends on: the feedback gain K1, the filter gain alpha
    and the parameter-norm bound theta_bar.
    """
    K1: np.ndarray
    alpha: float
    theta_bar: float

    @property
    def lam_min(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.K1 + np.transpose(self.K1))).min())

    @property
    def lam_max(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.K1 + np.transpose(self.K1))).max())


@dataclass
class FeasibilityReport:
    E_Q: float
    E_V: float
    alpha: float
    alpha_max: float
    kappa: float
    omega1: float
    omega2: float
    omega3: float
    Psi: float
    xi: float
    tau_min: float
    tau_min_c11: float
    tau_bar: float
    kappa_bound: float
    kappa_ok: bool
    feasible: bool
    reasons: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class FeasibilityGrid:
    """C1 evaluated on a rectangular grid. `feasible[i, j]` belongs to (axis1[i], axis2[j]);
    `boundary[k]` is the boundary value at the k-th value of the column axis.
    """
    case: str
    axis1_name: str
    axis2_name: str
    axis1: np.ndarray
    axis2: np.ndarray
    feasible: np.ndarray
    boundary: np.ndarray
    floor: np.ndarray
    column_axis: str


@dataclass
class FeasibilityVolume:
    """C1 on a (tau_bar, Q_bar, V_bar) grid. `feasible[i, j, k]` belongs to
    (tau_bar[i], Q_bar[j], V_bar[k]) and `boundary[j, k]` is tau_min at (Q_bar[j], V_bar[k]):
    inf where the gain condition fails, nan where an error margin is not positive.
    """
    tau_bar: np.ndarray
    Q_bar: np.ndarray
    V_bar: np.ndarray
    feasible: np.ndarray
    boundary: np.ndarray


@dataclass
class GainScan:
    """C1 at fixed constraints over filter gains alpha and feedback scales k, with K1 replaced by
    k * K1. `tau_min[i, j]` belongs to (alpha[i], k_scale[j]) and is inf where the gain condition
    fails; `kappa[i]` is the filtered-error bound of alpha[i].
    """
    alpha: np.ndarray
    k_scale: np.ndarray
    tau_min: np.ndarray
    kappa: np.ndarray
    feasible: np.ndarray
    tau_bar: float

    def best(self) -> 'tuple[float, float, float]':
        """(alpha, k, tau_min) of the grid point with the smallest tau_min, or None if every
        point breaks the gain condition."""
        if not np.isfinite(self.tau_min).any():
            return None
        i, j = np.unravel_index(np.argmin(self.tau_min), self.tau_min.shape)
        return float(self.alpha[i]), float(self.k_scale[j]), float(self.tau_min[i, j])


def error_margins(spec: ConstraintSpec, refbounds: ReferenceBounds) -> 'tuple[float, float]':
    """Transforms the state constraints into tracking-error margins E_Q and E_V."""
    E_Q = spec.Q_bar - refbounds.Qd_bar
    E_V = spec.V_bar - refbounds.Vd_bar
    if E_Q <= 0:
        raise InfeasibleReferenceError(
            f'reference exceeds state constraint: Qd_bar {refbounds.Qd_bar} >= Q_bar {spec.Q_bar}')
    if E_V <= 0:
        raise InfeasibleReferenceError(
            f'reference exceeds state constraint: Vd_bar {refbounds.Vd_bar} >= V_bar {spec.V_bar}')
    return E_Q, E_V


def alpha_max(E_Q: float, E_V: float) -> float:
    """Supremum of admissible filter gains; alpha must be strictly smaller."""
    return E_V / E_Q


def kappa_of(E_V: float, alpha: float, E_Q: float) -> float:
    kappa = E_V - alpha * E_Q
    if kappa <= 0:
        raise GainConditionError(
            f'gain condition violated: alpha {alpha:.6g} >= E_V/E_Q {E_V / E_Q:.6g}')
    return kappa


def omegas(theta_bar: float, alpha: float, K1, refbounds: ReferenceBounds,
           d_bar: float) -> 'tuple[float, float, float]':
    gains = DesignGains(np.asarray(K1, dtype='d'), alpha, theta_bar)
    omega2 = gains.lam_max + theta_bar * (2 * alpha + 3) - gains.lam_min
    omega3 = alpha * (omega2 - theta_bar * (alpha + 1))
    omega1 = (theta_bar * (refbounds.Vd_bar + refbounds.alpha3 + 2) + d_bar
              - omega2 * refbounds.Vd_bar + omega3 * refbounds.Qd_bar)
    return omega1, omega2, omega3


def psi_xi(theta_bar: float, alpha: float, K1, refbounds: ReferenceBounds,
           margins: 'tuple[float, float]') -> 'tuple[float, float]':
    """Constants of the a-priori input bound |u| <= Psi |r| + xi."""
    E_Q, E_V = margins
    kappa = E_V - alpha * E_Q
    lam_max = DesignGains(np.asarray(K1, dtype='d'), alpha, theta_bar).lam_max
    Psi = theta_bar * (2 * alpha + 3) + lam_max
    xi = theta_bar * (alpha**2 * E_Q + alpha * E_Q - kappa * (alpha + 1)
                      + refbounds.Vd_bar + refbounds.alpha3 + 2)
    return Psi, xi


def u_bound(r_norm: float, Psi: float, xi: float) -> float:
    return Psi * r_norm + xi


def tau_min_omega_form(theta_bar: float, alpha: float, K1, refbounds: ReferenceBounds,
                       margins: 'tuple[float, float]', d_bar: float) -> float:
    """omega1 + omega2 * V_bar - omega3 * Q_bar with the bounds recovered from the margins."""
    E_Q, E_V = margins
    omega1, omega2, omega3 = omegas(theta_bar, alpha, K1, refbounds, d_bar)
    Q_bar = E_Q + refbounds.Qd_bar
    V_bar = E_V + refbounds.Vd_bar
    return omega1 + omega2 * V_bar - omega3 * Q_bar


def tau_min(theta_bar: float, alpha: float, K1, refbounds: ReferenceBounds,
            margins: 'tuple[float, float]', d_bar: float) -> float:
    """Smallest input bound admitted by C1.

    Args:
        theta_bar (float): Parameter-norm bound.
        alpha (float): Filter gain.
        K1 (np.ndarray): Feedback gain.
        refbounds (ReferenceBounds): Declared reference bounds.
        margins (tuple[float, float]): (E_Q, E_V).
        d_bar (float): Disturbance bound.

    Returns:
        float: tau_min; C1 holds iff tau_bar > tau_min.
    """
    E_Q, E_V = margins
    gains = DesignGains(np.asarray(K1, dtype='d'), alpha, theta_bar)
    value = (theta_bar * (alpha**2 * E_Q + alpha * E_Q + refbounds.Vd_bar + refbounds.alpha3 + 2)
             + d_bar
             + (E_V - alpha * E_Q) * (theta_bar * (2 * alpha + 3) + gains.lam_max - gains.lam_min))

    check = tau_min_omega_form(theta_bar, alpha, K1, refbounds, margins, d_bar)
    if abs(value - check) > CONSISTENCY_TOL * max(1., abs(value)):
        raise InconsistentBoundError(
            f'tau_min forms disagree: {value!r} vs omega form {check!r}')
    return value


def check_c1(spec: ConstraintSpec, refbounds: ReferenceBounds, gains: DesignGains) -> FeasibilityReport:
    """Evaluates condition C1 together with the gain condition and the reference margins.
    Problems are collected in `reasons` instead of being raised.

    Args:
        spec (ConstraintSpec): User constraints.
        refbounds (ReferenceBounds): Declared reference bounds.
        gains (DesignGains): K1, alpha and theta_bar.

    Returns:
        FeasibilityReport: All derived quantities and the feasible flag.
    """
    reasons = []
    E_Q = spec.Q_bar - refbounds.Qd_bar
    E_V = spec.V_bar - refbounds.Vd_bar
    nan = float('nan')
    if E_Q <= 0 or E_V <= 0:
        reasons.append('reference exceeds state constraint '
                       f'(E_Q = {E_Q:.6g}, E_V = {E_V:.6g})')
        return FeasibilityReport(E_Q=E_Q, E_V=E_V, alpha=gains.alpha, alpha_max=nan, kappa=nan,
                                 omega1=nan, omega2=nan, omega3=nan, Psi=nan, xi=nan,
                                 tau_min=nan, tau_min_c11=nan, tau_bar=spec.tau_bar,
                                 kappa_bound=nan, kappa_ok=False,
                                 feasible=False, reasons=reasons)

    a_max = alpha_max(E_Q, E_V)
    kappa = E_V - gains.alpha * E_Q
    if not gains.alpha < a_max:
        reasons.append(f'gain condition: alpha {gains.alpha:.6g} >= E_V/E_Q {a_max:.6g}')

    omega1, omega2, omega3 = omegas(gains.theta_bar, gains.alpha, gains.K1, refbounds, spec.d_bar)
    if not (omega2 > 0 and omega3 > 0):
        reasons.append(f'omega coefficients must be positive (omega2 = {omega2:.6g}, omega3 = {omega3:.6g})')

    Psi, xi = psi_xi(gains.theta_bar, gains.alpha, gains.K1, refbounds, (E_Q, E_V))
    spread = Psi - gains.lam_min
    kappa_bound = (spec.tau_bar - xi - spec.d_bar) / spread if spread > 0 else float('inf')
    tau_min_c11 = xi + spec.d_bar + kappa * spread

    t_min = tau_min(gains.theta_bar, gains.alpha, gains.K1, refbounds, (E_Q, E_V), spec.d_bar)
    if not spec.tau_bar > t_min:
        reasons.append(f'C1: tau_bar {spec.tau_bar:.4g} <= tau_min {t_min:.2f}')

    return FeasibilityReport(E_Q=E_Q, E_V=E_V, alpha=gains.alpha, alpha_max=a_max, kappa=kappa,
                             omega1=omega1, omega2=omega2, omega3=omega3, Psi=Psi, xi=xi,
                             tau_min=t_min, tau_min_c11=tau_min_c11, tau_bar=spec.tau_bar,
                             kappa_bound=kappa_bound, kappa_ok=bool(kappa < kappa_bound),
                             feasible=not reasons, reasons=reasons)


def _boundary(case: str, column_value: float, spec: ConstraintSpec,
              refbounds: ReferenceBounds, gains: DesignGains) -> 'tuple[float, float]':
    """Boundary and floor of the feasible set at one value of the column axis.

    For tau-q and tau-v the boundary is tau_min and the floor is nan; a column where the gain
    condition fails is infeasible at every tau_bar and gets an infinite boundary. For q-v the
    boundary is the largest V_bar admitted by C1, floored at Vd_bar, and the floor is the
    smallest V_bar admitted by the gain condition, Vd_bar + alpha * (Q_bar - Qd_bar).
    """
    nan = float('nan')
    if case == 'q-v':
        if column_value <= refbounds.Qd_bar:
            return nan, nan
        omega1, omega2, omega3 = omegas(gains.theta_bar, gains.alpha, gains.K1, refbounds, spec.d_bar)
        v_max = max((spec.tau_bar - omega1 + omega3 * column_value) / omega2, refbounds.Vd_bar)
        v_floor = refbounds.Vd_bar + gains.alpha * (column_value - refbounds.Qd_bar)
        return v_max, v_floor

    point = spec.replace(**{CASES[case][2]: column_value})
    E_Q = point.Q_bar - refbounds.Qd_bar
    E_V = point.V_bar - refbounds.Vd_bar
    if E_Q <= 0 or E_V <= 0:
        return nan, nan
    if not gains.alpha < alpha_max(E_Q, E_V):
        return float('inf'), nan
    return tau_min(gains.theta_bar, gains.alpha, gains.K1, refbounds, (E_Q, E_V), spec.d_bar), nan


def sweep(case: str, grid, spec: ConstraintSpec, refbounds: ReferenceBounds,
          gains: DesignGains, silent: bool = True) -> FeasibilityGrid:
    """Evaluates check_c1 on a two-axis grid.

    Args:
        case (str): 'tau-q', 'tau-v' or 'q-v' (or the long names tau_vs_Q, tau_vs_V, Q_vs_V).
        grid (tuple): ((a0, a1, n1), (b0, b1, n2)) ranges of the two case axes.
        spec (ConstraintSpec): Template providing the fixed constraint and d_bar.
        refbounds (ReferenceBounds): Declared reference bounds.
        gains (DesignGains): K1, alpha and theta_bar.
        silent (bool, optional): Disable the progress bar. Defaults to True.

    Returns:
        FeasibilityGrid: Boolean grid plus the boundary per value of the column axis.
    """
    case = CASE_ALIASES.get(case, case)
    if case not in CASES:
        raise ValueError(f'unsupported sweep case {case}')
    (a0, a1, n1), (b0, b1, n2) = grid
    if int(n1) < 2 or int(n2) < 2:
        raise ValueError('grid counts must be at least 2')
    name1, name2, column_axis = CASES[case]
    axis1 = np.linspace(a0, a1, int(n1))
    axis2 = np.linspace(b0, b1, int(n2))

    feasible = np.zeros((axis1.size, axis2.size), dtype=bool)
    for i in tqdm(range(axis1.size), disable=silent):
        for j in range(axis2.size):
            try:
                point = spec.replace(**{name1: float(axis1[i]), name2: float(axis2[j])})
            except ValueError:
                continue  # non-positive bound
            feasible[i, j] = check_c1(point, refbounds, gains).feasible

    columns = axis2 if column_axis == name2 else axis1
    boundary = np.empty(columns.size)
    floor = np.empty(columns.size)
    for k, value in enumerate(columns):
        boundary[k], floor[k] = _boundary(case, float(value), spec, refbounds, gains)

    logging.info(f'Swept {case} on a {axis1.size} x {axis2.size} grid, '
                 f'{int(feasible.sum())} feasible points.')
    return FeasibilityGrid(case=case, axis1_name=name1, axis2_name=name2, axis1=axis1, axis2=axis2,
                           feasible=feasible, boundary=boundary, floor=floor, column_axis=column_axis)


def _linspace_axes(grid, n_axes: int) -> 'list[np.ndarray]':
    if len(grid) != n_axes:
        raise ValueError(f'expected {n_axes} grid ranges, got {len(grid)}')
    axes = []
    for a0, a1, n in grid:
        if int(n) < 2:
            raise ValueError('grid counts must be at least 2')
        axes.append(np.linspace(a0, a1, int(n)))
    return axes


def sweep_volume(grid, spec: ConstraintSpec, refbounds: ReferenceBounds,
                 gains: DesignGains, silent: bool = True) -> FeasibilityVolume:
    """Evaluates C1 on a (tau_bar, Q_bar, V_bar) grid at fixed d_bar.

    tau_min does not depend on tau_bar, so it is computed once per (Q_bar, V_bar) and every
    tau_bar above it is feasible.

    Args:
        grid (tuple): ((t0, t1, n1), (q0, q1, n2), (v0, v1, n3)) ranges of the three axes.
        spec (ConstraintSpec): Template providing d_bar.
        refbounds (ReferenceBounds): Declared reference bounds.
        gains (DesignGains): K1, alpha and theta_bar.
        silent (bool, optional): Disable the progress bar. Defaults to True.

    Returns:
        FeasibilityVolume: Boolean volume plus tau_min per (Q_bar, V_bar).
    """
    tau_axis, q_axis, v_axis = _linspace_axes(grid, 3)
    boundary = np.full((q_axis.size, v_axis.size), np.nan)
    for j in tqdm(range(q_axis.size), disable=silent):
        for k in range(v_axis.size):
            try:
                point = spec.replace(Q_bar=float(q_axis[j]), V_bar=float(v_axis[k]))
            except ValueError:
                continue  # non-positive bound
            boundary[j, k], _ = _boundary('tau-q', point.Q_bar, point, refbounds, gains)

    with np.errstate(invalid='ignore'):
        feasible = tau_axis[:, None, None] > boundary[None, :, :]
    logging.info(f'Swept tau-q-v on a {tau_axis.size} x {q_axis.size} x {v_axis.size} grid, '
                 f'{int(feasible.sum())} feasible points.')
    return FeasibilityVolume(tau_bar=tau_axis, Q_bar=q_axis, V_bar=v_axis,
                             feasible=feasible, boundary=boundary)


def gain_scan(grid, spec: ConstraintSpec, refbounds: ReferenceBounds,
              gains: DesignGains, silent: bool = True) -> GainScan:
    """Scans tau_min over filter gains alpha and scales k of the feedback gain K1 at fixed
    constraints. The scan only reports; it does not pick gains.

    Args:
        grid (tuple): ((alpha0, alpha1, n1), (k0, k1, n2)); all values must be positive.
        spec (ConstraintSpec): Fixed constraints.
        refbounds (ReferenceBounds): Declared reference bounds.
        gains (DesignGains): Provides the K1 shape and theta_bar; its alpha is ignored.
        silent (bool, optional): Disable the progress bar. Defaults to True.

    Returns:
        GainScan: tau_min, kappa and feasibility per grid point.
    """
    alpha_axis, k_axis = _linspace_axes(grid, 2)
    if alpha_axis.min() <= 0 or k_axis.min() <= 0:
        raise ValueError('alpha and k must be positive')
    E_Q, E_V = error_margins(spec, refbounds)
    a_max = alpha_max(E_Q, E_V)

    t_min = np.full((alpha_axis.size, k_axis.size), np.inf)
    for i in tqdm(range(alpha_axis.size), disable=silent):
        alpha = float(alpha_axis[i])
        if not alpha < a_max:
            continue
        for j, k in enumerate(k_axis):
            t_min[i, j] = tau_min(gains.theta_bar, alpha, float(k) * gains.K1, refbounds,
                                  (E_Q, E_V), spec.d_bar)
    kappa = np.where(alpha_axis < a_max, E_V - alpha_axis * E_Q, np.nan)
    feasible = spec.tau_bar > t_min
    logging.info(f'Scanned {alpha_axis.size} x {k_axis.size} gains, {int(feasible.sum())} feasible '
                 f'at tau_bar = {spec.tau_bar:g}.')
    return GainScan(alpha=alpha_axis, k_scale=k_axis, tau_min=t_min, kappa=kappa,
                    feasible=feasible, tau_bar=spec.tau_bar)


def _axis_floor(axis: str, refbounds: ReferenceBounds) -> float:
    floors = {'Q_bar': refbounds.Qd_bar, 'V_bar': refbounds.Vd_bar, 'tau_bar': 0., 'd_bar': 0.}
    if axis not in floors:
        raise ValueError(f'unsupported axis {axis}')
    return floors[axis]


def _feasible_along(axis: str, spec: ConstraintSpec, refbounds: ReferenceBounds, gains: DesignGains):
    def indicator(x):
        report = check_c1(spec.replace(**{axis: float(x)}), refbounds, gains)
        return 1. if report.feasible else -1.
    return indicator


def _find_feasible(indicator, current: float, lo: float, hi: float) -> float:
    if lo < current < hi and indicator(current) > 0:
        return current
    for x in np.geomspace(lo, hi, 2000):
        if indicator(x) > 0:
            return float(x)
    return None


def min_feasible(axis: str, spec: ConstraintSpec, refbounds: ReferenceBounds, gains: DesignGains) -> float:
    """Smallest value of one constraint keeping C1 and the gain condition satisfied
    while the other two constraints stay fixed.

    Args:
        axis (str): 'Q_bar', 'V_bar', 'tau_bar' or 'd_bar'.
        spec (ConstraintSpec): Current constraints; the value on `axis` seeds the search.
        refbounds (ReferenceBounds): Declared reference bounds.
        gains (DesignGains): K1, alpha and theta_bar.

    Returns:
        float: The boundary value, accurate to 1e-6.
    """
    floor = _axis_floor(axis, refbounds)
    current = getattr(spec, axis)
    lo, hi = floor + 1e-9, 1e3 * current
    indicator = _feasible_along(axis, spec, refbounds, gains)
    if indicator(lo) > 0:
        return lo
    x_feasible = _find_feasible(indicator, current, lo, hi)
    if x_feasible is None:
        raise NoFeasibleValueError(f'no feasible {axis} in [{lo:.6g}, {hi:.6g}]')
    return optimize.bisect(indicator, lo, x_feasible, xtol=BISECT_XTOL, maxiter=BISECT_MAXITER)


def max_feasible(axis: str, spec: ConstraintSpec, refbounds: ReferenceBounds, gains: DesignGains) -> float:
    """Largest value of `axis` keeping the configuration feasible, e.g. the maximum allowable
    V_bar for a given Q_bar. Returns inf when the feasible set is unbounded in the bracket.
    """
    floor = _axis_floor(axis, refbounds)
    current = getattr(spec, axis)
    lo, hi = floor + 1e-9, 1e3 * current
    indicator = _feasible_along(axis, spec, refbounds, gains)
    if indicator(hi) > 0:
        return float('inf')
    x_feasible = _find_feasible(indicator, current, lo, hi)
    if x_feasible is None:
        raise NoFeasibleValueError(f'no feasible {axis} in [{lo:.6g}, {hi:.6g}]')
    return optimize.bisect(indicator, x_feasible, hi, xtol=BISECT_XTOL, maxiter=BISECT_MAXITER)


def reference_bounds_oracle(reference, horizon: float, dt: float = 1e-3) -> 'tuple[float, float, float]':
    """Dense numeric suprema of |q_d|, |dq_d| and |ddq_d| over [0, horizon].

    Args:
        reference: An object with `evaluate(t)` accepting an array of times.
        horizon (float): End of the window.
        dt (float): Sampling step. Defaults to 1e-3.

    Returns:
        tuple[float, float, float]: The three maxima.
    """
    if horizon <= 0:
        raise ValueError('horizon must be positive')
    t = np.arange(0., horizon + 0.5 * dt, dt)
    q_d, dq_d, ddq_d = reference.evaluate(t)
    return (float(np.linalg.norm(q_d, axis=-1).max()),
            float(np.linalg.norm(dq_d, axis=-1).max()),
            float(np.linalg.norm(ddq_d, axis=-1).max()))


def paper_comparison(report: FeasibilityReport, quoted: dict = None) -> 'list[tuple]':
    """Rows of (name, formula value, quoted value, relative difference). Discrepancies above
    one percent are logged as warnings.
    """
    quoted = PAPER_QUOTED if quoted is None else quoted
    rows = []
    for name, paper_value in quoted.items():
        value = getattr(report, name)
        rel = abs(value - paper_value) / abs(paper_value)
        rows.append((name, value, paper_value, rel))
        if rel > 0.01:
            logging.warning(f'{name}: formula gives {value:.6g}, quoted value is {paper_value:g} '
                            f'({100 * rel:.1f}% apart)')
    return rows
