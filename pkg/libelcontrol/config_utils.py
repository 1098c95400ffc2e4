"""Config schema, validation and assembly of the experiment objects.

Configs are flat YAML mappings. Matrices (`K1`, `Gamma`, `Gamma_c`) accept a scalar
(times the identity), a list of diagonal entries or a full nested list.
"""
from __future__ import annotations

import copy
import logging
import math
import os
from dataclasses import dataclass

import numpy as np
import yaml

from .controller import ControllerConfig
from .dynamics import NonPositiveDefiniteError, TwoLinkModel, TwoLinkParams
from .feasibility import ConstraintSpec, DesignGains, ReferenceBounds
from .simulation import DisturbanceProfile, DisturbanceSegment, ReferenceSignal, SimConfig

__all__ = ['ConfigError',
           'DEFAULTS',
           'Experiment',
           'load_config',
           'check_keys',
           'as_matrix',
           'build_experiment',
           'parse_config']

DEFAULTS = {
    # plant
    'p1': 3.473, 'p2': 0.196, 'p3': 0.242, 'fd1': 5.3, 'fd2': 1.1,
    'friction_model': 'viscous',
    # controller
    'K1': [[1.5, 0.], [0., 1.]],
    'alpha': 0.5,
    'Gamma': 10.,
    'Gamma_c': 20.,
    'theta_bar': 6.2,
    'proj_eps': 0.05,
    'theta_hat0': None,
    'm_bar': None,
    # constraints
    'Q_bar': 2.5, 'V_bar': 1.0, 'tau_bar': 30.0, 'd_bar': 5.0,
    # reference bounds
    'Qd_bar': 2.0, 'Vd_bar': 0.707, 'alpha3': 0.3,
    # reference signal
    'ref_amplitude': [0.5, 2.0],
    'ref_frequency': [1.0, 0.25],
    'ref_phase': [0.0, math.pi / 2],
    # disturbance
    'disturbance': [{'t_start': 100., 't_end': 200., 'amplitude': [3., 3.]},
                    {'t_start': 200., 't_end': 300., 'amplitude': [5., 5.]}],
    'persist_last_segment': True,
    # simulation
    't_end': 300.0, 'dt': 1e-3, 'decimation': 10,
    'q0': None, 'dq0': None,
    'assumption_gate': 'enforce',
    'controller': 'proposed',
    'zoh': False,
    'force': False,
    'baseline_saturate': False,
    'baseline_projection': True,
    # sweep
    'case': 'q-v',
    'grid': None,
    'hard_axis1': None,
    'hard_axis2': None,
    # output
    'result_dir': './runs',
    'out': None,
    'run_name': None,
    'silent': False,
    'paper_values': False,
}

SEGMENT_KEYS = {'t_start', 't_end', 'amplitude', 'frequency'}


class ConfigError(ValueError):
    """Schema or validation error. `key` holds the offending key path."""

    def __init__(self, message: str, key: str = None) -> None:
        super().__init__(f'{key}: {message}' if key else message)
        self.key = key


@dataclass
class Experiment:
    config: dict
    params: TwoLinkParams
    model: TwoLinkModel
    spec: ConstraintSpec
    refbounds: ReferenceBounds
    gains: DesignGains
    controller: ControllerConfig
    sim: SimConfig


def check_keys(config: dict, known=None, prefix: str = '') -> None:
    known = DEFAULTS.keys() if known is None else known
    for key in config:
        if key not in known:
            raise ConfigError('unknown key', key=f'{prefix}{key}')


def load_config(path: str) -> dict:
    """Loads a YAML (or JSON) config file and rejects unknown keys.

    Args:
        path (str): Path to the config file.

    Returns:
        dict: The keys present in the file.
    """
    if not os.path.isfile(path):
        raise ConfigError(f'config file {path} does not exist')
    with open(path, encoding='utf-8') as fp:
        try:
            config = yaml.load(fp, Loader=yaml.SafeLoader)
        except yaml.YAMLError as e:
            raise ConfigError(f'cannot parse {path}: {e}')
    if config is None:
        raise ConfigError(f'config file {path} is empty')
    if not isinstance(config, dict):
        raise ConfigError(f'config file {path} must hold a mapping, got {type(config).__name__}')
    check_keys(config)
    return config


def as_matrix(value, n: int, key: str) -> np.ndarray:
    """Reads a scalar, a diagonal list or a full n x n nested list as an n x n matrix."""
    try:
        a = np.asarray(value, dtype='d')
    except (TypeError, ValueError):
        raise ConfigError(f'expected a number or a list of numbers, got {value!r}', key=key)
    if a.ndim == 0:
        return float(a) * np.eye(n)
    if a.shape == (n,):
        return np.diag(a)
    if a.shape == (n, n):
        return a
    raise ConfigError(f'expected a scalar, {n} diagonal entries or a {n}x{n} matrix, got shape {a.shape}', key=key)


def _as_vector(value, n: int, key: str) -> np.ndarray:
    if value is None:
        return None
    a = np.asarray(value, dtype='d')
    if a.shape != (n,):
        raise ConfigError(f'expected {n} entries, got shape {a.shape}', key=key)
    return a


def _number(config: dict, key: str, positive: bool = True) -> float:
    value = config[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f'expected a number, got {value!r}', key=key)
    if positive and not value > 0:
        raise ConfigError(f'must be positive, got {value}', key=key)
    return float(value)


def _is_spd(a: np.ndarray) -> bool:
    return bool(np.allclose(a, a.T) and np.linalg.eigvalsh(0.5 * (a + a.T)).min() > 0)


def _disturbance(config: dict) -> DisturbanceProfile:
    segments = []
    for i, seg in enumerate(config['disturbance'] or []):
        key = f'disturbance[{i}]'
        if not isinstance(seg, dict):
            raise ConfigError('expected a mapping', key=key)
        check_keys(seg, SEGMENT_KEYS, prefix=f'{key}.')
        missing = {'t_start', 't_end', 'amplitude'} - seg.keys()
        if missing:
            raise ConfigError(f'missing {sorted(missing)}', key=key)
        t_end = math.inf if seg['t_end'] is None else float(seg['t_end'])
        try:
            segments.append(DisturbanceSegment(float(seg['t_start']), t_end,
                                               tuple(_as_vector(seg['amplitude'], 2, f'{key}.amplitude')),
                                               float(seg.get('frequency', 1.0))))
        except ValueError as e:
            raise ConfigError(str(e), key=key)
    try:
        return DisturbanceProfile(segments=tuple(segments),
                                  persist_last_segment=bool(config['persist_last_segment']))
    except ValueError as e:
        raise ConfigError(str(e), key='disturbance')


def build_experiment(config: dict) -> Experiment:
    """Validates a resolved config and builds the plant, constraint and controller objects.

    Args:
        config (dict): Resolved config; missing keys fall back to DEFAULTS.

    Returns:
        Experiment: All objects one check, simulate, sweep or compare run needs.
    """
    config = {**copy.deepcopy(DEFAULTS), **dict(config)}

    for key in ('p1', 'p2', 'p3', 'alpha', 'theta_bar', 'Q_bar', 'V_bar', 'tau_bar',
                'd_bar', 'Qd_bar', 'Vd_bar', 'alpha3', 't_end', 'dt', 'proj_eps'):
        _number(config, key)
    for key in ('fd1', 'fd2'):
        _number(config, key, positive=False)

    try:
        params = TwoLinkParams(config['p1'], config['p2'], config['p3'], config['fd1'], config['fd2'],
                               friction_model=config['friction_model'])
    except NonPositiveDefiniteError as e:
        raise ConfigError(str(e), key='p1')
    except ValueError as e:
        raise ConfigError(str(e), key='friction_model')
    model = TwoLinkModel(params)

    K1 = as_matrix(config['K1'], 2, 'K1')
    Gamma = as_matrix(config['Gamma'], 5, 'Gamma')
    Gamma_c = as_matrix(config['Gamma_c'], 5, 'Gamma_c')
    for key, a in (('K1', K1), ('Gamma', Gamma), ('Gamma_c', Gamma_c)):
        if not _is_spd(a):
            raise ConfigError('must be symmetric positive definite', key=key)

    spec = ConstraintSpec(config['Q_bar'], config['V_bar'], config['tau_bar'], config['d_bar'])
    refbounds = ReferenceBounds(config['Qd_bar'], config['Vd_bar'], config['alpha3'])
    E_Q = spec.Q_bar - refbounds.Qd_bar
    E_V = spec.V_bar - refbounds.Vd_bar
    if E_Q <= 0:
        raise ConfigError(f'reference exceeds state constraint: Qd_bar >= Q_bar '
                          f'({refbounds.Qd_bar} >= {spec.Q_bar})', key='Qd_bar')
    if E_V <= 0:
        raise ConfigError(f'reference exceeds state constraint: Vd_bar >= V_bar '
                          f'({refbounds.Vd_bar} >= {spec.V_bar})', key='Vd_bar')
    alpha = float(config['alpha'])
    if alpha >= E_V / E_Q:
        raise ConfigError(f'alpha >= E_V/E_Q ({alpha:g} >= {E_V / E_Q:.3f})', key='alpha')
    kappa = E_V - alpha * E_Q

    if config['m_bar'] is None:
        m_bar = model.bounds().m_bar
        logging.info(f'Certified m_bar = {m_bar:.6g} from the inertia eigenvalues.')
    else:
        m_bar = _number(config, 'm_bar')
        m2 = model.bounds().m2
        if m_bar < m2:
            raise ConfigError(f'must bound the largest inertia eigenvalue ({m_bar:g} < {m2:.6g})', key='m_bar')

    try:
        controller = ControllerConfig(K1=K1, alpha=alpha, Gamma=Gamma, theta_bar=config['theta_bar'],
                                      tau_bar=spec.tau_bar, kappa=kappa, m_bar=m_bar,
                                      proj_eps=config['proj_eps'])
    except ValueError as e:
        raise ConfigError(str(e), key='proj_eps')

    amplitude = _as_vector(config['ref_amplitude'], 2, 'ref_amplitude')
    frequency = _as_vector(config['ref_frequency'], 2, 'ref_frequency')
    phase = _as_vector(config['ref_phase'], 2, 'ref_phase')
    reference = ReferenceSignal(tuple(amplitude), tuple(frequency), tuple(phase))

    if config['controller'] not in ('proposed', 'baseline'):
        raise ConfigError(f'must be proposed or baseline, got {config["controller"]}', key='controller')
    decimation = config['decimation']
    if isinstance(decimation, bool) or not isinstance(decimation, int) or decimation < 1:
        raise ConfigError(f'must be a positive integer, got {decimation!r}', key='decimation')
    if config['dt'] > config['t_end']:
        raise ConfigError(f'must not exceed t_end ({config["dt"]} > {config["t_end"]})', key='dt')
    gate = 'warn' if config['force'] else config['assumption_gate']
    if gate not in ('enforce', 'warn'):
        raise ConfigError(f'must be enforce or warn, got {gate}', key='assumption_gate')

    sim = SimConfig(model=model, controller=controller, spec=spec, refbounds=refbounds,
                    reference=reference, disturbance=_disturbance(config),
                    t_end=float(config['t_end']), dt=float(config['dt']),
                    q0=_as_vector(config['q0'], 2, 'q0'), dq0=_as_vector(config['dq0'], 2, 'dq0'),
                    theta_hat0=_as_vector(config['theta_hat0'], 5, 'theta_hat0'),
                    decimation=decimation, assumption_gate=gate, law=config['controller'],
                    Gamma_c=Gamma_c, baseline_saturate=bool(config['baseline_saturate']),
                    baseline_projection=bool(config['baseline_projection']),
                    zoh=bool(config['zoh']), silent=bool(config['silent']))

    return Experiment(config=config, params=params, model=model, spec=spec, refbounds=refbounds,
                      gains=DesignGains(K1, alpha, float(config['theta_bar'])),
                      controller=controller, sim=sim)


def parse_config(path: str, **overrides) -> Experiment:
    """Loads, validates and assembles a config file. Keyword arguments override file values."""
    config = load_config(path)
    config.update(overrides)
    config['config'] = path
    return build_experiment(config)
