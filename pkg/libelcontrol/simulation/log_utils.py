from __future__ import annotations

import numpy as np
import pandas as pd

from ..common_utils import write_csv
from ..controller import BarrierDomainError, blf_value, lyapunov_value

__all__ = ['SimLog', 'COLUMNS', 'log_row']


def _vec(name: str, n: int) -> list:
    return [f'{name}{i + 1}' for i in range(n)]


COLUMNS = (['t']
           + _vec('q', 2) + _vec('dq', 2) + _vec('qd', 2) + _vec('dqd', 2)
           + _vec('e', 2) + _vec('de', 2) + _vec('r', 2)
           + _vec('theta_hat', 5)
           + _vec('u', 2) + _vec('tau', 2) + _vec('delta_tau', 2) + _vec('d', 2)
           + ['V1', 'V']
           + ['norm_q', 'norm_dq', 'norm_e', 'norm_de', 'norm_r',
              'norm_tau', 'norm_u', 'norm_theta_hat', 'norm_d'])


def log_row(t: float, q, dq, q_d, dq_d, theta_hat, out, d, ctrl_config, theta_true) -> np.ndarray:
    """Assembles one trajectory row in the order of COLUMNS. `out` is a ControlOutput;
    V1 and V are nan when r lies outside the barrier domain.
    """
    try:
        V1 = blf_value(out.r, ctrl_config.kappa_m, ctrl_config.m_bar)
        V = lyapunov_value(out.r, theta_true - theta_hat, ctrl_config.Gamma,
                           ctrl_config.kappa_m, ctrl_config.m_bar)
    except BarrierDomainError:
        V1 = V = float('nan')
    norm = np.linalg.norm
    return np.concatenate([
        [t], q, dq, q_d, dq_d, out.e, out.de, out.r, theta_hat,
        out.u, out.tau, out.delta_tau, d, [V1, V],
        [norm(q), norm(dq), norm(out.e), norm(out.de), norm(out.r),
         norm(out.tau), norm(out.u), norm(theta_hat), norm(d)]])


class SimLog:
    """Decimated closed-loop time series.

    Args:
        data (np.ndarray): Rows in the order of COLUMNS.
        law (str): 'proposed' or 'baseline'.
        barrier_violation (float, optional): Time the filtered error reached the barrier.
            The log ends at the last row before that time. Defaults to None.
        floor_events (int, optional): Number of barrier-denominator floor activations. Defaults to 0.
    """

    def __init__(self, data: np.ndarray, law: str = 'proposed',
                 barrier_violation: float = None, floor_events: int = 0) -> None:
        data = np.asarray(data, dtype='d').reshape(-1, len(COLUMNS))
        self.data = data
        self.law = law
        self.barrier_violation = barrier_violation
        self.floor_events = floor_events

    def __len__(self) -> int:
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, COLUMNS.index(name)]

    def columns(self, prefix: str, n: int) -> np.ndarray:
        idx = [COLUMNS.index(name) for name in _vec(prefix, n)]
        return self.data[:, idx]

    @property
    def t(self) -> np.ndarray:
        return self.column('t')

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.data, columns=COLUMNS)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, law: str = 'proposed') -> 'SimLog':
        missing = [c for c in COLUMNS if c not in frame.columns]
        if missing:
            raise ValueError(f'trajectory is missing columns {missing}')
        return cls(frame[COLUMNS].to_numpy(dtype='d'), law=law)

    def write(self, path: str) -> None:
        write_csv(self.to_frame(), path)

    @classmethod
    def read(cls, path: str, law: str = 'proposed') -> 'SimLog':
        return cls.from_frame(pd.read_csv(path), law=law)
