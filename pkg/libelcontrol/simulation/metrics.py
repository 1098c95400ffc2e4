import numpy as np
import pandas as pd

from ..common_utils import AttributeDict

__all__ = ['MaxNorm',
           'RMSNorm',
           'ConstraintViolation',
           'MetricCollection',
           'Metrics',
           'EmptyLogError',
           'INPUT_TOL',
           'get_metrics',
           'compute_metrics',
           'tabulate_metrics']

INPUT_TOL = 1e-9


class EmptyLogError(ValueError):
    pass


class MaxNorm:
    def __init__(self, name: str) -> None:
        self.name = name
        self.value = -np.inf

    def update(self, t: np.ndarray, norms: np.ndarray) -> None:
        assert t.shape == norms.shape
        if norms.size:
            self.value = max(self.value, float(norms.max()))

    def compute(self) -> 'dict[str, float]':
        return {f'max_{self.name}': self.value}


class RMSNorm:
    """Root mean square of a norm column over the logged rows."""

    def __init__(self, name: str) -> None:
        self.name = name
        self.sum_sq = 0.
        self.num_sample = 0

    def update(self, t: np.ndarray, norms: np.ndarray) -> None:
        assert t.shape == norms.shape
        self.sum_sq += float(np.sum(norms**2))
        self.num_sample += norms.size

    def compute(self) -> 'dict[str, float]':
        return {f'rms_{self.name}': float(np.sqrt(self.sum_sq / self.num_sample))}


class ConstraintViolation:
    """Flags the first row where a norm leaves its admissible set.

    Args:
        name (str): Constraint name used in the result keys.
        bound (float): Constraint bound.
        strict (bool): Whether the admissible set is open, |x| < bound. Otherwise |x| <= bound + tol.
        tol (float): Tolerance for closed sets. Defaults to 0.
    """

    def __init__(self, name: str, bound: float, strict: bool, tol: float = 0.) -> None:
        self.name = name
        self.bound = bound
        self.strict = strict
        self.tol = tol
        self.first_time = np.nan

    def update(self, t: np.ndarray, norms: np.ndarray) -> None:
        assert t.shape == norms.shape
        if not np.isnan(self.first_time):
            return
        mask = norms >= self.bound if self.strict else norms > self.bound + self.tol
        if mask.any():
            self.first_time = float(t[np.argmax(mask)])

    def compute(self) -> dict:
        return {f'{self.name}_violation': not np.isnan(self.first_time),
                f'{self.name}_first_violation': self.first_time}


class MetricCollection:
    """Metrics keyed by the SimLog norm column they consume."""

    def __init__(self, metrics: 'list[tuple]') -> None:
        self.metrics = metrics

    def update(self, log) -> None:
        t = log.t
        for column, metric in self.metrics:
            metric.update(t, log.column(column))

    def compute(self) -> dict:
        ret = {}
        for _, metric in self.metrics:
            ret.update(metric.compute())
        return ret


class Metrics(AttributeDict):
    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([dict(self)])


def get_metrics(spec, kappa: float = None, margins: tuple = None) -> MetricCollection:
    """Get the collection of maxima, RMS values and constraint checks.

    Args:
        spec (ConstraintSpec): State and input constraints.
        kappa (float, optional): Filtered-error bound. Defaults to None, skipping the barrier check.
        margins (tuple, optional): (E_Q, E_V) tracking-error bounds. Defaults to None.

    Returns:
        MetricCollection: A metric collection over the SimLog norm columns.
    """
    metrics = [(f'norm_{name}', MaxNorm(name)) for name in ('q', 'dq', 'tau', 'u', 'e', 'de', 'r', 'd')]
    metrics += [('norm_e', RMSNorm('e')), ('norm_de', RMSNorm('de'))]
    metrics += [('norm_q', ConstraintViolation('position', spec.Q_bar, strict=True)),
                ('norm_dq', ConstraintViolation('velocity', spec.V_bar, strict=True)),
                ('norm_tau', ConstraintViolation('input', spec.tau_bar, strict=False, tol=INPUT_TOL))]
    if margins is not None:
        metrics += [('norm_e', ConstraintViolation('error_position', margins[0], strict=True)),
                    ('norm_de', ConstraintViolation('error_velocity', margins[1], strict=True))]
    if kappa is not None:
        metrics.append(('norm_r', ConstraintViolation('barrier', kappa, strict=True)))
    return MetricCollection(metrics)


def compute_metrics(log, spec, kappa: float = None, margins: tuple = None) -> Metrics:
    """Summarizes a SimLog against the constraints. A barrier violation recorded by the
    integrator sets the barrier flag even though the offending row is not logged.
    """
    if len(log) == 0:
        raise EmptyLogError('cannot compute metrics of an empty log')
    collection = get_metrics(spec, kappa, margins)
    collection.update(log)
    result = Metrics(collection.compute())
    if log.barrier_violation is not None:
        result.barrier_violation = True
        if np.isnan(result.get('barrier_first_violation', np.nan)):
            result.barrier_first_violation = log.barrier_violation
    result.barrier_floor_events = log.floor_events
    return result


def tabulate_metrics(metric_dict: dict, title: str) -> str:
    msg = f'====== {title} =======\n'
    width = max([18] + [len(k) + 2 for k in metric_dict])
    for k, x in metric_dict.items():
        value = f'{x:.6g}' if isinstance(x, (np.floating, float)) else f'{x}'
        msg += f'|{k:<{width}}|{value:>{width}}|\n'
    return msg
