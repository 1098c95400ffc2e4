from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ['ReferenceSignal',
           'DisturbanceSegment',
           'DisturbanceProfile',
           'PAPER_REFERENCE',
           'PAPER_DISTURBANCE',
           'persistent_disturbance',
           'reference_eval',
           'disturbance_eval']


@dataclass(frozen=True)
class ReferenceSignal:
    """Sinusoidal reference q_d,i(t) = a_i sin(w_i t + phi_i) with analytic derivatives.
    The default is q_d = (0.5 sin t, 2 cos(t/4)).

    Args:
        amplitude (tuple): Amplitudes a_i in rad.
        frequency (tuple): Angular frequencies w_i in rad/s.
        phase (tuple): Phases phi_i in rad.
    """
    amplitude: tuple = (0.5, 2.0)
    frequency: tuple = (1.0, 0.25)
    phase: tuple = (0.0, math.pi / 2)

    def __post_init__(self):
        if not len(self.amplitude) == len(self.frequency) == len(self.phase):
            raise ValueError('amplitude, frequency and phase must have the same length')

    def evaluate(self, t):
        """Returns (q_d, dq_d, ddq_d). A scalar `t` gives vectors of shape (n,); an array of
        times of shape (N,) gives arrays of shape (N, n).
        """
        a = np.asarray(self.amplitude, dtype='d')
        w = np.asarray(self.frequency, dtype='d')
        phi = np.asarray(self.phase, dtype='d')
        arg = np.multiply.outer(np.asarray(t, dtype='d'), w) + phi
        s, c = np.sin(arg), np.cos(arg)
        return a * s, a * w * c, -a * w**2 * s


@dataclass(frozen=True)
class DisturbanceSegment:
    """d(t) = (A1 sin(w t), A2 cos(w t)) on t_start <= t < t_end."""
    t_start: float
    t_end: float
    amplitude: tuple
    frequency: float = 1.0

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError(f'segment ends before it starts: [{self.t_start}, {self.t_end})')

    def evaluate(self, t) -> np.ndarray:
        a = np.asarray(self.amplitude, dtype='d')
        wt = self.frequency * t
        return np.array([a[0] * math.sin(wt), a[1] * math.cos(wt)])

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.amplitude)))


@dataclass(frozen=True)
class DisturbanceProfile:
    """Piecewise disturbance, zero outside the segments. With `persist_last_segment`
    the last segment keeps acting after its end time.
    """
    segments: tuple = field(default_factory=tuple)
    persist_last_segment: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'segments', tuple(self.segments))
        for prev, seg in zip(self.segments, self.segments[1:]):
            if seg.t_start < prev.t_end:
                raise ValueError('disturbance segments must be ordered and non-overlapping')

    def evaluate(self, t) -> np.ndarray:
        for seg in self.segments:
            if seg.t_start <= t < seg.t_end:
                return seg.evaluate(t)
        if self.persist_last_segment and self.segments and t >= self.segments[-1].t_end:
            return self.segments[-1].evaluate(t)
        return np.zeros(2)

    def sup_norm(self, horizon: float = math.inf) -> float:
        """Exact supremum of |d(t)| over [0, horizon]."""
        norms = [seg.sup_norm for seg in self.segments if seg.t_start <= horizon]
        return max(norms, default=0.)


PAPER_REFERENCE = ReferenceSignal()

PAPER_DISTURBANCE = DisturbanceProfile(
    segments=(DisturbanceSegment(100., 200., (3., 3.)),
              DisturbanceSegment(200., 300., (5., 5.))),
    persist_last_segment=True)


def persistent_disturbance(amplitude, frequency: float = 1.0) -> DisturbanceProfile:
    """A single segment acting for all t >= 0."""
    return DisturbanceProfile(segments=(DisturbanceSegment(0., math.inf, tuple(amplitude), frequency),))


def reference_eval(ref: ReferenceSignal, t):
    if np.any(np.asarray(t) < 0):
        raise ValueError('reference evaluated at negative time')
    return ref.evaluate(t)


def disturbance_eval(profile: DisturbanceProfile, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError('disturbance evaluated at negative time')
    return profile.evaluate(t)
