import numpy as np

__all__ = ['rk4_step']


def rk4_step(rhs, t: float, x, dt: float) -> np.ndarray:
    """One step of the classical fourth-order Runge-Kutta method.

    Args:
        rhs (callable): Right-hand side f(t, x).
        t (float): Current time.
        x (np.ndarray): Current state.
        dt (float): Step size.

    Returns:
        np.ndarray: The state at t + dt.
    """
    if not dt > 0:
        raise ValueError(f'step size must be positive, got {dt}')
    x = np.asarray(x, dtype='d')
    half = 0.5 * dt
    k1 = rhs(t, x)
    k2 = rhs(t + half, x + half * k1)
    k3 = rhs(t + half, x + half * k2)
    k4 = rhs(t + dt, x + dt * k3)
    return x + (dt / 6.) * (k1 + 2 * k2 + 2 * k3 + k4)
