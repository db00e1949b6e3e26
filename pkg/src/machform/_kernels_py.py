"""Pure NumPy versions of the hot kernels, used when the compiled core is absent."""

import numpy as np


def electrical_power_batch(angles, E, G, B):
    angles = np.asarray(angles, dtype=float)
    d = angles[:, :, None] - angles[:, None, :]
    EE = np.outer(E, E)
    return (EE * (G * np.cos(d) + B * np.sin(d))).sum(axis=2)


def swing_rhs(delta, omega, Pm, M, E, G, B):
    d = delta[:, None] - delta[None, :]
    Pe = (E[:, None] * E[None, :] * (G * np.cos(d) + B * np.sin(d))).sum(axis=1)
    return omega, (Pm - Pe) / M


def rk4_integrate(delta0, omega0, Pm, M, E, G, B, dt, nsteps):
    """Classic RK4 on the swing equations over a fixed network.

    Returns ``(angles, speeds, done)``; ``done < nsteps`` means the state
    went non-finite after step ``done``.
    """
    n = len(delta0)
    angles = np.empty((nsteps + 1, n))
    speeds = np.empty((nsteps + 1, n))
    x = np.array(delta0, dtype=float)
    w = np.array(omega0, dtype=float)
    angles[0], speeds[0] = x, w
    h2 = 0.5 * dt
    # blow-up is detected and reported below, not warned about
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(nsteps):
            k1x, k1w = swing_rhs(x, w, Pm, M, E, G, B)
            k2x, k2w = swing_rhs(x + h2 * k1x, w + h2 * k1w, Pm, M, E, G, B)
            k3x, k3w = swing_rhs(x + h2 * k2x, w + h2 * k2w, Pm, M, E, G, B)
            k4x, k4w = swing_rhs(x + dt * k3x, w + dt * k3w, Pm, M, E, G, B)
            x = x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            w = w + dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(w))):
                return angles[: k + 1], speeds[: k + 1], k
            angles[k + 1], speeds[k + 1] = x, w
    return angles, speeds, nsteps
