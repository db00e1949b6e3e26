"""Two falling balls under different constant gravity, and the pseudo ball
obtained by subtracting their energies.

Everything here is closed form; it is the exact test bed for the
real-versus-pseudo distinction used by the machine transformations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Ball:
    mass: float
    gravity: float
    height0: float

    def __post_init__(self):
        if self.mass <= 0 or self.gravity <= 0 or self.height0 < 0:
            raise ValueError("need mass > 0, gravity > 0, height0 >= 0")

    @property
    def impact_time(self) -> float:
        return math.sqrt(2.0 * self.height0 / self.gravity)


@dataclass(frozen=True)
class BallState:
    t: float
    h: float
    v: float  # downward positive


@dataclass(frozen=True)
class Energy:
    ke: float
    pe: float

    @property
    def total(self) -> float:
        return self.ke + self.pe


BALL_1 = Ball(1.0, 9.8, 8.0)
BALL_2 = Ball(0.5, 6.0, 8.0)


def ball_state(b: Ball, t: float) -> BallState:
    if t < 0:
        raise ValueError("t must be non-negative")
    if t > b.impact_time:
        raise ValueError(f"t={t} is past impact at {b.impact_time:.6g} s")
    return BallState(t, b.height0 - 0.5 * b.gravity * t * t, b.gravity * t)


def ball_energy(b: Ball, s: BallState) -> Energy:
    return Energy(0.5 * b.mass * s.v ** 2, b.mass * b.gravity * s.h)


def relative_motion(b: Ball, s: BallState, earth_mass=math.inf, earth_state=(0.0, 0.0), earth_force=0.0):
    """Ball motion relative to Earth: (h, v, F) differences.

    With the default stationary Earth of infinite mass this reduces to the
    ball's own height, speed and weight.
    """
    h_e, v_e = earth_state
    ratio = 0.0 if math.isinf(earth_mass) else b.mass / earth_mass
    return s.h - h_e, s.v - v_e, b.mass * b.gravity - ratio * earth_force


def pseudo_ball(e1: Energy, e2: Energy) -> Energy:
    return Energy(e1.ke - e2.ke, e1.pe - e2.pe)


def series(times, b1: Ball = BALL_1, b2: Ball = BALL_2) -> dict[str, np.ndarray]:
    """Columns for the two real balls and the pseudo ball on a time grid."""
    cols: dict[str, list] = {k: [] for k in (
        "t", "h1", "h2", "ke1", "pe1", "total1", "ke2", "pe2", "total2", "ke3", "pe3", "total3")}
    for t in times:
        s1, s2 = ball_state(b1, t), ball_state(b2, t)
        e1, e2 = ball_energy(b1, s1), ball_energy(b2, s2)
        e3 = pseudo_ball(e1, e2)
        for k, val in zip(cols, (t, s1.h, s2.h, e1.ke, e1.pe, e1.total, e2.ke, e2.pe, e2.total,
                                 e3.ke, e3.pe, e3.total)):
            cols[k].append(val)
    return {k: np.array(v) for k, v in cols.items()}


def fit_real_ball(times, ke, pe):
    """Least-squares search for a real ball released from rest that
    reproduces both energy series.

    For a ball released at rest, KE = (m g^2 / 2) t^2 and
    PE = m g h0 - (m g^2 / 2) t^2, so the fit is linear in
    a = m g^2 / 2 and c = m g h0. Returns ``(a, c, rms_residual)``; any
    positive ``a`` and ``c`` correspond to a family of (m, g, h0).
    """
    t2 = np.asarray(times, dtype=float) ** 2
    A = np.zeros((2 * len(t2), 2))
    A[: len(t2), 0] = t2
    A[len(t2):, 0] = -t2
    A[len(t2):, 1] = 1.0
    y = np.r_[ke, pe]
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return float(coef[0]), float(coef[1]), rms
