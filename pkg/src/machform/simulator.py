"""Fixed-step RK4 integration of the swing equations through a fault event."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .system import ModelError, ReducedNetwork, SystemModel, model_from_dict, read_scenario_json, sep_solve

log = logging.getLogger(__name__)

#: angle spread (rad) beyond which a run is classified as separated
INSTABILITY_SPREAD = 2.0 * math.pi


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Scenario:
    model: SystemModel
    clear_time: float
    horizon: float
    dt: float = 1e-3

    def __post_init__(self):
        if not self.dt > 0:
            raise ModelError("dt must be positive")
        if not 0 < self.clear_time < self.horizon:
            raise ModelError("need 0 < clear_time < horizon")
        k = self.clear_time / self.dt
        if abs(k - round(k)) > 1e-9 * max(1.0, k):
            raise ModelError(f"clear_time {self.clear_time} is not a multiple of dt {self.dt}")

    @property
    def clear_steps(self) -> int:
        return int(round(self.clear_time / self.dt))

    @property
    def total_steps(self) -> int:
        return int(round(self.horizon / self.dt))

    def with_(self, **kw) -> "Scenario":
        return replace(self, **kw)


@dataclass(frozen=True)
class Trajectory:
    """Samples of absolute angles (rad) and speed deviations (rad/s).

    Row ``k`` is at ``times[k] = k * dt``. Rows before ``clear_index`` were
    produced on the fault-on network; from ``clear_index`` on, the post-fault
    network applies.
    """

    times: np.ndarray
    angles: np.ndarray
    speeds: np.ndarray
    clear_index: int
    model: SystemModel
    dt: float

    @property
    def n(self) -> int:
        return self.angles.shape[1]

    def stage_network(self, k: int) -> ReducedNetwork:
        return self.model.during_fault if k < self.clear_index else self.model.post_fault

    def separated(self, threshold: float = INSTABILITY_SPREAD) -> bool:
        spread = self.angles.max(axis=1) - self.angles.min(axis=1)
        return bool(np.any(spread > threshold))


def scenario_from_dict(data: dict, **overrides) -> Scenario:
    model = model_from_dict(data)
    kw = {k: data[k] for k in ("clear_time", "horizon", "dt") if k in data}
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return Scenario(model, float(kw["clear_time"]), float(kw["horizon"]), float(kw.get("dt", 1e-3)))


def load_scenario(path, **overrides) -> Scenario:
    return scenario_from_dict(read_scenario_json(path), **overrides)


def _segment(x0, w0, model: SystemModel, net: ReducedNetwork, dt, nsteps, offset):
    A, W, done = kernels.rk4_integrate(
        x0, w0, model.mech_power, model.inertia, model.emf,
        net.conductance, net.susceptance, dt, nsteps,
    )
    if done < nsteps:
        raise SimulationError(f"non-finite state at step {offset + done + 1}")
    return A, W


def simulate(sc: Scenario, initial_angles=None) -> Trajectory:
    """Integrate from the pre-fault equilibrium, switching networks at clear_time."""
    model = sc.model
    if initial_angles is None:
        initial_angles = np.zeros(model.n)
    x0 = sep_solve(model.pre_fault, model, initial_angles)
    w0 = np.zeros(model.n)
    kc, kt = sc.clear_steps, sc.total_steps
    A1, W1 = _segment(x0, w0, model, model.during_fault, sc.dt, kc, 0)
    A2, W2 = _segment(A1[-1], W1[-1], model, model.post_fault, sc.dt, kt - kc, kc)
    angles = np.vstack([A1, A2[1:]])
    speeds = np.vstack([W1, W2[1:]])
    times = np.arange(kt + 1) * sc.dt
    for a in (angles, speeds, times):
        a.setflags(write=False)
    return Trajectory(times, angles, speeds, kc, model, sc.dt)


def find_critical_clearing(template: Scenario, tolerance: float | None = None,
                           threshold: float = INSTABILITY_SPREAD) -> float:
    """Bisect the clearing time between a stable and an unstable run.

    Clearing times are kept on the ``dt`` grid, so the result resolution is
    ``max(tolerance, dt)``. Returns the midpoint of the final bracket.
    """
    dt = template.dt
    tol_steps = max(1, int(round((tolerance or dt) / dt)))
    x0 = sep_solve(template.model.pre_fault, template.model, np.zeros(template.model.n))

    def unstable(k: int) -> bool:
        traj = simulate(template.with_(clear_time=k * dt), x0)
        return traj.separated(threshold)

    lo, hi = 1, template.total_steps - 1
    if unstable(lo):
        raise SimulationError("lower bracket (first step) is already unstable")
    if not unstable(hi):
        raise SimulationError("no unstable clearing time within the horizon")
    while hi - lo > tol_steps:
        mid = (lo + hi) // 2
        if unstable(mid):
            hi = mid
        else:
            lo = mid
        log.debug("cct bracket [%g, %g]", lo * dt, hi * dt)
    return 0.5 * (lo + hi) * dt


def to_csv_columns(traj: Trajectory):
    header = ["time"] + [f"delta_{i}" for i in range(traj.n)] + [f"omega_{i}" for i in range(traj.n)]
    return header, np.column_stack([traj.times, traj.angles, traj.speeds])
