"""Machine transformations from individual machines to the group
equivalent machine.

Energy correction (ECIM) subtracts each member's inner-group energy from its
individual energy. Trajectory correction (TCIM) replaces each member's motion
by the equivalent machine's while keeping the member inertia.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .energy import DlpReport, EnergySeries, _check_grid, detect_dlp, kinetic_energy, potential_energy
from .frames import EquivalentMachineSeries, FrameSeries
from .system import ModelError


@dataclass(frozen=True)
class EcimSeries:
    machine: int
    times: np.ndarray
    ke: np.ndarray
    pe: np.ndarray
    total: np.ndarray

    @property
    def valid(self) -> np.ndarray:
        """Samples where a real speed exists (non-negative corrected KE)."""
        return self.ke >= 0


@dataclass(frozen=True)
class EcimTrajectory:
    """KE-only reconstruction; NaN marks samples where no speed exists."""

    machine: int
    times: np.ndarray
    angle: np.ndarray
    velocity: np.ndarray
    valid: np.ndarray

    @property
    def broken(self) -> bool:
        return not bool(self.valid.all())


@dataclass(frozen=True)
class TcimSeries:
    machine: int
    inertia: float
    times: np.ndarray
    ke: np.ndarray
    pe: np.ndarray
    total: np.ndarray
    motion: EquivalentMachineSeries

    @property
    def angle(self) -> np.ndarray:
        return self.motion.angle

    @property
    def speed(self) -> np.ndarray:
        return self.motion.speed

    @property
    def force_pf(self) -> np.ndarray:
        return self.inertia / self.motion.inertia * self.motion.force_pf


@dataclass(frozen=True)
class DeltaVSeries:
    machine: int
    times: np.ndarray
    dke: np.ndarray
    dpe: np.ndarray
    dtotal: np.ndarray


@dataclass(frozen=True)
class SuperpositionDeviation:
    total: float
    ke: float
    pe: float
    worst_index: int


def _machine_of(e: EnergySeries) -> int:
    return int(e.entity.rsplit("_", 1)[-1])


def ecim_energy(imte_i: EnergySeries, igmte_i: EnergySeries) -> EcimSeries:
    _check_grid([imte_i, igmte_i])
    ke = imte_i.ke - igmte_i.ke
    pe = imte_i.pe - igmte_i.pe
    return EcimSeries(_machine_of(imte_i), imte_i.times, ke, pe, ke + pe)


def _rel_dev(a, b):
    return np.abs(a - b) / np.maximum(1.0, np.abs(b))


def ecim_superposition_check(ecims: Sequence[EcimSeries], em_energy: EnergySeries) -> SuperpositionDeviation:
    """Compare the summed ECIM energies with the equivalent machine energy.

    Each deviation is max over t of |sum - EMTE| / max(1, |EMTE|).
    """
    if not ecims:
        raise ModelError("no ECIM series")
    ke = np.sum([e.ke for e in ecims], axis=0)
    pe = np.sum([e.pe for e in ecims], axis=0)
    tot = np.sum([e.total for e in ecims], axis=0)
    d_tot = _rel_dev(tot, em_energy.total)
    return SuperpositionDeviation(
        total=float(d_tot.max()),
        ke=float(_rel_dev(ke, em_energy.ke).max()),
        pe=float(_rel_dev(pe, em_energy.pe).max()),
        worst_index=int(d_tot.argmax()),
    )


def group_cross_term(ig: FrameSeries, em: EquivalentMachineSeries) -> np.ndarray:
    """Per-step magnitude of sum_i (f_CR/M_CR) d(M_i delta_i-CR).

    Vanishes because the inertia-weighted inner-group angles sum to zero.
    """
    favg = 0.5 * (em.force_pf[1:] + em.force_pf[:-1]) / em.inertia
    dsum = np.diff(ig.angle, axis=0) @ ig.inertias
    return np.abs(favg * dsum)


def ecim_reconstruct_trajectory(imte_i: EnergySeries, igmte_i: EnergySeries, fs: FrameSeries,
                                machine: int | None = None) -> EcimTrajectory:
    """Rebuild a trajectory from the kinetic-energy correction alone.

    speed = sign(omega_i) * sqrt(2 (IMKE - IGMKE) / M_i) where the radicand is
    non-negative, undefined elsewhere; angles advance by forward Euler from
    the machine's initial angle and hold across undefined gaps.
    """
    _check_grid([imte_i, igmte_i])
    if machine is None:
        machine = _machine_of(imte_i)
    c = fs.column(machine)
    M = fs.inertias[c]
    omega = fs.speed[:, c]
    ke = imte_i.ke - igmte_i.ke
    valid = ke >= 0
    vel = np.full(len(ke), np.nan)
    vel[valid] = np.copysign(np.sqrt(2.0 * ke[valid] / M), omega[valid])

    dt = np.diff(fs.times)
    inc = np.where(valid[:-1], vel[:-1], 0.0) * dt
    angle = np.empty(len(ke))
    angle[0] = fs.angle[0, c]
    np.cumsum(inc, out=angle[1:])
    angle[1:] += angle[0]
    angle[~valid] = np.nan
    return EcimTrajectory(machine, fs.times, angle, vel, valid)


def tcim(em: EquivalentMachineSeries, inertia: float, machine: int = -1) -> TcimSeries:
    """Member inertia carried on the equivalent machine's motion.

    Energy is integrated along the borrowed motion with the scaled force
    (M_i/M_CR) f_CR, not by rescaling the EMTE, so the scale-down property
    is a checked outcome.
    """
    if not inertia > 0:
        raise ModelError("inertia must be positive")
    share = inertia / em.inertia
    ke = kinetic_energy(inertia, em.speed)
    pe = potential_energy(em.angle, share * em.force_pf, share * em.lead_force, em.lead_span)
    return TcimSeries(machine, inertia, em.times, ke, pe, ke + pe, em)


def tcims(fs: FrameSeries, em: EquivalentMachineSeries) -> list[TcimSeries]:
    return [tcim(em, float(fs.inertias[fs.column(m)]), m) for m in em.members]


def tcim_dlp(t: TcimSeries) -> DlpReport:
    return detect_dlp(t.force_pf, t.angle, t.motion.clear_index, t.times, f"TCIM_{t.machine}")


def tcim_scale_deviation(ts: Sequence[TcimSeries], em_energy: EnergySeries) -> tuple[float, float]:
    """(max scale-down deviation, superposition deviation), both relative
    with the max(1, |EMTE|) floor."""
    scale = max(float(_rel_dev(t.total, t.inertia / t.motion.inertia * em_energy.total).max()) for t in ts)
    sup = float(_rel_dev(np.sum([t.total for t in ts], axis=0), em_energy.total).max())
    return scale, sup


def delta_v(imte_i: EnergySeries, t: TcimSeries, fs: FrameSeries) -> DeltaVSeries:
    """Energy change caused by the trajectory correction of one member."""
    c = fs.column(t.machine)
    dke = 0.5 * t.inertia * (fs.speed[:, c] ** 2 - t.speed ** 2)
    dpe = imte_i.pe - t.pe
    return DeltaVSeries(t.machine, t.times, dke, dpe, dke + dpe)


def equal_speed_brackets(fs: FrameSeries, members: Sequence[int]) -> np.ndarray:
    """Sample indices k where the speed difference of two members changes
    sign between k and k+1 (the equal-speed instants lie in [k, k+1])."""
    if len(members) != 2:
        raise ModelError("equal-speed brackets are defined for two-member groups")
    a, b = fs.select(members)
    d = fs.speed[:, a] - fs.speed[:, b]
    return np.nonzero(np.sign(d[1:]) * np.sign(d[:-1]) < 0)[0]
