"""Transient energy of individual, equivalent, inner-group and superimposed
machines, plus dynamic liberation point detection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .frames import EquivalentMachineSeries, FrameSeries, lead_nodes
from .system import ModelError


@dataclass(frozen=True)
class EnergySeries:
    entity: str
    times: np.ndarray
    ke: np.ndarray
    pe: np.ndarray
    total: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.total is None:
            object.__setattr__(self, "total", self.ke + self.pe)

    def __len__(self):
        return len(self.ke)


@dataclass(frozen=True)
class DlpReport:
    entity: str
    index: int | None
    time: float | None

    @property
    def separated(self) -> bool:
        return self.index is not None


def potential_energy(angle, force_pf, lead_force=None, lead_span=0.0) -> np.ndarray:
    """Path integral of -f dδ along the samples, from the SEP.

    Trapezoidal accumulation on the trajectory, preceded by the straight
    lead-in from the SEP to the first sample (Gauss-Legendre).
    """
    # contiguous copies: strided and packed inputs take different BLAS paths,
    # and identical samples must give bit-identical energies
    angle = np.ascontiguousarray(angle, dtype=float)
    f = np.ascontiguousarray(force_pf, dtype=float)
    steps = -0.5 * (f[1:] + f[:-1]) * np.diff(angle)
    pe = np.empty_like(angle)
    pe[0] = 0.0
    np.cumsum(steps, out=pe[1:])
    if lead_force is not None:
        _, w = lead_nodes(len(lead_force))
        pe += -(w @ np.ascontiguousarray(lead_force, dtype=float)) * lead_span
    return pe


def kinetic_energy(inertia, speed) -> np.ndarray:
    return 0.5 * inertia * np.asarray(speed) ** 2


def _frame_energy(fs: FrameSeries, machine: int, tag: str) -> EnergySeries:
    c = fs.column(machine)
    ke = kinetic_energy(fs.inertias[c], fs.speed[:, c])
    pe = potential_energy(fs.angle[:, c], fs.force_pf[:, c], fs.lead_force[:, c], fs.lead_span[c])
    return EnergySeries(f"{tag}_{machine}", fs.times, ke, pe)


def imte(fs: FrameSeries, machine: int) -> EnergySeries:
    """Individual machine transient energy (COI-SYS frame)."""
    if fs.reference != "SYS":
        raise ModelError("IMTE needs a COI-SYS frame")
    return _frame_energy(fs, machine, "IMTE")


def igmte(fs: FrameSeries, machine: int) -> EnergySeries:
    """Inner-group machine transient energy (COI-CR frame)."""
    if fs.reference != "CR":
        raise ModelError("IGMTE needs a COI-CR frame")
    return _frame_energy(fs, machine, "IGMTE")


def emte(em: EquivalentMachineSeries) -> EnergySeries:
    """Transient energy of the group equivalent machine."""
    ke = kinetic_energy(em.inertia, em.speed)
    pe = potential_energy(em.angle, em.force_pf, em.lead_force, em.lead_span)
    return EnergySeries("EMTE_CR", em.times, ke, pe)


def _check_grid(series: Sequence[EnergySeries]) -> None:
    t0 = series[0].times
    for s in series[1:]:
        if len(s.times) != len(t0) or not np.array_equal(s.times, t0):
            raise ModelError(f"sample grid of {s.entity} differs from {series[0].entity}")


def smte(imtes: Sequence[EnergySeries], entity: str = "SMTE") -> EnergySeries:
    """Superimposed machine: elementwise sum of the given energies."""
    if not imtes:
        raise ModelError("nothing to superimpose")
    _check_grid(imtes)
    return EnergySeries(
        entity, imtes[0].times,
        np.sum([s.ke for s in imtes], axis=0),
        np.sum([s.pe for s in imtes], axis=0),
        np.sum([s.total for s in imtes], axis=0),
    )


def detect_dlp(force_pf, angle, clear_index: int, times=None, entity: str = "") -> DlpReport:
    """First post-clearing sample where f^(PF) turns from negative to
    non-negative while the angle is still advancing."""
    f = np.asarray(force_pf)
    d = np.asarray(angle)
    if clear_index + 1 >= len(f):
        raise ModelError("no post-clearing samples")
    k = np.arange(max(clear_index, 0) + 1, len(f))
    hit = (f[k - 1] < 0) & (f[k] >= 0) & (d[k] > d[k - 1])
    if not hit.any():
        return DlpReport(entity, None, None)
    idx = int(k[np.argmax(hit)])
    return DlpReport(entity, idx, None if times is None else float(times[idx]))


def dlp_of_frame(fs: FrameSeries, machine: int) -> DlpReport:
    c = fs.column(machine)
    return detect_dlp(fs.force_pf[:, c], fs.angle[:, c], fs.clear_index, fs.times,
                      f"{fs.reference}_{machine}")


def dlp_of_equivalent(em: EquivalentMachineSeries) -> DlpReport:
    return detect_dlp(em.force_pf, em.angle, em.clear_index, em.times, "CR")


def conservation_deviation(e: EnergySeries, clear_index: int) -> float:
    """Max drift of the total after clearing, relative to the energy scale.

    The scale is max(|V(t_cl)|, peak KE after clearing): separating entities
    can carry totals near zero while KE and PE both grow large. The 1e-9
    floor keeps identically-zero entities (singleton inner groups) at zero.
    """
    v = e.total[clear_index:]
    scale = max(abs(v[0]), float(np.max(e.ke[clear_index:])), 1e-9)
    return float(np.max(np.abs(v - v[0])) / scale)


def energy_csv_columns(e: EnergySeries):
    return ["time", "ke", "pe", "total"], np.column_stack([e.times, e.ke, e.pe, e.total])
