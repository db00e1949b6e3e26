"""Relative motion references: COI-SYS individual machines, the group
equivalent machine and inner-group machines."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .simulator import Trajectory
from .system import ModelError, SystemModel, electrical_power, sep_solve

#: Gauss-Legendre order for the straight lead-in from the post-fault SEP
#: to the initial state (f is trigonometric, so this is exact to rounding)
LEAD_ORDER = 24


@dataclass(frozen=True)
class ReferenceSpec:
    name: str
    members: tuple[int, ...]
    inertias: np.ndarray

    def __post_init__(self):
        if not self.members:
            raise ModelError("reference needs at least one member")
        if len(set(self.members)) != len(self.members):
            raise ModelError("duplicate reference members")
        w = np.asarray(self.inertias, dtype=float)
        if np.any(w <= 0):
            raise ModelError("reference weights must be positive")
        object.__setattr__(self, "members", tuple(int(m) for m in self.members))
        object.__setattr__(self, "inertias", w)

    @property
    def total_inertia(self) -> float:
        return float(self.inertias.sum())

    @classmethod
    def system(cls, model: SystemModel) -> "ReferenceSpec":
        return cls("SYS", tuple(range(model.n)), model.inertia)

    @classmethod
    def group(cls, model: SystemModel, members: Sequence[int], name: str = "CR") -> "ReferenceSpec":
        members = tuple(members)
        if any(not 0 <= m < model.n for m in members):
            raise ModelError(f"group {members} is not a subset of machines 0..{model.n - 1}")
        return cls(name, members, model.inertia[list(members)])


@dataclass(frozen=True)
class GroupSpec:
    members: tuple[int, ...]
    inertia: float

    @classmethod
    def of(cls, model: SystemModel, members: Sequence[int]) -> "GroupSpec":
        members = tuple(int(m) for m in members)
        if not members:
            raise ModelError("group must be nonempty")
        if any(not 0 <= m < model.n for m in members) or len(set(members)) != len(members):
            raise ModelError(f"group {members} is not a subset of machines 0..{model.n - 1}")
        return cls(members, float(model.inertia[list(members)].sum()))


@dataclass(frozen=True)
class FrameSeries:
    """Per-machine relative motion in one reference.

    ``force`` is the accelerating power on the network in service at each
    sample; ``force_pf`` is the same quantity evaluated on the post-fault
    network (the potential-energy integrand). ``lead_force``/``lead_span``
    describe the straight path from the post-fault SEP to the first sample:
    ``lead_force[q]`` is ``force_pf`` at the q-th Gauss node and
    ``lead_span`` the angle change over that path.
    """

    reference: str
    machines: tuple[int, ...]
    times: np.ndarray
    angle: np.ndarray
    speed: np.ndarray
    force: np.ndarray
    force_pf: np.ndarray
    inertias: np.ndarray
    sep_angle: np.ndarray
    lead_force: np.ndarray
    lead_span: np.ndarray
    clear_index: int

    def column(self, machine: int) -> int:
        try:
            return self.machines.index(machine)
        except ValueError:
            raise ModelError(f"machine {machine} not in frame {self.reference} {self.machines}") from None

    def select(self, members: Sequence[int]) -> list[int]:
        return [self.column(m) for m in members]


@dataclass(frozen=True)
class EquivalentMachineSeries:
    members: tuple[int, ...]
    times: np.ndarray
    angle: np.ndarray
    speed: np.ndarray
    force: np.ndarray
    force_pf: np.ndarray
    inertia: float
    sep_angle: float
    lead_force: np.ndarray
    lead_span: float
    clear_index: int


def lead_nodes(order: int = LEAD_ORDER):
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def _accelerating(model: SystemModel, angles, net) -> np.ndarray:
    return model.mech_power - electrical_power(angles, net, model)


def post_fault_sep(traj: Trajectory) -> np.ndarray:
    """Post-fault stable equilibrium (COI-referenced), seeded by the pre-fault state."""
    return sep_solve(traj.model.post_fault, traj.model, traj.angles[0])


def to_reference(traj: Trajectory, ref: ReferenceSpec, sep=None, machines: Sequence[int] | None = None) -> FrameSeries:
    """Express machines relative to the inertia centre of ``ref``.

    delta_i-REF = delta_i - sum(M_j delta_j)/M_REF (likewise for speed) and
    f_i-REF = P_i - (M_i/M_REF) * sum(P_j), sums over the reference members.
    """
    model = traj.model
    machines = tuple(ref.members if machines is None else machines)
    if any(not 0 <= m < model.n for m in machines):
        raise ModelError("frame machines must be system machines")
    cols = list(machines)
    rcols = list(ref.members)
    w = ref.inertias / ref.total_inertia
    M = model.inertia[cols]

    def rel(x):
        return x[..., cols] - (x[..., rcols] @ w)[..., None]

    def rel_force(P):
        return P[..., cols] - np.multiply.outer(P[..., rcols].sum(axis=-1), M / ref.total_inertia)

    kc = traj.clear_index
    P = np.empty_like(traj.angles)
    P[:kc] = _accelerating(model, traj.angles[:kc], model.during_fault)
    P_pf = _accelerating(model, traj.angles, model.post_fault)
    P[kc:] = P_pf[kc:]

    if sep is None:
        sep = post_fault_sep(traj)
    sep = np.asarray(sep, dtype=float)
    s, _ = lead_nodes()
    path = sep[None, :] + np.outer(s, traj.angles[0] - sep)
    P_lead = _accelerating(model, path, model.post_fault)

    sep_rel = rel(sep)
    arrays = dict(
        angle=rel(traj.angles),
        speed=rel(traj.speeds),
        force=rel_force(P),
        force_pf=rel_force(P_pf),
        sep_angle=sep_rel,
        lead_force=rel_force(P_lead),
        lead_span=rel(traj.angles[0]) - sep_rel,
    )
    for a in arrays.values():
        a.setflags(write=False)
    return FrameSeries(
        reference=ref.name, machines=machines, times=traj.times, inertias=M,
        clear_index=kc, **arrays,
    )


def individual_machines(traj: Trajectory, sep=None) -> FrameSeries:
    """All machines in the COI-SYS reference."""
    return to_reference(traj, ReferenceSpec.system(traj.model), sep=sep)


def equivalent_machine(fs: FrameSeries, g: GroupSpec) -> EquivalentMachineSeries:
    """Motion equivalence of the group: inertia-weighted angle and speed,
    summed accelerating power."""
    c = fs.select(g.members)
    Mi = fs.inertias[c]
    Mcr = float(Mi.sum())

    def wavg(x):
        if len(c) == 1:  # exact, no M/M rounding
            return x[..., c[0]].copy()
        return x[..., c] @ Mi / Mcr

    return EquivalentMachineSeries(
        members=g.members, times=fs.times,
        angle=wavg(fs.angle), speed=wavg(fs.speed),
        force=fs.force[:, c].sum(axis=1), force_pf=fs.force_pf[:, c].sum(axis=1),
        inertia=Mcr, sep_angle=float(wavg(fs.sep_angle)),
        lead_force=fs.lead_force[:, c].sum(axis=1), lead_span=float(wavg(fs.lead_span)),
        clear_index=fs.clear_index,
    )


def inner_group(fs: FrameSeries, g: GroupSpec, em: EquivalentMachineSeries | None = None) -> FrameSeries:
    """Group members relative to the group's own inertia centre (COI-CR)."""
    if em is None:
        em = equivalent_machine(fs, g)
    c = fs.select(g.members)
    Mi = fs.inertias[c]
    share = Mi / em.inertia
    return FrameSeries(
        reference="CR", machines=g.members, times=fs.times,
        angle=fs.angle[:, c] - em.angle[:, None],
        speed=fs.speed[:, c] - em.speed[:, None],
        force=fs.force[:, c] - np.outer(em.force, share),
        force_pf=fs.force_pf[:, c] - np.outer(em.force_pf, share),
        inertias=Mi,
        sep_angle=fs.sep_angle[c] - em.sep_angle,
        lead_force=fs.lead_force[:, c] - np.outer(em.lead_force, share),
        lead_span=fs.lead_span[c] - em.lead_span,
        clear_index=fs.clear_index,
    )


def coi_residuals(fs: FrameSeries) -> dict[str, float]:
    """Max-over-time of the inertia-weighted sums that vanish in a closed frame."""
    return {
        "angle": float(np.max(np.abs(fs.angle @ fs.inertias))),
        "speed": float(np.max(np.abs(fs.speed @ fs.inertias))),
        "force": float(np.max(np.abs(fs.force.sum(axis=1)))),
    }


def frame_csv_columns(fs: FrameSeries):
    ids = fs.machines
    header = (["time"] + [f"delta_{i}" for i in ids] + [f"omega_{i}" for i in ids]
              + [f"f_{i}" for i in ids])
    return header, np.column_stack([fs.times, fs.angle, fs.speed, fs.force])
