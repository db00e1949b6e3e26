"""End-to-end pipeline for one scenario and group, and the identity report."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import energy as en
from . import transforms as tf
from .frames import (EquivalentMachineSeries, FrameSeries, GroupSpec, equivalent_machine,
                     individual_machines, inner_group)
from .simulator import Scenario, Trajectory, simulate

DEFAULT_TOLERANCES = {
    "coi_angle": 1e-9,
    "coi_speed": 1e-9,
    "frame_composition": 1e-12,
    "group_ke_split": 1e-10,
    "ecim_sum_total": 1e-6,
    "ecim_sum_ke": 1e-10,
    "ecim_sum_pe": 1e-6,
    "group_cross_term": 1e-12,
    "tcim_scale_down": 1e-12,
    "tcim_superposition": 1e-12,
    "conservation": 1e-4,
}


@dataclass
class Analysis:
    scenario: Scenario
    group: GroupSpec
    traj: Trajectory
    sys: FrameSeries
    em: EquivalentMachineSeries
    ig: FrameSeries
    imtes: dict[int, en.EnergySeries]
    igmtes: dict[int, en.EnergySeries]
    emte: en.EnergySeries
    ecims: dict[int, tf.EcimSeries]
    ecim_paths: dict[int, tf.EcimTrajectory]
    tcims: dict[int, tf.TcimSeries]
    delta_vs: dict[int, tf.DeltaVSeries]

    @property
    def smte(self) -> en.EnergySeries:
        return en.smte(list(self.imtes.values()))


def run_analysis(sc: Scenario, group: Sequence[int], traj: Trajectory | None = None) -> Analysis:
    traj = traj if traj is not None else simulate(sc)
    g = GroupSpec.of(sc.model, group)
    fs = individual_machines(traj)
    em = equivalent_machine(fs, g)
    ig = inner_group(fs, g, em)
    imtes = {i: en.imte(fs, i) for i in range(sc.model.n)}
    igmtes = {i: en.igmte(ig, i) for i in g.members}
    ecims = {i: tf.ecim_energy(imtes[i], igmtes[i]) for i in g.members}
    paths = {i: tf.ecim_reconstruct_trajectory(imtes[i], igmtes[i], fs) for i in g.members}
    tcims = {t.machine: t for t in tf.tcims(fs, em)}
    dvs = {i: tf.delta_v(imtes[i], tcims[i], fs) for i in g.members}
    return Analysis(sc, g, traj, fs, em, ig, imtes, igmtes, en.emte(em), ecims, paths, tcims, dvs)


@dataclass
class Check:
    value: float
    worst_index: int
    tolerance: float

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tolerance)

    def as_dict(self):
        return {"value": self.value, "worst_index": self.worst_index, "tolerance": self.tolerance, "ok": self.ok}


@dataclass
class IdentityReport:
    checks: dict[str, Check] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks.values())

    def as_dict(self):
        return {"ok": self.ok, "checks": {k: v.as_dict() for k, v in self.checks.items()}}


def _worst(per_sample) -> tuple[float, int]:
    a = np.abs(np.asarray(per_sample, dtype=float))
    if a.ndim > 1:
        a = a.reshape(len(a), -1).max(axis=1)
    if a.size == 0:
        return 0.0, -1
    k = int(np.argmax(a))
    return float(a[k]), k


def _rel(a, b):
    return (np.asarray(a) - b) / np.maximum(1.0, np.abs(b))


def identity_report(an: Analysis, tolerances: dict | None = None) -> IdentityReport:
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    fs, em, ig, g = an.sys, an.em, an.ig, an.group
    c = fs.select(g.members)
    rep = IdentityReport()

    def add(name, per_sample):
        v, k = _worst(per_sample)
        rep.checks[name] = Check(v, k, tol[name])

    add("coi_angle", fs.angle @ fs.inertias)
    add("coi_speed", fs.speed @ fs.inertias)
    add("frame_composition", (fs.angle[:, c] - ig.angle) - em.angle[:, None])

    imke = sum(an.imtes[i].ke for i in g.members)
    igmke = sum(an.igmtes[i].ke for i in g.members)
    add("group_ke_split", _rel(imke - igmke, an.emte.ke))

    ecs = list(an.ecims.values())
    add("ecim_sum_total", _rel(np.sum([e.total for e in ecs], axis=0), an.emte.total))
    add("ecim_sum_ke", _rel(np.sum([e.ke for e in ecs], axis=0), an.emte.ke))
    add("ecim_sum_pe", _rel(np.sum([e.pe for e in ecs], axis=0), an.emte.pe))
    add("group_cross_term", tf.group_cross_term(ig, em))

    ts = list(an.tcims.values())
    add("tcim_scale_down", np.max([_rel(t.total, t.inertia / em.inertia * an.emte.total) for t in ts], axis=0))
    add("tcim_superposition", _rel(np.sum([t.total for t in ts], axis=0), an.emte.total))

    kc = an.traj.clear_index
    entities = list(an.imtes.values()) + list(an.igmtes.values()) + [an.emte]
    add("conservation", [en.conservation_deviation(e, kc) for e in entities])
    return rep


def energy_summary(an: Analysis) -> dict:
    """DLP times and energies at clearing and at each DLP."""
    kc = an.traj.clear_index
    out = {"clear_time": float(an.traj.times[kc]), "entities": {}}

    def entry(e: en.EnergySeries, dlp: en.DlpReport | None):
        d = {"at_clearing": {"ke": float(e.ke[kc]), "pe": float(e.pe[kc]), "total": float(e.total[kc])}}
        if dlp is not None:
            d["dlp_index"] = dlp.index
            d["dlp_time"] = dlp.time
            if dlp.index is not None:
                k = dlp.index
                d["at_dlp"] = {"ke": float(e.ke[k]), "pe": float(e.pe[k]), "total": float(e.total[k])}
        return d

    for i, e in an.imtes.items():
        out["entities"][e.entity] = entry(e, en.dlp_of_frame(an.sys, i))
    for i, e in an.igmtes.items():
        out["entities"][e.entity] = entry(e, None)
    out["entities"]["EMTE_CR"] = entry(an.emte, en.dlp_of_equivalent(an.em))
    for i, t in an.tcims.items():
        tt = en.EnergySeries(f"TCIMTE_{i}", t.times, t.ke, t.pe, t.total)
        out["entities"][tt.entity] = entry(tt, tf.tcim_dlp(t))
    out["entities"]["SMTE"] = entry(an.smte, None)
    return out
