"""Acceptance criteria, one test each, at their stated tolerances.

Each test prints a single ``[PASS]``/``[FAIL]`` line (visible without -s).
Run standalone with ``python3 tests/test_acceptance.py`` for just the lines.
"""

import itertools
import math
import time

import numpy as np
import pytest

import oracles
from machform import energy as en
from machform import newton as nt
from machform import transforms as tf
from machform.analysis import run_analysis
from machform.frames import GroupSpec, equivalent_machine, inner_group
from machform.simulator import find_critical_clearing, load_scenario, simulate
from machform.system import bundled

INTEGRATOR_TOL = 1e-5  # rad; agreement level of the regression checkpoint


def _emit(capsys, no, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {no:>2}: {title}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


def _scenarios():
    return {name: load_scenario(bundled(name)) for name in ("wscc9", "wscc9_unstable")}


def c1_newton():
    t0 = time.perf_counter()
    b1, b2 = nt.BALL_1, nt.BALL_2
    v1 = nt.ball_energy(b1, nt.ball_state(b1, 0.0)).total
    v2 = nt.ball_energy(b2, nt.ball_state(b2, 0.0)).total
    v3 = v1 - v2
    drift = 0.0
    for b, v0 in ((b1, v1), (b2, v2)):
        for t in np.linspace(0.0, b.impact_time, 2001):
            drift = max(drift, abs(nt.ball_energy(b, nt.ball_state(b, t)).total - v0))
    dt = time.perf_counter() - t0
    ok = (abs(v1 - 78.4) <= 1e-12 and abs(v2 - 24.0) <= 1e-12 and abs(v3 - 54.4) <= 1e-12
          and drift <= 1e-12 and dt < 1.0)
    return ok, f"V1={v1:.12g} V2={v2:.12g} V3(0)={v3:.12g} drift={drift:.1e} in {dt:.2f}s"


def c2_order():
    t0 = time.perf_counter()
    sc = load_scenario(bundled("wscc9"))
    ref = simulate(sc.with_(dt=1e-4))

    def err(dt):
        tr = simulate(sc.with_(dt=dt))
        return max(np.abs(tr.angles[-1] - ref.angles[-1]).max(), np.abs(tr.speeds[-1] - ref.speeds[-1]).max())

    r = err(2e-3) / err(1e-3)
    dt = time.perf_counter() - t0
    return 12 <= r <= 20 and dt < 10, f"error ratio 2ms/1ms = {r:.2f} (want 12..20) in {dt:.2f}s"


def c3_eac():
    t0 = time.perf_counter()
    sc = load_scenario(bundled("smib"))
    M1, M2 = sc.model.inertia
    tcr, _ = oracles.smib_critical_clearing(0.8, 2.0, 1.5, M1 * M2 / (M1 + M2))
    got = find_critical_clearing(sc)
    dt = time.perf_counter() - t0
    gap = abs(got - tcr)
    return gap <= 2 * sc.dt and dt < 10, f"bisection {got:.4f}s vs equal-area {tcr:.6f}s, gap {gap * 1e3:.3f} ms (<= {2 * sc.dt * 1e3:g} ms) in {dt:.2f}s"


def c4_coi():
    worst = 0.0
    for sc in _scenarios().values():
        fs = run_analysis(sc, [1, 2]).sys
        worst = max(worst, np.abs(fs.angle @ fs.inertias).max(), np.abs(fs.speed @ fs.inertias).max())
    return worst <= 1e-9, f"max |sum M d|, |sum M w| = {worst:.1e} (<= 1e-9)"


def _all_groups(n):
    return [list(g) for r in range(1, n + 1) for g in itertools.combinations(range(n), r)]


def c5_ke_identity():
    worst = 0.0
    for sc in _scenarios().values():
        an = run_analysis(sc, [1, 2])
        fs = an.sys
        for group in _all_groups(sc.model.n):
            g = GroupSpec.of(sc.model, group)
            em = equivalent_machine(fs, g)
            ig = inner_group(fs, g, em)
            lhs = sum(an.imtes[i].ke - en.igmte(ig, i).ke for i in group)
            emke = en.emte(em).ke
            worst = max(worst, float((np.abs(lhs - emke) / np.maximum(1.0, np.abs(emke))).max()))
    return worst <= 1e-10, f"max relative deviation over all 7 groups = {worst:.1e} (<= 1e-10)"


def c6_ecim_superposition():
    dev, cross = 0.0, 0.0
    for sc in _scenarios().values():
        an = run_analysis(sc, [1, 2])
        d = tf.ecim_superposition_check(list(an.ecims.values()), an.emte)
        dev = max(dev, d.total)
        cross = max(cross, float(tf.group_cross_term(an.ig, an.em).max()))
    return dev <= 1e-6 and cross <= 1e-12, f"total deviation {dev:.1e} (<= 1e-6), cross term {cross:.1e} (<= 1e-12)"


def c7_tcim():
    scale, sup = 0.0, 0.0
    for sc in _scenarios().values():
        an = run_analysis(sc, [1, 2])
        s, p = tf.tcim_scale_deviation(list(an.tcims.values()), an.emte)
        scale, sup = max(scale, s), max(sup, p)
    return scale <= 1e-12 and sup <= 1e-12, f"scale-down {scale:.1e}, superposition {sup:.1e} (<= 1e-12)"


def c8_conservation():
    worst, who = 0.0, ""
    for name, sc in _scenarios().items():
        an = run_analysis(sc, [1, 2])
        for e in [*an.imtes.values(), an.emte, *an.igmtes.values()]:
            d = en.conservation_deviation(e, an.traj.clear_index)
            if d > worst:
                worst, who = d, f"{name}/{e.entity}"
    return worst <= 1e-4, f"max post-clearing drift {worst:.1e} at {who} (<= 1e-4)"


def c9_ecim_failure():
    an = run_analysis(load_scenario(bundled("wscc9_unstable")), [1, 2])
    fs = an.sys
    violations, negative, gap = 0, [], math.inf
    for i, p in an.ecim_paths.items():
        c = fs.column(i)
        mask = p.valid & (an.igmtes[i].ke > 0) & (fs.speed[:, c] >= 0)
        mask[0] = False  # shared starting angle
        violations += int(np.count_nonzero(p.angle[mask] >= fs.angle[mask, c]))
        if (an.ecims[i].ke < 0).any():
            negative.append(i)
        gap = min(gap, float(np.nanmin(np.abs(p.angle - an.em.angle))))
    ok = violations == 0 and bool(negative) and gap > 10 * INTEGRATOR_TOL
    return ok, (f"(a) {violations} samples with d_EC >= d_SYS; (b) ECIMKE < 0 for machines {negative}; "
                f"(c) min |d_EC - d_CR| = {gap:.1e} (> {10 * INTEGRATOR_TOL:.0e})")


def c10_tcim_dlp():
    an = run_analysis(load_scenario(bundled("wscc9_unstable")), [1, 2])
    em_dlp = en.dlp_of_equivalent(an.em).index
    tc = [tf.tcim_dlp(t).index for t in an.tcims.values()]
    fs = an.sys
    brackets = tf.equal_speed_brackets(fs, [1, 2])
    together = len(brackets) > 0
    for k in brackets:
        for dv in an.delta_vs.values():
            together &= bool(dv.dke[k] * dv.dke[k + 1] <= 0)
    ok = em_dlp is not None and all(i == em_dlp for i in tc) and together
    return ok, (f"EM DLP {em_dlp}, TCIM DLPs {tc}; every member's dKE changes sign inside each of "
                f"the {len(brackets)} equal-speed brackets: {together}")


CRITERIA = [
    (1, "newton demo energies and conservation", c1_newton),
    (2, "RK4 order on bundled 9-bus", c2_order),
    (3, "SMIB critical clearing vs equal area", c3_eac),
    (4, "COI closure", c4_coi),
    (5, "KE superimposition identity", c5_ke_identity),
    (6, "ECIM energy superimposition", c6_ecim_superposition),
    (7, "TCIM scale-down and superimposition", c7_tcim),
    (8, "post-fault conservation", c8_conservation),
    (9, "ECIM trajectory failure", c9_ecim_failure),
    (10, "TCIM DLP simultaneity", c10_tcim_dlp),
]


@pytest.mark.parametrize("no,title,fn", CRITERIA, ids=[f"criterion_{c[0]:02d}" for c in CRITERIA])
def test_criterion(no, title, fn, capsys):
    ok, detail = fn()
    assert _emit(capsys, no, title, ok, detail), detail


if __name__ == "__main__":
    results = [_emit(None, no, title, *fn()) for no, title, fn in CRITERIA]
    raise SystemExit(0 if all(results) else 1)
