"""Regenerate the bundled WSCC 9-bus scenario files.

Runs a Newton-Raphson load flow on the standard 9-bus data, converts the
loads to constant admittances, computes the internal EMFs behind the
transient reactances and writes the classical-model scenario JSON.

    python scripts/build_wscc9.py
"""

import json
from pathlib import Path

import numpy as np

from machform.system import MachineParams, RawNetwork, electrical_power

OUT = Path(__file__).resolve().parents[1] / "src" / "machform" / "data"
BASE_FREQ = 60.0

BRANCHES = [
    # from, to, r, x, total line charging
    (1, 4, 0.0, 0.0576, 0.0),
    (4, 5, 0.010, 0.085, 0.176),
    (4, 6, 0.017, 0.092, 0.158),
    (5, 7, 0.032, 0.161, 0.306),
    (6, 9, 0.039, 0.170, 0.358),
    (7, 8, 0.0085, 0.072, 0.149),
    (8, 9, 0.0119, 0.1008, 0.209),
    (2, 7, 0.0, 0.0625, 0.0),
    (3, 9, 0.0, 0.0586, 0.0),
]
LOADS = {5: 1.25 + 0.50j, 6: 0.90 + 0.30j, 8: 1.00 + 0.35j}
GENS = [  # bus, P setpoint, |V|, H (s), x'd
    (1, None, 1.040, 23.64, 0.0608),
    (2, 1.63, 1.025, 6.40, 0.1198),
    (3, 0.85, 1.025, 3.01, 0.1813),
]


def load_flow(tol=1e-13):
    nb = 9
    Y = RawNetwork.from_branches(nb, BRANCHES, []).ybus
    V = np.ones(nb)
    th = np.zeros(nb)
    for bus, _, vm, _, _ in GENS:
        V[bus - 1] = vm
    P = np.zeros(nb)
    Q = np.zeros(nb)
    for bus, s in LOADS.items():
        P[bus - 1] -= s.real
        Q[bus - 1] -= s.imag
    for bus, pg, *_ in GENS[1:]:
        P[bus - 1] += pg
    pv = [1, 2]
    pq = [3, 4, 5, 6, 7, 8]
    ang = pv + pq
    for _ in range(30):
        U = V * np.exp(1j * th)
        S = U * np.conj(Y @ U)
        mis = np.r_[P[ang] - S.real[ang], Q[pq] - S.imag[pq]]
        if np.max(np.abs(mis)) < tol:
            break
        dS_dth = 1j * np.diag(U) @ np.conj(np.diag(Y @ U) - Y @ np.diag(U))
        dS_dV = np.diag(U) @ np.conj(Y @ np.diag(U / V)) + np.diag(U / V) @ np.diag(np.conj(Y @ U))
        J = np.block([
            [dS_dth.real[np.ix_(ang, ang)], dS_dV.real[np.ix_(ang, pq)]],
            [dS_dth.imag[np.ix_(pq, ang)], dS_dV.imag[np.ix_(pq, pq)]],
        ])
        dx = np.linalg.solve(J, mis)
        th[ang] += dx[: len(ang)]
        V[pq] += dx[len(ang):]
    else:
        raise RuntimeError("load flow did not converge")
    U = V * np.exp(1j * th)
    return U, U * np.conj(Y @ U)


def raw_section(U, grounded=(), opened=()):
    loads = [
        {"bus": bus, "g": (np.conj(s) / abs(U[bus - 1]) ** 2).real, "b": (np.conj(s) / abs(U[bus - 1]) ** 2).imag}
        for bus, s in LOADS.items()
    ]
    return {
        "raw": {
            "n_bus": 9,
            "branches": [list(b) for b in BRANCHES],
            "links": [{"bus": bus, "r": 0.0, "x": xd} for bus, _, _, _, xd in GENS],
            "loads": loads,
            "grounded": list(grounded),
            "opened": [list(p) for p in opened],
        }
    }


def main():
    U, S = load_flow()
    machines = []
    emf = []
    for k, (bus, _, _, H, xd) in enumerate(GENS):
        v = U[bus - 1]
        i = np.conj(S[bus - 1] / v)
        emf.append(v + 1j * xd * i)
    emf = np.array(emf)

    nets = {
        "pre": raw_section(U),
        "fault": raw_section(U, grounded=[7]),
        "post": raw_section(U, opened=[(5, 7)]),
    }
    # mechanical power = electrical output at the load-flow point of the reduced network
    from machform.system import _network_from_json

    pre = _network_from_json(nets["pre"])
    tmp = tuple(MachineParams(k, 1.0, 0.0, abs(e)) for k, e in enumerate(emf))
    pm = electrical_power(np.angle(emf), pre, tmp)
    for k, (bus, _, _, H, xd) in enumerate(GENS):
        machines.append({
            "id": k,
            "name": f"G{k + 1}",
            "M": 2.0 * H / (2.0 * np.pi * BASE_FREQ),
            "Pm": float(pm[k]),
            "E": float(abs(emf[k])),
        })

    common = {"base_freq": BASE_FREQ, "machines": machines, "networks": nets, "group": [1, 2]}
    stable = dict(common, description="WSCC 9-bus, 3-phase fault at bus 7 cleared by opening line 5-7",
                  clear_time=0.08, horizon=2.0, dt=0.001)
    unstable = dict(common, description="WSCC 9-bus, bus-7 fault cleared late: G2 and G3 separate from G1",
                    clear_time=0.25, horizon=1.5, dt=0.001)
    for name, data in (("wscc9", stable), ("wscc9_unstable", unstable)):
        (OUT / f"{name}.json").write_text(json.dumps(data, indent=1) + "\n")
    print("E =", np.abs(emf), "angles(deg) =", np.degrees(np.angle(emf)))
    print("Pm =", pm)


if __name__ == "__main__":
    main()
