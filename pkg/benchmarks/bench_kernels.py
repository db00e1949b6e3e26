"""Compiled core vs NumPy fallback on the two hot kernels.

    python3 benchmarks/bench_kernels.py [--steps 20000] [--repeat 5]

Uses the bundled 9-bus post-fault network. Reports the best of ``--repeat``
runs and checks that both backends agree.
"""

import argparse
import timeit

import numpy as np

from machform import _kernels_py
from machform.simulator import load_scenario, simulate
from machform.system import bundled

try:
    from machform import _core
except ImportError:
    _core = None


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20000, help="RK4 steps per run")
    ap.add_argument("--samples", type=int, default=20000, help="rows for the power batch")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    sc = load_scenario(bundled("wscc9"))
    m = sc.model
    net = m.post_fault
    x0 = simulate(sc.with_(horizon=0.2)).angles[-1]
    w0 = np.zeros(m.n)
    X = np.random.default_rng(0).uniform(-np.pi, np.pi, (args.samples, m.n))

    impls = {"python": _kernels_py}
    if _core is not None:
        impls["cython"] = _core

    rk4 = {}
    pe = {}
    out = {}
    for name, k in impls.items():
        rk4[name] = min(timeit.repeat(
            lambda: k.rk4_integrate(x0, w0, m.mech_power, m.inertia, m.emf, net.conductance,
                                    net.susceptance, sc.dt, args.steps), number=1, repeat=args.repeat))
        pe[name] = min(timeit.repeat(
            lambda: k.electrical_power_batch(X, m.emf, net.conductance, net.susceptance),
            number=1, repeat=args.repeat))
        out[name] = k.rk4_integrate(x0, w0, m.mech_power, m.inertia, m.emf, net.conductance,
                                    net.susceptance, sc.dt, args.steps)[0]

    print(f"{'kernel':<26}{'backend':<10}{'best (s)':>12}{'speed-up':>10}")
    for label, table in ((f"rk4_integrate x{args.steps}", rk4), (f"power_batch x{args.samples}", pe)):
        base = table["python"]
        for name, t in table.items():
            print(f"{label:<26}{name:<10}{t:>12.4f}{base / t:>9.1f}x")
    if "cython" in out:
        diff = np.abs(out["cython"] - out["python"]).max()
        print(f"max angle difference between backends: {diff:.2e} rad")
    else:
        print("compiled core not built; only the fallback was timed")


if __name__ == "__main__":
    main()
