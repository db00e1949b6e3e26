"""Command-line front end.

    machform simulate --scenario wscc9_unstable --out out/
    machform check-all --scenario wscc9_unstable --group 1,2
    machform newton-demo

``--scenario`` takes a path or the name of a bundled scenario. The default
output directory comes from ``MACHFORM_OUT`` (else ``./machform-out``).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import logging
import os
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__, kernels
from . import energy as en
from . import newton
from .analysis import DEFAULT_TOLERANCES, energy_summary, identity_report, run_analysis
from .export import export_series, write_csv, write_json
from .frames import frame_csv_columns
from .simulator import SimulationError, load_scenario, simulate, to_csv_columns
from .system import ConvergenceError, ModelError, bundled, read_scenario_json

log = logging.getLogger("machform")

OUT_ENV = "MACHFORM_OUT"


def _scenario_path(arg: str) -> Path:
    p = Path(arg)
    if p.exists():
        return p
    try:
        return bundled(arg)
    except FileNotFoundError:
        raise ModelError(f"no scenario file or bundled scenario named {arg!r}") from None


def _parse_group(text: str | None, default) -> list[int]:
    if text is None:
        if default is None:
            raise ModelError("no --group given and the scenario has no 'group' field")
        return [int(x) for x in default]
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ModelError(f"bad --group {text!r}; expected comma-separated machine ids") from None


def _parse_tols(text: str | None) -> dict[str, float]:
    if not text:
        return {}
    out = {}
    for item in text.split(","):
        key, _, val = item.partition("=")
        key = key.strip()
        if key not in DEFAULT_TOLERANCES:
            raise ModelError(f"unknown tolerance {key!r}; known: {', '.join(DEFAULT_TOLERANCES)}")
        out[key] = float(val)
    return out


def _load(args):
    path = _scenario_path(args.scenario)
    raw = read_scenario_json(path)
    sc = load_scenario(path, dt=args.dt)
    return path, raw, sc


def _manifest(args, out: Path, path: Path) -> None:
    write_json(out / "manifest.json", {
        "command": args.command,
        "scenario": str(path),
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    })


def cmd_simulate(args, out: Path) -> int:
    path, _, sc = _load(args)
    traj = simulate(sc)
    export_series(to_csv_columns(traj), out / "trajectory.csv")
    _manifest(args, out, path)
    log.info("separated=%s", traj.separated())
    return 0


def _analysis(args):
    path, raw, sc = _load(args)
    group = _parse_group(args.group, raw.get("group"))
    return path, run_analysis(sc, group)


def cmd_frames(args, out: Path) -> int:
    path, an = _analysis(args)
    export_series(frame_csv_columns(an.sys), out / "frame_sys.csv")
    export_series(frame_csv_columns(an.ig), out / "frame_cr.csv")
    em = an.em
    write_csv(out / "equivalent_machine.csv", ["time", "delta_CR", "omega_CR", "f_CR"],
              np.column_stack([em.times, em.angle, em.speed, em.force]))
    _manifest(args, out, path)
    return 0


def cmd_energy(args, out: Path) -> int:
    path, an = _analysis(args)
    for e in [*an.imtes.values(), *an.igmtes.values(), an.emte, an.smte]:
        export_series(en.energy_csv_columns(e), out / f"{e.entity.lower()}.csv")
    write_json(out / "energy_summary.json", energy_summary(an))
    _manifest(args, out, path)
    return 0


def _report(args, an, out: Path, keys=None) -> int:
    rep = identity_report(an, _parse_tols(args.tol_overrides))
    if keys is not None:
        rep.checks = {k: v for k, v in rep.checks.items() if k in keys}
    write_json(out / "identity_report.json", rep.as_dict())
    for name, c in rep.checks.items():
        log.info("%-20s %.3e (tol %.1e) %s", name, c.value, c.tolerance, "ok" if c.ok else "FAIL")
    return 0 if rep.ok else 1


def cmd_ecim(args, out: Path) -> int:
    path, an = _analysis(args)
    for i, ec in an.ecims.items():
        p = an.ecim_paths[i]
        write_csv(out / f"ecim_{i}.csv", ["time", "ke", "pe", "total", "valid", "angle", "velocity"],
                  np.column_stack([ec.times, ec.ke, ec.pe, ec.total, p.valid.astype(float), p.angle, p.velocity]))
    _manifest(args, out, path)
    return _report(args, an, out, {"group_ke_split", "ecim_sum_total", "ecim_sum_ke", "ecim_sum_pe", "group_cross_term"})


def cmd_tcim(args, out: Path) -> int:
    path, an = _analysis(args)
    for i, t in an.tcims.items():
        write_csv(out / f"tcim_{i}.csv", ["time", "ke", "pe", "total"],
                  np.column_stack([t.times, t.ke, t.pe, t.total]))
        dv = an.delta_vs[i]
        write_csv(out / f"delta_v_{i}.csv", ["time", "dke", "dpe", "dtotal"],
                  np.column_stack([dv.times, dv.dke, dv.dpe, dv.dtotal]))
    _manifest(args, out, path)
    return _report(args, an, out, {"tcim_scale_down", "tcim_superposition"})


def cmd_check_all(args, out: Path) -> int:
    path, an = _analysis(args)
    write_json(out / "energy_summary.json", energy_summary(an))
    _manifest(args, out, path)
    return _report(args, an, out)


def cmd_newton_demo(args, out: Path) -> int:
    b1, b2 = newton.BALL_1, newton.BALL_2
    end = min(b1.impact_time, b2.impact_time)
    n = int(np.floor(end / args.step + 1e-9))
    times = np.r_[np.arange(n + 1) * args.step]
    cols = newton.series(times, b1, b2)
    write_csv(out / "newton_demo.csv", list(cols), np.column_stack(list(cols.values())))
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "frames": cmd_frames,
    "energy": cmd_energy,
    "ecim": cmd_ecim,
    "tcim": cmd_tcim,
    "check-all": cmd_check_all,
    "newton-demo": cmd_newton_demo,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="machform", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--out", default=os.environ.get(OUT_ENV, "machform-out"))
        if name == "newton-demo":
            s.add_argument("--step", type=float, default=0.01, help="time step of the CSV grid (s)")
            continue
        s.add_argument("--scenario", default="wscc9", help="scenario JSON path or bundled name")
        s.add_argument("--dt", type=float, default=None)
        if name != "simulate":
            s.add_argument("--group", default=None, help='machine ids, e.g. "1,2"')
            s.add_argument("--tol-overrides", default=None, help='e.g. "ecim_sum_total=1e-5,conservation=2e-4"')
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    try:
        return COMMANDS[args.command](args, out)
    except (ModelError, ConvergenceError, SimulationError) as exc:
        print(f"machform: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
