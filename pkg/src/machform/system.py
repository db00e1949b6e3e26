"""Classical multi-machine system model: data types, Kron reduction,
electrical power and post-fault equilibrium solving."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels

log = logging.getLogger(__name__)


class ModelError(ValueError):
    """Invalid system data (dimension mismatch, broken invariant)."""


class NetworkError(ModelError):
    """Raised when the interior block of a network cannot be eliminated."""


class ConvergenceError(RuntimeError):
    """Newton iteration did not reach the requested residual."""


@dataclass(frozen=True)
class MachineParams:
    id: int
    inertia: float
    mech_power: float
    emf_mag: float
    name: str = ""

    def __post_init__(self):
        if not self.inertia > 0:
            raise ModelError(f"machine {self.id}: inertia must be positive")
        if not self.emf_mag > 0:
            raise ModelError(f"machine {self.id}: emf magnitude must be positive")


@dataclass(frozen=True)
class ReducedNetwork:
    """Admittance matrix reduced to machine internal nodes, Y = G + jB."""

    conductance: np.ndarray
    susceptance: np.ndarray

    def __post_init__(self):
        G = np.array(self.conductance, dtype=float)
        B = np.array(self.susceptance, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape != B.shape:
            raise ModelError(f"G and B must be equal square matrices, got {G.shape} and {B.shape}")
        if not (np.allclose(G, G.T, rtol=0, atol=1e-12) and np.allclose(B, B.T, rtol=0, atol=1e-12)):
            raise ModelError("reduced network must be symmetric")
        G.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "conductance", G)
        object.__setattr__(self, "susceptance", B)

    @property
    def size(self) -> int:
        return self.conductance.shape[0]

    @classmethod
    def from_admittance(cls, Y: np.ndarray) -> "ReducedNetwork":
        Y = np.asarray(Y, dtype=complex)
        # symmetrize away elimination round-off
        Y = 0.5 * (Y + Y.T)
        return cls(Y.real.copy(), Y.imag.copy())

    @property
    def admittance(self) -> np.ndarray:
        return self.conductance + 1j * self.susceptance


@dataclass(frozen=True)
class RawNetwork:
    """Unreduced network.

    ``ybus`` holds branch and line-charging admittances between buses only.
    Machine ``k`` is attached through ``link_impedance[k]`` from its internal
    node to bus ``link_bus[k]``. ``load_admittance`` is a per-bus constant
    impedance load; ``grounded`` lists buses held at zero voltage (bolted
    faults). Bus indices are 0-based.
    """

    ybus: np.ndarray
    link_bus: tuple[int, ...]
    link_impedance: tuple[complex, ...]
    load_admittance: np.ndarray
    grounded: tuple[int, ...] = ()

    def __post_init__(self):
        ybus = np.asarray(self.ybus, dtype=complex)
        nb = ybus.shape[0]
        if ybus.shape != (nb, nb):
            raise ModelError("ybus must be square")
        if len(self.link_bus) != len(self.link_impedance):
            raise ModelError("one link impedance per machine required")
        if any(not 0 <= b < nb for b in (*self.link_bus, *self.grounded)):
            raise ModelError("bus index out of range")
        if np.asarray(self.load_admittance).shape != (nb,):
            raise ModelError("load admittance must have one entry per bus")
        object.__setattr__(self, "ybus", ybus)
        object.__setattr__(self, "load_admittance", np.asarray(self.load_admittance, dtype=complex))

    @property
    def n_machines(self) -> int:
        return len(self.link_bus)

    @classmethod
    def from_branches(cls, n_bus, branches, links, loads=(), grounded=(), opened=()):
        """Assemble from ``(from, to, r, x, b_total)`` branch tuples.

        Bus numbers here are 1-based, matching the usual case-file layout.
        ``links`` are ``(bus, r, x)`` per machine, ``loads`` are ``(bus, g, b)``.
        ``opened`` lists branches (as bus pairs) removed from service.
        """
        out = {frozenset(p) for p in opened}
        Y = np.zeros((n_bus, n_bus), dtype=complex)
        for f, t, r, x, b in branches:
            if frozenset((f, t)) in out:
                continue
            i, j = f - 1, t - 1
            y = 1.0 / complex(r, x)
            Y[i, i] += y + 0.5j * b
            Y[j, j] += y + 0.5j * b
            Y[i, j] -= y
            Y[j, i] -= y
        yl = np.zeros(n_bus, dtype=complex)
        for bus, g, b in loads:
            yl[bus - 1] += complex(g, b)
        return cls(
            ybus=Y,
            link_bus=tuple(bus - 1 for bus, _, _ in links),
            link_impedance=tuple(complex(r, x) for _, r, x in links),
            load_admittance=yl,
            grounded=tuple(g - 1 for g in grounded),
        )


@dataclass(frozen=True)
class SystemModel:
    machines: tuple[MachineParams, ...]
    pre_fault: ReducedNetwork
    during_fault: ReducedNetwork
    post_fault: ReducedNetwork
    base_freq: float = 60.0

    def __post_init__(self):
        machines = tuple(self.machines)
        object.__setattr__(self, "machines", machines)
        if [m.id for m in machines] != list(range(len(machines))):
            raise ModelError("machine ids must be dense 0..n-1 in order")
        for name in ("pre_fault", "during_fault", "post_fault"):
            if getattr(self, name).size != len(machines):
                raise ModelError(f"{name} network size does not match machine count")

    @property
    def n(self) -> int:
        return len(self.machines)

    @property
    def inertia(self) -> np.ndarray:
        return np.array([m.inertia for m in self.machines])

    @property
    def mech_power(self) -> np.ndarray:
        return np.array([m.mech_power for m in self.machines])

    @property
    def emf(self) -> np.ndarray:
        return np.array([m.emf_mag for m in self.machines])


def kron_reduce(raw: RawNetwork) -> ReducedNetwork:
    """Eliminate every bus, keeping only machine internal nodes."""
    n, nb = raw.n_machines, raw.ybus.shape[0]
    y_link = np.array([1.0 / z for z in raw.link_impedance], dtype=complex)
    Ymm = np.diag(y_link)
    Ymb = np.zeros((n, nb), dtype=complex)
    Ybb = raw.ybus + np.diag(raw.load_admittance)
    for k, b in enumerate(raw.link_bus):
        Ymb[k, b] = -y_link[k]
        Ybb[b, b] += y_link[k]

    keep = [b for b in range(nb) if b not in set(raw.grounded)]
    Ymb = Ymb[:, keep]
    Ybb = Ybb[np.ix_(keep, keep)]
    if Ybb.size == 0:
        return ReducedNetwork.from_admittance(Ymm)
    if np.linalg.cond(Ybb) > 1e14:
        raise NetworkError("interior admittance block is singular (islanded or degenerate network)")
    Yred = Ymm - Ymb @ np.linalg.solve(Ybb, Ymb.T)
    return ReducedNetwork.from_admittance(Yred)


def _check_dims(angles, net: ReducedNetwork, machines) -> None:
    n = len(machines) if not isinstance(machines, SystemModel) else machines.n
    if np.shape(angles)[-1] != n or net.size != n:
        raise ModelError(f"dimension mismatch: {np.shape(angles)[-1]} angles, network {net.size}, {n} machines")


def _emf(machines) -> np.ndarray:
    if isinstance(machines, SystemModel):
        return machines.emf
    return np.array([m.emf_mag for m in machines])


def electrical_power(angles, net: ReducedNetwork, machines) -> np.ndarray:
    """Classical-model electrical output of each machine.

    ``angles`` may be a single state (n,) or a stack of states (T, n).
    """
    angles = np.asarray(angles, dtype=float)
    _check_dims(angles, net, machines)
    E = _emf(machines)
    if angles.ndim == 1:
        return kernels.electrical_power_batch(angles[None, :], E, net.conductance, net.susceptance)[0]
    return kernels.electrical_power_batch(angles, E, net.conductance, net.susceptance)


def power_jacobian(angles, net: ReducedNetwork, machines) -> np.ndarray:
    """d P_e / d delta."""
    E = _emf(machines)
    d = np.subtract.outer(angles, angles)
    EE = np.outer(E, E)
    J = EE * (net.conductance * np.sin(d) - net.susceptance * np.cos(d))
    np.fill_diagonal(J, 0.0)
    np.fill_diagonal(J, -J.sum(axis=1))
    return J


def _coi_residual(angles, net, model: SystemModel):
    M = model.inertia
    P = model.mech_power - electrical_power(angles, net, model)
    return P - M / M.sum() * P.sum()


def sep_solve(net: ReducedNetwork, model: SystemModel, initial_angles, *, tol=1e-10,
              max_iter=50, full_output=False):
    """Stable equilibrium of ``net`` in the COI frame by damped Newton.

    Solves f_i-SYS = 0 for every machine subject to sum(M_i delta_i) = 0.
    The redundant last residual row (the f_i-SYS sum to zero) is replaced by
    the COI constraint.
    """
    M = model.inertia
    delta = np.array(initial_angles, dtype=float)
    _check_dims(delta, net, model)
    delta -= M @ delta / M.sum()
    w = M / M.sum()

    def norm(x):
        return np.max(np.abs(_coi_residual(x, net, model)))

    def newton_step(x):
        F = _coi_residual(x, net, model)
        dP = -power_jacobian(x, net, model)
        J = dP - np.outer(w, dP.sum(axis=0))
        J[-1, :] = M
        F[-1] = 0.0
        return np.linalg.solve(J, -F)

    r = norm(delta)
    it = 0
    while r > tol:
        if it >= max_iter:
            raise ConvergenceError(f"no equilibrium found after {max_iter} iterations (residual {r:.3e})")
        it += 1
        step = newton_step(delta)
        lam = 1.0
        while True:
            trial = delta + lam * step
            trial -= M @ trial / M.sum()
            rt = norm(trial)
            if rt < r or lam < 1e-4:
                break
            lam *= 0.5
        delta, r = trial, rt
        log.debug("sep_solve it=%d residual=%.3e step=%.3g", it, r, lam)
    # quadratic convergence makes one extra full step nearly free; it keeps
    # undisturbed runs stationary to rounding rather than to tol
    if it:
        trial = delta + newton_step(delta)
        trial -= M @ trial / M.sum()
        if norm(trial) < r:
            delta = trial
    if full_output:
        return delta, it
    return delta


# --- scenario files -------------------------------------------------------

def raw_network_from_json(r: dict) -> RawNetwork:
    """Build a RawNetwork from a scenario file's ``raw`` section."""
    return RawNetwork.from_branches(
        r["n_bus"],
        [tuple(b) for b in r["branches"]],
        [(l["bus"], l.get("r", 0.0), l["x"]) for l in r["links"]],
        [(l["bus"], l["g"], l["b"]) for l in r.get("loads", [])],
        grounded=r.get("grounded", ()),
        opened=[tuple(p) for p in r.get("opened", [])],
    )


def _network_from_json(spec: dict) -> ReducedNetwork:
    if "raw" in spec:
        return kron_reduce(raw_network_from_json(spec["raw"]))
    try:
        return ReducedNetwork(np.array(spec["G"], dtype=float), np.array(spec["B"], dtype=float))
    except KeyError as exc:
        raise ModelError(f"network section needs either 'raw' or 'G'/'B': missing {exc}") from None


def model_from_dict(data: dict) -> SystemModel:
    try:
        machines = tuple(
            MachineParams(int(m["id"]), float(m["M"]), float(m["Pm"]), float(m["E"]), m.get("name", ""))
            for m in data["machines"]
        )
        nets = data["networks"]
        return SystemModel(
            machines,
            _network_from_json(nets["pre"]),
            _network_from_json(nets["fault"]),
            _network_from_json(nets["post"]),
            float(data.get("base_freq", 60.0)),
        )
    except KeyError as exc:
        raise ModelError(f"scenario is missing field {exc}") from None


def load_model(path) -> SystemModel:
    return model_from_dict(read_scenario_json(path))


def read_scenario_json(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def bundled(name: str) -> Path:
    """Path of a scenario file shipped with the package."""
    p = Path(__file__).parent / "data" / name
    if not p.suffix:
        p = p.with_suffix(".json")
    if not p.exists():
        raise FileNotFoundError(p)
    return p
