import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from machform.system import (
    ConvergenceError, MachineParams, ModelError, NetworkError, RawNetwork, ReducedNetwork,
    SystemModel, bundled, electrical_power, kron_reduce, load_model, model_from_dict,
    power_jacobian, raw_network_from_json, read_scenario_json, sep_solve,
)

# Reduced admittance of the bundled 9-bus case, from node-by-node elimination
# in tests/oracles.py (independent of kron_reduce's block solve).
WSCC_PRE = np.array([
    [0.8454841352722177 - 2.988282168218402j, 0.287111005025097 + 1.5129404041995878j,
     0.20959432291684074 + 1.2256158561194122j],
    [0.287111005025097 + 1.5129404041995878j, 0.4199870290703615 - 2.723866611137674j,
     0.21327061407885728 + 1.0879296135909975j],
    [0.20959432291684074 + 1.2256158561194122j, 0.21327061407885728 + 1.0879296135909975j,
     0.2769983405329626 - 2.368131925747166j],
])
WSCC_FAULT = np.array([
    [0.6567763667338115 - 3.8159955625259814j, 0, 0.07014383057631227 + 0.6305588002937891j],
    [0, -5.4854635216675804j, 0],
    [0.07014383057631227 + 0.6305588002937891j, 0, 0.17401996624825067 - 2.795911978030877j],
])
WSCC_POST = np.array([
    [1.1386111904408087 - 2.296583788009723j, 0.12900209069156543 + 0.7063306389515722j,
     0.18239107092818288 + 1.0637047979733425j],
    [0.12900209069156543 + 0.7063306389515722j, 0.37444659140500247 - 2.0150767812920285j,
     0.19212546323144455 + 1.2066852589178367j],
    [0.18239107092818288 + 1.0637047979733425j, 0.19212546323144455 + 1.2066852589178367j,
     0.2691201196687492 - 2.351645289536514j],
])
# Post-fault SEP (COI-referenced), from a proportionally damped settling run.
WSCC_POST_SEP = np.array([-0.1832363413196989, 0.545081319670972, 0.2801284594363661])


def one_machine(G=0.5, B=0.0, E=1.0, pm=0.0, M=1.0):
    net = ReducedNetwork(np.array([[G]]), np.array([[B]]))
    return net, SystemModel((MachineParams(0, M, pm, E),), net, net, net)


def test_single_machine_power_is_diagonal_term():
    net, model = one_machine()
    for d in (-2.0, 0.0, 1.3):
        assert electrical_power([d], net, model.machines)[0] == pytest.approx(0.5)


def test_identical_machines_share_power():
    G = np.array([[0.3, 0.0], [0.0, 0.3]])
    B = np.array([[-2.0, 1.0], [1.0, -2.0]])
    net = ReducedNetwork(G, B)
    ms = (MachineParams(0, 1.0, 0.5, 1.1), MachineParams(1, 1.0, 0.5, 1.1))
    pe = electrical_power([0.4, 0.4], net, ms)
    assert pe[0] == pe[1]


def test_power_dimension_mismatch():
    net, model = one_machine()
    with pytest.raises(ModelError):
        electrical_power([0.0, 1.0], net, model.machines)


def test_power_batch_matches_loop(wscc9):
    m = wscc9.model
    rng = np.random.default_rng(3)
    X = rng.uniform(-3, 3, (7, 3))
    got = electrical_power(X, m.post_fault, m.machines)
    ref = [oracles.pe_loop(x, m.emf, m.post_fault.conductance, m.post_fault.susceptance) for x in X]
    np.testing.assert_allclose(got, ref, atol=1e-13)


def test_wscc_prefault_equilibrium_balances_power(wscc9_traj, wscc9):
    m = wscc9.model
    pe = electrical_power(wscc9_traj.angles[0], m.pre_fault, m.machines)
    np.testing.assert_allclose(pe, m.mech_power, atol=1e-8)


def test_kron_no_interior_nodes_keeps_machine_block():
    # all buses grounded: nothing left to eliminate
    raw = RawNetwork(np.zeros((2, 2)), (0, 1), (0.1j, 0.2j), np.zeros(2), grounded=(0, 1))
    np.testing.assert_array_equal(kron_reduce(raw).admittance, np.diag([1 / 0.1j, 1 / 0.2j]))


def test_kron_star_is_series_combination():
    y1, y2 = 1 / 0.2j, 1 / 0.5j
    raw = RawNetwork(np.zeros((1, 1)), (0, 0), (0.2j, 0.5j), np.zeros(1))
    Y = kron_reduce(raw).admittance
    ys = y1 * y2 / (y1 + y2)
    np.testing.assert_allclose(Y, [[ys, -ys], [-ys, ys]], atol=1e-12)


@pytest.mark.parametrize("stage,expected", [("pre", WSCC_PRE), ("fault", WSCC_FAULT), ("post", WSCC_POST)])
def test_kron_wscc_regression(wscc9, stage, expected):
    net = {"pre": wscc9.model.pre_fault, "fault": wscc9.model.during_fault, "post": wscc9.model.post_fault}[stage]
    np.testing.assert_allclose(net.admittance, expected, atol=1e-12)


def test_kron_wscc_textbook_values(wscc9):
    # published reduced matrices for the same case, 4 decimals
    assert wscc9.model.pre_fault.admittance[0, 0] == pytest.approx(0.8455 - 2.9883j, abs=1e-4)
    assert wscc9.model.during_fault.admittance[1, 1] == pytest.approx(-5.4855j, abs=1e-4)
    assert wscc9.model.post_fault.admittance[0, 0] == pytest.approx(1.1386 - 2.2966j, abs=1e-4)


def test_kron_matches_node_elimination_oracle():
    raw = raw_network_from_json(read_scenario_json(bundled("wscc9"))["networks"]["post"]["raw"])
    Yo = oracles.eliminate_nodes(oracles.full_admittance(raw), list(range(raw.n_machines)))
    np.testing.assert_allclose(kron_reduce(raw).admittance, Yo, atol=1e-13)


def test_kron_islanded_network_rejected():
    # a bus with nothing connected leaves Y_bb singular
    raw = RawNetwork(np.zeros((2, 2)), (0,), (0.1j,), np.zeros(2))
    with pytest.raises(NetworkError):
        kron_reduce(raw)


@settings(max_examples=30, deadline=None)
@given(arrays(float, 6, elements=st.floats(-1, 1)), arrays(float, 6, elements=st.floats(-1, 1)))
def test_kron_preserves_terminal_currents(re, im):
    raw = raw_network_from_json(read_scenario_json(bundled("wscc9"))["networks"]["post"]["raw"])
    Y = oracles.full_admittance(raw)
    n = raw.n_machines
    v = (re[:3] + 1j * im[:3])
    # full-matrix currents with interior injections forced to zero
    Ybb, Ybm = Y[n:, n:], Y[n:, :n]
    vb = -np.linalg.solve(Ybb, Ybm @ v)
    i_full = Y[:n, :n] @ v + Y[:n, n:] @ vb
    i_red = kron_reduce(raw).admittance @ v
    np.testing.assert_allclose(i_red, i_full, atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(arrays(float, 3, elements=st.floats(-6, 6)))
def test_lossless_power_sums_to_zero(angles):
    B = np.array([[-3.0, 1.0, 2.0], [1.0, -1.5, 0.5], [2.0, 0.5, -2.5]])
    net = ReducedNetwork(np.zeros((3, 3)), B)
    ms = tuple(MachineParams(i, 1.0, 0.0, 1.0 + 0.1 * i) for i in range(3))
    assert abs(electrical_power(angles, net, ms).sum()) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(arrays(float, 3, elements=st.floats(-3, 3)))
def test_power_sum_equals_network_loss(angles):
    G = np.array([[0.4, 0.1, 0.2], [0.1, 0.3, 0.05], [0.2, 0.05, 0.25]])
    B = np.array([[-3.0, 1.0, 2.0], [1.0, -1.5, 0.5], [2.0, 0.5, -2.5]])
    E = np.array([1.05, 1.0, 0.98])
    net = ReducedNetwork(G, B)
    ms = tuple(MachineParams(i, 1.0, 0.0, E[i]) for i in range(3))
    d = angles[:, None] - angles[None, :]
    loss = (np.outer(E, E) * G * np.cos(d)).sum()
    assert electrical_power(angles, net, ms).sum() == pytest.approx(loss, abs=1e-12)


def test_jacobian_matches_finite_difference(wscc9):
    m = wscc9.model
    x = np.array([0.1, 0.7, 0.3])
    J = power_jacobian(x, m.post_fault, m.machines)
    h = 1e-6
    fd = np.column_stack([
        (electrical_power(x + h * e, m.post_fault, m.machines)
         - electrical_power(x - h * e, m.post_fault, m.machines)) / (2 * h)
        for e in np.eye(3)])
    np.testing.assert_allclose(J, fd, atol=1e-8)


def test_sep_single_machine_vs_infinite_bus():
    # huge second inertia stands in for the fixed reference
    pm, pmax = 0.6, 1.2
    ms = (MachineParams(0, 1.0, pm, 1.0), MachineParams(1, 1e12, -pm, 1.0))
    net = ReducedNetwork(np.zeros((2, 2)), np.array([[-pmax, pmax], [pmax, -pmax]]))
    model = SystemModel(ms, net, net, net)
    x = sep_solve(net, model, [0.0, 0.0])
    assert x[0] - x[1] == pytest.approx(math.asin(pm / pmax), abs=1e-10)


def test_sep_at_equilibrium_returns_input(wscc9_traj, wscc9):
    x0 = wscc9_traj.angles[0]
    x, iters = sep_solve(wscc9.model.pre_fault, wscc9.model, x0, full_output=True)
    assert iters == 0
    assert np.array_equal(x, x0)


def test_sep_wscc_postfault_regression(wscc9, wscc9_traj):
    x = sep_solve(wscc9.model.post_fault, wscc9.model, wscc9_traj.angles[0])
    np.testing.assert_allclose(x, WSCC_POST_SEP, atol=1e-10)


def test_sep_residual_by_substitution(wscc9, wscc9_traj):
    m = wscc9.model
    x = sep_solve(m.post_fault, m, wscc9_traj.angles[0])
    P = m.mech_power - electrical_power(x, m.post_fault, m.machines)
    f = P - m.inertia / m.inertia.sum() * P.sum()
    assert np.abs(f).max() <= 1e-10
    assert abs(m.inertia @ x) <= 1e-12


def test_sep_no_equilibrium_raises():
    # transfer limit below the required power: no SEP exists
    ms = (MachineParams(0, 1.0, 1.0, 1.0), MachineParams(1, 1.0, -1.0, 1.0))
    net = ReducedNetwork(np.zeros((2, 2)), np.array([[-0.5, 0.5], [0.5, -0.5]]))
    with pytest.raises(ConvergenceError):
        sep_solve(net, SystemModel(ms, net, net, net), [0.0, 0.0])


def test_asymmetric_network_rejected():
    with pytest.raises(ModelError):
        ReducedNetwork(np.zeros((2, 2)), np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_machine_ids_must_be_dense():
    net = ReducedNetwork(np.zeros((2, 2)), np.zeros((2, 2)))
    with pytest.raises(ModelError):
        SystemModel((MachineParams(0, 1, 0, 1), MachineParams(2, 1, 0, 1)), net, net, net)


def test_raw_and_reduced_json_give_same_model(tmp_path):
    data = read_scenario_json(bundled("wscc9"))
    m_raw = model_from_dict(data)
    for stage, net in zip(("pre", "fault", "post"), (m_raw.pre_fault, m_raw.during_fault, m_raw.post_fault)):
        data["networks"][stage] = {"G": net.conductance.tolist(), "B": net.susceptance.tolist()}
    p = tmp_path / "reduced.json"
    p.write_text(json.dumps(data))
    m_red = load_model(p)
    for a, b in ((m_raw.pre_fault, m_red.pre_fault), (m_raw.post_fault, m_red.post_fault)):
        assert np.array_equal(a.conductance, b.conductance)
        assert np.array_equal(a.susceptance, b.susceptance)


def test_parse_error_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"machines": [\n  {"id": 0,,}\n]}')
    with pytest.raises(ModelError, match="line 2"):
        read_scenario_json(p)


def test_missing_network_field_named(tmp_path):
    data = read_scenario_json(bundled("smib"))
    data["networks"]["post"] = {"G": [[0, 0], [0, 0]]}
    with pytest.raises(ModelError, match="B"):
        model_from_dict(data)
