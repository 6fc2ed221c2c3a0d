import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybridc import sim
from hybridc.gates import GATE_SPECS, GateOp, expand_macros, generator, inverse_gate, latency

angles = st.floats(-1.0, 1.0, allow_nan=False)
amps = st.complex_numbers(max_magnitude=0.5, allow_nan=False, allow_infinity=False)


def unitary(g, nq, nm, cutoff=20):
    return sim.gate_unitary(g, sim.Signature(nq, nm, cutoff))


def sample_gate(name, rng):
    npar, nq, nm = GATE_SPECS[name]
    params = tuple(complex(*rng.normal(0, 0.3, 2)) if name in ("D", "CD", "RB") else rng.uniform(-1, 1)
                   for _ in range(npar))
    return GateOp(name, params, tuple(range(nq)), tuple(range(nm)))


def test_latency_classes():
    assert latency(GateOp("R", (0.1,), (), (0,))) == 1
    assert latency(GateOp("CD", (0.1,), (0,), (0,))) == 20
    assert latency(GateOp("rz", (0.1,), (0,))) == 1


@pytest.mark.parametrize("bad", [
    lambda: GateOp("XYZ"),
    lambda: GateOp("R", (), (), (0,)),
    lambda: GateOp("CD", (0.1,), (), (0,)),
    lambda: GateOp("BS", (0.1, 0.0), (), (1, 1)),
])
def test_gateop_validation(bad):
    with pytest.raises(ValueError):
        bad()


@given(amps)
@settings(max_examples=25, deadline=None)
def test_displacement_matches_closed_form(alpha):
    u = unitary(GateOp("D", (alpha,), (), (0,)), 0, 1, 40)
    ref = sim.coherent_displacement(alpha, 40)
    assert np.allclose(u[:12, :12], ref[:12, :12], atol=1e-9)


@given(angles)
def test_rotation_is_phase(theta):
    u = unitary(GateOp("R", (theta,), (), (0,)), 0, 1, 8)
    assert np.allclose(u, np.diag(np.exp(-1j * theta * np.arange(8))))


@given(angles)
def test_qubit_rotations(theta):
    x = np.array([[0, 1], [1, 0]])
    u = unitary(GateOp("rx", (theta,), (0,)), 1, 0)
    assert np.allclose(u, math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * x)


@given(amps)
@settings(max_examples=25, deadline=None)
def test_conditional_displacement_blocks(alpha):
    # CD = |0><0| D(alpha) + |1><1| D(-alpha)
    u = unitary(GateOp("CD", (alpha,), (0,), (0,)), 1, 1, 40)
    d = sim.coherent_displacement(alpha, 40)[:10, :10]
    dm = sim.coherent_displacement(-alpha, 40)[:10, :10]
    assert np.allclose(u[:10, :10], d, atol=1e-9)
    assert np.allclose(u[40:50, 40:50], dm, atol=1e-9)
    assert np.allclose(u[:40, 40:], 0)


def test_conditional_parity_phases():
    u = unitary(GateOp("CP", (), (0,), (0,)), 1, 1, 6)
    n = np.arange(6)
    want = np.diag(np.concatenate([np.exp(-1j * math.pi / 2 * n), np.exp(1j * math.pi / 2 * n)]))
    assert np.allclose(u, want)


def test_beamsplitter_single_photon():
    theta, phi = 0.7, 0.3
    u = unitary(GateOp("BS", (theta, phi), (), (0, 1)), 0, 2, 4)
    # |1,0> -> cos(theta/2)|1,0> + (...)|0,1>
    col = u[:, 1 * 4 + 0]
    assert abs(col[4]) == pytest.approx(math.cos(theta / 2))
    assert abs(col[1]) == pytest.approx(math.sin(theta / 2))


@pytest.mark.parametrize("name", sorted(n for n in GATE_SPECS if n != "SWAPM"))
def test_inverse_gate(name):
    g = sample_gate(name, np.random.default_rng(1))
    nq, nm = len(g.qubits), len(g.qumodes)
    sig = sim.Signature(nq, nm, 24)
    idx = sim.projected_indices(sig, 6)
    u = sim.circuit_unitary([g, inverse_gate(g)], sig, idx)[idx]
    assert np.allclose(u, np.eye(len(idx)), atol=1e-8)


@pytest.mark.parametrize("name", sorted(n for n in GATE_SPECS if n != "SWAPM"))
def test_generator_is_hermitian_and_exponentiates(name):
    g = sample_gate(name, np.random.default_rng(2))
    nq, nm = len(g.qubits), len(g.qumodes)
    h = generator(g, nq)
    assert h.is_hermitian()
    sig = sim.Signature(nq, nm, 30)
    ref = sim.exp_generator(h * -1j, sig)
    idx = sim.projected_indices(sig, 6)
    assert sim.phase_distance(sim.gate_unitary(g, sig)[np.ix_(idx, idx)], ref[np.ix_(idx, idx)]) < 1e-8


def test_swapm_expands_to_three_gates():
    seq = expand_macros([GateOp("SWAPM", (), (), (0, 1))])
    assert [g.name for g in seq] == ["BS", "R", "R"]


def test_program_columns_handles_pauli_statements():
    from hybridc.qasm import PauliStmt

    sig = sim.Signature(2, 0)
    cols = sim.program_columns([PauliStmt(0.4, "XZ")], sig, np.arange(4))
    x, z = np.array([[0, 1], [1, 0]]), np.diag([1, -1])
    want = math.cos(0.4) * np.eye(4) - 1j * math.sin(0.4) * np.kron(x, z)
    assert np.allclose(cols, want)


def test_phase_distance_ignores_global_phase():
    a = np.eye(3) * cmath.exp(0.9j)
    assert sim.phase_distance(a, np.eye(3)) < 1e-9
    assert sim.phase_distance(np.eye(2), np.diag([1, -1])) == pytest.approx(math.sqrt(2), rel=1e-6)


def test_reduced_state_of_coherent_state():
    sig = sim.Signature(0, 1, 30)
    psi = sim.gate_unitary(GateOp("D", (0.4,), (), (0,)), sig)[:, 0]
    rho = sim.reduced_qumode_state(psi, sig, 0)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-9)
    assert np.trace(rho @ rho).real == pytest.approx(1.0, abs=1e-9)
