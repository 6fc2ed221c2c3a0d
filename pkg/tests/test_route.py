import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybridc import arch, route, sim
from hybridc.gates import GateOp
from hybridc.qasm import PauliStmt, Program

from instances import random_program
from oracle import floating_distance, program_columns, relabel_physical, routing_distance


def _metric(cmap):
    n = cmap.n_qumodes
    return [[cmap.dist(a, b) for b in range(n)] for a in range(n)]


def test_line_visit_order():
    # qumodes 0..3 hold B, A, C, D: alphabetical order walks 1-0-2-3 (cost 4)
    w = _metric(arch.line(4))
    alpha = [1, 0, 2, 3]
    assert route.path_cost(alpha, w) == 4
    best = route.christofides_path(range(4), w)
    assert route.path_cost(best, w) == 3


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(3, 7), st.booleans())
def test_tsp_bounds(seed, k, anchored):
    rng = np.random.default_rng(seed)
    w = _metric(arch.grid(4, 4))
    nodes = sorted(int(x) for x in rng.choice(16, size=k, replace=False))
    start = nodes[0] if anchored else None
    opt = route.path_cost(route.brute_force_path(nodes, w, start), w)
    chris = route.christofides_path(nodes, w, start)
    ta = route.threshold_accepting(nodes, w, seed=seed, start=start, init=chris, iters_per_node=50)
    for p in (chris, ta):
        assert sorted(p) == nodes
        if anchored:
            assert p[0] == start
    assert route.path_cost(chris, w) <= 2 * opt
    assert opt <= route.path_cost(ta, w) <= route.path_cost(chris, w)


def test_qubit_swap_is_exact():
    cmap = arch.line(2)
    gates = route.qubit_swap_gates(0, 1, cmap)
    names = [g.name for g in gates]
    assert names.count("CD") == 12 and names.count("SWAPM") == 12
    # the loops displace by up to 2 sqrt(pi/8); low levels need headroom
    sig = sim.Signature(2, 2, 20)
    idx = sim.projected_indices(sig, 2)
    got = program_columns(gates, sig, idx)[idx]
    want = np.zeros_like(got)
    for col, i in enumerate(idx):
        q0, q1, *modes = np.unravel_index(i, sig.dims)
        j = np.ravel_multi_index((q1, q0, *modes), sig.dims)
        want[np.searchsorted(idx, j), col] = 1
    assert sim.phase_distance(got, want) <= 1e-10


def test_qubit_swap_needs_adjacent_modes():
    with pytest.raises(route.RouteError):
        route.qubit_swap_gates(0, 2, arch.line(3))


@pytest.mark.parametrize("seed", range(12))
def test_random_programs_route_exactly(seed):
    rng = np.random.default_rng(seed)
    prog = random_program(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
    cmap = arch.grid(2, 3)
    rc = route.schedule(prog, cmap)
    route.verify_legal(rc.program.statements, cmap)
    assert routing_distance(prog, rc, 10, 2) <= 1e-8


def test_floating_qubits_route_exactly():
    prog = Program(3, 1, [
        PauliStmt(0.21, "ZIX"),
        GateOp("CD", (0.1,), (2,), (0,)),
        PauliStmt(-0.13, "YIY"),
        GateOp("CR", (0.2,), (0,), (0,)),
    ])
    cmap = arch.line(3)
    rc = route.schedule(prog, cmap, route.RouteConfig(floating=1.0))
    route.verify_legal(rc.program.statements, cmap)
    assert rc.final_qubit_layout != (0, 1, 2)
    assert floating_distance(prog, rc, 20, 2) <= 1e-8


def test_content_circuit_matches_oracle_relabelling():
    rng = np.random.default_rng(5)
    prog = random_program(rng, 2, 3, 20)
    rc = route.schedule(prog, arch.grid(2, 3))
    args = (rc.program.statements, prog.nm, rc.initial_layout, rc.program.nm)
    assert route.content_circuit(*args) == relabel_physical(*args)


def test_schedule_is_deterministic():
    rng = np.random.default_rng(11)
    prog = random_program(rng, 3, 3, 30)
    cmap = arch.grid(2, 3)
    for cfg in (route.RouteConfig(), route.RouteConfig(tsp="ta", seed=4), route.RouteConfig(pauli_rank="depth")):
        a, b = route.schedule(prog, cmap, cfg), route.schedule(prog, cmap, cfg)
        assert a.program == b.program and a.swap_count == b.swap_count


def test_ancilla_route_plan():
    cmap = arch.line(4)
    lay = route.Layout(0, 4, 4, 4)
    plan = route.ancilla_route([0, 1, 2, 3], cmap, lay, route.RouteConfig())
    assert plan.cost == 3 and sorted(plan.visit) == [0, 1, 2, 3]
    assert plan.visit[0] == plan.bus


def test_metrics_counts_swap_bundle():
    stmts = [GateOp("SWAPM", (), (), (0, 1)), GateOp("rx", (0.1,), (0,)), GateOp("CD", (0.2,), (0,), (0,))]
    m = route.metrics(stmts)
    assert (m["one_op"], m["two_op"]) == (3, 2)
    # BS then two R in parallel, then CD waits on the qubit rotation and qumode 0
    assert m["depth"] == 3
    with pytest.raises(ValueError):
        route.metrics([PauliStmt(0.1, "Z")])


def test_check_legal_reports_violations():
    cmap = arch.line(3)
    bad = route.check_legal([GateOp("BS", (0.1, 0.0), (), (0, 2)), GateOp("CR", (0.1,), (0,), (1,))], cmap)
    assert [i for i, _, _ in bad] == [0, 1]
    with pytest.raises(route.RouteError):
        route.verify_legal([PauliStmt(0.1, "Z")], cmap)


def test_config_and_layout_validation():
    with pytest.raises(ValueError):
        route.RouteConfig(tsp="greedy")
    with pytest.raises(ValueError):
        route.RouteConfig(floating=0)
    with pytest.raises(route.RouteError):
        route.Layout(2, 3, 0, 3, initial=(0, 0))


def test_mean_pairwise():
    cmap = arch.line(5)
    assert route.mean_pairwise([0, 2, 4], cmap.dist) == pytest.approx(8 / 3)
    assert route.mean_pairwise([1], cmap.dist) == 0.0
