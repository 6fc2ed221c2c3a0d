from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybridc import models, rules, sim
from hybridc.expr import Operator, annihilate, create
from hybridc.gates import GATE_SPECS, GateOp
from hybridc.qasm import PauliStmt

from instances import exact_rule_distances
from oracle import program_columns

AD, A = create(0), annihilate(0)


def node_of(op):
    return rules.plain(op, 1, frozenset())


def test_rule_tables():
    assert rules.APPROXIMATE_RULES == {1, 2, 12, 13}
    assert sorted(rules.TRIAL_ORDER) == list(range(1, 17))
    assert set(rules.RULE_NAMES) == set(range(1, 17))


def test_enumerate_splits_order():
    assert rules.enumerate_splits((AD, AD, A, A)) == [((AD, AD), (A, A)), ((AD,), (AD, A, A)), ((AD, AD, A), (A,))]
    assert rules.enumerate_splits((AD, A)) == [((AD,), (A,))]
    with pytest.raises(ValueError):
        rules.enumerate_splits((A,))


@given(st.lists(st.tuples(st.integers(0, 2), st.booleans()), min_size=2, max_size=6).map(tuple))
def test_enumerate_splits_properties(f):
    splits = rules.enumerate_splits(f)
    assert len(splits) == len(f) - 1
    assert all(m + n == f and m and n for m, n in splits)
    key = [(abs(len(m) - len(n)), len(m)) for m, n in splits]
    assert key == sorted(key)


@pytest.mark.parametrize("gen,name,params", [
    (Operator.term("", (AD, A), -1j * 0.7), "R", (0.7,)),
    (Operator.term("", (AD,), 3j) + Operator.term("", (A,), 3j), "D", (3j,)),
    (Operator.term("Z", (AD, A), -1j * 0.2), "CR", (0.4,)),
])
def test_match_basis_gate_examples(gen, name, params):
    gates = rules.match_basis_gate(node_of(gen))
    assert [g.name for g in gates] == [name]
    assert np.allclose(gates[0].params, params)


def test_match_basis_gate_no_match():
    assert rules.match_basis_gate(node_of(Operator.term("", (AD, AD, A, A), -1j))) is None


@pytest.mark.parametrize("rule", [3, 4, 5, 6, 7, 8, 9, 10, 11, 14, 15, 16])
def test_exact_rules_one_level(rule):
    assert max(exact_rule_distances(rule, n=3, seed=7)) <= 1e-8


def test_apply_rule_rejects_mismatch():
    node = node_of(Operator.term("", (AD, A), -1j * 0.1))
    with pytest.raises(ValueError):
        rules.apply_rule(14, node)
    with pytest.raises(ValueError):
        rules.apply_rule(99, node)


def test_rule3_never_fires_on_monomials():
    # Hermitian ordered monomials are diagonal in the Fock basis, so they commute
    for f in [(AD, A, AD, A), (AD, AD, A, A), (A, AD, AD, A)]:
        w = (("", f, -0.1j),)
        node = rules.plain(rules._op_from_written(w, 0), 1, frozenset(), written=w)
        with pytest.raises(ValueError):
            rules.apply_rule(3, node, ancillas=0)


def test_trotterize_plan():
    plan = rules.trotterize(["a", "b"], 1.0, 2)
    assert plan == [(0, 0, 0.5), (0, 1, 0.5), (1, 0, 0.5), (1, 1, 0.5)]
    with pytest.raises(ValueError):
        rules.trotterize(["a"], 1.0, 0)


def test_bch_of_equal_operators_is_identity():
    m = Operator.term("", (AD, A), 0.3j)
    seq = rules.bch_expand(m, m, 0.2)
    total = sum(seq[1:], seq[0])
    assert total.is_zero()


def test_bch_lowest_order():
    # anti-Hermitian pair whose commutator is a pure phase
    sig = sim.Signature(0, 1, 40)
    t = 0.1
    mm = Operator.term("", (AD,)) - Operator.term("", (A,))
    nn = (Operator.term("", (AD,)) + Operator.term("", (A,))) * 1j
    u = np.eye(sig.dim)
    for g in rules.bch_expand(mm, nn, t):
        u = sim.exp_generator(g, sig) @ u
    want = sim.exp_generator(mm.commutator(nn) * (t * t), sig)
    idx = np.arange(8)
    assert sim.phase_distance(u[np.ix_(idx, idx)], want[np.ix_(idx, idx)]) < 5 * t ** 3


def _leaves_native(prog):
    for s in prog.statements:
        assert isinstance(s, (GateOp, PauliStmt))
        if isinstance(s, GateOp):
            assert s.name in GATE_SPECS


@pytest.mark.parametrize("name", sorted(models.BUILDERS))
def test_models_decompose_to_native(name):
    h = models.build(name, models.make_params(name, None if name == "kerr" else 3))
    d = rules.decompose(h, 1.0, rules.DecomposeConfig(trotter_steps=1))
    _leaves_native(d.program)
    for r in range(1, 17):
        assert d.stats.successes[r] <= d.stats.attempts[r]


def test_decompose_is_deterministic():
    h = models.build("bosehubbard", models.make_params("bosehubbard", 3))
    a = rules.decompose(h, 0.5, rules.DecomposeConfig(trotter_steps=2)).program
    b = rules.decompose(h, 0.5, rules.DecomposeConfig(trotter_steps=2)).program
    assert a == b


def test_single_number_term_is_one_rotation():
    h = models.Hamiltonian([models._term(0, {}, 1.0, (1.0, models.number(0)))], nq=0, nm=1)
    d = rules.decompose(h, 0.3, rules.DecomposeConfig(trotter_steps=1))
    assert [(g.name, g.params) for g in d.program.statements] == [("R", (0.3,))]
    assert d.n_ancillas == 0


def test_qubit_model_matches_trotter_product():
    # every Heisenberg term is realized exactly, so the program equals the
    # first-order product formula term by term
    h = models.build("heisenberg", models.make_params("heisenberg", 3))
    k, t = 2, 0.7
    prog = rules.decompose(h, t, rules.DecomposeConfig(trotter_steps=k)).program
    sig = sim.Signature(3, 0)
    want = np.eye(8, dtype=complex)
    for _ in range(k):
        for term in h:
            want = sim.exp_generator(term.to_operator() * (-1j * t / k), sig) @ want
    got = program_columns(prog.statements, sig, np.arange(8))
    assert sim.phase_distance(got, want) < 1e-10


def test_kerr_terminal_gates():
    d = rules.decompose(models.build("kerr"), 0.05, rules.DecomposeConfig(trotter_steps=1))
    names = Counter(g.name for g in d.program.statements)
    assert names["R"] > 0 and names["CD"] > 0
    assert d.n_ancillas == 1
    used = {r for r, _, _ in d.applications}
    assert {11, 10, 13}.issubset(used)


def test_depth_budget_reports_deepest():
    cfg = rules.DecomposeConfig(trotter_steps=1, max_depth=2)
    with pytest.raises(rules.DecomposeError) as e:
        rules.decompose(models.build("kerr"), 0.1, cfg)
    assert e.value.deepest is not None


def test_rule_ablation():
    h = models.build("heisenberg", models.make_params("heisenberg", 2))
    cfg = rules.DecomposeConfig(trotter_steps=1, rule_enable=frozenset(range(1, 17)) - {15})
    with pytest.raises(rules.DecomposeError):
        rules.decompose(h, 0.1, cfg)


def test_non_hermitian_term_rejected():
    from hybridc.expr import BosonPolynomial, HybridTerm, PauliString

    bad = [HybridTerm(PauliString("", 1.0), BosonPolynomial.from_monomials([]).identity(0))]
    bad[0].boson.add((AD,), 1.0)
    with pytest.raises(rules.DecomposeError):
        rules.decompose(bad, 0.1, nq=0, nm=1)


def test_hit_rates_structure():
    stats = rules.RuleStats()
    for name in sorted(models.BUILDERS):
        h = models.build(name, models.make_params(name, None if name == "kerr" else 3))
        stats.merge(rules.decompose(h, 1.0).stats)
    hr = rules.hit_rates(stats)
    assert sum(hr["success"].values()) == pytest.approx(100.0)
    assert sum(hr["total"].values()) == pytest.approx(100.0)
    assert hr["success_counts"][3] == 0
    assert hr["success_counts"][14] == hr["success_counts"][15]
    top5 = sorted(range(1, 16), key=lambda r: -hr["success"][r])[:5]
    assert {1, 2, 14, 15} <= set(top5)


def test_decompose_config_validation():
    with pytest.raises(ValueError):
        rules.DecomposeConfig(bch_order=4)
    with pytest.raises(ValueError):
        rules.DecomposeConfig(trotter_steps=0)


@pytest.mark.parametrize("dagger", [False, True])
def test_ladder_block_rules_are_second_order(dagger):
    from oracle import expansion_distance

    sig = sim.Signature(2, 1, 30)
    d = []
    for t in (0.1, 0.05):
        node = rules.block(0, ((0, dagger),), t, 2, 1, frozenset())
        d.append(expansion_distance(node, rules.apply_rule(13 if dagger else 12, node, ancillas=0), sig, 8))
    assert d[0] / d[1] == pytest.approx(4.0, rel=0.2)


def test_trotter_first_order_on_noncommuting_terms():
    sig = sim.Signature(1, 1, 16)
    idx = sim.projected_indices(sig, 8)
    ops = [Operator.term("X", (AD, A), 1.0), Operator.term("Z", (AD,), 0.5) + Operator.term("Z", (A,), 0.5)]
    exact = sim.exp_generator((ops[0] + ops[1]) * -0.1j, sig)[np.ix_(idx, idx)]
    d = []
    for k in (4, 8):
        u = np.eye(sig.dim, dtype=complex)
        for _, term, dt in rules.trotterize(ops, 0.1, k):
            u = sim.exp_generator(ops[term] * (-1j * dt), sig) @ u
        d.append(sim.phase_distance(u[np.ix_(idx, idx)], exact))
    assert d[0] / d[1] == pytest.approx(2.0, rel=0.2)
