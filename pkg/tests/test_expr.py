import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybridc import sim
from hybridc.expr import (
    Operator,
    PauliString,
    annihilate,
    create,
    format_factors,
    mono_product_coeffs,
    normal_order_monomial,
    parse_factors,
    parse_operator,
    pauli_mul,
    words_commute,
)

NQ, NM, CUT = 2, 2, 9

letters = st.sampled_from("IXYZ")
words = st.lists(letters, min_size=NQ, max_size=NQ).map("".join)
factor = st.tuples(st.integers(0, NM - 1), st.booleans())
monos = st.lists(factor, max_size=2).map(tuple)
coeffs = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)
operators = st.lists(st.tuples(words, monos, coeffs), min_size=1, max_size=3).map(
    lambda ts: sum((Operator.term(w, f, c) for w, f, c in ts), Operator(NQ))
)

SIG = sim.Signature(NQ, NM, CUT)
# rows/cols far enough from the cutoff that degree-4 products are exact
LOW = sim.projected_indices(SIG, CUT - 4)


def mat(op):
    return sim.operator_matrix(op, SIG)


def low(m):
    return m[np.ix_(LOW, LOW)]


def test_pauli_mul_table():
    assert pauli_mul("X", "Y") == (1j, "Z")
    assert pauli_mul("Y", "X") == (-1j, "Z")
    assert pauli_mul("XZ", "XZ") == (1, "II")


@given(words, words)
def test_words_commute_matches_matrices(a, b):
    pa = sim.operator_matrix(Operator.term(a), sim.Signature(NQ, 0))
    pb = sim.operator_matrix(Operator.term(b), sim.Signature(NQ, 0))
    assert words_commute(a, b) == np.allclose(pa @ pb, pb @ pa)


def test_normal_order_aad():
    # a a† = a† a + 1
    out = dict(normal_order_monomial((annihilate(0), create(0))))
    assert out == {((0, True), (0, False)): 1, (): 1}


@pytest.mark.parametrize("p,q,r,s", [(1, 1, 1, 1), (2, 0, 0, 2), (0, 2, 2, 0), (1, 2, 2, 1)])
def test_mono_product_coeffs_matches_reordering(p, q, r, s):
    seq = (create(0),) * p + (annihilate(0),) * q + (create(0),) * r + (annihilate(0),) * s
    got = {(sum(d for _, d in f), sum(not d for _, d in f)): c for f, c in normal_order_monomial(seq)}
    assert got == mono_product_coeffs(p, q, r, s)


@given(monos)
def test_normal_order_preserves_matrix(m):
    ordered = sum((Operator.term("I" * NQ, f, c) for f, c in normal_order_monomial(m)), Operator(NQ))
    raw = np.eye(SIG.dim, dtype=complex)
    a, ad = sim.ladder_matrices(CUT)
    for mode, dag in m:
        f = ad if dag else a
        mats = [np.eye(2)] * NQ + [f if k == mode else np.eye(CUT) for k in range(NM)]
        full = mats[0]
        for x in mats[1:]:
            full = np.kron(full, x)
        raw = raw @ full
    assert np.allclose(low(mat(ordered)), low(raw))


@settings(max_examples=60, deadline=None)
@given(operators, operators)
def test_product_is_matrix_product(x, y):
    assert np.allclose(low(mat(x * y)), low(mat(x) @ mat(y)), atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(operators, operators)
def test_commutator_antisymmetric_and_matrix(x, y):
    assert (x.commutator(y) + y.commutator(x)).is_zero()
    mx, my = mat(x), mat(y)
    assert np.allclose(low(mat(x.commutator(y))), low(mx @ my - my @ mx), atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(operators)
def test_adjoint_involution_and_hermitian_part(x):
    assert x.adjoint().adjoint().equals(x)
    assert (x + x.adjoint()).is_hermitian()
    assert (x - x.adjoint()).is_antihermitian()


@given(operators, operators, operators)
def test_addition_associative(x, y, z):
    assert ((x + y) + z).equals(x + (y + z))


def test_extend_pads_words():
    op = Operator.term("Z", (create(0),))
    assert list(op.extend(3).words()) == ["ZII"]
    with pytest.raises(ValueError):
        op.extend(3).extend(1)


def test_register_mismatch_rejected():
    with pytest.raises(ValueError):
        Operator.term("X") + Operator.term("XX")


def test_parse_roundtrip():
    op = Operator.term("ZI", (create(1), annihilate(1)), 0.5) + Operator.term("II", (), 1j)
    assert parse_operator(str(op)).equals(op)
    f = (create(0), annihilate(2))
    assert parse_factors(format_factors(f)) == f


def test_invalid_pauli_word():
    with pytest.raises(ValueError):
        PauliString("XQ")
