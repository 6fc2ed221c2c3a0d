import math

import pytest
from hypothesis import given, settings, strategies as st

from hybridc.gates import GATE_SPECS, GateOp
from hybridc.qasm import PauliStmt, Program, QasmError, emit, eval_expr, parse

NQ, NM = 3, 3
reals = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
cplx = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)


@st.composite
def gate(draw):
    name = draw(st.sampled_from(sorted(GATE_SPECS)))
    npar, nq, nm = GATE_SPECS[name]
    params = tuple(draw(cplx if name in ("D", "CD", "RB") else reals) for _ in range(npar))
    qs = tuple(draw(st.permutations(range(NQ)))[:nq])
    ms = tuple(draw(st.permutations(range(NM)))[:nm])
    return GateOp(name, params, qs, ms)


pauli = st.builds(PauliStmt, reals, st.lists(st.sampled_from("IXYZ"), min_size=NQ, max_size=NQ).map("".join))
programs = st.lists(st.one_of(gate(), pauli), max_size=12).map(lambda s: Program(NQ, NM, s))


def _norm(p):
    # complex params with zero imaginary part come back as floats
    out = []
    for s in p.statements:
        if isinstance(s, GateOp):
            s = GateOp(s.name, tuple(complex(x) for x in s.params), s.qubits, s.qumodes)
        out.append(s)
    return out


@settings(max_examples=200, deadline=None)
@given(programs)
def test_roundtrip(prog):
    back = parse(emit(prog))
    assert (back.nq, back.nm) == (prog.nq, prog.nm)
    assert _norm(back) == _norm(prog)
    assert emit(back) == emit(prog)


def test_expressions():
    assert eval_expr("pi/2") == pytest.approx(math.pi / 2)
    assert eval_expr("-(1+2)*3") == -9
    assert eval_expr("0.5+0.25i") == 0.5 + 0.25j
    assert eval_expr("2*i") == 2j


def test_comments_and_inferred_sizes():
    prog = parse("""
        // leading comment
        R(pi) qm[2];   // trailing
        CD(0.1i) q[1], qm[0];
        pauli(0.2) XIZ;
    """)
    assert (prog.nq, prog.nm) == (3, 3)
    assert prog.statements[1].params == (0.1j,)
    assert prog.paulis() == [PauliStmt(0.2, "XIZ")]


@pytest.mark.parametrize("text,line,col", [
    ("R(0.1) qm[0];\nFOO q[0];", 2, 1),
    ("qubits 1;\nrx(0.1) q[3];", 2, 1),
    ("BS(0.1) qm[0], qm[1];", 1, 1),
    ("CD(0.1) qm[0], q[0];", 1, 1),
    ("R(0.1 $) qm[0];", 1, 7),
])
def test_error_locations(text, line, col):
    with pytest.raises(QasmError) as e:
        parse(text)
    assert (e.value.line, e.value.col) == (line, col)


@pytest.mark.parametrize("text", [
    "pauli(0.1) XQ;",
    "pauli(0.1) XX;\npauli(0.1) X;",
    "pauli(0.1i) X;",
    "rx(1i) q[0];",
    "qubits 1;\nqubits 2;",
    "R(0.1 qm[0];",
])
def test_rejects(text):
    with pytest.raises(QasmError):
        parse(text)
