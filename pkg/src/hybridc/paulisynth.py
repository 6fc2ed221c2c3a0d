"""Multi-qubit Pauli exponentials and Pauli-controlled displacements.

Both constructions use one qumode as a bus.  A chain of conditional-parity
gates turns a plain displacement into a displacement conditioned on a Pauli
product, and a closed displacement loop on the bus deposits a geometric phase
on the qubits while returning the bus to its initial state.

All gate lists are in time order (first element is applied first).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .expr import PauliString
from .gates import GateOp, inverse_sequence


@dataclass
class CDSequence:
    gates: list = field(default_factory=list)
    kicked_phase: float = 0.0


def _word(pauli):
    return pauli.word if isinstance(pauli, PauliString) else str(pauli)


def dressing(letter, qubit):
    """Rotations (before, after) turning a Z-controlled gate into a ``letter``-controlled one."""
    if letter == "Z":
        return [], []
    if letter == "X":
        return [GateOp("ry", (-math.pi / 2,), (qubit,))], [GateOp("ry", (math.pi / 2,), (qubit,))]
    if letter == "Y":
        return [GateOp("rx", (math.pi / 2,), (qubit,))], [GateOp("rx", (-math.pi / 2,), (qubit,))]
    raise ValueError(f"no dressing for {letter!r}")


def parity_chain(word, k, order=None, inverse=False):
    """Dressed CP (or CP^dagger) gates from every active qubit of ``word`` onto qumode ``k``."""
    support = [i for i, c in enumerate(word) if c != "I"]
    if order is None:
        order = support
    elif sorted(order) != support:
        raise ValueError(f"order {order} does not match the support {support}")
    out = []
    for j in order:
        pre, post = dressing(word[j], j)
        core = GateOp("CR", (-math.pi,), (j,), (k,)) if inverse else GateOp("CP", (), (j,), (k,))
        out += pre + [core] + post
    return out


def _controlled_displacement(word, k, beta, order):
    n = sum(1 for c in word if c != "I")
    if n == 0:
        raise ValueError("all-identity Pauli string")
    gates = parity_chain(word, k, order, inverse=True)
    gates.append(GateOp("D", ((1j) ** n * beta,), (), (k,)))
    rev = list(reversed(order)) if order is not None else None
    gates += parity_chain(word, k, rev, inverse=False)
    return gates


def synth_multiqubit_cd(pauli, k, alpha, order=None):
    """exp(P (alpha a_k^dagger - alpha a_k)) for the Pauli product P and real alpha."""
    if isinstance(alpha, complex):
        if alpha.imag != 0:
            raise ValueError("alpha must be real")
        alpha = alpha.real
    return CDSequence(_controlled_displacement(_word(pauli), k, alpha, order), 0.0)


def synth_pauli_exponential(pauli, theta, k, order=None):
    """exp(-i theta P) through a displacement loop on bus qumode ``k``."""
    word = _word(pauli)
    if all(c == "I" for c in word):
        raise ValueError("all-identity Pauli string")
    if theta == 0:
        return CDSequence([], 0.0)
    alpha = math.sqrt(abs(theta) / 2)
    fwd = (
        [GateOp("D", (1j * alpha,), (), (k,))]
        + synth_multiqubit_cd(word, k, -alpha, order).gates
        + [GateOp("D", (-1j * alpha,), (), (k,))]
        + synth_multiqubit_cd(word, k, alpha, order).gates
    )
    # fwd realises exp(+2i alpha^2 P); its adjoint gives the opposite sign
    gates = fwd if theta < 0 else inverse_sequence(fwd)
    return CDSequence(gates, -theta)


def synth_controlled_qumode_op(pauli, base, order=None):
    """Condition a single-qumode gate on a Pauli product."""
    word = _word(pauli)
    if base.qubits or len(base.qumodes) != 1:
        raise ValueError("base must be a single-qumode gate")
    if all(c == "I" for c in word):
        return CDSequence([base], 0.0)
    if base.name == "R":
        # rotations commute with the parity chain
        return CDSequence([base], 0.0)
    if base.name != "D":
        raise ValueError(f"unsupported base gate {base.name}")
    k = base.qumodes[0]
    return CDSequence(_controlled_displacement(word, k, complex(base.params[0]), order), 0.0)


def pauli_rotation(word, theta):
    """exp(-i theta P) for a weight-one word as a single qubit rotation."""
    support = [i for i, c in enumerate(word) if c != "I"]
    if len(support) != 1:
        raise ValueError("pauli_rotation needs a weight-one word")
    j = support[0]
    return [GateOp("r" + word[j].lower(), (2 * theta,), (j,))]
