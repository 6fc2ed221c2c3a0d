"""Native gate set and the GateOp record shared by every compiler stage."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .expr import Operator, annihilate, create

# name -> (number of params, qubit operands, qumode operands)
GATE_SPECS = {
    "rx": (1, 1, 0),
    "ry": (1, 1, 0),
    "rz": (1, 1, 0),
    "R": (1, 0, 1),
    "D": (1, 0, 1),
    "BS": (2, 0, 2),
    "CR": (1, 1, 1),
    "CP": (0, 1, 1),
    "CD": (1, 1, 1),
    "CBS": (2, 1, 2),
    "RB": (1, 1, 1),
    "SWAPM": (0, 0, 2),
}

# gates whose amplitude parameter may be complex
COMPLEX_PARAM = {"D", "CD", "RB"}

ONE_OP_LATENCY = 1
TWO_OP_LATENCY = 20


@dataclass(frozen=True)
class GateOp:
    name: str
    params: tuple = ()
    qubits: tuple = ()
    qumodes: tuple = ()

    def __post_init__(self):
        spec = GATE_SPECS.get(self.name)
        if spec is None:
            raise ValueError(f"unknown gate {self.name!r}")
        npar, nq, nm = spec
        if len(self.params) != npar:
            raise ValueError(f"{self.name} takes {npar} parameter(s), got {len(self.params)}")
        if len(self.qubits) != nq or len(self.qumodes) != nm:
            raise ValueError(
                f"{self.name} needs {nq} qubit and {nm} qumode operand(s), "
                f"got {len(self.qubits)} and {len(self.qumodes)}"
            )
        if nm == 2 and self.qumodes[0] == self.qumodes[1]:
            raise ValueError(f"{self.name} needs two distinct qumodes")

    @property
    def arity(self):
        return len(self.qubits) + len(self.qumodes)

    @property
    def wires(self):
        return tuple(("q", i) for i in self.qubits) + tuple(("m", k) for k in self.qumodes)

    def inverse(self):
        return inverse_gate(self)

    def remap(self, qubit_map=None, qumode_map=None):
        qs = tuple(qubit_map[i] for i in self.qubits) if qubit_map is not None else self.qubits
        ms = tuple(qumode_map[k] for k in self.qumodes) if qumode_map is not None else self.qumodes
        return GateOp(self.name, self.params, qs, ms)

    def __str__(self):
        ps = ", ".join(_fmt_param(p) for p in self.params)
        ops = ", ".join([f"q[{i}]" for i in self.qubits] + [f"qm[{k}]" for k in self.qumodes])
        head = f"{self.name}({ps})" if self.params else self.name
        return f"{head} {ops}"


def _fmt_param(p):
    p = complex(p)
    if p.imag == 0:
        return repr(p.real)
    return f"{p.real!r}{p.imag:+}i"


def latency(g):
    return ONE_OP_LATENCY if g.arity == 1 else TWO_OP_LATENCY


def inverse_gate(g):
    if g.name == "CP":
        return GateOp("CR", (-math.pi,), g.qubits, g.qumodes)
    if g.name == "SWAPM":
        return g
    if g.name in ("BS", "CBS"):
        theta, phi = g.params
        return GateOp(g.name, (-theta, phi), g.qubits, g.qumodes)
    return GateOp(g.name, tuple(-p for p in g.params), g.qubits, g.qumodes)


def inverse_sequence(seq):
    return [inverse_gate(g) for g in reversed(seq)]


def generator(g, nq=None):
    """Hermitian H with U = exp(-iH), as an Operator on ``nq`` qubits.

    Qubit and qumode ids are used directly.  SWAPM has no single generator.
    """
    if nq is None:
        nq = max(g.qubits, default=-1) + 1

    def word(letter):
        w = ["I"] * nq
        w[g.qubits[0]] = letter
        return "".join(w)

    ident = "I" * nq
    p = g.params
    if g.name in ("rx", "ry", "rz"):
        return Operator.term(word(g.name[1].upper()), (), p[0] / 2)
    if g.name == "R":
        k = g.qumodes[0]
        return Operator.term(ident, (create(k), annihilate(k)), p[0])
    if g.name == "D":
        k = g.qumodes[0]
        a = complex(p[0])
        return Operator.term(ident, (create(k),), 1j * a) + Operator.term(ident, (annihilate(k),), -1j * a.conjugate())
    if g.name in ("BS", "CBS"):
        a, b = g.qumodes
        theta, phi = p
        w = word("Z") if g.name == "CBS" else ident
        e = cmath.exp(1j * phi)
        return (Operator.term(w, (create(a), annihilate(b)), theta / 2 * e)
                + Operator.term(w, (annihilate(a), create(b)), theta / 2 * e.conjugate()))
    if g.name in ("CR", "CP"):
        theta = math.pi if g.name == "CP" else p[0]
        k = g.qumodes[0]
        return Operator.term(word("Z"), (create(k), annihilate(k)), theta / 2)
    if g.name == "CD":
        k = g.qumodes[0]
        a = complex(p[0])
        w = word("Z")
        return Operator.term(w, (create(k),), 1j * a) + Operator.term(w, (annihilate(k),), -1j * a.conjugate())
    if g.name == "RB":
        k = g.qumodes[0]
        a = complex(p[0])
        w = word("X")
        return Operator.term(w, (create(k),), a) + Operator.term(w, (annihilate(k),), a.conjugate())
    raise ValueError(f"gate {g.name} has no single generator")


def expand_swapm(g):
    """Qumode SWAP as a beamsplitter plus two phase-space rotations."""
    a, b = g.qumodes
    return [
        GateOp("BS", (math.pi, 0.0), (), (a, b)),
        GateOp("R", (-math.pi / 2,), (), (a,)),
        GateOp("R", (-math.pi / 2,), (), (b,)),
    ]


def expand_macros(seq):
    out = []
    for g in seq:
        if g.name == "SWAPM":
            out.extend(expand_swapm(g))
        else:
            out.append(g)
    return out
