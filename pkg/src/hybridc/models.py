"""Benchmark Hamiltonians and the Jordan-Wigner encoding.

Every builder returns a :class:`Hamiltonian`: a list of Hermitian
:class:`~hybridc.expr.HybridTerm` objects that also records the register
sizes.  Chains are open (no wraparound).
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional

from .expr import BosonPolynomial, HybridTerm, Operator, PauliString, format_factors, parse_factors

UP, DOWN = 0, 1


class Hamiltonian(list):
    def __init__(self, terms=(), nq=0, nm=0, name=""):
        super().__init__(terms)
        self.nq = nq
        self.nm = nm
        self.name = name


# ---------------------------------------------------------------- helpers

def _word(nq, letters):
    w = ["I"] * nq
    for q, c in letters.items():
        w[q] = c
    return "".join(w)


def _poly(*monos):
    """BosonPolynomial from (coeff, factors) pairs; factors like ('ad', 0), ('a', 1)."""
    p = BosonPolynomial()
    for c, fs in monos:
        p.add(tuple((m, k == "ad") for k, m in fs), c)
    return p


_ONE = ((1.0, ()),)


def _term(nq, letters, coeff, *monos):
    monos = monos or _ONE
    return HybridTerm(PauliString(_word(nq, letters), float(coeff)), _poly(*monos))


def number(m):
    return (("ad", m), ("a", m))


def quad(m):
    return (("ad", m), ("a", m), ("ad", m), ("a", m))


def displacement_x(m):
    """b + b^dagger as monomial pairs."""
    return ((1.0, (("a", m),)), (1.0, (("ad", m),)))


# ----------------------------------------------------------------- params

@dataclass
class KerrParams:
    omega: float = 1.0
    kappa: float = 1.0


@dataclass
class Z2HiggsParams:
    L: int = 20
    g: float = 1.0
    U: float = 1.0
    J: float = 1.0


@dataclass
class BoseHubbardParams:
    sites: int = 20
    t: float = 1.0
    U: float = 1.0
    mu: float = 1.0
    edges: Optional[tuple] = None  # default: open chain


@dataclass
class HubbardHolsteinParams:
    L: int = 20
    t: float = 1.0
    U: float = 1.0
    g: float = 1.0
    omega0: float = 1.0


@dataclass
class EVCParams:
    N: int = 20
    omega: float = 1.0
    omega_q: float = 1.0
    chi: float = 1.0
    g_cd: float = 1.0
    g: float = 1.0
    g_vib: float = 1.0


@dataclass
class HeisenbergParams:
    N: int = 20
    Jx: float = 1.0
    Jy: float = 1.0
    Jz: float = 1.0
    h: float = 1.0


PARAMS = {
    "kerr": KerrParams,
    "z2higgs": Z2HiggsParams,
    "bosehubbard": BoseHubbardParams,
    "hubbardholstein": HubbardHolsteinParams,
    "evc": EVCParams,
    "heisenberg": HeisenbergParams,
}

SIZE_FIELD = {"z2higgs": "L", "bosehubbard": "sites", "hubbardholstein": "L", "evc": "N", "heisenberg": "N"}


def make_params(model, size=None, **overrides):
    if model not in PARAMS:
        raise ValueError(f"unknown model {model!r}; choose from {sorted(PARAMS)}")
    cls = PARAMS[model]
    names = {f.name for f in fields(cls)}
    bad = set(overrides) - names
    if bad:
        raise ValueError(f"unknown parameter(s) for {model}: {sorted(bad)}")
    if size is not None:
        if model not in SIZE_FIELD:
            raise ValueError(f"model {model} has no size parameter")
        overrides[SIZE_FIELD[model]] = int(size)
    return cls(**overrides)


# ----------------------------------------------------------------- models

def kerr(p):
    h = Hamiltonian(nq=0, nm=1, name="kerr")
    h.append(_term(0, {}, p.omega, (1.0, number(0))))
    h.append(_term(0, {}, p.kappa / 2, (1.0, (("ad", 0), ("ad", 0), ("a", 0), ("a", 0)))))
    return h


def z2higgs(p):
    """Link qubits l = i (between sites i and i+1), site qumodes i."""
    if p.L < 2:
        raise ValueError("z2higgs needs L >= 2")
    nq, nm = p.L - 1, p.L
    h = Hamiltonian(nq=nq, nm=nm, name="z2higgs")
    for i in range(p.L - 1):
        h.append(_term(nq, {i: "X"}, -p.g))
    for i in range(p.L):
        h.append(_term(nq, {}, p.U, (1.0, quad(i))))
    for i in range(p.L - 1):
        h.append(_term(nq, {i: "Z"}, -p.J,
                       (1.0, (("ad", i), ("a", i + 1))), (1.0, (("ad", i + 1), ("a", i)))))
    return h


def bosehubbard(p):
    if p.sites < 1:
        raise ValueError("bosehubbard needs at least one site")
    edges = p.edges if p.edges is not None else tuple((i, i + 1) for i in range(p.sites - 1))
    h = Hamiltonian(nq=0, nm=p.sites, name="bosehubbard")
    for i, j in edges:
        h.append(_term(0, {}, -p.t, (1.0, (("ad", i), ("a", j))), (1.0, (("ad", j), ("a", i)))))
    for i in range(p.sites):
        h.append(_term(0, {}, p.U / 2, (1.0, quad(i)), (-1.0, number(i))))
    for i in range(p.sites):
        h.append(_term(0, {}, -p.mu, (1.0, number(i))))
    return h


def hubbardholstein(p):
    """Spin orbitals site-major: qubit 2*site + spin."""
    if p.L < 1:
        raise ValueError("hubbardholstein needs L >= 1")
    nq, nm = 2 * p.L, p.L
    h = Hamiltonian(nq=nq, nm=nm, name="hubbardholstein")
    for i in range(p.L - 1):
        for s in (UP, DOWN):
            ops = jordan_wigner([FermionOp(i, s, True), FermionOp(i + 1, s, False)], p.L)
            ops = ops + ops.adjoint()
            for ps in to_pauli_strings(ops * -p.t):
                h.append(HybridTerm(ps, BosonPolynomial.identity()))
    for i in range(p.L):
        nn = jordan_wigner([FermionOp(i, UP, True), FermionOp(i, UP, False),
                            FermionOp(i, DOWN, True), FermionOp(i, DOWN, False)], p.L)
        for ps in to_pauli_strings(nn * p.U):
            h.append(HybridTerm(ps, BosonPolynomial.identity()))
    for i in range(p.L):
        h.append(_term(nq, {}, p.omega0, (1.0, number(i))))
    for i in range(p.L):
        for s in (UP, DOWN):
            n_op = jordan_wigner([FermionOp(i, s, True), FermionOp(i, s, False)], p.L)
            for ps in to_pauli_strings(n_op * p.g, keep_identity=True):
                h.append(HybridTerm(ps, _poly(*displacement_x(i))))
    return h


def evc(p):
    """Chromophore g owns qumodes 2g (g0), 2g+1 (g1) and qubit g."""
    if p.N < 1:
        raise ValueError("evc needs N >= 1")
    nq, nm = p.N, 2 * p.N
    h = Hamiltonian(nq=nq, nm=nm, name="evc")
    for c in range(p.N):
        m0, m1 = 2 * c, 2 * c + 1
        h.append(_term(nq, {}, p.omega, (1.0, number(m0))))
        h.append(_term(nq, {}, p.omega, (1.0, number(m1))))
        h.append(_term(nq, {c: "Z"}, -p.omega_q / 2))
        h.append(_term(nq, {c: "Z"}, -p.chi / 2, (1.0, number(m0))))
        h.append(_term(nq, {c: "Z"}, p.g_cd / 2, *displacement_x(m0)))
        h.append(_term(nq, {c: "Z"}, p.g_cd / 2, *displacement_x(m1)))
        for other in (c - 1, c + 1):
            if 0 <= other < p.N:
                h.append(_term(nq, {c: "X", other: "X"}, p.g / 4))
                h.append(_term(nq, {c: "Y", other: "Y"}, p.g / 4))
        for other in (c - 1, c + 1):
            if 0 <= other < p.N:
                h.append(_term(nq, {c: "X", other: "X"}, p.g_vib / 4, *displacement_x(m1)))
                h.append(_term(nq, {c: "Y", other: "Y"}, p.g_vib / 4, *displacement_x(m1)))
    return h


def heisenberg(p):
    if p.N < 1:
        raise ValueError("heisenberg needs N >= 1")
    nq = p.N
    h = Hamiltonian(nq=nq, nm=0, name="heisenberg")
    for j in range(p.N - 1):
        h.append(_term(nq, {j: "X", j + 1: "X"}, -p.Jx / 2))
        h.append(_term(nq, {j: "Y", j + 1: "Y"}, -p.Jy / 2))
        h.append(_term(nq, {j: "Z", j + 1: "Z"}, -p.Jz / 2))
    for j in range(p.N):
        h.append(_term(nq, {j: "Z"}, -p.h / 2))
    return h


BUILDERS = {
    "kerr": kerr,
    "z2higgs": z2higgs,
    "bosehubbard": bosehubbard,
    "hubbardholstein": hubbardholstein,
    "evc": evc,
    "heisenberg": heisenberg,
}


def build(model, params=None):
    if model not in BUILDERS:
        raise ValueError(f"unknown model {model!r}; choose from {sorted(BUILDERS)}")
    if params is None:
        params = make_params(model)
    return BUILDERS[model](params)


def count_pauli_strings(terms):
    """Terms whose qubit part is non-trivial and whose qumode part is the identity."""
    n = 0
    for t in terms:
        if set(t.pauli.word) <= {"I"}:
            continue
        if all(f == () for f in t.boson.terms):
            n += 1
    return n


# ---------------------------------------------------------- Jordan-Wigner

@dataclass(frozen=True)
class FermionOp:
    site: int
    spin: Optional[int]  # UP, DOWN, or None for spinless
    create: bool


def _mode_index(op):
    return op.site if op.spin is None else 2 * op.site + op.spin


def jordan_wigner(ops, n_sites):
    """Encode an ordered product of fermion operators as a qubit Operator."""
    spinless = all(o.spin is None for o in ops)
    if ops and not spinless and any(o.spin is None for o in ops):
        raise ValueError("cannot mix spinless and spinful operators")
    nq = n_sites if spinless else 2 * n_sites
    out = Operator.identity(nq)
    for o in ops:
        j = _mode_index(o)
        if not 0 <= o.site < n_sites:
            raise ValueError(f"site {o.site} outside 0..{n_sites - 1}")
        z = {k: "Z" for k in range(j)}
        sign = -1j if o.create else 1j
        single = (Operator.term(_word(nq, {**z, j: "X"}), (), 0.5)
                  + Operator.term(_word(nq, {**z, j: "Y"}), (), 0.5 * sign))
        out = out * single
    return out


def to_pauli_strings(op, keep_identity=False, tol=1e-12):
    """Split a Hermitian qubit Operator into real-coefficient PauliStrings."""
    out = []
    for (w, f), c in op.sorted_items():
        if f != ():
            raise ValueError("operator has qumode factors")
        if abs(c.imag) > 1e-10:
            raise ValueError(f"non-Hermitian coefficient {c} on {w}")
        if abs(c.real) <= tol:
            continue
        if not keep_identity and set(w) <= {"I"}:
            continue
        out.append(PauliString(w, c.real))
    return out


# ------------------------------------------------------------- Pauli files

def parse_pauli_text(text):
    merged = {}
    width = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'coefficient WORD'")
        try:
            c = float(parts[0])
        except ValueError:
            raise ValueError(f"line {lineno}: bad coefficient {parts[0]!r}") from None
        w = parts[1]
        if not w or any(ch not in "IXYZ" for ch in w):
            raise ValueError(f"line {lineno}: bad Pauli word {w!r}")
        if width is None:
            width = len(w)
        elif len(w) != width:
            raise ValueError(f"line {lineno}: word length {len(w)} differs from {width}")
        merged[w] = merged.get(w, 0.0) + c
    return [PauliString(w, c) for w, c in merged.items() if c != 0.0]


def load_pauli_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_pauli_text(fh.read())


def pauli_hamiltonian(strings, name="pauli"):
    nq = len(strings[0].word) if strings else 0
    return Hamiltonian([HybridTerm(s, BosonPolynomial.identity()) for s in strings], nq=nq, nm=0, name=name)


# ------------------------------------------------------- Hamiltonian files

HAM_HEADER = "hamiltonian"


def _fmt_c(c):
    c = complex(c)
    return repr(c.real) if c.imag == 0 else repr(c)


def format_hamiltonian(h):
    """Text form: a header line, then one ``term`` line per HybridTerm.

    ``term <coeff> <WORD> [: <c> <factors> (; <c> <factors>)*]`` where factors
    are written ``ad(k)``/``a(k)`` and an empty factor list is written ``1``.
    """
    lines = [f"{HAM_HEADER} qubits={h.nq} qumodes={h.nm} name={h.name or 'custom'}"]
    for t in h:
        head = f"term {_fmt_c(t.pauli.coefficient)} {t.pauli.word or '-'}"
        monos = [(f, c) for f, c in t.boson.terms.items()]
        if monos == [((), 1.0)]:
            lines.append(head)
            continue
        body = " ; ".join(f"{_fmt_c(c)} {format_factors(f) or '1'}" for f, c in monos)
        lines.append(f"{head} : {body}")
    return "\n".join(lines) + "\n"


def parse_hamiltonian(text):
    nq = nm = None
    name = ""
    terms = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith(HAM_HEADER):
                for kv in line.split()[1:]:
                    k, v = kv.split("=", 1)
                    if k == "qubits":
                        nq = int(v)
                    elif k == "qumodes":
                        nm = int(v)
                    elif k == "name":
                        name = v
                    else:
                        raise ValueError(f"unknown header field {k!r}")
                continue
            if not line.startswith("term "):
                raise ValueError("expected a 'term' line")
            head, _, body = line[5:].partition(":")
            parts = head.split()
            if len(parts) != 2:
                raise ValueError("term needs a coefficient and a Pauli word")
            coeff = complex(parts[0].replace("i", "j"))
            if coeff.imag != 0:
                raise ValueError("Pauli coefficients must be real")
            word = "" if parts[1] == "-" else parts[1]
            if any(ch not in "IXYZ" for ch in word):
                raise ValueError(f"bad Pauli word {word!r}")
            poly = BosonPolynomial()
            if body.strip():
                for mono in body.split(";"):
                    bits = mono.split(None, 1)
                    c = complex(bits[0].replace("i", "j"))
                    poly.add(parse_factors(bits[1] if len(bits) > 1 else "1"), c)
            else:
                poly = BosonPolynomial.identity()
            terms.append(HybridTerm(PauliString(word, coeff.real), poly))
        except ValueError as e:
            raise ValueError(f"hamiltonian line {lineno}: {e}") from None
    widths = {len(t.pauli.word) for t in terms}
    if len(widths) > 1:
        raise ValueError("terms have different Pauli word lengths")
    width = widths.pop() if widths else 0
    if nq is None:
        nq = width
    elif terms and width != nq:
        raise ValueError(f"header says {nq} qubits, terms use {width}")
    used = 1 + max((m for t in terms for f in t.boson.terms for m, _ in f), default=-1)
    if nm is None:
        nm = used
    elif used > nm:
        raise ValueError(f"header says {nm} qumodes, terms use {used}")
    return Hamiltonian(terms, nq=nq, nm=nm, name=name)


def load_hamiltonian(path):
    with open(path, encoding="utf-8") as fh:
        return parse_hamiltonian(fh.read())
