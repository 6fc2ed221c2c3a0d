"""Symbolic algebra for qubit (Pauli) tensor qumode (ladder) operators.

A ladder factor is a pair ``(mode, dagger)``.  A monomial is a tuple of
factors kept in the order written; :func:`normal_order` rewrites it into the
canonical form (modes ascending, creation operators left of annihilation
operators within each mode).

:class:`Operator` is the canonical sum used everywhere else.  It maps
``(word, factors)`` keys to complex coefficients, where ``word`` is a string
over ``IXYZ`` and ``factors`` is a normal-ordered monomial.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial

TOL = 1e-12

# single-qubit Pauli products: (a, b) -> (phase, c) with a*b = phase*c
_PAULI_TABLE = {}
for _p in "IXYZ":
    _PAULI_TABLE[("I", _p)] = (1, _p)
    _PAULI_TABLE[(_p, "I")] = (1, _p)
for _p in "XYZ":
    _PAULI_TABLE[(_p, _p)] = (1, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _PAULI_TABLE[(_a, _b)] = (1j, _c)
    _PAULI_TABLE[(_b, _a)] = (-1j, _c)


def pauli_mul(a, b):
    """Multiply two Pauli words. Returns ``(phase, word)``."""
    if len(a) != len(b):
        raise ValueError(f"register size mismatch: {len(a)} vs {len(b)}")
    phase = 1
    out = []
    for x, y in zip(a, b):
        ph, z = _PAULI_TABLE[(x, y)]
        phase *= ph
        out.append(z)
    return phase, "".join(out)


def words_commute(a, b):
    clash = sum(1 for x, y in zip(a, b) if x != "I" and y != "I" and x != y)
    return clash % 2 == 0


# ---------------------------------------------------------------- monomials

def create(mode):
    return (mode, True)


def annihilate(mode):
    return (mode, False)


def mono_adjoint(factors):
    return tuple((m, not d) for m, d in reversed(factors))


def mono_degree(factors):
    return len(factors)


def mono_modes(factors):
    return sorted({m for m, _ in factors})


def _single_mode_normal(seq):
    """Normal order one mode's ladder word. Returns {(p, q): coeff}."""
    poly = {(0, 0): 1}
    for dag in seq:
        nxt = {}
        for (p, q), c in poly.items():
            if not dag:
                key = (p, q + 1)
                nxt[key] = nxt.get(key, 0) + c
            else:
                # a^q a† = a† a^q + q a^(q-1)
                key = (p + 1, q)
                nxt[key] = nxt.get(key, 0) + c
                if q:
                    key = (p, q - 1)
                    nxt[key] = nxt.get(key, 0) + c * q
        poly = nxt
    return poly


@lru_cache(maxsize=65536)
def normal_order_monomial(factors):
    """Normal order one monomial. Returns a tuple of ``(factors, coeff)``."""
    modes = mono_modes(factors)
    acc = {(): 1}
    for m in modes:
        local = _single_mode_normal([d for mm, d in factors if mm == m])
        nxt = {}
        for f, c in acc.items():
            for (p, q), c2 in local.items():
                key = f + ((m, True),) * p + ((m, False),) * q
                nxt[key] = nxt.get(key, 0) + c * c2
        acc = nxt
    return tuple((f, c) for f, c in acc.items() if c != 0)


def mono_product_coeffs(p, q, r, s):
    """Coefficients of (a†^p a^q)(a†^r a^s) in normal order, keyed by (p', q')."""
    out = {}
    for k in range(min(q, r) + 1):
        out[(p + r - k, q + s - k)] = comb(q, k) * comb(r, k) * factorial(k)
    return out


def is_normal_ordered(factors):
    return normal_order_monomial(factors) == ((factors, 1),)


def format_factors(factors):
    return " ".join(f"ad({m})" if d else f"a({m})" for m, d in factors)


_FACTOR_RE = re.compile(r"(ad|a)\((\d+)\)")


def parse_factors(text):
    text = text.strip()
    if not text or text == "1":
        return ()
    out = []
    pos = 0
    for tok in text.split():
        m = _FACTOR_RE.fullmatch(tok)
        if m is None:
            raise ValueError(f"bad ladder factor {tok!r} at offset {pos}")
        out.append((int(m.group(2)), m.group(1) == "ad"))
        pos += len(tok) + 1
    return tuple(out)


# ------------------------------------------------------------ domain types

@dataclass(frozen=True)
class PauliString:
    word: str
    coefficient: float = 1.0

    def __post_init__(self):
        if any(c not in "IXYZ" for c in self.word):
            raise ValueError(f"invalid Pauli word {self.word!r}")

    @property
    def n(self):
        return len(self.word)

    @property
    def support(self):
        return [i for i, c in enumerate(self.word) if c != "I"]

    @property
    def weight(self):
        return len(self.support)


@dataclass(frozen=True)
class LadderMonomial:
    factors: tuple = ()
    coefficient: complex = 1.0

    @property
    def degree(self):
        return len(self.factors)

    def adjoint(self):
        return LadderMonomial(mono_adjoint(self.factors), complex(self.coefficient).conjugate())

    def __str__(self):
        body = format_factors(self.factors) or "1"
        return f"{_fmt_coeff(self.coefficient)} * {body}"


@dataclass
class BosonPolynomial:
    """Sum of ordered monomials; identical factor sequences are merged."""

    terms: dict = field(default_factory=dict)

    @classmethod
    def from_monomials(cls, monos):
        out = cls()
        for m in monos:
            out.add(m.factors, m.coefficient)
        return out

    @classmethod
    def identity(cls, coeff=1.0):
        return cls({(): complex(coeff)})

    def add(self, factors, coeff):
        factors = tuple(factors)
        c = self.terms.get(factors, 0) + coeff
        if abs(c) <= TOL:
            self.terms.pop(factors, None)
        else:
            self.terms[factors] = c

    def monomials(self):
        return [LadderMonomial(f, c) for f, c in self.terms.items()]

    def adjoint(self):
        out = BosonPolynomial()
        for f, c in self.terms.items():
            out.add(mono_adjoint(f), complex(c).conjugate())
        return out

    def __eq__(self, other):
        if not isinstance(other, BosonPolynomial):
            return NotImplemented
        return normal_order(self).terms.keys() == normal_order(other).terms.keys() and all(
            abs(c - normal_order(other).terms[f]) <= TOL for f, c in normal_order(self).terms.items()
        )


def normal_order(p):
    out = BosonPolynomial()
    for f, c in p.terms.items():
        for g, c2 in normal_order_monomial(f):
            out.add(g, c * c2)
    return out


@dataclass
class HybridTerm:
    pauli: PauliString
    boson: BosonPolynomial
    time: float = 1.0

    def to_operator(self):
        op = Operator(len(self.pauli.word))
        scale = self.pauli.coefficient * self.time
        for f, c in self.boson.terms.items():
            for g, c2 in normal_order_monomial(f):
                op._add(self.pauli.word, g, scale * c * c2)
        return op


# ----------------------------------------------------------------- Operator

def _fmt_coeff(c):
    c = complex(c)
    if abs(c.imag) <= TOL:
        return repr(float(c.real))
    return f"({c.real!r}{c.imag:+}j)"


class Operator:
    """Canonical sum of ``word ⊗ normal-ordered monomial`` terms."""

    __slots__ = ("nq", "terms")

    def __init__(self, nq=0, terms=None):
        self.nq = nq
        self.terms = {}
        if terms:
            for (w, f), c in terms.items():
                self._add(w, f, c)

    # construction -------------------------------------------------------
    @classmethod
    def term(cls, word="", factors=(), coeff=1.0):
        op = cls(len(word))
        for g, c2 in normal_order_monomial(tuple(factors)):
            op._add(word, g, coeff * c2)
        return op

    @classmethod
    def identity(cls, nq=0, coeff=1.0):
        return cls.term("I" * nq, (), coeff)

    def _add(self, word, factors, coeff):
        if len(word) != self.nq:
            raise ValueError(f"register size mismatch: word {word!r} on {self.nq} qubits")
        key = (word, factors)
        c = self.terms.get(key, 0) + coeff
        if abs(c) <= TOL:
            self.terms.pop(key, None)
        else:
            self.terms[key] = complex(c)

    def copy(self):
        out = Operator(self.nq)
        out.terms = dict(self.terms)
        return out

    def extend(self, nq):
        """Pad every word with identities up to ``nq`` qubits."""
        if nq < self.nq:
            raise ValueError("cannot shrink register")
        pad = "I" * (nq - self.nq)
        out = Operator(nq)
        out.terms = {(w + pad, f): c for (w, f), c in self.terms.items()}
        return out

    # algebra ------------------------------------------------------------
    def _check(self, other):
        if self.nq != other.nq:
            raise ValueError(f"register size mismatch: {self.nq} vs {other.nq} qubits")

    def __add__(self, other):
        self._check(other)
        out = self.copy()
        for (w, f), c in other.terms.items():
            out._add(w, f, c)
        return out

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            out = Operator(self.nq)
            for (w1, f1), c1 in self.terms.items():
                for (w2, f2), c2 in other.terms.items():
                    ph, w = pauli_mul(w1, w2)
                    for g, c3 in normal_order_monomial(f1 + f2):
                        out._add(w, g, ph * c1 * c2 * c3)
            return out
        out = Operator(self.nq)
        if other == 0:
            return out
        out.terms = {k: c * other for k, c in self.terms.items()}
        return out

    __rmul__ = __mul__

    def __truediv__(self, s):
        return self * (1.0 / s)

    def adjoint(self):
        out = Operator(self.nq)
        for (w, f), c in self.terms.items():
            for g, c2 in normal_order_monomial(mono_adjoint(f)):
                out._add(w, g, c.conjugate() * c2)
        return out

    def commutator(self, other):
        return self * other - other * self

    def anticommutator(self, other):
        return self * other + other * self

    # predicates ---------------------------------------------------------
    def is_zero(self, tol=1e-10):
        return all(abs(c) <= tol for c in self.terms.values())

    def equals(self, other, tol=1e-10):
        return (self - other).is_zero(tol)

    def is_hermitian(self, tol=1e-10):
        return self.equals(self.adjoint(), tol)

    def is_antihermitian(self, tol=1e-10):
        return self.equals(-self.adjoint(), tol)

    def norm1(self):
        return sum(abs(c) for c in self.terms.values())

    # structure ----------------------------------------------------------
    def words(self):
        return sorted({w for w, _ in self.terms})

    def modes(self):
        return sorted({m for _, f in self.terms for m, _ in f})

    def qubits(self):
        return sorted({i for w, _ in self.terms for i, c in enumerate(w) if c != "I"})

    def is_qubit_only(self):
        return all(f == () for _, f in self.terms)

    def is_boson_only(self):
        return all(set(w) <= {"I"} for w, _ in self.terms)

    def drop_identity(self):
        """Remove the pure-identity term (a global phase in the exponent)."""
        out = self.copy()
        out.terms.pop(("I" * self.nq, ()), None)
        return out

    def boson_part(self, word):
        """Return the qumode operator multiplying ``word`` as a 0-qubit Operator."""
        out = Operator(0)
        for (w, f), c in self.terms.items():
            if w == word:
                out._add("", f, c)
        return out

    def tensor_word(self, word):
        """Lift a 0-qubit operator by the Pauli word ``word``."""
        if self.nq != 0:
            raise ValueError("tensor_word needs a pure qumode operator")
        out = Operator(len(word))
        out.terms = {(word, f): c for (_, f), c in self.terms.items()}
        return out

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0][0], _factor_key(kv[0][1])))

    def __repr__(self):
        return f"Operator({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (w, f), c in self.sorted_items():
            bits = [_fmt_coeff(c)]
            if w:
                bits.append(w)
            if f:
                bits.append(format_factors(f))
            parts.append(" * ".join(bits))
        return " + ".join(parts)

    def __eq__(self, other):
        return isinstance(other, Operator) and self.nq == other.nq and self.equals(other, TOL)

    __hash__ = None


def _factor_key(f):
    return tuple((m, not d) for m, d in f)


def multiply(lhs, rhs):
    return _as_op(lhs) * _as_op(rhs)


def commutator(m, n):
    return _as_op(m).commutator(_as_op(n))


def anticommutator(m, n):
    return _as_op(m).anticommutator(_as_op(n))


def adjoint(x):
    return _as_op(x).adjoint()


def is_hermitian(x):
    return _as_op(x).is_hermitian()


def _as_op(x):
    if isinstance(x, Operator):
        return x
    if isinstance(x, HybridTerm):
        return x.to_operator()
    if isinstance(x, PauliString):
        return Operator.term(x.word, (), x.coefficient)
    if isinstance(x, BosonPolynomial):
        op = Operator(0)
        for f, c in x.terms.items():
            op = op + Operator.term("", f, c)
        return op
    if isinstance(x, LadderMonomial):
        return Operator.term("", x.factors, x.coefficient)
    raise TypeError(f"cannot convert {type(x).__name__} to Operator")


def sum_terms(terms, nq=None):
    terms = list(terms)
    if nq is None:
        nq = max((len(t.pauli.word) for t in terms), default=0)
    out = Operator(nq)
    for t in terms:
        out = out + t.to_operator()
    return out


# ------------------------------------------------------------------ parsing

_TERM_SPLIT = re.compile(r"\s\+\s(?![^()]*\))")


def parse_operator(text):
    """Parse the debug notation, e.g. ``0.5 * ZII * ad(1) a(1) + (0+1j) * III``."""
    text = text.strip()
    if text == "0":
        return Operator(0)
    op = None
    for chunk in _TERM_SPLIT.split(text):
        pieces = [p.strip() for p in chunk.split("*")]
        coeff = complex(pieces[0].replace(" ", ""))
        word = ""
        factors = ()
        for p in pieces[1:]:
            if re.fullmatch(r"[IXYZ]+", p):
                word = p
            else:
                factors = parse_factors(p)
        term = Operator.term(word, factors, coeff)
        if op is None:
            op = term
        else:
            if op.nq != term.nq:
                raise ValueError(f"inconsistent word lengths in {text!r}")
            op = op + term
    return op
