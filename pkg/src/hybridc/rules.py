"""Level-1 compiler: rewrite exp(-iHt) into native gates by recursive template matching.

Each node of the search holds an anti-Hermitian exponent ``G`` (an
:class:`~hybridc.expr.Operator`).  A rule either realizes ``exp(G)`` directly
(native gates, Pauli statements) or rewrites it into child exponentials.  The
search is depth first; the first complete path wins.

Conventions:

* gate lists are in time order;
* a commutator child ``comm(A, B)`` stands for ``exp([A, B])`` and is realized
  by the group commutator ``e^A e^B e^-A e^-B`` (rule 2), emitted in time order
  as ``inv(B), inv(A), B, A`` with each inverse being the exact inverse of the
  realized sequence;
* a block node ``block(q, P, z)`` is ``exp(i B_{zP})`` where
  ``B_Q = [[0, Q], [Q^dagger, 0]]`` on qubit ``q``.
"""

from __future__ import annotations

import cmath
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .expr import Operator, mono_adjoint, normal_order_monomial
from .gates import GateOp, inverse_sequence
from .paulisynth import synth_controlled_qumode_op
from .qasm import PauliStmt, Program

APPROXIMATE_RULES = frozenset({1, 2, 12, 13})
ALL_RULES = tuple(range(1, 17))
# terminal templates first, then rewrites in id order
TRIAL_ORDER = (15, 16, 14, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13)
RULE_NAMES = {
    1: "trotter", 2: "bch", 3: "commutator", 4: "anticommutator-pauli",
    5: "commutator-pauli", 6: "block-difference", 7: "block-sum",
    8: "hermitian-split", 9: "commuting-split", 10: "block-product",
    11: "block-hermitian-product", 12: "block-annihilate", 13: "block-create",
    14: "pauli-controlled-displacement", 15: "pauli-exponential", 16: "native",
}

_EPS = 1e-10


class DecomposeError(RuntimeError):
    def __init__(self, msg, deepest=None):
        super().__init__(msg)
        self.deepest = deepest


@dataclass
class DecomposeConfig:
    trotter_steps: int = 4
    max_depth: int = 12
    bch_order: int = 2
    rule_enable: frozenset = frozenset(ALL_RULES)
    ancilla_pool: int = 2

    def __post_init__(self):
        if self.trotter_steps < 1:
            raise ValueError("trotter_steps must be >= 1")
        if self.bch_order != 2:
            raise ValueError("only second-order BCH is supported")
        self.rule_enable = frozenset(self.rule_enable)


# ------------------------------------------------------------------ nodes

@dataclass(eq=False)
class ExpNode:
    generator: Operator
    depth: int = 0
    kind: str = "plain"  # plain | sum | comm | block
    written: tuple = ()  # ((word, factors, coeff), ...) as written (plain)
    parts: tuple = ()  # sum: child nodes; comm: (A, B)
    binding: Optional[tuple] = None  # (M, N) ordered monomials
    qubit: Optional[int] = None  # bound qubit for block / ancilla targets
    mono: Optional[tuple] = None  # block monomial P
    amp: complex = 0j  # block amplitude z
    busy: frozenset = frozenset()  # ancillas held by enclosing block encodings
    ancilla_target: bool = False  # realized on the |0> block of ``qubit``


@dataclass
class Inverse:
    node: ExpNode


@dataclass
class Expansion:
    rule: int
    items: list
    binding: Optional[tuple] = None


@dataclass
class RuleStats:
    attempts: Counter = field(default_factory=Counter)
    successes: Counter = field(default_factory=Counter)
    attempt_shapes: dict = field(default_factory=dict)
    success_shapes: dict = field(default_factory=dict)

    def record_attempt(self, rule, shape):
        self.attempts[rule] += 1
        self.attempt_shapes.setdefault(rule, set()).add(shape)

    def record_success(self, rule, shape):
        self.successes[rule] += 1
        self.success_shapes.setdefault(rule, set()).add(shape)

    def merge(self, other):
        self.attempts.update(other.attempts)
        self.successes.update(other.successes)
        for r, s in other.attempt_shapes.items():
            self.attempt_shapes.setdefault(r, set()).update(s)
        for r, s in other.success_shapes.items():
            self.success_shapes.setdefault(r, set()).update(s)

    def unique_attempts(self, rule):
        return len(self.attempt_shapes.get(rule, ()))

    def unique_successes(self, rule):
        return len(self.success_shapes.get(rule, ()))


# -------------------------------------------------------------- helpers

def _word_with(nq, letters):
    w = ["I"] * nq
    for q, c in letters.items():
        w[q] = c
    return "".join(w)


def mono_op(factors, nq=0, word=None, coeff=1.0):
    """Canonical Operator of an ordered monomial, optionally tensored with a word."""
    return Operator.term(word if word is not None else "I" * nq, tuple(factors), coeff)


def block_operator(q, factors, z, nq):
    """i * B_{zP} with P the ordered monomial ``factors`` on qubit ``q``."""
    p = mono_op(factors, nq) * z
    pd = p.adjoint()
    xw = _word_with(nq, {q: "X"})
    yw = _word_with(nq, {q: "Y"})
    plus = p + pd
    minus = p - pd
    gen = Operator(nq)
    for (_, f), c in plus.terms.items():
        gen._add(xw, f, 0.5j * c)
    for (_, f), c in minus.terms.items():
        gen._add(yw, f, -0.5 * c)
    return gen


def proportional(g, x, tol=1e-9):
    """Return c with g = c x, or None."""
    if x.is_zero(_EPS):
        return None
    key, ref = max(x.terms.items(), key=lambda kv: abs(kv[1]))
    c = g.terms.get(key, 0) / ref
    if abs(c) <= _EPS:
        return None
    if (g - x * c).is_zero(tol * max(1.0, abs(c))):
        return c
    return None


def single_letter(g):
    """If g = sigma_L^q (x) B for one qubit q and letter L, return (L, q, B)."""
    words = g.words()
    if len(words) != 1:
        return None
    w = words[0]
    support = [i for i, c in enumerate(w) if c != "I"]
    if len(support) != 1:
        return None
    q = support[0]
    return w[q], q, g.boson_part(w)


def _zform_dressing(letter, q):
    """Time-ordered rotations that turn a Z-conditioned exponential into a ``letter`` one."""
    if letter == "Z":
        return [], []
    if letter == "X":
        return [GateOp("ry", (-math.pi / 2,), (q,))], [GateOp("ry", (math.pi / 2,), (q,))]
    return [GateOp("rx", (math.pi / 2,), (q,))], [GateOp("rx", (-math.pi / 2,), (q,))]


def enumerate_splits(m):
    """Contiguous factorizations m = M.N, balanced first, then shorter M first."""
    factors = m.factors if hasattr(m, "factors") else tuple(m)
    if len(factors) < 2:
        raise ValueError("monomial degree must be at least 2 to split")
    splits = [(factors[:i], factors[i:]) for i in range(1, len(factors))]
    splits.sort(key=lambda mn: (abs(len(mn[0]) - len(mn[1])), len(mn[0])))
    return splits


def _is_hermitian_mono(factors):
    return mono_op(factors).is_hermitian()


def _operand(x):
    """A binding operand as a pure-qumode Operator (ordered monomial or polynomial)."""
    return x if isinstance(x, Operator) else mono_op(x)


def _lift(x, word, coeff=1.0):
    return _operand(x).tensor_word(word) * coeff


def _commute(mf, nf):
    return mono_op(mf).commutator(mono_op(nf)).is_zero(_EPS)


def _written_from(op):
    return tuple((w, f, c) for (w, f), c in op.sorted_items())


def _op_from_written(written, nq):
    out = Operator(nq)
    for w, f, c in written:
        for g, c2 in normal_order_monomial(f):
            out._add(w, g, c * c2)
    return out


def plain(gen, depth, busy, binding=None, written=None):
    gen = gen.drop_identity()
    return ExpNode(gen, depth, "plain", written if written is not None else _written_from(gen),
                   binding=binding, busy=busy)


def block(q, factors, z, nq, depth, busy):
    return ExpNode(block_operator(q, factors, z, nq), depth, "block", qubit=q,
                   mono=tuple(factors), amp=complex(z), busy=busy)


def comm(a, b, depth, busy):
    return ExpNode(a.generator.commutator(b.generator), depth, "comm", parts=(a, b), busy=busy)


def _units(written):
    """Group written terms into adjoint-closed units, keeping first appearance order."""
    units = []
    index = {}
    for w, f, c in written:
        key = (w, normal_order_key(f))
        adj = (w, normal_order_key(mono_adjoint(f)))
        if key in index:
            units[index[key]].append((w, f, c))
        elif adj in index:
            units[index[adj]].append((w, f, c))
            index[key] = index[adj]
        else:
            index[key] = len(units)
            units.append([(w, f, c)])
    return units


def normal_order_key(f):
    return tuple(sorted(g for g, _ in normal_order_monomial(tuple(f))))


def shape_key(node):
    """Coefficient-free, index-relabelled description of a node (for memo and stats)."""
    qmap, mmap = {}, {}

    def rq(i):
        return qmap.setdefault(i, len(qmap))

    def rm(k):
        return mmap.setdefault(k, len(mmap))

    def word(w):
        return tuple((rq(i), c) for i, c in enumerate(w) if c != "I")

    def facs(f):
        return tuple((rm(m), d) for m, d in f)

    items = []
    for (w, f), c in node.generator.sorted_items():
        items.append((word(w), facs(f)))
    def operand(x):
        if isinstance(x, Operator):
            return tuple(sorted(facs(f) for _, f in x.terms))
        return facs(x)

    extra = ()
    if node.binding is not None:
        extra = (operand(node.binding[0]), operand(node.binding[1]))
    if node.kind == "block":
        extra = (rq(node.qubit), facs(node.mono))
    written = ()
    if node.kind == "plain":
        written = tuple(sorted((word(w), facs(f)) for w, f, _ in node.written))
    return (node.kind, tuple(sorted(items)), written, extra)


# --------------------------------------------------------- basis matching

def _bs_params(c):
    return 2 * abs(c), cmath.phase(c)


def _match_boson(h):
    """Match a Hermitian pure-qumode H with U = exp(-iH). Returns a gate builder or None."""
    keys = list(h.terms)
    modes = h.modes()
    if len(modes) == 1:
        k = modes[0]
        n_key = ("", ((k, True), (k, False)))
        if keys == [n_key]:
            return lambda qs=(), kk=k: ("R", (h.terms[n_key].real,), (kk,))
        ad, a = ("", ((k, True),)), ("", ((k, False),))
        if set(keys) == {ad, a}:
            beta = -1j * h.terms[ad]  # H = i(beta a^dag - beta^* a)
            return lambda qs=(), kk=k: ("D", (beta,), (kk,))
    if len(modes) == 2:
        a_, b_ = modes
        k1 = ("", ((a_, True), (b_, False)))
        k2 = ("", ((a_, False), (b_, True)))
        if set(keys) == {k1, k2}:
            theta, phi = _bs_params(h.terms[k1])
            return lambda qs=(): ("BS", (theta, phi), (a_, b_))
    return None


def match_basis_gate(node):
    """Native realization of exp(node.generator), or None.

    Returns a time-ordered gate list.  Qubit-conditioned templates are matched
    up to a single-qubit rotation frame on the control.
    """
    if node.kind != "plain":
        return None
    g = node.generator.drop_identity()
    if not g.terms:
        return []
    h = g * 1j  # Hermitian, U = exp(-iH)
    nq = g.nq
    if h.is_boson_only():
        b = _match_boson(h.boson_part("I" * nq))
        if b is None:
            return None
        name, params, modes = b()
        return [GateOp(name, tuple(_clean(p) for p in params), (), modes)]
    if g.is_qubit_only():
        qs = g.qubits()
        if len(qs) != 1:
            return None
        q = qs[0]
        coeffs = {}
        for (w, _), c in h.terms.items():
            coeffs[w[q]] = c.real
        if set(coeffs) - {"X", "Y", "Z"}:
            return None
        hx, hy, hz = coeffs.get("X", 0.0), coeffs.get("Y", 0.0), coeffs.get("Z", 0.0)
        if hz and (hx or hy):
            return None
        if hz:
            return [GateOp("rz", (2 * hz,), (q,))]
        if hx and not hy:
            return [GateOp("rx", (2 * hx,), (q,))]
        if hy and not hx:
            return [GateOp("ry", (2 * hy,), (q,))]
        theta, phi = 2 * math.hypot(hx, hy), math.atan2(hy, hx)
        return [GateOp("rz", (-phi,), (q,)), GateOp("rx", (theta,), (q,)), GateOp("rz", (phi,), (q,))]
    sl = single_letter(h)
    if sl is None:
        return None
    letter, q, hb = sl
    pre, post = _zform_dressing(letter, q)
    keys = list(hb.terms)
    modes = hb.modes()
    core = None
    if len(modes) == 1:
        k = modes[0]
        n_key = ("", ((k, True), (k, False)))
        ad, a = ("", ((k, True),)), ("", ((k, False),))
        if keys == [n_key]:
            theta = 2 * hb.terms[n_key].real
            if abs(theta - math.pi) < 1e-12:
                core = GateOp("CP", (), (q,), (k,))
            else:
                core = GateOp("CR", (theta,), (q,), (k,))
        elif set(keys) == {ad, a}:
            beta = -1j * hb.terms[ad]
            core = GateOp("CD", (_clean(beta),), (q,), (k,))
    elif len(modes) == 2:
        a_, b_ = modes
        k1 = ("", ((a_, True), (b_, False)))
        k2 = ("", ((a_, False), (b_, True)))
        if set(keys) == {k1, k2}:
            theta, phi = _bs_params(hb.terms[k1])
            core = GateOp("CBS", (theta, phi), (q,), (a_, b_))
    if core is None:
        return None
    return pre + [core] + post


def _clean(p):
    p = complex(p)
    if abs(p.imag) <= 1e-15:
        return float(p.real)
    if abs(p.real) <= 1e-15:
        return complex(0.0, p.imag)
    return p


# ------------------------------------------------------------------ rules

class _Ctx:
    def __init__(self, cfg, nq_sys, nq_total):
        self.cfg = cfg
        self.nq_sys = nq_sys
        self.nq = nq_total
        self.stats = RuleStats()
        self.failed = set()
        self.deepest = None
        self.used_ancillas = set()

    def allocate(self, busy):
        for a in range(self.nq_sys, self.nq):
            if a not in busy:
                return a
        return None


def _rule15(ctx, node):
    if node.kind != "plain":
        return
    g = node.generator.drop_identity()
    if not g.terms or not g.is_qubit_only() or len(g.terms) != 1:
        return
    (w, _), c = next(iter(g.terms.items()))
    theta = (1j * c).real
    yield Expansion(15, [PauliStmt(theta, w)])


def _rule16(ctx, node):
    gates = match_basis_gate(node)
    if gates is not None:
        yield Expansion(16, list(gates))


def _rule14(ctx, node):
    if node.kind != "plain":
        return
    g = node.generator.drop_identity()
    words = g.words()
    if len(words) != 1:
        return
    w = words[0]
    if sum(1 for c in w if c != "I") < 2:
        return
    b = g.boson_part(w)
    modes = b.modes()
    if len(modes) != 1:
        return
    k = modes[0]
    ad, a = ("", ((k, True),)), ("", ((k, False),))
    if set(b.terms) != {ad, a}:
        return
    beta = b.terms[ad]
    if abs(b.terms[a] + beta.conjugate()) > 1e-9 * max(1, abs(beta)):
        return
    seq = synth_controlled_qumode_op(w, GateOp("D", (_clean(beta),), (), (k,)))
    yield Expansion(14, seq.gates)


def _rule1(ctx, node):
    if node.kind == "sum":
        yield Expansion(1, list(node.parts))
        return
    if node.kind != "plain":
        return
    units = _units(node.written)
    if len(units) < 2:
        return
    kids = [plain(_op_from_written(u, ctx.nq), node.depth + 1, node.busy, node.binding, tuple(u))
            for u in units]
    yield Expansion(1, kids)


def _rule2(ctx, node):
    if node.kind != "comm":
        return
    a, b = node.parts
    yield Expansion(2, [Inverse(b), Inverse(a), b, a])


def _single_written_mono(node):
    """Ordered monomial when the plain node is -i*theta*m for one written Hermitian m."""
    if node.kind != "plain" or not node.generator.is_boson_only() or len(node.written) != 1:
        return None
    w, f, c = node.written[0]
    if len(f) < 2:
        return None
    if not _is_hermitian_mono(f):
        return None
    theta = (1j * c).real
    if abs((1j * c).imag) > _EPS:
        return None
    return f, theta


def _rule3(ctx, node):
    if node.kind != "plain" or not node.generator.is_boson_only():
        return
    if node.binding is not None:
        pairs = [node.binding]
    else:
        sm = _single_written_mono(node)
        if sm is None:
            return
        pairs = enumerate_splits(sm[0])
    g = node.generator.boson_part("I" * ctx.nq)
    for mf, nf in pairs:
        m_op, n_op = _operand(mf), _operand(nf)
        if not (m_op.is_hermitian() and n_op.is_hermitian()):
            continue
        # the identity part of [M, N] is a global phase, dropped from the node
        c = proportional(g.drop_identity(), m_op.commutator(n_op).drop_identity())
        if c is None or abs(c.imag) > _EPS:
            continue
        q = ctx.allocate(node.busy)
        if q is None:
            return
        t = math.sqrt(abs(c.real))
        zw = _word_with(ctx.nq, {q: "Z"})
        d = node.depth + 1
        A = plain(_lift(mf, zw, 1j * t), d + 1, node.busy)
        B = plain(_lift(nf, zw, 1j * t), d + 1, node.busy)
        kid = comm(B, A, d, node.busy) if c.real > 0 else comm(A, B, d, node.busy)
        yield Expansion(3, [kid], (mf, nf))


_CYCLIC = {"Z": ("X", "Y"), "X": ("Y", "Z"), "Y": ("Z", "X")}


def _rule4(ctx, node):
    if node.kind != "plain" or node.binding is None:
        return
    sl = single_letter(node.generator)
    if sl is None:
        return
    letter, q, b = sl
    mf, nf = node.binding
    m_op, n_op = _operand(mf), _operand(nf)
    if not (m_op.is_hermitian() and n_op.is_hermitian()):
        return
    c = proportional(b, m_op.anticommutator(n_op))
    if c is None or abs(c.real) > _EPS:
        return
    s = -c.imag  # G = -i s sigma {M, N}
    t = math.sqrt(abs(s))
    j, k = _CYCLIC[letter]
    d = node.depth + 1
    A = plain(_lift(mf, _word_with(ctx.nq, {q: j}), 1j * t), d + 1, node.busy)
    B = plain(_lift(nf, _word_with(ctx.nq, {q: k}), 1j * t), d + 1, node.busy)
    kid = comm(A, B, d, node.busy) if s > 0 else comm(B, A, d, node.busy)
    yield Expansion(4, [kid], (mf, nf))


def _zform(node):
    if node.kind != "plain" or node.binding is None:
        return None
    return single_letter(node.generator)


def _rule5(ctx, node):
    zf = _zform(node)
    if zf is None:
        return
    letter, q, b = zf
    mf, nf = node.binding
    m_op, n_op = _operand(mf), _operand(nf)
    if not (m_op.is_hermitian() and n_op.is_hermitian()):
        return
    c = proportional(b, m_op.commutator(n_op))
    if c is None or abs(c.imag) > _EPS:
        return
    t = math.sqrt(abs(c.real))
    d = node.depth + 1
    zw = _word_with(ctx.nq, {q: "Z"})
    Nn = plain(_lift(nf, "I" * ctx.nq, 1j * t), d + 1, node.busy)
    Mz = plain(_lift(mf, zw, 1j * t), d + 1, node.busy)
    kid = comm(Nn, Mz, d, node.busy) if c.real > 0 else comm(Mz, Nn, d, node.busy)
    pre, post = _zform_dressing(letter, q)
    yield Expansion(5, pre + [kid] + post, (mf, nf))


def _mn(mf, nf):
    return mono_op(tuple(mf) + tuple(nf))


def _rule6(ctx, node):
    zf = _zform(node)
    if zf is None:
        return
    letter, q, b = zf
    mf, nf = node.binding
    if isinstance(mf, Operator) or isinstance(nf, Operator) or not _commute(mf, nf):
        return
    mn = _mn(mf, nf)
    c = proportional(b, mn - mn.adjoint())
    if c is None or abs(c.imag) > _EPS:
        return
    t = math.sqrt(abs(c.real))
    d = node.depth + 1
    bn = block(q, mono_adjoint(nf), t, ctx.nq, d + 1, node.busy)  # X (it B_N) X
    bm = block(q, mf, t, ctx.nq, d + 1, node.busy)  # it B_M
    kid = comm(bn, bm, d, node.busy) if c.real > 0 else comm(bm, bn, d, node.busy)
    pre, post = _zform_dressing(letter, q)
    yield Expansion(6, pre + [kid] + post, (mf, nf))


def _rule7(ctx, node):
    zf = _zform(node)
    if zf is None:
        return
    letter, q, b = zf
    mf, nf = node.binding
    if isinstance(mf, Operator) or isinstance(nf, Operator) or not _commute(mf, nf):
        return
    mn = _mn(mf, nf)
    c = proportional(b, (mn + mn.adjoint()) * 1j)
    if c is None or abs(c.imag) > _EPS:
        return
    t = math.sqrt(abs(c.real))
    d = node.depth + 1
    sm = block(q, mf, -1j * t, ctx.nq, d + 1, node.busy)  # S (it B_M) S^dagger
    xn = block(q, mono_adjoint(nf), t, ctx.nq, d + 1, node.busy)  # X (it B_N) X
    kid = comm(sm, xn, d, node.busy) if c.real > 0 else comm(xn, sm, d, node.busy)
    pre, post = _zform_dressing(letter, q)
    yield Expansion(7, pre + [kid] + post, (mf, nf))


def _rule8(ctx, node):
    sm = _single_written_mono(node)
    if sm is None:
        return
    f, theta = sm
    for mf, nf in enumerate_splits(f):
        if not (_is_hermitian_mono(mf) and _is_hermitian_mono(nf)):
            continue
        q = ctx.allocate(node.busy)
        if q is None:
            return
        busy = node.busy | {q}
        d = node.depth + 1
        zw = _word_with(ctx.nq, {q: "Z"})
        m_op, n_op = mono_op(mf), mono_op(nf)
        parts = []
        for piece in (m_op.commutator(n_op), m_op.anticommutator(n_op)):
            if not piece.is_zero(_EPS):
                parts.append(plain(piece.tensor_word(zw) * (-0.5j * theta), d + 1, busy, (mf, nf)))
        kid = parts[0] if len(parts) == 1 else ExpNode(
            sum((p.generator for p in parts[1:]), parts[0].generator), d, "sum",
            parts=tuple(parts), busy=busy)
        kid.depth = d
        yield Expansion(8, [_AncillaScope(q, [kid])], (mf, nf))


def _block_pair_for_product(ctx, node, mf, nf, theta, q, busy):
    """comm(S it B_M S^dagger, X it B_N X) (or reversed) whose |0> block is -i theta M N."""
    d = node.depth + 1
    t = math.sqrt(abs(theta) / 2)
    sm = block(q, mf, -1j * t, ctx.nq, d + 1, busy)
    xn = block(q, mono_adjoint(nf), t, ctx.nq, d + 1, busy)
    return comm(sm, xn, d, busy) if theta < 0 else comm(xn, sm, d, busy)


def _rule9(ctx, node):
    sm = _single_written_mono(node)
    if sm is None:
        return
    f, theta = sm
    for mf, nf in enumerate_splits(f):
        if not _commute(mf, nf):
            continue
        q = ctx.allocate(node.busy)
        if q is None:
            return
        busy = node.busy | {q}
        kid = _block_pair_for_product(ctx, node, mf, nf, theta, q, busy)
        yield Expansion(9, [_AncillaScope(q, [kid])], (mf, nf))


def _rule11(ctx, node):
    sm = _single_written_mono(node)
    if sm is None:
        return
    f, theta = sm
    for mf, nf in enumerate_splits(f):
        # MN = (MN)^dagger holds because the written monomial is Hermitian
        q = ctx.allocate(node.busy)
        if q is None:
            return
        busy = node.busy | {q}
        kid = _block_pair_for_product(ctx, node, mf, nf, theta, q, busy)
        yield Expansion(11, [_AncillaScope(q, [kid])], (mf, nf))


def _block_frame(node):
    """(s, before, after): exp(i B_{zP}) = rz frame around exp(i s B_P), s = |z|."""
    z = node.amp
    s = abs(z)
    psi = cmath.phase(z)
    if abs(psi) <= 1e-15:
        return s, [], []
    q = node.qubit
    return s, [GateOp("rz", (psi,), (q,))], [GateOp("rz", (-psi,), (q,))]


def _rule10(ctx, node):
    if node.kind != "block" or len(node.mono) < 2:
        return
    s, before, after = _block_frame(node)
    t = s / 2
    q = node.qubit
    xw = _word_with(ctx.nq, {q: "X"})
    yw = _word_with(ctx.nq, {q: "Y"})
    d = node.depth + 1
    for mf, nf in enumerate_splits(node.mono):
        if not _commute(mf, nf):
            continue
        mn = _mn(mf, nf)
        xpart = plain((mn + mn.adjoint()).tensor_word(xw) * (1j * t), d + 1, node.busy, (mf, nf))
        ypart = plain((mn - mn.adjoint()).tensor_word(yw) * t, d + 1, node.busy, (mf, nf))
        inner = ExpNode(xpart.generator + ypart.generator, d, "sum", parts=(xpart, ypart), busy=node.busy)
        items = before + [GateOp("rx", (math.pi,), (q,)), inner, GateOp("rx", (-math.pi,), (q,))] + after
        yield Expansion(10, items, (mf, nf))


def _ladder_block(ctx, node, dagger):
    if node.kind != "block" or len(node.mono) != 1 or node.mono[0][1] != dagger:
        return None
    s, before, after = _block_frame(node)
    alpha = s / 2
    q = node.qubit
    k = node.mono[0][0]
    d = node.depth + 1
    x = mono_op(((k, True),), ctx.nq) + mono_op(((k, False),), ctx.nq)
    ynode = plain(_retag(x, _word_with(ctx.nq, {q: "Y"})) * (1j * alpha), d, node.busy)
    xnode = plain(_retag(x, _word_with(ctx.nq, {q: "X"})) * (1j * alpha), d, node.busy)
    rot = -math.pi / 2 if not dagger else math.pi / 2
    items = before + [GateOp("R", (rot,), (), (k,)), ynode, GateOp("R", (-rot,), (), (k,)), xnode] + after
    return Expansion(13 if dagger else 12, items)


def _retag(op, word):
    out = Operator(len(word))
    for (_, f), c in op.terms.items():
        out._add(word, f, c)
    return out


def _rule12(ctx, node):
    e = _ladder_block(ctx, node, dagger=False)
    if e is not None:
        yield e


def _rule13(ctx, node):
    e = _ladder_block(ctx, node, dagger=True)
    if e is not None:
        yield e


@dataclass
class _AncillaScope:
    qubit: int
    items: list


RULES = {
    1: _rule1, 2: _rule2, 3: _rule3, 4: _rule4, 5: _rule5, 6: _rule6, 7: _rule7,
    8: _rule8, 9: _rule9, 10: _rule10, 11: _rule11, 12: _rule12, 13: _rule13,
    14: _rule14, 15: _rule15, 16: _rule16,
}


def candidate_expansions(node, ctx, rules=None):
    """All expansions of ``node`` in trial order (used by the search and by tests)."""
    for r in TRIAL_ORDER:
        if rules is not None and r not in rules:
            continue
        if r not in ctx.cfg.rule_enable:
            continue
        yield from RULES[r](ctx, node)


def apply_rule(rule, node, binding=None, ancillas=1):
    """Expand ``node`` by one rule, optionally with a fixed binding ``(M, N)``.

    ``M`` and ``N`` are ordered monomials (factor tuples) or, for rules 3-5,
    Hermitian pure-qumode Operators.  The last ``ancillas`` qubits of the
    node's register form the ancilla pool.  Raises ValueError when the rule's
    pattern or conditions do not hold.
    """
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule}")
    nq = node.generator.nq
    ctx = _Ctx(DecomposeConfig(), nq - ancillas, nq)
    if binding is not None:
        binding = tuple(b if isinstance(b, Operator) else tuple(b) for b in binding)
        if rule in (3, 4, 5, 6, 7):
            node = ExpNode(node.generator, node.depth, node.kind, node.written, node.parts,
                           binding, node.qubit, node.mono, node.amp, node.busy, node.ancilla_target)
    for exp in RULES[rule](ctx, node):
        if binding is None or exp.binding is None or _same_binding(exp.binding, binding):
            return exp
    raise ValueError(f"rule {rule} does not apply to {node.generator}"
                     + (f" with binding {binding}" if binding is not None else ""))


def _same_binding(a, b):
    return all(isinstance(x, Operator) == isinstance(y, Operator) and x == y for x, y in zip(a, b))


# ----------------------------------------------------------------- search

class _DepthLimited(Exception):
    pass


def _solve(ctx, node):
    """Return (gates, applications) or None.  Applications are (rule, shape) pairs."""
    if node.depth > ctx.cfg.max_depth:
        raise _DepthLimited
    shape = shape_key(node)
    if shape in ctx.failed:
        return None
    if ctx.deepest is None or node.depth > ctx.deepest[0]:
        ctx.deepest = (node.depth, node.generator)
    depth_hit = False
    for exp in candidate_expansions(node, ctx):
        ctx.stats.record_attempt(exp.rule, shape)
        try:
            res = _realize_items(ctx, exp.items)
        except _DepthLimited:
            depth_hit = True
            continue
        if res is not None:
            gates, apps = res
            apps.append((exp.rule, shape, node))
            return gates, apps
    if depth_hit:
        raise _DepthLimited
    ctx.failed.add(shape)
    return None


def _realize_items(ctx, items):
    solved = {}
    apps = []
    out = []
    # realize nodes first so inverses can reference them
    for it in items:
        if isinstance(it, ExpNode):
            r = _solve(ctx, it)
            if r is None:
                return None
            solved[id(it)] = r[0]
            apps += r[1]
        elif isinstance(it, _AncillaScope):
            r = _realize_items(ctx, it.items)
            if r is None:
                return None
            solved[id(it)] = r[0]
            apps += r[1]
    for it in items:
        if isinstance(it, (ExpNode, _AncillaScope)):
            out += solved[id(it)]
            if isinstance(it, _AncillaScope):
                ctx.used_ancillas.add(it.qubit)
        elif isinstance(it, Inverse):
            out += _inverse_items(solved[id(it.node)])
        else:
            out.append(it)
    return out, apps


def _inverse_items(seq):
    out = []
    for s in reversed(seq):
        if isinstance(s, PauliStmt):
            out.append(PauliStmt(-s.angle, s.word))
        else:
            out.extend(inverse_sequence([s]))
    return out


def trotterize(terms, t, k):
    """Plan of k repetitions of the per-term exponentials at t/k: [(step, term index, dt)]."""
    if k < 1:
        raise ValueError("trotter steps must be >= 1")
    dt = t / k
    return [(s, j, dt) for s in range(k) for j in range(len(terms))]


def bch_expand(m, n, t):
    """Generators, in time order, whose exponentials compose to exp([M, N] t^2) to second order."""
    return [n * -t, m * -t, n * t, m * t]


@dataclass
class Decomposition:
    program: Program
    stats: RuleStats
    applications: list
    term_circuits: list
    n_ancillas: int


def _term_written(term, nq):
    pad = "I" * (nq - len(term.pauli.word))
    return tuple((term.pauli.word + pad, f, term.pauli.coefficient * c)
                 for f, c in term.boson.terms.items())


def decompose(terms, t, cfg=None, nq=None, nm=None):
    """Decompose exp(-i t sum(terms)) into a logical program plus rule statistics."""
    cfg = cfg or DecomposeConfig()
    nq_sys = nq if nq is not None else getattr(terms, "nq", max((len(x.pauli.word) for x in terms), default=0))
    nm_ = nm if nm is not None else getattr(terms, "nm", None)
    if nm_ is None:
        nm_ = 1 + max((m for x in terms for f in x.boson.terms for m, _ in f), default=-1)
    nq_total = nq_sys + cfg.ancilla_pool
    ctx = _Ctx(cfg, nq_sys, nq_total)
    k = cfg.trotter_steps
    dt = t / k
    per_term = []
    apps_all = []
    for term in terms:
        written = tuple((w, f, -1j * dt * c) for w, f, c in _term_written(term, nq_total))
        op = _op_from_written(written, nq_total)
        if not op.is_antihermitian():
            raise DecomposeError(f"term is not Hermitian: {term}")
        node = plain(op, 1, frozenset(), written=written)
        if not node.generator.terms:
            per_term.append([])
            continue
        try:
            res = _solve(ctx, node)
        except _DepthLimited:
            res = None
        if res is None:
            deepest = ctx.deepest[1] if ctx.deepest else op
            raise DecomposeError(f"no decomposition within depth {cfg.max_depth} for term {op}; "
                                 f"deepest failing subterm: {deepest}", deepest)
        gates, apps = res
        per_term.append(gates)
        apps_all += apps
    # rule 1 at the root splits the Hamiltonian into its terms
    root = ExpNode(Operator(nq_total), 0, "sum")
    root_shape = ("root", getattr(terms, "name", ""), len(terms))
    if len(terms) > 1 or k > 1:
        ctx.stats.record_attempt(1, root_shape)
        apps_all.append((1, root_shape, root))
    # a Pauli exponential is a displacement loop around a Pauli-controlled
    # displacement, and a Pauli-controlled displacement is a parity frame around
    # a plain one: each use of rule 14 or 15 is booked as one use of the pair
    for rule, shape, node in apps_all:
        ctx.stats.record_success(rule, shape)
        if rule == 15:
            paired = _paired_cd_shape(node)
            ctx.stats.record_attempt(14, paired)
            ctx.stats.record_success(14, paired)
        elif rule == 14:
            paired = _paired_pauli_shape(node)
            ctx.stats.record_attempt(15, paired)
            ctx.stats.record_success(15, paired)
    used = sorted(ctx.used_ancillas)
    n_anc = (max(used) - nq_sys + 1) if used else 0
    nq_out = nq_sys + n_anc
    body = [s for g in per_term for s in g]
    stmts = []
    for _ in range(k):
        stmts += body
    stmts = [_trim(s, nq_out) for s in stmts]
    prog = Program(nq_out, nm_, stmts).validate()
    return Decomposition(prog, ctx.stats, apps_all, per_term, n_anc)


def _paired_cd_shape(node):
    """Shape of the Pauli-controlled displacement that realizes a Pauli exponential."""
    g = node.generator.drop_identity()
    (w, _), _c = next(iter(g.terms.items()))
    bus = 1 + max((m for _, f in g.terms for m, _ in f), default=-1)
    cd = Operator.term(w, ((bus, True),), 1.0) + Operator.term(w, ((bus, False),), -1.0)
    return shape_key(ExpNode(cd, 0, "plain", _written_from(cd)))


def _paired_pauli_shape(node):
    """Shape of the Pauli exponential sharing the parity frame of a controlled displacement."""
    g = node.generator.drop_identity()
    w = g.words()[0]
    p = Operator.term(w, (), -1j)
    return shape_key(ExpNode(p, 0, "plain", _written_from(p)))


def _trim(s, nq):
    if isinstance(s, PauliStmt):
        return PauliStmt(s.angle, s.word[:nq])
    return s


def hit_rates(stats):
    """Normalized per-rule frequencies over unique shapes.

    Returns ``{"success": {rule: pct}, "total": {rule: pct}, "rule16_share": pct}``
    where the percentages for rules 1-15 each sum to 100 and rule 16's share
    is its fraction of all successful applications.
    """
    succ = {r: stats.unique_successes(r) for r in ALL_RULES}
    tot = {r: stats.unique_attempts(r) for r in ALL_RULES}
    s15 = sum(succ[r] for r in range(1, 16))
    t15 = sum(tot[r] for r in range(1, 16))
    s_all = s15 + succ[16]
    return {
        "success": {r: 100.0 * succ[r] / s15 if s15 else 0.0 for r in range(1, 16)},
        "total": {r: 100.0 * tot[r] / t15 if t15 else 0.0 for r in range(1, 16)},
        "rule16_share": 100.0 * succ[16] / s_all if s_all else 0.0,
        "success_counts": succ,
        "attempt_counts": tot,
    }
