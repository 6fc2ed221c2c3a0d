"""Truncated-Fock dense-matrix oracle.

Register order is qubits first (qubit 0 most significant), then qumodes.
Each qumode keeps levels ``0..cutoff-1``.  ``sigma_z|0> = +|0>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

from .gates import GateOp, expand_swapm, generator

DEFAULT_CUTOFF = 16
DEFAULT_MARGIN = 4

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class Signature:
    nq: int
    nm: int
    cutoff: int = DEFAULT_CUTOFF

    def __post_init__(self):
        if self.cutoff < 2:
            raise ValueError("cutoff must be at least 2")

    @property
    def dims(self):
        return (2,) * self.nq + (self.cutoff,) * self.nm

    @property
    def dim(self):
        return 2 ** self.nq * self.cutoff ** self.nm


@lru_cache(maxsize=64)
def ladder_matrices(cutoff):
    """Return ``(a, a_dagger)`` truncated at ``cutoff`` levels."""
    if cutoff < 2:
        raise ValueError("cutoff must be at least 2")
    a = np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1).astype(complex)
    a.setflags(write=False)
    ad = a.conj().T.copy()
    ad.setflags(write=False)
    return a, ad


def _mode_factor(factors, mode, cutoff):
    a, ad = ladder_matrices(cutoff)
    out = np.eye(cutoff, dtype=complex)
    for m, dag in factors:
        if m == mode:
            out = out @ (ad if dag else a)
    return out


def operator_matrix(op, sig):
    """Dense matrix of an expr.Operator on the register ``sig``."""
    if op.nq > sig.nq:
        raise ValueError(f"operator uses {op.nq} qubits, signature has {sig.nq}")
    if op.modes() and max(op.modes()) >= sig.nm:
        raise ValueError("operator uses a qumode outside the signature")
    out = np.zeros((sig.dim, sig.dim), dtype=complex)
    pad = "I" * (sig.nq - op.nq)
    for (word, factors), c in op.terms.items():
        mats = [_PAULI[ch] for ch in word + pad]
        mats += [_mode_factor(factors, k, sig.cutoff) for k in range(sig.nm)]
        term = np.array([[c]], dtype=complex)
        for m in mats:
            term = np.kron(term, m)
        out += term
    return out


def exp_generator(gen, sig):
    """exp(G) for an anti-Hermitian generator G (an Operator)."""
    return expm(operator_matrix(gen, sig))


@lru_cache(maxsize=4096)
def _local_matrix(name, params, nq, nm, cutoff):
    g = GateOp(name, params, tuple(range(nq)), tuple(range(nm)))
    sig = Signature(nq, nm, cutoff)
    if name == "SWAPM":
        state = np.eye(sig.dim, dtype=complex).reshape(sig.dims + (sig.dim,))
        for h in expand_swapm(g):
            state = apply_gate(state, h, sig)
        return state.reshape(sig.dim, sig.dim)
    return expm(-1j * operator_matrix(generator(g, nq), sig))


def local_gate_matrix(g, cutoff):
    """Unitary of ``g`` on its own operands, ordered qubits then qumodes."""
    return _local_matrix(g.name, tuple(g.params), len(g.qubits), len(g.qumodes), cutoff)


def apply_gate(state, g, sig):
    """Apply ``g`` to a tensor of shape ``sig.dims + (cols,)``."""
    axes = list(g.qubits) + [sig.nq + k for k in g.qumodes]
    if any(ax >= sig.nq + sig.nm for ax in axes) or any(i >= sig.nq for i in g.qubits):
        raise ValueError(f"gate {g} outside signature {sig}")
    local = local_gate_matrix(g, sig.cutoff)
    ldims = [2] * len(g.qubits) + [sig.cutoff] * len(g.qumodes)
    local = local.reshape(ldims + ldims)
    k = len(axes)
    out = np.tensordot(local, state, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def gate_unitary(g, sig):
    state = np.eye(sig.dim, dtype=complex).reshape(sig.dims + (sig.dim,))
    return apply_gate(state, g, sig).reshape(sig.dim, sig.dim)


def circuit_unitary(gates, sig, columns=None):
    """Ordered product of gate unitaries (first gate applied first).

    With ``columns`` given, only those input basis columns are propagated and
    a ``dim x len(columns)`` matrix is returned.
    """
    if columns is None:
        columns = np.arange(sig.dim)
    columns = np.asarray(columns)
    state = np.zeros((sig.dim, len(columns)), dtype=complex)
    state[columns, np.arange(len(columns))] = 1
    state = state.reshape(sig.dims + (len(columns),))
    for g in gates:
        state = apply_gate(state, g, sig)
    return state.reshape(sig.dim, len(columns))


def projected_indices(sig, keep, fixed_qubits=None):
    """Basis indices with every qumode below ``keep`` and fixed qubits pinned."""
    if keep > sig.cutoff:
        raise ValueError("keep-levels exceed the cutoff")
    fixed_qubits = fixed_qubits or {}
    grids = np.indices(sig.dims).reshape(len(sig.dims), -1)
    mask = np.ones(sig.dim, dtype=bool)
    for k in range(sig.nm):
        mask &= grids[sig.nq + k] < keep
    for q, v in fixed_qubits.items():
        mask &= grids[q] == v
    return np.nonzero(mask)[0]


def phase_distance(a, b, exact_below=1e-9):
    """min over gamma of ||a - e^{i gamma} b||_2.

    The search starts from the Frobenius-optimal phase; when the distance
    there is already below ``exact_below`` that value (an upper bound on the
    minimum) is returned without the full scan.
    """
    def f(g):
        return np.linalg.norm(a - np.exp(1j * g) * b, 2)

    g0 = float(np.angle(np.vdot(b, a)))
    best = f(g0)
    if best <= exact_below:
        return float(best)
    grid = np.linspace(-np.pi, np.pi, 37)
    vals = [f(g) for g in grid]
    i = int(np.argmin(vals))
    step = grid[1] - grid[0]
    res = minimize_scalar(f, bounds=(grid[i] - step, grid[i] + step), method="bounded",
                          options={"xatol": 1e-12})
    return float(min(best, res.fun, vals[i]))


def projected_distance(u, v, keep, sig, fixed_qubits=None):
    """Spectral distance of the projected blocks, minimised over global phase."""
    if keep >= sig.cutoff and sig.nm:
        raise ValueError("keep-levels must be below the cutoff")
    idx = projected_indices(sig, keep, fixed_qubits)
    return phase_distance(u[np.ix_(idx, idx)], v[np.ix_(idx, idx)])


def projected_block(gates, sig, keep, fixed_qubits=None):
    """Projected block of a circuit's unitary, propagating only kept columns."""
    idx = projected_indices(sig, keep, fixed_qubits)
    cols = circuit_unitary(gates, sig, idx)
    return cols[idx, :]


def coherent_displacement(alpha, cutoff):
    """Closed-form matrix elements <m|D(alpha)|n> of the untruncated displacement."""
    from scipy.special import eval_genlaguerre, gammaln

    x = abs(alpha) ** 2
    out = np.zeros((cutoff, cutoff), dtype=complex)
    for m in range(cutoff):
        for n in range(cutoff):
            lo, k = min(m, n), abs(m - n)
            pref = np.exp(0.5 * (gammaln(lo + 1) - gammaln(lo + k + 1)) - x / 2)
            amp = alpha ** k if m >= n else (-np.conj(alpha)) ** k
            out[m, n] = pref * amp * eval_genlaguerre(lo, k, x)
    return out


def reduced_qumode_state(state, sig, mode):
    """Reduced density matrix of one qumode from a pure state vector."""
    psi = state.reshape(sig.dims)
    ax = sig.nq + mode
    psi = np.moveaxis(psi, ax, 0).reshape(sig.cutoff, -1)
    return psi @ psi.conj().T


def apply_pauli_exponential(state, word, theta, sig):
    """exp(-i theta P) on a tensor of shape ``sig.dims + (cols,)``."""
    ps = state
    for q, c in enumerate(word):
        if c != "I":
            ps = np.moveaxis(np.tensordot(_PAULI[c], ps, axes=([1], [q])), 0, q)
    return np.cos(theta) * state - 1j * np.sin(theta) * ps


def program_columns(stmts, sig, columns):
    """Columns of a mixed gate / Pauli-statement program's unitary."""
    columns = np.asarray(columns)
    state = np.zeros((sig.dim, len(columns)), dtype=complex)
    state[columns, np.arange(len(columns))] = 1
    state = state.reshape(sig.dims + (len(columns),))
    for s in stmts:
        if hasattr(s, "word"):
            state = apply_pauli_exponential(state, s.word, s.angle, sig)
        else:
            state = apply_gate(state, s, sig)
    return state.reshape(sig.dim, len(columns))
