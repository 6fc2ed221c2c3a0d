"""Level-2 compiler: map a logical program onto a coupling map.

The scheduler keeps a frontier of dependency-ready statements.  Native gates
run as soon as their operands are coupled; Pauli statements are lowered onto
a bus qumode that is walked across the attachment points of the string's
qubits; otherwise qumode SWAPs (beamsplitter bundles) are inserted by a
Sabre-like score.

Logical qubits stay on their physical qubit unless floating-qubit clustering
is enabled, in which case qubit states are exchanged with a composite
qubit-qubit SWAP built from conditional displacements.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import networkx as nx
import numpy as np

from .expr import words_commute
from .gates import GateOp, TWO_OP_LATENCY, ONE_OP_LATENCY, expand_swapm
from .paulisynth import dressing, pauli_rotation, synth_pauli_exponential
from .qasm import PauliStmt, Program


class RouteError(RuntimeError):
    pass


@dataclass
class RouteConfig:
    pauli_rank: str = "active"  # active | depth
    tsp: str = "christofides"  # christofides | ta
    floating: Optional[float] = None  # tau in hops, None = off
    seed: int = 0
    lookahead_weight: float = 0.5
    ta_start: float = 0.2
    ta_decay: float = 0.95
    ta_iters_per_node: int = 200
    pauli_reorder: str = "commuting"  # commuting | free
    livelock_rounds: int = 3
    initial_layout: Optional[tuple] = None  # logical qumode -> physical qumode

    def __post_init__(self):
        if self.pauli_rank not in ("active", "depth"):
            raise ValueError("pauli_rank must be 'active' or 'depth'")
        if self.tsp not in ("christofides", "ta"):
            raise ValueError("tsp must be 'christofides' or 'ta'")
        if self.floating is not None and self.floating <= 0:
            raise ValueError("floating threshold must be positive")
        if self.pauli_reorder not in ("commuting", "free"):
            raise ValueError("pauli_reorder must be 'commuting' or 'free'")


# ------------------------------------------------------------------ layout

class Layout:
    """Logical <-> physical bijections for qumodes and qubits."""

    def __init__(self, n_logical_modes, n_phys_modes, n_logical_qubits, n_phys_qubits, initial=None):
        if n_logical_modes > n_phys_modes:
            raise RouteError(f"{n_logical_modes} qumodes do not fit on {n_phys_modes}")
        if n_logical_qubits > n_phys_qubits:
            raise RouteError(f"{n_logical_qubits} qubits do not fit on {n_phys_qubits}")
        if initial is None:
            initial = tuple(range(n_logical_modes))
        initial = tuple(initial)
        if len(initial) != n_logical_modes or len(set(initial)) != len(initial) or \
                any(not 0 <= p < n_phys_modes for p in initial):
            raise RouteError("initial layout is not an injection into the physical qumodes")
        self.l2p_mode = list(initial)
        self.p2l_mode = [None] * n_phys_modes
        for l, p in enumerate(initial):
            self.p2l_mode[p] = l
        self.l2p_qubit = list(range(n_logical_qubits))
        self.p2l_qubit = [None] * n_phys_qubits
        for l in range(n_logical_qubits):
            self.p2l_qubit[l] = l

    def copy(self):
        out = Layout.__new__(Layout)
        out.l2p_mode = list(self.l2p_mode)
        out.p2l_mode = list(self.p2l_mode)
        out.l2p_qubit = list(self.l2p_qubit)
        out.p2l_qubit = list(self.p2l_qubit)
        return out

    def swap_modes(self, u, v):
        a, b = self.p2l_mode[u], self.p2l_mode[v]
        self.p2l_mode[u], self.p2l_mode[v] = b, a
        if a is not None:
            self.l2p_mode[a] = v
        if b is not None:
            self.l2p_mode[b] = u

    def swap_qubits(self, u, v):
        a, b = self.p2l_qubit[u], self.p2l_qubit[v]
        self.p2l_qubit[u], self.p2l_qubit[v] = b, a
        if a is not None:
            self.l2p_qubit[a] = v
        if b is not None:
            self.l2p_qubit[b] = u


@dataclass
class RoutedCircuit:
    program: Program
    initial_layout: tuple
    final_layout: tuple
    final_qubit_layout: tuple
    swap_count: int
    pauli_plans: list = field(default_factory=list)


# ------------------------------------------------------------------- TSP

def path_cost(order, w):
    return sum(w[a][b] for a, b in zip(order, order[1:]))


def christofides_path(nodes, w, start=None):
    """Open path over ``nodes`` from the Christofides tour.

    ``w`` is a metric closure (``w[a][b]``).  Without ``start`` the heaviest
    tour edge is dropped; with ``start`` the heavier of its two tour edges is.
    """
    nodes = list(nodes)
    if len(nodes) <= 1:
        return nodes
    if len(nodes) == 2:
        a, b = nodes
        return [start, b if start == a else a] if start is not None else [a, b]
    g = nx.Graph()
    for a, b in itertools.combinations(nodes, 2):
        g.add_edge(a, b, weight=w[a][b])
    cycle = nx.approximation.christofides(g, weight="weight")[:-1]
    n = len(cycle)
    if start is None:
        cut = max(range(n), key=lambda i: (w[cycle[i]][cycle[(i + 1) % n]], -i))
        return cycle[cut + 1:] + cycle[:cut + 1]
    i = cycle.index(start)
    nxt, prv = cycle[(i + 1) % n], cycle[(i - 1) % n]
    fwd = cycle[i:] + cycle[:i]  # drops edge (prv, start)
    bwd = [cycle[(i - j) % n] for j in range(n)]  # drops edge (start, nxt)
    return fwd if w[prv][start] >= w[start][nxt] else bwd


def threshold_accepting(nodes, w, seed=0, start=None, init=None,
                        t0=0.2, decay=0.95, iters_per_node=200):
    """2-opt / or-opt local search accepting moves worse by less than a decaying threshold."""
    nodes = list(nodes)
    if len(nodes) <= 2:
        return christofides_path(nodes, w, start)
    rng = np.random.default_rng(seed)
    cur = list(init) if init is not None else christofides_path(nodes, w, start)
    lo = 1 if start is not None else 0
    n = len(cur)
    cost = path_cost(cur, w)
    best, best_cost = list(cur), cost
    thr = t0 * cost
    for it in range(iters_per_node * n):
        if n - lo < 2:
            break
        i, j = sorted(rng.choice(np.arange(lo, n), size=2, replace=False))
        if rng.random() < 0.5:
            cand = cur[:i] + cur[i:j + 1][::-1] + cur[j + 1:]
        else:
            seg_len = int(rng.integers(1, min(3, n - lo) + 1))
            if i + seg_len > n:
                continue
            seg = cur[i:i + seg_len]
            rest = cur[:i] + cur[i + seg_len:]
            pos = int(rng.integers(lo, len(rest) + 1))
            cand = rest[:pos] + seg + rest[pos:]
            if start is not None and cand[0] != start:
                continue
        c = path_cost(cand, w)
        if c - cost < thr:
            cur, cost = cand, c
            if c < best_cost - 1e-12:
                best, best_cost = list(cand), c
        if (it + 1) % n == 0:
            thr *= decay
    return best


def brute_force_path(nodes, w, start=None):
    """Optimal open path by enumeration (small instances only)."""
    nodes = list(nodes)
    if start is not None:
        rest = [x for x in nodes if x != start]
        perms = ([start] + list(p) for p in itertools.permutations(rest))
    else:
        perms = (list(p) for p in itertools.permutations(nodes))
    return min(perms, key=lambda p: (path_cost(p, w), p))


@dataclass
class AncillaPlan:
    bus: int
    visit: list  # physical qumodes in visit order, starting at the bus position
    cost: int
    qubit_order: list


def ancilla_route(active, cmap, layout, cfg, dist=None):
    """Pick a bus qumode and visiting order for a Pauli string's active (logical) qubits."""
    if not active:
        raise RouteError("ancilla routing needs at least one active qubit")
    dist = dist or cmap.dist
    att = {q: cmap.attachment[layout.l2p_qubit[q]] for q in active}
    targets = sorted(set(att.values()))
    cands = set(targets)
    for t in targets:
        cands.update(cmap.neighbors(t))
    n = cmap.n_qumodes
    w = [[dist(a, b) for b in range(n)] for a in range(n)]
    best = None
    for s in sorted(cands):
        nodes = sorted(set(targets) | {s})
        order = christofides_path(nodes, w, start=s)
        if cfg.tsp == "ta":
            order = threshold_accepting(nodes, w, cfg.seed, start=s, init=order,
                                        t0=cfg.ta_start, decay=cfg.ta_decay,
                                        iters_per_node=cfg.ta_iters_per_node)
        c = path_cost(order, w)
        if best is None or c < best[0]:
            best = (c, s, order)
    c, s, order = best
    by_mode = {v: q for q, v in att.items()}
    qorder = [by_mode[v] for v in order if v in by_mode]
    return AncillaPlan(s, order, c, qorder)


# ---------------------------------------------------------------- floating

def qubit_swap_gates(pu, pv, cmap):
    """Exchange the states of physical qubits ``pu`` and ``pv`` (attached qumodes adjacent).

    SWAP equals exp(-i pi/4 (XX + YY + ZZ)) up to phase; each ZZ rotation is a
    closed conditional-displacement loop on the qumode of ``pu`` that visits
    ``pv``'s qumode through beamsplitter SWAPs: 12 CD and 12 SWAPM overall.
    """
    u, v = cmap.attachment[pu], cmap.attachment[pv]
    if not cmap.adjacent(u, v):
        raise RouteError(f"qubits {pu} and {pv} are not on adjacent qumodes")
    a = math.sqrt(math.pi / 8)
    loop = [
        GateOp("CD", (a,), (pu,), (u,)), GateOp("SWAPM", (), (), (u, v)),
        GateOp("CD", (complex(0, -a),), (pv,), (v,)), GateOp("SWAPM", (), (), (u, v)),
        GateOp("CD", (-a,), (pu,), (u,)), GateOp("SWAPM", (), (), (u, v)),
        GateOp("CD", (complex(0, a),), (pv,), (v,)), GateOp("SWAPM", (), (), (u, v)),
    ]
    out = []
    for letter in "XYZ":
        pre_u, post_u = dressing(letter, pu)
        pre_v, post_v = dressing(letter, pv)
        out += pre_u + pre_v + loop + post_u + post_v
    return out


def mean_pairwise(points, dist):
    pairs = list(itertools.combinations(points, 2))
    if not pairs:
        return 0.0
    return sum(dist(a, b) for a, b in pairs) / len(pairs)


def floating_cluster(active, cmap, layout, tau, dist=None):
    """Qubit moves [(pu, pv), ...] pulling active qubits toward their medoid, or None."""
    dist = dist or cmap.dist
    pos = {q: layout.l2p_qubit[q] for q in active}
    modes = [cmap.attachment[p] for p in pos.values()]
    if mean_pairwise(modes, dist) <= tau:
        return None
    medoid = min(modes, key=lambda m: (sum(dist(m, x) for x in modes), m))
    lay = layout.copy()
    moves = []
    for q in sorted(active, key=lambda q: (-dist(cmap.attachment[pos[q]], medoid), q)):
        while True:
            here = cmap.attachment[lay.l2p_qubit[q]]
            if dist(here, medoid) <= 1:
                break
            step = cmap.dist.path(here, medoid)[1]
            pv = cmap.qubit_at[step]
            if pv is None or lay.p2l_qubit[pv] in active:
                break
            moves.append((lay.l2p_qubit[q], pv))
            lay.swap_qubits(lay.l2p_qubit[q], pv)
        cur = [cmap.attachment[lay.l2p_qubit[x]] for x in active]
        if mean_pairwise(cur, dist) <= tau:
            break
    return moves or None


# ---------------------------------------------------------------- metrics

def _arity_class(g):
    return 1 if g.arity == 1 else 2


def metrics(stmts, n_qubits=None, n_qumodes=None):
    """Gate counts, unweighted depth and weighted duration (critical paths)."""
    gates = []
    for s in stmts:
        if isinstance(s, PauliStmt):
            raise ValueError("metrics need a lowered circuit (Pauli statement found)")
        gates.extend(expand_swapm(s) if s.name == "SWAPM" else [s])
    one = sum(1 for g in gates if _arity_class(g) == 1)
    two = len(gates) - one
    depth_t, dur_t = {}, {}
    depth = duration = 0
    weighted_sum = 0
    for g in gates:
        lat = ONE_OP_LATENCY if _arity_class(g) == 1 else TWO_OP_LATENCY
        weighted_sum += lat
        ws = g.wires
        d = max((depth_t.get(x, 0) for x in ws), default=0) + 1
        t = max((dur_t.get(x, 0) for x in ws), default=0) + lat
        for x in ws:
            depth_t[x] = d
            dur_t[x] = t
        depth, duration = max(depth, d), max(duration, t)
    return {"one_op": one, "two_op": two, "depth": depth, "duration": duration,
            "weighted_sum": weighted_sum}


# --------------------------------------------------------------- legality

def check_legal(stmts, cmap):
    """List of (index, statement, reason) for every coupling violation."""
    bad = []
    for i, s in enumerate(stmts):
        if isinstance(s, PauliStmt):
            bad.append((i, s, "unlowered Pauli statement"))
            continue
        if any(not 0 <= q < cmap.n_qubits for q in s.qubits) or \
                any(not 0 <= k < cmap.n_qumodes for k in s.qumodes):
            bad.append((i, s, "operand outside the device"))
            continue
        ms = s.qumodes
        if len(ms) == 2 and not cmap.adjacent(*ms):
            bad.append((i, s, f"qumodes {ms} not coupled"))
        if s.qubits and ms:
            att = cmap.attachment[s.qubits[0]]
            if att not in ms:
                bad.append((i, s, f"qubit {s.qubits[0]} not attached to {ms}"))
    return bad


def verify_legal(stmts, cmap):
    bad = check_legal(stmts, cmap)
    if bad:
        i, s, why = bad[0]
        raise RouteError(f"illegal statement {i} ({s}): {why}")
    return True


# --------------------------------------------------------------- schedule

def _dependencies(stmts, reorder):
    """Predecessor sets; commuting Pauli statements do not order each other."""
    preds = [set() for _ in stmts]
    last = {}
    paulis_since = {}
    for i, s in enumerate(stmts):
        if isinstance(s, PauliStmt):
            for q in s.support:
                w = ("q", q)
                if w in last:
                    preds[i].add(last[w])
                for j in paulis_since.get(w, ()):
                    if reorder == "commuting" and not words_commute(stmts[j].word, s.word):
                        preds[i].add(j)
                paulis_since.setdefault(w, []).append(i)
        else:
            for w in s.wires:
                if w in last:
                    preds[i].add(last[w])
                preds[i].update(paulis_since.pop(w, ()))
                last[w] = i
    return preds


class _Scheduler:
    def __init__(self, prog, cmap, cfg):
        self.prog, self.cmap, self.cfg = prog, cmap, cfg
        self.dist = cmap.dist
        self.layout = Layout(prog.nm, cmap.n_qumodes, prog.nq, cmap.n_qubits, cfg.initial_layout)
        self.initial = tuple(self.layout.l2p_mode)
        self.out = []
        self.ready_t = {}
        self.swaps = 0
        self.plans = []

    # emission -----------------------------------------------------------
    def emit(self, g):
        self.out.append(g)
        lat = ONE_OP_LATENCY if g.arity == 1 else TWO_OP_LATENCY
        if g.name == "SWAPM":
            lat = TWO_OP_LATENCY + ONE_OP_LATENCY
        t = max((self.ready_t.get(w, 0) for w in g.wires), default=0) + lat
        for w in g.wires:
            self.ready_t[w] = t

    def swap(self, u, v):
        self.emit(GateOp("SWAPM", (), (), (min(u, v), max(u, v))))
        self.layout.swap_modes(u, v)
        self.swaps += 1

    def phys(self, g):
        lay = self.layout
        return g.remap([lay.l2p_qubit[q] for q in range(len(lay.l2p_qubit))], lay.l2p_mode)

    # gate geometry --------------------------------------------------------
    def cost(self, g, lay=None):
        """Hops still needed before ``g`` is executable (0 = executable)."""
        lay = lay or self.layout
        d = self.dist
        ms = [lay.l2p_mode[k] for k in g.qumodes]
        if g.qubits and ms:
            att = self.cmap.attachment[lay.l2p_qubit[g.qubits[0]]]
            if len(ms) == 1:
                return d(ms[0], att)
            a, b = ms
            return min(d(a, att), d(b, att)) + d(a, b) - 1
        if len(ms) == 2:
            return d(ms[0], ms[1]) - 1
        return 0

    def executable(self, g):
        return self.cost(g) == 0

    # Pauli lowering -------------------------------------------------------
    def lower_pauli(self, s):
        lay = self.layout
        active = list(s.support)
        if len(active) == 1:
            for g in pauli_rotation(s.word, s.angle):
                self.emit(self.phys(g))
            return
        if self.cfg.floating is not None:
            moves = floating_cluster(active, self.cmap, lay, self.cfg.floating, self.dist)
            for pu, pv in moves or ():
                for g in qubit_swap_gates(pu, pv, self.cmap):
                    self.emit(g)
                    self.swaps += g.name == "SWAPM"
                lay.swap_qubits(pu, pv)
        plan = ancilla_route(active, self.cmap, lay, self.cfg, self.dist)
        self.plans.append(plan)
        bus_tag = self.cmap.n_qumodes  # placeholder id for the travelling bus
        seq = synth_pauli_exponential(s.word, s.angle, bus_tag, plan.qubit_order).gates
        pos = plan.bus
        for g in seq:
            if g.qubits:
                pq = lay.l2p_qubit[g.qubits[0]]
                if g.qumodes:
                    target = self.cmap.attachment[pq]
                    for nxt in self.dist.path(pos, target)[1:]:
                        self.swap(pos, nxt)
                        pos = nxt
                    self.emit(GateOp(g.name, g.params, (pq,), (pos,)))
                else:
                    self.emit(GateOp(g.name, g.params, (pq,), ()))
            else:
                self.emit(GateOp(g.name, g.params, (), (pos,)))

    def rank_pauli(self, cands):
        lay = self.layout
        if self.cfg.pauli_rank == "active":
            key = lambda i: (len(self.prog.statements[i].support), i)  # noqa: E731
        else:
            def key(i):
                s = self.prog.statements[i]
                return (sum(self.ready_t.get(("q", lay.l2p_qubit[q]), 0) for q in s.support), i)
        return min(cands, key=key)

    # SWAP selection -------------------------------------------------------
    def rank_swaps(self, blocked, lookahead):
        lay = self.layout
        cand = set()
        for g in blocked:
            for k in g.qumodes:
                p = lay.l2p_mode[k]
                for nb in self.cmap.neighbors(p):
                    cand.add((min(p, nb), max(p, nb)))
        base_b = [self.cost(g) for g in blocked]
        base_l = [self.cost(g) for g in lookahead]
        scored = []
        for u, v in sorted(cand):
            trial = lay.copy()
            trial.swap_modes(u, v)
            gains = [b - self.cost(g, trial) for g, b in zip(blocked, base_b)]
            if sum(gains) < 0 or max(gains) <= 0:
                continue
            la = sum(b - self.cost(g, trial) for g, b in zip(lookahead, base_l))
            scored.append((sum(gains) + self.cfg.lookahead_weight * la, (u, v)))
        scored.sort(key=lambda x: (-x[0], x[1]))
        return scored

    def route_one(self, g):
        """Fallback: move operands of ``g`` along shortest paths until it executes."""
        lay = self.layout
        guard = 0
        while not self.executable(g):
            guard += 1
            if guard > 4 * self.cmap.n_qumodes + 8:
                raise RouteError(f"cannot route {g}")
            ms = [lay.l2p_mode[k] for k in g.qumodes]
            if g.qubits:
                att = self.cmap.attachment[lay.l2p_qubit[g.qubits[0]]]
                if len(ms) == 1 or att not in ms:
                    src = ms[0] if len(ms) == 1 else min(ms, key=lambda m: (self.dist(m, att), m))
                    path = self.dist.path(src, att)
                    self.swap(path[0], path[1])
                    continue
                a = att
                b = ms[1] if ms[0] == att else ms[0]
            else:
                a, b = ms
            path = self.dist.path(b, a)
            self.swap(path[0], path[1])

    # main loop --------------------------------------------------------------
    def run(self):
        stmts = self.prog.statements
        preds = _dependencies(stmts, self.cfg.pauli_reorder)
        succs = [[] for _ in stmts]
        for i, ps in enumerate(preds):
            for p in ps:
                succs[p].append(i)
        indeg = [len(p) for p in preds]
        ready = {i for i, d in enumerate(indeg) if d == 0}
        done = 0
        stall = 0

        def finish(i):
            nonlocal done
            ready.discard(i)
            done += 1
            for j in succs[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    ready.add(j)

        while ready:
            progressed = True
            while progressed:
                progressed = False
                for i in sorted(ready):
                    s = stmts[i]
                    if not isinstance(s, PauliStmt) and self.executable(s):
                        self.emit(self.phys(s))
                        finish(i)
                        progressed = True
                        stall = 0
            paulis = [i for i in ready if isinstance(stmts[i], PauliStmt)]
            if paulis:
                i = self.rank_pauli(paulis)
                self.lower_pauli(stmts[i])
                finish(i)
                stall = 0
                continue
            if not ready:
                break
            blocked_ids = sorted(ready)
            blocked = [stmts[i] for i in blocked_ids]
            if stall >= self.cfg.livelock_rounds:
                self.route_one(blocked[0])
                stall = 0
                continue
            look = []
            for i in blocked_ids:
                for j in succs[i]:
                    if not isinstance(stmts[j], PauliStmt) and len(stmts[j].qumodes) + len(stmts[j].qubits) > 1:
                        look.append(stmts[j])
            ranked = self.rank_swaps(blocked, look)
            if not ranked:
                self.route_one(blocked[0])
                stall = 0
                continue
            self.swap(*ranked[0][1])
            stall += 1
        if done != len(stmts):
            raise RouteError("dependency cycle in program")
        prog = Program(self.cmap.n_qubits, self.cmap.n_qumodes, self.out)
        return RoutedCircuit(prog, self.initial, tuple(self.layout.l2p_mode),
                             tuple(self.layout.l2p_qubit), self.swaps, self.plans)


def schedule(prog, cmap, cfg=None):
    """Route ``prog`` onto ``cmap``; returns a :class:`RoutedCircuit`."""
    cfg = cfg or RouteConfig()
    prog.validate()
    return _Scheduler(prog, cmap, cfg).run()


def content_circuit(stmts, nm_logical, initial_layout, n_phys_modes):
    """Rewrite a routed circuit onto content wires, absorbing SWAPMs.

    Wire ``l < nm_logical`` carries logical qumode ``l``; physical qumodes that
    start empty get fresh wires on first use.  Returns ``(gates, n_wires)``.
    """
    content = [None] * n_phys_modes
    for l, p in enumerate(initial_layout):
        content[p] = l
    spare = {}
    out = []
    for s in stmts:
        if s.name == "SWAPM":
            u, v = s.qumodes
            content[u], content[v] = content[v], content[u]
            continue
        wires = []
        for p in s.qumodes:
            if content[p] is None:
                content[p] = nm_logical + len(spare)
                spare[p] = content[p]
            wires.append(content[p])
        out.append(GateOp(s.name, s.params, s.qubits, tuple(wires)))
    return out, nm_logical + len(spare)
