"""Hardware model: a qumode lattice with one qubit attached to each qumode."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property

import networkx as nx
import numpy as np

from .gates import GateOp


@dataclass(frozen=True)
class CouplingMap:
    n_qumodes: int
    edges: frozenset
    attachment: tuple  # attachment[q] = qumode of qubit q

    def __post_init__(self):
        if self.n_qumodes < 1:
            raise ValueError("coupling map needs at least one qumode")
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on qumode {a}")
            if not (0 <= a < self.n_qumodes and 0 <= b < self.n_qumodes):
                raise ValueError(f"edge ({a}, {b}) outside the qumode range")
        if len(set(self.attachment)) != len(self.attachment):
            raise ValueError("two qubits attached to the same qumode")
        if any(not 0 <= k < self.n_qumodes for k in self.attachment):
            raise ValueError("qubit attached to a missing qumode")
        if not nx.is_connected(self.graph):
            raise ValueError("coupling map is disconnected")

    @classmethod
    def from_edges(cls, n_qumodes, edges, attachment=None):
        edges = frozenset(tuple(sorted(e)) for e in edges)
        if attachment is None:
            attachment = tuple(range(n_qumodes))
        return cls(n_qumodes, edges, tuple(attachment))

    @property
    def n_qubits(self):
        return len(self.attachment)

    @cached_property
    def graph(self):
        g = nx.Graph()
        g.add_nodes_from(range(self.n_qumodes))
        g.add_edges_from(sorted(self.edges))
        return g

    @cached_property
    def dist(self):
        return distances(self)

    @cached_property
    def qubit_at(self):
        """Inverse attachment: qumode -> qubit (or None)."""
        out = [None] * self.n_qumodes
        for q, k in enumerate(self.attachment):
            out[k] = q
        return tuple(out)

    def adjacent(self, a, b):
        return (min(a, b), max(a, b)) in self.edges

    def neighbors(self, k):
        return sorted(self.graph.neighbors(k))


@dataclass(frozen=True)
class DistanceMatrix:
    d: np.ndarray
    pred: dict

    def __call__(self, a, b):
        return int(self.d[a, b])

    def path(self, a, b):
        """Shortest path from a to b, inclusive of both ends."""
        if a == b:
            return [a]
        out = [b]
        while out[-1] != a:
            out.append(self.pred[a][out[-1]])
        return out[::-1]


def grid(rows, cols):
    """4-neighbour lattice; qubit i attached to qumode i (row-major)."""
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be positive")
    edges = []
    for r in range(rows):
        for c in range(cols):
            k = r * cols + c
            if c + 1 < cols:
                edges.append((k, k + 1))
            if r + 1 < rows:
                edges.append((k, k + cols))
    return CouplingMap.from_edges(rows * cols, edges)


def line(n):
    return grid(1, n)


def distances(cmap):
    g = cmap.graph
    n = cmap.n_qumodes
    d = np.full((n, n), -1, dtype=int)
    pred = {}
    for s in range(n):
        p, lengths = nx.dijkstra_predecessor_and_distance(g, s)
        pred[s] = {v: min(ps) for v, ps in p.items() if ps}
        for v, L in lengths.items():
            d[s, v] = L
    if (d < 0).any():
        raise ValueError("coupling map is disconnected")
    return DistanceMatrix(d, pred)


def qumode_swap(a, b, cmap=None):
    """Exact qumode SWAP: BS(pi, 0) followed by R(-pi/2) on both modes."""
    if cmap is not None and not cmap.adjacent(a, b):
        raise ValueError(f"qumodes {a} and {b} are not adjacent")
    return [
        GateOp("BS", (math.pi, 0.0), (), (a, b)),
        GateOp("R", (-math.pi / 2,), (), (a,)),
        GateOp("R", (-math.pi / 2,), (), (b,)),
    ]


# ------------------------------------------------------------------ files

def parse_map_text(text):
    """Parse ``qumodes N`` / ``edge i j`` / ``attach q k`` lines."""
    n = None
    edges = []
    attach = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line_ = raw.split("#", 1)[0].split("//", 1)[0].strip()
        if not line_:
            continue
        parts = line_.split()
        try:
            if parts[0] == "qumodes" and len(parts) == 2:
                if n is not None:
                    raise ValueError("duplicate qumodes header")
                n = int(parts[1])
            elif parts[0] == "edge" and len(parts) == 3:
                edges.append((int(parts[1]), int(parts[2])))
            elif parts[0] == "attach" and len(parts) == 3:
                q, k = int(parts[1]), int(parts[2])
                if q in attach:
                    raise ValueError(f"qubit {q} attached twice")
                attach[q] = k
            else:
                raise ValueError(f"unrecognised line {raw.strip()!r}")
        except ValueError as e:
            raise ValueError(f"map line {lineno}: {e}") from None
    if n is None:
        raise ValueError("map file lacks a 'qumodes N' header")
    if attach:
        if sorted(attach) != list(range(len(attach))):
            raise ValueError("attached qubits must be numbered 0..n-1")
        attachment = tuple(attach[q] for q in range(len(attach)))
    else:
        attachment = tuple(range(n))
    return CouplingMap.from_edges(n, edges, attachment)


def format_map(cmap):
    lines = [f"qumodes {cmap.n_qumodes}"]
    lines += [f"edge {a} {b}" for a, b in sorted(cmap.edges)]
    lines += [f"attach {q} {k}" for q, k in enumerate(cmap.attachment)]
    return "\n".join(lines) + "\n"


_GRID_RE = re.compile(r"grid:(\d+)x(\d+)")


def load_map(spec):
    """``grid:RxC`` or a path to a coupling-map file."""
    m = _GRID_RE.fullmatch(spec.strip())
    if m:
        return grid(int(m.group(1)), int(m.group(2)))
    with open(spec, encoding="utf-8") as fh:
        return parse_map_text(fh.read())
