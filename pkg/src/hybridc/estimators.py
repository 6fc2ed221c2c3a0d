"""scikit-learn style wrappers around the two compiler levels.

``Decomposer`` turns Hamiltonians into logical programs, ``Router`` turns
logical programs into routed circuits, and ``make_compiler`` chains them in a
:class:`sklearn.pipeline.Pipeline`.  Hyperparameters live in ``__init__`` so
``get_params``/``set_params``/``clone`` work as usual.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.pipeline import Pipeline

from . import arch, route, rules
from .expr import HybridTerm
from .qasm import Program
from .rules import ALL_RULES, RuleStats


def _as_list(X):
    """A single Hamiltonian (a list of terms) or a list of Hamiltonians."""
    if hasattr(X, "nq") or (X and isinstance(X[0], HybridTerm)):
        return [X]
    return list(X)


class Decomposer(BaseEstimator, TransformerMixin):
    def __init__(self, time=1.0, trotter_steps=4, max_depth=12, bch_order=2,
                 rule_enable=tuple(ALL_RULES), ancilla_pool=2):
        self.time = time
        self.trotter_steps = trotter_steps
        self.max_depth = max_depth
        self.bch_order = bch_order
        self.rule_enable = rule_enable
        self.ancilla_pool = ancilla_pool

    def _config(self):
        return rules.DecomposeConfig(self.trotter_steps, self.max_depth, self.bch_order,
                                     frozenset(self.rule_enable), self.ancilla_pool)

    def fit(self, X=None, y=None):
        """Validate the hyperparameters; no state is learned from X."""
        self.config_ = self._config()
        return self

    def transform(self, X):
        """Hamiltonian (or list of them) -> list of logical Programs."""
        cfg = getattr(self, "config_", None) or self._config()
        out = []
        stats = RuleStats()
        for h in _as_list(X):
            d = rules.decompose(h, self.time, cfg)
            stats.merge(d.stats)
            out.append(d.program)
        self.stats_ = stats
        return out


class Router(BaseEstimator, TransformerMixin):
    def __init__(self, coupling_map="grid:4x5", pauli_rank="active", tsp="christofides",
                 floating=None, seed=0):
        self.coupling_map = coupling_map
        self.pauli_rank = pauli_rank
        self.tsp = tsp
        self.floating = floating
        self.seed = seed

    def _cmap(self):
        if isinstance(self.coupling_map, arch.CouplingMap):
            return self.coupling_map
        return arch.load_map(self.coupling_map)

    def fit(self, X=None, y=None):
        self.cmap_ = self._cmap()
        self.config_ = route.RouteConfig(pauli_rank=self.pauli_rank, tsp=self.tsp,
                                         floating=self.floating, seed=self.seed)
        return self

    def transform(self, X):
        """Program (or list of them) -> list of RoutedCircuit."""
        if not hasattr(self, "cmap_"):
            self.fit()
        progs = [X] if isinstance(X, Program) else list(X)
        routed = [route.schedule(p, self.cmap_, self.config_) for p in progs]
        self.metrics_ = [route.metrics(r.program.statements) for r in routed]
        return routed


def make_compiler(**params):
    """Pipeline(decompose -> route); keyword args use ``decompose__``/``route__`` prefixes."""
    pipe = Pipeline([("decompose", Decomposer()), ("route", Router())])
    return pipe.set_params(**params) if params else pipe
