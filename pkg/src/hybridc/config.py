"""``key = value`` configuration files for the command line driver.

Keys map onto :class:`~hybridc.rules.DecomposeConfig`,
:class:`~hybridc.route.RouteConfig` and a few run-level settings.  Blank
lines and ``#`` comments are ignored; unknown keys are an error.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields

from .rules import ALL_RULES, DecomposeConfig
from .route import RouteConfig

_SECTION = "hybridc"


def _bool(v):
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _rules(v):
    if isinstance(v, (set, frozenset, list, tuple)):
        return frozenset(int(x) for x in v)
    s = str(v).strip()
    if s in ("", "all"):
        return frozenset(ALL_RULES)
    out = set()
    for part in s.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-")
            out.update(range(int(lo), int(hi) + 1))
        elif part:
            out.add(int(part))
    bad = out - set(ALL_RULES)
    if bad:
        raise ValueError(f"unknown rule ids {sorted(bad)}")
    return frozenset(out)


def _floating(v):
    if v is None:
        return None
    s = str(v).strip().lower()
    if s in ("off", "none", ""):
        return None
    return float(s)


def _layout(v):
    if v is None or str(v).strip() in ("", "identity"):
        return None
    return tuple(int(x) for x in str(v).split(","))


_DECOMPOSE_KEYS = {
    "trotter_steps": int,
    "max_depth": int,
    "bch_order": int,
    "rule_enable": _rules,
    "ancilla_pool": int,
}
_ROUTE_KEYS = {
    "pauli_rank": str,
    "tsp": str,
    "floating": _floating,
    "seed": int,
    "lookahead_weight": float,
    "ta_start": float,
    "ta_decay": float,
    "ta_iters_per_node": int,
    "pauli_reorder": str,
    "livelock_rounds": int,
    "initial_layout": _layout,
}
_RUN_KEYS = {
    "time": float,
    "map": str,
    "cutoff": int,
    "keep": int,
}

# accepted spellings on the command line
_ALIASES = {"pauli-rank": "pauli_rank", "trotter-steps": "trotter_steps", "max-depth": "max_depth"}
_PAULI_RANK = {"active": "active", "min-active-qubits": "active", "depth": "depth",
               "min-total-depth": "depth"}
_TSP = {"christofides": "christofides", "ta": "ta", "threshold-accepting": "ta"}


@dataclass
class RunConfig:
    decompose: DecomposeConfig = field(default_factory=DecomposeConfig)
    route: RouteConfig = field(default_factory=RouteConfig)
    time: float = 1.0
    map: str = ""
    cutoff: int = 16
    keep: int = 8

    def as_dict(self):
        """Flat, JSON-friendly view (echoed into metrics reports)."""
        out = {}
        for f in fields(self.decompose):
            v = getattr(self.decompose, f.name)
            out[f.name] = sorted(v) if isinstance(v, frozenset) else v
        for f in fields(self.route):
            v = getattr(self.route, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        out.update(time=self.time, map=self.map, cutoff=self.cutoff, keep=self.keep)
        return out


def parse_config_text(text):
    """Parse ``key = value`` lines into a flat dict of typed values."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as e:
        raise ValueError(f"bad config: {e}") from None
    return {k: v for k, v in cp[_SECTION].items()}


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def build_config(values=None, **overrides):
    """RunConfig from parsed file values, with ``overrides`` (None = unset) on top."""
    merged = dict(values or {})
    merged.update({k: v for k, v in overrides.items() if v is not None})
    dec, rte, run = {}, {}, {}
    for raw, v in merged.items():
        k = _ALIASES.get(raw, raw)
        if k in _DECOMPOSE_KEYS:
            dec[k] = _DECOMPOSE_KEYS[k](v)
        elif k in _ROUTE_KEYS:
            rte[k] = _ROUTE_KEYS[k](v)
        elif k in _RUN_KEYS:
            run[k] = _RUN_KEYS[k](v)
        else:
            raise ValueError(f"unknown config key {raw!r}")
    if "pauli_rank" in rte:
        rte["pauli_rank"] = _PAULI_RANK.get(rte["pauli_rank"], rte["pauli_rank"])
    if "tsp" in rte:
        rte["tsp"] = _TSP.get(rte["tsp"], rte["tsp"])
    return RunConfig(DecomposeConfig(**dec), RouteConfig(**rte), **run)
