"""Command line driver: ``hybridc {gen,compile,route,verify,hitrate,bench}``."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, arch, config, models, qasm, route, rules, sim
from .expr import Operator

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_DECOMPOSE = 4
EXIT_ROUTE = 5
EXIT_VERIFY = 6
EXIT_IO = 7

MODEL_ORDER = ("kerr", "z2higgs", "bosehubbard", "hubbardholstein", "evc", "heisenberg")


class CliError(Exception):
    def __init__(self, msg, code):
        super().__init__(msg)
        self.code = code


# ------------------------------------------------------------------ inputs

def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise CliError(f"{path}: {e.strerror}", EXIT_IO) from None


def parse_params(text):
    out = {}
    if not text:
        return out
    for kv in text.split(","):
        if "=" not in kv:
            raise CliError(f"bad parameter {kv!r} (want k=v)", EXIT_USAGE)
        k, v = kv.split("=", 1)
        out[k.strip()] = float(v)
    return out


def model_hamiltonian(name, size=None, params=None):
    if name not in models.BUILDERS:
        raise CliError(f"unknown model {name!r}; choose from {', '.join(MODEL_ORDER)}", EXIT_USAGE)
    try:
        return models.build(name, models.make_params(name, size, **(params or {})))
    except (TypeError, ValueError) as e:
        raise CliError(f"model {name}: {e}", EXIT_USAGE) from None


def load_input(spec):
    """``model:NAME[:SIZE]``, a .cvdvqasm program, a Hamiltonian file or a Pauli file."""
    if spec.startswith("model:"):
        bits = spec.split(":")
        size = int(bits[2]) if len(bits) > 2 and bits[2] else None
        return model_hamiltonian(bits[1], size)
    text = _read(spec)
    try:
        if spec.endswith(".cvdvqasm"):
            return qasm.parse(text)
        first = next((ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")), "")
        if first.startswith(models.HAM_HEADER) or first.startswith("term "):
            h = models.parse_hamiltonian(text)
        else:
            h = models.pauli_hamiltonian(models.parse_pauli_text(text))
        h.name = h.name or os.path.splitext(os.path.basename(spec))[0]
        return h
    except (qasm.QasmError, ValueError) as e:
        raise CliError(f"{spec}: {e}", EXIT_PARSE) from None


def auto_grid(n):
    """Smallest near-square grid with at least ``n`` qumodes."""
    n = max(n, 1)
    rows = max(1, int(math.floor(math.sqrt(n))))
    cols = math.ceil(n / rows)
    return arch.grid(rows, cols)


def resolve_map(spec, prog):
    need = max(prog.nq, prog.nm, 1)
    if not spec or spec == "auto":
        return auto_grid(need)
    try:
        return arch.load_map(spec)
    except OSError as e:
        raise CliError(f"{spec}: {e.strerror}", EXIT_IO) from None
    except ValueError as e:
        raise CliError(f"{spec}: {e}", EXIT_PARSE) from None


def run_config(args):
    values = config.load_config(args.config) if getattr(args, "config", None) else {}
    over = {}
    for key in ("trotter_steps", "pauli_rank", "tsp", "seed", "time", "cutoff", "keep"):
        v = getattr(args, key, None)
        if v is not None:
            over[key] = v
    if getattr(args, "floating", None) is not None:
        over["floating"] = args.floating
    if getattr(args, "map", None):
        over["map"] = args.map
    try:
        return config.build_config(values, **over)
    except (TypeError, ValueError) as e:
        raise CliError(f"config: {e}", EXIT_USAGE) from None


# ---------------------------------------------------------------- pipeline

def level1(h, cfg):
    try:
        return rules.decompose(h, cfg.time, cfg.decompose)
    except rules.DecomposeError as e:
        raise CliError(f"decompose: {e}", EXIT_DECOMPOSE) from None


def level2(prog, cmap, cfg):
    try:
        rc = route.schedule(prog, cmap, cfg.route)
        route.verify_legal(rc.program.statements, cmap)
        return rc
    except route.RouteError as e:
        raise CliError(f"route: {e}", EXIT_ROUTE) from None


def physical_text(rc):
    body = qasm.emit(rc.program).splitlines()
    notes = [
        "// initial qumode layout: " + " ".join(map(str, rc.initial_layout)),
        "// final qumode layout: " + " ".join(map(str, rc.final_layout)),
        "// final qubit layout: " + " ".join(map(str, rc.final_qubit_layout)),
    ]
    return "\n".join(body[:1] + notes + body[1:]) + "\n"


def read_layout_note(text, which="initial qumode layout"):
    for line in text.splitlines():
        if line.startswith(f"// {which}:"):
            return tuple(int(x) for x in line.split(":", 1)[1].split())
    return None


def metrics_report(rc, logical, cfg, compile_ms, extra=None):
    m = route.metrics(rc.program.statements)
    m.update(
        swap_count=rc.swap_count,
        compile_ms=round(compile_ms, 3),
        pauli_blocks=len(logical.paulis()),
        pauli_strings=len({p.word for p in logical.paulis()}),
        logical_qubits=logical.nq,
        logical_qumodes=logical.nm,
    )
    if extra:
        m.update(extra)
    for k, v in cfg.as_dict().items():
        m[f"config.{k}"] = v
    return m


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as e:
        raise CliError(f"{path}: {e.strerror}", EXIT_IO) from None


def _emit(args, rc, report):
    if args.output:
        _write(args.output, physical_text(rc))
    if args.metrics_out:
        _write(args.metrics_out, json.dumps(report, indent=2, sort_keys=True) + "\n")
    if args.emit == "metrics-json":
        sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    elif not args.output:
        sys.stdout.write(physical_text(rc))


# ---------------------------------------------------------------- commands

def cmd_gen(args):
    h = model_hamiltonian(args.model, args.size, parse_params(args.params))
    if args.format == "pauli":
        if h.nm:
            raise CliError(f"{args.model} has qumode terms; use --format ham", EXIT_USAGE)
        strings = [t.pauli for t in h]
        text = "".join(f"{s.coefficient!r} {s.word}\n" for s in strings)
    else:
        text = models.format_hamiltonian(h)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_compile(args):
    cfg = run_config(args)
    src = load_input(args.input)
    t0 = time.perf_counter()
    extra = {}
    if isinstance(src, qasm.Program):
        logical = src
    else:
        dec = level1(src, cfg)
        logical = dec.program
        extra["ancilla_qubits"] = dec.n_ancillas
    if args.ir_only:
        text = qasm.emit(logical)
        if args.output:
            _write(args.output, text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    cmap = resolve_map(cfg.map, logical)
    rc = level2(logical, cmap, cfg)
    ms = (time.perf_counter() - t0) * 1000
    _emit(args, rc, metrics_report(rc, logical, cfg, ms, extra))
    return EXIT_OK


def cmd_route(args):
    cfg = run_config(args)
    try:
        prog = qasm.parse(_read(args.input))
    except qasm.QasmError as e:
        raise CliError(f"{args.input}: {e}", EXIT_PARSE) from None
    t0 = time.perf_counter()
    cmap = resolve_map(cfg.map, prog)
    rc = level2(prog, cmap, cfg)
    ms = (time.perf_counter() - t0) * 1000
    _emit(args, rc, metrics_report(rc, prog, cfg, ms))
    return EXIT_OK


def _hamiltonian_operator(h, nq):
    op = Operator(nq)
    for t in h:
        op = op + t.to_operator().extend(nq)
    return op


def cmd_verify(args):
    cfg = run_config(args)
    src = load_input(args.input)
    if isinstance(src, qasm.Program):
        return _verify_routed(args, cfg, src)
    dec = level1(src, cfg)
    prog = dec.program
    sig = sim.Signature(prog.nq, prog.nm, cfg.cutoff)
    if sig.dim > args.max_dim:
        raise CliError(f"oracle dimension {sig.dim} exceeds --max-dim {args.max_dim}", EXIT_USAGE)
    nq_sys = prog.nq - dec.n_ancillas
    fixed = {q: 0 for q in range(nq_sys, prog.nq)}
    keep = cfg.keep if prog.nm else cfg.cutoff
    idx = sim.projected_indices(sig, min(keep, cfg.cutoff), fixed)
    got = sim.program_columns(prog.statements, sig, idx)[idx]
    exact = sim.exp_generator(_hamiltonian_operator(src, prog.nq) * (-1j * cfg.time), sig)
    want = exact[np.ix_(idx, idx)]
    d = sim.phase_distance(got, want)
    ok = d <= args.tol
    print(f"projected distance {d:.3e} (cutoff {cfg.cutoff}, keep {keep}, tol {args.tol:g}): "
          f"{'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_VERIFY


def _verify_routed(args, cfg, logical):
    if not args.physical:
        raise CliError("verify of a .cvdvqasm program needs --physical", EXIT_USAGE)
    text = _read(args.physical)
    try:
        phys = qasm.parse(text)
    except qasm.QasmError as e:
        raise CliError(f"{args.physical}: {e}", EXIT_PARSE) from None
    initial = read_layout_note(text) or tuple(range(logical.nm))
    final_q = read_layout_note(text, "final qubit layout") or tuple(range(logical.nq))
    gates, n_wires = route.content_circuit(phys.statements, logical.nm, initial, phys.nm)
    used = [q for g in gates for q in g.qubits] + list(final_q)
    nq_phys = max([logical.nq] + [q + 1 for q in used])
    sig_l = sim.Signature(logical.nq, n_wires, cfg.cutoff)
    sig_p = sim.Signature(nq_phys, n_wires, cfg.cutoff)
    if sig_p.dim > args.max_dim:
        raise CliError(f"oracle dimension {sig_p.dim} exceeds --max-dim {args.max_dim}", EXIT_USAGE)
    keep = min(cfg.keep, cfg.cutoff)
    idx = sim.projected_indices(sig_l, keep)
    a = sim.program_columns(logical.statements, sig_l, idx)[idx]
    # embed the logical basis states into the physical register (spare qubits in |0>)
    digits = np.unravel_index(idx, sig_l.dims)
    zeros = tuple(np.zeros((nq_phys - logical.nq, len(idx)), int))
    cols = np.ravel_multi_index(digits[:logical.nq] + zeros + digits[logical.nq:], sig_p.dims)
    out = sim.program_columns(gates, sig_p, cols).reshape(sig_p.dims + (len(idx),))
    # read logical qubit l off physical qubit final_q[l]; spare qubits must end in |0>
    order = list(final_q) + [q for q in range(nq_phys) if q not in final_q]
    out = np.transpose(out, order + list(range(nq_phys, out.ndim)))
    out = out[(slice(None),) * logical.nq + (0,) * (nq_phys - logical.nq)]
    b = out.reshape(sig_l.dim, len(idx))[idx]
    d = sim.phase_distance(a, b)
    ok = d <= args.tol
    print(f"projected distance {d:.3e} (cutoff {cfg.cutoff}, keep {keep}, tol {args.tol:g}): "
          f"{'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_VERIFY


def hitrate_stats(names, size=None, cfg=None):
    cfg = cfg or rules.DecomposeConfig()
    total = rules.RuleStats()
    for name in names:
        h = model_hamiltonian(name, None if name == "kerr" else size)
        total.merge(rules.decompose(h, 1.0, cfg).stats)
    return total


def cmd_hitrate(args):
    cfg = run_config(args)
    names = args.models or list(MODEL_ORDER)
    stats = hitrate_stats(names, args.size, cfg.decompose)
    hr = rules.hit_rates(stats)
    if args.json:
        out = {"success": hr["success"], "total": hr["total"], "rule16_share": hr["rule16_share"],
               "success_counts": hr["success_counts"], "attempt_counts": hr["attempt_counts"],
               "models": names}
        sys.stdout.write(json.dumps(out, indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    print(f"{'rule':>4}  {'name':<30} {'success':>9} {'total':>9}")
    for r in range(1, 16):
        print(f"{r:>4}  {rules.RULE_NAMES[r]:<30} {hr['success'][r]:>8.2f}% {hr['total'][r]:>8.2f}%")
    print(f"rule 16 ({rules.RULE_NAMES[16]}) share of successful applications: {hr['rule16_share']:.2f}%")
    return EXIT_OK


BENCH_METRICS = ("one_op", "two_op", "depth", "duration")


def _bench_one(logical, cmap, rcfg):
    rc = route.schedule(logical, cmap, rcfg)
    m = route.metrics(rc.program.statements)
    m["swap_count"] = rc.swap_count
    return m


def _delta(base, x):
    return 100.0 * (base - x) / base if base else 0.0


def cmd_bench(args):
    cfg = run_config(args)
    inputs = args.inputs or ["model:heisenberg:20"]
    tau = cfg.route.floating if cfg.route.floating is not None else 6.0
    variants = {
        "christofides": dict(tsp="christofides", floating=None),
        "ta": dict(tsp="ta", floating=None),
        "floating": dict(tsp="christofides", floating=tau),
    }
    jobs = []
    names = []
    for spec in inputs:
        src = load_input(spec)
        logical = src if isinstance(src, qasm.Program) else level1(src, cfg).program
        name = spec if isinstance(src, qasm.Program) else (src.name or spec)
        names.append(name)
        cmap = resolve_map(cfg.map, logical)
        for vname, kw in variants.items():
            rcfg = route.RouteConfig(**{**cfg.route.__dict__, **kw})
            jobs.append((name, vname, logical, cmap, rcfg))
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        futs = {(j[0], j[1]): pool.submit(_bench_one, *j[2:]) for j in jobs}
        try:
            results = {k: f.result() for k, f in futs.items()}
        except route.RouteError as e:
            raise CliError(f"route: {e}", EXIT_ROUTE) from None
    rows = []
    for name in names:
        base = results[(name, "christofides")]
        row = {"benchmark": name}
        for vname in variants:
            m = results[(name, vname)]
            for k in BENCH_METRICS:
                row[f"{vname}.{k}"] = m[k]
                if vname != "christofides":
                    row[f"{vname}.{k}.delta_pct"] = round(_delta(base[k], m[k]), 2)
        rows.append(row)
    if args.json:
        sys.stdout.write(json.dumps(rows, indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    head = f"{'benchmark':<20} {'metric':<9} {'christofides':>13} {'threshold-accepting':>24} {'floating':>24}"
    print(head)
    for row in rows:
        for k in BENCH_METRICS:
            ta = f"{row[f'ta.{k}']} ({row[f'ta.{k}.delta_pct']:+.2f}%)"
            fl = f"{row[f'floating.{k}']} ({row[f'floating.{k}.delta_pct']:+.2f}%)"
            print(f"{row['benchmark']:<20} {k:<9} {row[f'christofides.{k}']:>13} {ta:>24} {fl:>24}")
    return EXIT_OK


# ------------------------------------------------------------------ parser

def _floating_arg(v):
    if v.lower() == "off":
        return "off"
    try:
        x = float(v)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a hop threshold or 'off'") from None
    if x <= 0:
        raise argparse.ArgumentTypeError("threshold must be positive")
    return v


def _add_common(p, routing=True):
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--time", type=float, help="evolution time t (default 1.0)")
    p.add_argument("--trotter-steps", dest="trotter_steps", type=int, help="Trotter steps k (default 4)")
    if routing:
        p.add_argument("--map", help="coupling map file, grid:RxC, or auto (default)")
        p.add_argument("--pauli-rank", dest="pauli_rank", choices=["active", "depth"])
        p.add_argument("--tsp", choices=["christofides", "ta"])
        p.add_argument("--floating", type=_floating_arg, metavar="TAU|off")
        p.add_argument("--seed", type=int)


def _add_output(p):
    p.add_argument("--emit", choices=["cvdvqasm", "metrics-json"], default="cvdvqasm",
                   help="what to print on stdout")
    p.add_argument("-o", "--output", help="write the physical circuit here")
    p.add_argument("--metrics-out", help="write the metrics report (JSON) here")


def build_parser():
    ap = argparse.ArgumentParser(prog="hybridc", description=__doc__)
    ap.add_argument("--version", action="version", version=f"hybridc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a benchmark Hamiltonian")
    p.add_argument("model", choices=list(MODEL_ORDER))
    p.add_argument("--size", type=int)
    p.add_argument("--params", help="coefficient overrides, e.g. U=0.5,J=2")
    p.add_argument("--format", choices=["ham", "pauli"], default="ham")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("compile", help="Hamiltonian or program -> routed physical circuit")
    p.add_argument("input", help="model:NAME[:SIZE], .ham, Pauli file or .cvdvqasm")
    _add_common(p)
    _add_output(p)
    p.add_argument("--ir-only", action="store_true", help="stop after level 1 and print the IR")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("route", help="route a logical .cvdvqasm program")
    p.add_argument("input")
    _add_common(p)
    _add_output(p)
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("verify", help="check a compilation against the matrix oracle")
    p.add_argument("input", help="Hamiltonian input, or a logical .cvdvqasm with --physical")
    p.add_argument("--physical", help="routed circuit to compare with a logical program")
    _add_common(p, routing=False)
    p.add_argument("--cutoff", type=int, help="Fock cutoff (default 16)")
    p.add_argument("--keep", type=int, help="projection: qumode levels below this (default 8)")
    p.add_argument("--tol", type=float, default=0.05)
    p.add_argument("--max-dim", dest="max_dim", type=int, default=4096)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("hitrate", help="per-rule hit rates over bundled models")
    p.add_argument("models", nargs="*", metavar="MODEL", help=f"any of {', '.join(MODEL_ORDER)}")
    p.add_argument("--size", type=int)
    _add_common(p, routing=False)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_hitrate)

    p = sub.add_parser("bench", help="compare TSP solvers and floating qubits")
    p.add_argument("inputs", nargs="*", help="Pauli files, .ham files or model:NAME[:SIZE]")
    _add_common(p)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"hybridc: {e}", file=sys.stderr)
        return e.code
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
