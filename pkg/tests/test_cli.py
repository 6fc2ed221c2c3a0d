import json
import subprocess
import sys

import pytest

from hybridc import cli, qasm


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def logical(tmp_path):
    f = tmp_path / "prog.cvdvqasm"
    f.write_text("qubits 2;\nqumodes 3;\n"
                 "pauli(0.2) XZ;\nBS(0.3, 0.1) qm[0], qm[2];\nCD(0.1) q[1], qm[0];\nR(0.4) qm[1];\n")
    return f


def test_gen_formats(capsys, tmp_path):
    code, out, _ = run(capsys, "gen", "heisenberg", "--size", 4, "--format", "pauli")
    assert code == 0 and len(out.splitlines()) == 13
    code, out, _ = run(capsys, "gen", "kerr")
    assert code == 0 and "hamiltonian" in out
    code, _, err = run(capsys, "gen", "kerr", "--format", "pauli")
    assert code == cli.EXIT_USAGE and "qumode" in err


def test_compile_metrics_keys(capsys):
    code, out, _ = run(capsys, "compile", "model:heisenberg:4", "--emit", "metrics-json",
                       "--map", "grid:2x2", "--trotter-steps", 1)
    assert code == 0
    report = json.loads(out)
    assert {"one_op", "two_op", "depth", "duration", "swap_count", "compile_ms"} <= set(report)
    assert report["config.tsp"] == "christofides"


def test_compile_ir_only_roundtrips(capsys):
    code, out, _ = run(capsys, "compile", "model:kerr", "--ir-only", "--trotter-steps", 1)
    assert code == 0
    prog = qasm.parse(out)
    assert prog.nm == 1 and prog.nq == 1


def test_compile_from_files(capsys, tmp_path):
    pauli = tmp_path / "h.pauli"
    pauli.write_text("0.5 XXI\n-0.25 IZZ\n")
    code, out, _ = run(capsys, "compile", pauli, "--tsp", "ta", "--seed", 3)
    assert code == 0 and "// final qubit layout:" in out
    ham = tmp_path / "bh.ham"
    run(capsys, "gen", "bosehubbard", "--size", 2, "-o", ham)
    code, out, _ = run(capsys, "compile", ham, "--pauli-rank", "depth", "--floating", "off")
    assert code == 0 and qasm.parse(out).paulis() == []


def test_route_then_verify(capsys, tmp_path, logical):
    phys = tmp_path / "phys.cvdvqasm"
    code, _, _ = run(capsys, "route", logical, "--map", "grid:1x3", "-o", phys)
    assert code == 0
    code, out, _ = run(capsys, "verify", logical, "--physical", phys, "--cutoff", 10, "--keep", 2,
                       "--tol", 1e-8)
    assert code == 0 and "PASS" in out


def test_verify_catches_a_wrong_circuit(capsys, tmp_path, logical):
    phys = tmp_path / "phys.cvdvqasm"
    run(capsys, "route", logical, "--map", "grid:1x3", "-o", phys)
    text = phys.read_text().replace("R(0.4", "R(0.5")
    phys.write_text(text)
    code, out, _ = run(capsys, "verify", logical, "--physical", phys, "--cutoff", 10, "--keep", 2,
                       "--tol", 1e-8)
    assert code == cli.EXIT_VERIFY and "FAIL" in out


def test_verify_hamiltonian(capsys):
    code, out, _ = run(capsys, "verify", "model:heisenberg:3", "--trotter-steps", 8, "--time", 0.2,
                       "--tol", 0.01)
    assert code == 0 and "PASS" in out


def test_verify_dimension_guard(capsys):
    code, _, err = run(capsys, "verify", "model:bosehubbard:4", "--max-dim", 100)
    assert code == cli.EXIT_USAGE and "max-dim" in err


def test_hitrate_json(capsys):
    code, out, _ = run(capsys, "hitrate", "--json", "--size", 3)
    assert code == 0
    data = json.loads(out)
    assert data["success_counts"]["3"] == 0
    assert data["success_counts"]["14"] == data["success_counts"]["15"]


def test_bench_json(capsys):
    code, out, _ = run(capsys, "bench", "model:heisenberg:4", "--map", "grid:2x2", "--json", "--jobs", 2)
    assert code == 0
    (row,) = json.loads(out)
    assert {"christofides.depth", "ta.depth.delta_pct", "floating.duration"} <= set(row)


def test_same_seed_is_byte_identical(capsys, tmp_path):
    argv = ["compile", "model:evc:3", "--tsp", "ta", "--seed", 5, "--map", "grid:2x3"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]
    bench = ["bench", "model:heisenberg:5", "--json", "--seed", 2]
    assert run(capsys, *bench)[1] == run(capsys, *bench)[1]


def test_metrics_identical_except_wall_clock(capsys):
    argv = ["compile", "model:heisenberg:4", "--emit", "metrics-json", "--seed", 1]
    a, b = (json.loads(run(capsys, *argv)[1]) for _ in range(2))
    a.pop("compile_ms"), b.pop("compile_ms")
    assert a == b


@pytest.mark.parametrize("argv,code", [
    (["compile", "does-not-exist.pauli"], cli.EXIT_IO),
    (["route", "BAD"], cli.EXIT_IO),
    (["compile", "model:nosuch"], cli.EXIT_USAGE),
])
def test_error_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_parse_error_code(capsys, tmp_path):
    f = tmp_path / "bad.cvdvqasm"
    f.write_text("FOO q[0];\n")
    code, _, err = run(capsys, "route", f)
    assert code == cli.EXIT_PARSE and "line 1, col 1" in err


def test_decompose_error_code(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("rule_enable = 1-14\n")
    assert run(capsys, "compile", "model:heisenberg:3", "--config", cfg)[0] == cli.EXIT_DECOMPOSE


def test_route_error_code(capsys, logical):
    assert run(capsys, "route", logical, "--map", "grid:1x2")[0] == cli.EXIT_ROUTE


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as e:
        cli.main(["compile", "x", "--tsp", "greedy"])
    assert e.value.code == 2


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "hybridc.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("hybridc")
