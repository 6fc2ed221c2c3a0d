import pytest

from hybridc.config import build_config, load_config, parse_config_text


def test_parse_and_build(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# sample\ntrotter_steps = 3\ntsp = threshold-accepting  # alias\n"
                 "pauli-rank = min-total-depth\nfloating = off\nrule_enable = 1-4, 14,15,16\n"
                 "map = grid:2x3\ninitial_layout = 2,0\n")
    cfg = build_config(load_config(f))
    assert cfg.decompose.trotter_steps == 3
    assert cfg.decompose.rule_enable == frozenset({1, 2, 3, 4, 14, 15, 16})
    assert (cfg.route.tsp, cfg.route.pauli_rank, cfg.route.floating) == ("ta", "depth", None)
    assert cfg.route.initial_layout == (2, 0)
    assert cfg.map == "grid:2x3"


def test_overrides_win_and_none_is_unset():
    cfg = build_config({"seed": "3", "tsp": "ta"}, seed=7, tsp=None, floating="2.5")
    assert (cfg.route.seed, cfg.route.tsp, cfg.route.floating) == (7, "ta", 2.5)


def test_as_dict_is_flat():
    d = build_config({}).as_dict()
    assert d["rule_enable"] == list(range(1, 17))
    assert {"time", "cutoff", "keep", "tsp", "trotter_steps"} <= set(d)


@pytest.mark.parametrize("values", [
    {"bogus": "1"}, {"rule_enable": "0,1"}, {"tsp": "greedy"}, {"trotter_steps": "x"},
])
def test_bad_values(values):
    with pytest.raises(ValueError):
        build_config(values)


def test_bad_syntax():
    with pytest.raises(ValueError):
        parse_config_text("no equals sign here\n")
