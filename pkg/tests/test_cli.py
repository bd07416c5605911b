import csv
import io as stdio
import json
import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given

from grounded_spectra import io
from grounded_spectra.cli import main
from grounded_spectra.graph import broom_pair, broom_tree, build_graph, path_graph, star_graph

from conftest import connected_graphs


def write_graph(tmp_path, g, name="g.txt"):
    path = tmp_path / name
    path.write_text(io.format_edge_list(g))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# --- file formats -----------------------------------------------------------

def test_parse_edge_list_with_comments():
    g = io.parse_edge_list("# a path\n3 2\n\n0 1\n# middle\n1 2\n")
    assert g.edges == ((0, 1), (1, 2))


@pytest.mark.parametrize(
    "text, line",
    [
        ("3 2\n0 1\n1 x\n", 3),
        ("3 2\n0 1\n1 5\n", 3),
        ("3 2\n0 0\n1 2\n", 2),
        ("3 1 7\n", 1),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(io.ParseError, match=f"line {line}"):
        io.parse_edge_list(text)


def test_parse_edge_count_mismatch():
    with pytest.raises(io.ParseError, match="declares 3 edges"):
        io.parse_edge_list("3 3\n0 1\n1 2\n")
    with pytest.raises(io.ParseError, match="header"):
        io.parse_edge_list("# nothing\n")


@given(connected_graphs(max_n=12))
def test_edge_list_round_trip(g):
    assert io.parse_edge_list(io.format_edge_list(g)).edges == g.edges


@given(connected_graphs(max_n=12))
def test_json_round_trip(g):
    back = io.graph_from_dict(json.loads(json.dumps(io.graph_to_dict(g))))
    assert back.edges == g.edges and back.n == g.n


def test_json_graph_errors(tmp_path):
    with pytest.raises(io.ParseError):
        io.graph_from_dict({"n": 3})
    with pytest.raises(io.ParseError, match="degrees"):
        io.graph_from_dict({"n": 2, "edges": [[0, 1]], "degrees": [2, 1]})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(io.ParseError, match="line 1"):
        io.load_graph(bad)
    with pytest.raises(io.ParseError, match="cannot read"):
        io.load_graph(tmp_path / "missing.txt")


def test_jsonable_replaces_non_finite():
    assert io.jsonable({"a": np.float64(np.inf), "b": [np.int64(3), np.nan]}) == {"a": None, "b": [3, None]}


def test_trajectory_csv_header():
    text = io.trajectory_csv(np.array([0.0, 0.1]), np.array([[1.0, 2.0], [3.0, 4.0]]))
    rows = list(csv.reader(stdio.StringIO(text)))
    assert rows[0] == ["t", "x_1", "x_2"] and float(rows[2][2]) == 4.0


# --- analyze ----------------------------------------------------------------

def test_analyze_broom_pair_gray(tmp_path, capsys):
    path = write_graph(tmp_path, broom_pair())
    code, out, _ = run(capsys, "analyze", "--graph", path, "--leaders", "3", "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert d["lambda_max"] == pytest.approx(3.7321, abs=1e-4)
    assert d["delay_threshold"] == pytest.approx(0.4209, abs=1e-4)
    assert d["certificates"]["delay_dominance"] is False


def test_analyze_path(tmp_path, capsys):
    path = write_graph(tmp_path, path_graph(3))
    code, out, _ = run(capsys, "analyze", "--graph", path, "--leaders", "0", "--format", "json")
    d = json.loads(out)
    assert code == 0
    assert d["h2_disorder"] == pytest.approx(1.5)
    assert d["hinf_disorder"] == pytest.approx(2.618034, abs=1e-6)
    assert d["hinf_interval"]["inv_beta_min"] is None


def test_analyze_round_trip_is_bit_exact(tmp_path, capsys):
    path = write_graph(tmp_path, broom_tree(30, 10))
    args = ("analyze", "--graph", path, "--leaders", "3,17", "--format", "json", "--seed", "7")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    d = json.loads(first)
    assert json.loads(io.dumps(d)) == d


def test_analyze_text_is_sorted(tmp_path, capsys):
    path = write_graph(tmp_path, path_graph(4))
    code, out, _ = run(capsys, "analyze", "--graph", path, "--leaders", "0", "--format", "text")
    keys = [line.split(":")[0] for line in out.splitlines() if not line.startswith(" ")]
    assert code == 0 and keys == sorted(keys)


def test_analyze_json_graph_input(tmp_path, capsys):
    path = tmp_path / "g.json"
    path.write_text(json.dumps(io.graph_to_dict(star_graph(4))))
    code, out, _ = run(capsys, "analyze", "--graph", str(path), "--leaders", "0", "--format", "json")
    assert code == 0 and json.loads(out)["delay_threshold"] == pytest.approx(math.pi / 2)


def test_analyze_writes_out_file(tmp_path, capsys):
    path = write_graph(tmp_path, path_graph(3))
    out_path = tmp_path / "report.json"
    code, out, _ = run(capsys, "analyze", "--graph", path, "--leaders", "1", "--out", str(out_path))
    assert code == 0 and out == ""
    assert json.loads(out_path.read_text())["lambda1"] == pytest.approx(1.0)


# --- exit codes -------------------------------------------------------------

def test_empty_leaders_is_usage_error(tmp_path, capsys):
    path = write_graph(tmp_path, path_graph(3))
    code, _, err = run(capsys, "analyze", "--graph", path, "--leaders", "")
    assert code == 2 and "leaders" in err


def test_missing_subcommand_is_usage_error(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "analyze")[0] == 2


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("3 2\n0 1\n1 q\n")
    code, _, err = run(capsys, "analyze", "--graph", str(bad), "--leaders", "0")
    assert code == 3 and "line 3" in err


def test_disconnected_graph_exit_code(tmp_path, capsys):
    path = write_graph(tmp_path, build_graph(4, [(0, 1), (2, 3)]))
    code, _, err = run(capsys, "analyze", "--graph", path, "--leaders", "0")
    assert code == 3 and "disconnected" in err


def test_numerical_failure_exit_code(tmp_path, capsys, monkeypatch):
    from grounded_spectra import cli
    from grounded_spectra.numerics import ConvergenceError

    def boom(*a, **k):
        raise ConvergenceError("forced")

    monkeypatch.setattr(cli, "robustness_report", boom)
    path = write_graph(tmp_path, path_graph(3))
    code, _, err = run(capsys, "analyze", "--graph", path, "--leaders", "0")
    assert code == 4 and "forced" in err


# --- select-leader ----------------------------------------------------------

def test_select_leader_star(tmp_path, capsys):
    path = write_graph(tmp_path, star_graph(5))
    code, out, _ = run(capsys, "select-leader", "--graph", path, "--metric", "all", "--format", "json")
    d = json.loads(out)
    assert code == 0
    assert {w["vertex"] for w in d["winners"].values()} == {0}
    assert d["winners"]["h2"]["certificates"]["simultaneous"] is True
    assert len(d["ranking"]) == 6


def test_select_leader_broom_csv(tmp_path, capsys):
    path = write_graph(tmp_path, broom_tree(9, 4))
    code, out, _ = run(capsys, "select-leader", "--graph", path, "--format", "csv")
    rows = list(csv.DictReader(stdio.StringIO(out)))
    assert code == 0 and len(rows) == 9
    assert "best_h2" in rows[4]["flags"]


def test_select_leader_single_metric(tmp_path, capsys):
    path = write_graph(tmp_path, broom_pair())
    code, out, _ = run(capsys, "select-leader", "--graph", path, "--metric", "delay", "--format", "json")
    d = json.loads(out)
    assert list(d["winners"]) == ["delay"] and d["winners"]["delay"]["vertex"] == 3


def test_select_leader_cap(tmp_path, capsys):
    path = write_graph(tmp_path, path_graph(30))
    code, _, err = run(capsys, "select-leader", "--graph", path, "--cap", "10")
    assert code == 2 and "--cap" in err


# --- design / simulate / bracket / experiment -------------------------------

def test_design(capsys):
    code, out, _ = run(capsys, "design", "--followers", "4", "--n-leaders", "2", "--beta", "2", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["lambda1"] == pytest.approx(2) and d["lambda_max"] == pytest.approx(2)
    assert d["grounded_laplacian_diagonal"] is True


def test_design_infeasible(capsys):
    assert run(capsys, "design", "--followers", "4", "--n-leaders", "2", "--beta", "3")[0] == 2


def test_simulate_csv(tmp_path, capsys):
    path = write_graph(tmp_path, path_graph(3))
    code, out, _ = run(capsys, "simulate", "--graph", path, "--leaders", "1", "--tau", "0.5",
                       "--horizon", "10", "--format", "csv", "--stride", "50")
    rows = list(csv.reader(stdio.StringIO(out)))
    assert code == 0 and rows[0] == ["t", "x_1", "x_2"] and len(rows) > 10


def test_simulate_json_summary(tmp_path, capsys):
    path = write_graph(tmp_path, path_graph(4))
    code, out, _ = run(capsys, "simulate", "--graph", path, "--leaders", "0,3", "--leader-states", "0,1",
                       "--horizon", "40", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["classification"] == "converged"
    assert d["equilibrium"] == pytest.approx([1 / 3, 2 / 3])


def test_simulate_bad_leader_states(tmp_path, capsys):
    path = write_graph(tmp_path, path_graph(4))
    assert run(capsys, "simulate", "--graph", path, "--leaders", "0", "--leader-states", "1,2")[0] == 2


def test_bracket_identity(tmp_path, capsys):
    path = write_graph(tmp_path, path_graph(3))
    code, out, _ = run(capsys, "bracket", "--graph", path, "--leaders", "1", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["resolved"] and d["contains_analytic"]
    assert d["analytic"] == pytest.approx(math.pi / 2)


def test_experiment_manifest(tmp_path, capsys):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"kind": "er", "metric": "h2", "p": 0.3, "sizes": [40, 60], "trials": 3, "n_leaders": 2}))
    code, out, err = run(capsys, "experiment", "--manifest", str(m), "--format", "csv")
    rows = list(csv.DictReader(stdio.StringIO(out)))
    assert code == 0 and len(rows) == 6
    assert list(rows[0]) == ["n", "trial", "h2", "hinf", "tau_hat", "target", "ratio"]
    assert [line.split()[0] for line in err.splitlines()] == ["n=40", "n=60"]


def test_experiment_bad_manifest(tmp_path, capsys):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"kind": "er", "metric": "h2", "sizes": [40], "trials": 3, "n_leaders": 2}))
    code, _, err = run(capsys, "experiment", "--manifest", str(m))
    assert code == 3 and "p" in err


def test_experiment_seed_flag_is_deterministic(tmp_path, capsys):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"kind": "er", "metric": "hinf", "p": 0.3, "sizes": [40], "trials": 2, "n_leaders": 1}))
    a = run(capsys, "experiment", "--manifest", str(m), "--seed", "5", "--format", "json")[1]
    b = run(capsys, "experiment", "--manifest", str(m), "--seed", "5", "--format", "json")[1]
    c = run(capsys, "experiment", "--manifest", str(m), "--seed", "6", "--format", "json")[1]
    assert a == b != c


def test_module_entry_point_defaults_to_json_when_piped(tmp_path):
    path = write_graph(tmp_path, path_graph(3))
    proc = subprocess.run(
        [sys.executable, "-m", "grounded_spectra", "analyze", "--graph", path, "--leaders", "0"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["h2_disorder"] == pytest.approx(1.5)
