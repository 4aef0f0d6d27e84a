import csv
import io
import json

import pytest

from dimers.cli import DEFAULT_SEED, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _csv_rows(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_exact_rows(capsys):
    code, out, _ = run(capsys, "exact", "--n", "10")
    assert code == 0
    assert out.startswith("# format_version=1\n")
    rows = _csv_rows(out)
    assert [int(r["n"]) for r in rows] == list(range(11))
    assert rows[4]["e_n"] == "2/3" and rows[4]["var_n"] == "8/9"


def test_exact_with_mgf_column(capsys):
    code, out, _ = run(capsys, "exact", "--n", "4", "--lambda", "1", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["rows"][1]["f_n"] == pytest.approx(2.718281828459045)


def test_oracle_distribution(capsys):
    code, out, _ = run(capsys, "oracle", "--graph", "path:4")
    doc = json.loads(out)
    assert code == 0
    assert doc["distribution"] == {"0": "2/3", "2": "1/3"}
    assert doc["format_version"] == 1 and doc["config"]["graph"] == "path:4"


def test_simulate_is_byte_identical(tmp_path, capsys):
    args = ["simulate", "--graph", "lattice:2:64:periodic", "--reps", "100", "--seed", "7"]
    outs = []
    for threads in ("1", "1", "3"):
        path = tmp_path / f"out{len(outs)}.csv"
        assert main(args + ["--threads", threads, "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    assert b'"seed": 7' in outs[0]


def test_simulate_dump_config(tmp_path, capsys):
    dump = tmp_path / "c.json"
    code, _, _ = run(capsys, "simulate", "--graph", "path:10", "--reps", "2",
                     "--dump-config", str(dump))
    doc = json.loads(dump.read_text())
    assert code == 0 and doc["seed"] == DEFAULT_SEED
    assert len(doc["placed_edges"]) * 2 + len(doc["monomer_vertices"]) == 10


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\ngraph = path:50\nreps = 5\nseed = 3\nformat = json\n")
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--reps", "4")
    doc = json.loads(out)
    assert code == 0
    assert doc["config"] == {"dump_config": None, "format": "json", "graph": "path:50",
                             "reps": 4, "seed": 3}
    assert len(doc["monomer_counts"]) == 4


@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["simulate", "--bogus"],
    ["simulate", "--graph", "lattice:2:8:twisted"],
    ["simulate", "--seed", "-1"],
    ["clt", "--reps", "10"],
    ["covariance", "--graph", "lattice:2:16:periodic", "--max-sep", "9"],
    ["oracle", "--graph", "path:40"],
    ["cages", "--graph", "path:10"],
    ["bound", "--eps", "0"],
])
def test_validation_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    assert "usage:" in err


def test_bad_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("frobnicate = 1\n")
    code, _, err = run(capsys, "simulate", "--config", str(cfg))
    assert code == 2 and "frobnicate" in err


def test_runtime_error_exit_1(tmp_path, capsys):
    code, _, err = run(capsys, "simulate", "--graph", "path:5", "--reps", "2",
                       "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == 1 and err


def test_small_runs_of_every_estimator(capsys):
    for argv in (["covariance", "--graph", "lattice:2:16:periodic", "--reps", "20", "--max-sep", "3"],
                 ["clt", "--graph", "lattice:2:16:periodic", "--reps", "500"],
                 ["cages", "--graph", "lattice:2:16:periodic", "--reps", "20"],
                 ["bound", "--n", "5000", "--eps", "0.5", "--reps", "20"],
                 ["diagnose", "--graph", "lattice:2:16:free", "--reps", "5"]):
        code, out, err = run(capsys, *argv)
        assert code == 0, (argv, err)
        assert "format_version" in out


def test_report_markdown(capsys):
    code, out, _ = run(capsys, "report", "--n", "200", "--mc-n", "100", "--reps", "200")
    assert code == 0
    assert "| 4 | 2/3 | 2/3 | 0 | 8/9 | 8/9 |" in out
    assert out.startswith("<!-- format_version=1")
