from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from precurse.cli import build_parser, main
from precurse.holo import CATALAN, Recurrence


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_b_with_dfs_check(capsys):
    code, out, _ = run(capsys, "b", "--max", "30", "--check", "dfs")
    assert code == 0
    table = rows(out)
    assert len(table) == 31
    assert all(r["agree"] == "true" for r in table)
    assert [int(r["n"]) for r in table if r["b_closed"] == "1"] == [7, 15, 23, 24]


def test_paths_length_seven(capsys):
    code, out, _ = run(capsys, "paths", "--length", "7")
    assert code == 0
    table = rows(out)
    assert len(table) == 7 and {r["path"] for r in table} == {"0"}
    assert table[0]["source"] == "s1" and table[-1]["target"] == "s8"
    assert table[-1]["omega_x"] == "" and table[-1]["omega_y"] == ""


def test_witness_correspondence(capsys):
    code, out, _ = run(capsys, "witness", "--check", "correspondence", "--max", "10")
    assert code == 0
    assert all(r["agree"] == "true" for r in rows(out))


def test_witness_mod4(capsys):
    code, out, _ = run(capsys, "witness", "--check", "mod4", "--max", "9")
    assert code == 0
    assert [r["search_mod4"] for r in rows(out)] == ["0"] * 5


def test_witness_sl4(capsys):
    code, out, _ = run(capsys, "witness", "--check", "sl4", "--element", "s1 0y")
    assert code == 0
    M = json.loads(out)
    assert all(isinstance(v, str) for row in M for v in row)
    assert M == [["1", "0", "0", "0"], ["2", "1", "0", "0"], ["0", "0", "5", "-8"], ["0", "0", "2", "-3"]]


def test_witness_injectivity(capsys):
    code, out, _ = run(capsys, "witness", "--check", "injectivity", "--max-len", "3")
    assert code == 0
    rep = json.loads(out)
    assert rep["injective"] and rep["homomorphism"]


def test_witness_egf_and_u2(capsys):
    code, out, _ = run(capsys, "witness", "--check", "egf", "--max", "6")
    assert code == 0
    assert rows(out)[2]["product_returns"] == "8"
    code, out, _ = run(capsys, "witness", "--check", "u2", "--max", "4")
    assert code == 0


def test_guess_from_csv(capsys, tmp_path):
    from math import comb

    path = tmp_path / "catalan.csv"
    path.write_text("index,value\n" + "".join(f"{n},{comb(2 * n, n) // (n + 1)}\n" for n in range(1, 31)))
    code, out, _ = run(capsys, "guess", "--input", str(path), "--max-order", "2", "--max-degree", "2")
    assert code == 0
    assert Recurrence.from_json(out).normalized() == CATALAN.recurrence


def test_guess_b_is_null(capsys):
    code, out, _ = run(capsys, "guess", "--fixture", "b", "--terms", "100")
    assert code == 0 and out.strip() == "null"


def test_eval_fixture_and_file(capsys, tmp_path):
    code, out, _ = run(capsys, "eval", "--fixture", "fragmented", "--count", "4")
    assert code == 0
    assert [r["value"] for r in rows(out)] == ["1", "3", "13", "73"]
    path = tmp_path / "rec.json"
    path.write_text(Recurrence.of((3,), (-1,)).to_json())
    code, out, _ = run(capsys, "eval", "--recurrence", str(path), "--seeds", "1", "--count", "3", "--mode", "rational")
    assert code == 0
    assert [r["value"] for r in rows(out)] == ["1/1", "1/3", "1/9"]


def test_eval_domain_error(capsys, tmp_path):
    path = tmp_path / "rec.json"
    path.write_text(Recurrence.of((3,), (-1,)).to_json())
    code, _, err = run(capsys, "eval", "--recurrence", str(path), "--seeds", "1", "--count", "3")
    assert code == 1
    assert "not an integer" in err


def test_forbidden(capsys):
    code, out, _ = run(capsys, "forbidden", "--fixture", "catalan", "--check-prefix", "100000")
    assert code == 0
    rep = json.loads(out)
    assert rep["v"] == "101101101101" and rep["first_occurrence"] is None


def test_complexity(capsys):
    code, out, _ = run(capsys, "complexity", "--source", "b", "--length", "40000", "--max-n", "10")
    assert code == 0
    assert all(r["factors_in_prefix"] == r["2^n"] for r in rows(out))


def test_walk(capsys):
    code, out, _ = run(capsys, "walk", "--steps", "8", "--check-symmetry")
    assert code == 0
    table = rows(out)
    assert [r["a_n"] for r in table[:3]] == ["1", "0", "6"]
    assert table[2]["p_n"] == "1/6"


def test_walk_budget_exit(capsys):
    code, _, err = run(capsys, "walk", "--steps", "12", "--ball-cap", "1000")
    assert code == 3
    assert "budget" in err


def test_fit_from_walk_csv(capsys, tmp_path):
    path = tmp_path / "walk.csv"
    assert main(["walk", "--steps", "18", "--output", str(path)]) == 0
    code, out, _ = run(capsys, "fit", "--input", str(path))
    assert code == 0
    assert {r["shape"] for r in rows(out)} == {"linear", "cube_root", "log"}


def test_usage_error():
    with pytest.raises(SystemExit) as e:
        main(["nonsense"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["witness"])
    assert e.value.code == 2


def test_every_subcommand_has_help():
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    assert set(sub.choices) == {"b", "paths", "witness", "guess", "eval", "forbidden", "complexity", "walk", "fit"}
    for name, p in sub.choices.items():
        assert p.description, name


def test_outputs_deterministic(tmp_path):
    outs = []
    for i in range(2):
        table, png = tmp_path / f"b{i}.csv", tmp_path / f"b{i}.png"
        assert main(["b", "--max", "60", "--output", str(table), "--plot", str(png)]) == 0
        outs.append((table.read_bytes(), png.read_bytes()))
    assert outs[0] == outs[1]
    assert outs[0][1][:8] == b"\x89PNG\r\n\x1a\n"


@pytest.mark.parametrize(
    "argv",
    [
        ["complexity", "--length", "4000", "--max-n", "8"],
        ["walk", "--steps", "16"],
        ["fit", "--steps", "16"],
    ],
)
def test_plots_written(tmp_path, argv):
    png = tmp_path / "out.png"
    assert main([*argv, "--output", str(tmp_path / "t.csv"), "--plot", str(png)]) == 0
    assert png.read_bytes()[:4] == b"\x89PNG"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "precurse", "b", "--max", "8"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "n,b_closed"
    assert res.stdout.splitlines()[8] == "7,1"
