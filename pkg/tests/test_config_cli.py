import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from cocyclelab import BudgetError, ConfigError
from cocyclelab.cli import main
from cocyclelab.config import parse_config, parse_override
from cocyclelab.runner import fmt

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

MINIMAL = """
[family]
kind = "expanding_affine"
N = 2

[cocycle]
kind = "constant"
d = 2
matrix = [[1.0, 0.0], [0.0, 1.0]]

[experiment]
kind = "lambda-fixed"
m_max = 100
"""

SINGULAR_SECOND = """
output = "{out}"

[family]
kind = "expanding_affine"
N = 2

[cocycle]
kind = "parametric"
d = 1
entries = [["x"]]

[[experiment]]
kind = "birkhoff"
n_max = 4
phi = "x"

[[experiment]]
kind = "lambda-fixed"
x = 0.0
m_max = 10
"""


def read_rows(path):
    lines = Path(path).read_text().splitlines()
    assert lines[0].startswith("#")
    header = lines[1].split(",")
    return header, [line.split(",") for line in lines[2:]]


def column(path, name):
    header, rows = read_rows(path)
    i = header.index(name)
    return np.array([float(r[i]) for r in rows])


def test_minimal_config():
    cfg = parse_config(MINIMAL)
    assert cfg.family["N"] == 2 and cfg.seed == 0 and cfg.threads == 1
    assert cfg.experiments[0]["kind"] == "lambda-fixed"


def test_zero_alphabet_names_constraint():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL.replace("N = 2", "N = 0"))
    assert any("N ≥ 1" in e for e in exc.value.errors)


def test_all_errors_reported_at_once():
    bad = MINIMAL.replace("N = 2", "N = 0").replace("m_max = 100", "m_max = 1\nstrid = 3")
    with pytest.raises(ConfigError) as exc:
        parse_config(bad)
    text = " | ".join(exc.value.errors)
    assert "family.N" in text and "m_max" in text and "strid" in text


def test_unknown_key_is_an_error():
    with pytest.raises(ConfigError) as exc:
        parse_config("colour = 'red'\n" + MINIMAL)
    assert any("colour" in e for e in exc.value.errors)


def test_syntax_error_has_line_number():
    with pytest.raises(ConfigError) as exc:
        parse_config("seed = 1\n[family\nkind = 2\n")
    assert "line 2" in str(exc.value)


def test_budget_is_checked_before_running():
    text = MINIMAL.replace('kind = "lambda-fixed"\nm_max = 100', 'kind = "branch-exact"\nn_max = 30')
    with pytest.raises(BudgetError):
        parse_config(text)
    parse_config(text.replace("n_max = 30", "n_max = 12"))
    with pytest.raises(BudgetError):
        parse_config(text.replace("n_max = 30", "n_max = 12"), budget=1000)


def test_override_precedence():
    cfg = parse_config("seed = 5\n" + MINIMAL, {"seed": 9, "experiment.m_max": 20})
    assert cfg.seed == 9 and cfg.experiments[0]["m_max"] == 20
    assert parse_override("experiment.x=0.25") == ("experiment.x", 0.25)
    assert parse_override("output=out/a") == ("output", "out/a")


def test_hash_tracks_semantic_fields_only():
    base = parse_config(MINIMAL)
    assert parse_config(MINIMAL, {"output": "elsewhere", "threads": 4}).config_hash() == base.config_hash()
    for key, value in [("seed", 1), ("experiment.m_max", 101), ("naive", True), ("family.N", 3)]:
        assert parse_config(MINIMAL, {key: value}).config_hash() != base.config_hash()


def test_fmt_round_trips():
    for v in (math.pi, -1e-300, 1 / 3, 0.0, 2.0**60):
        assert float(fmt(v)) == v
    assert fmt(float("-inf")) == "-inf"


def test_lambda_fixed_rows_equal_log2(tmp_path):
    out = tmp_path / "lf"
    assert main(["lambda-fixed", "--config", str(CONFIGS / "lambda_fixed_diag.toml"), "--out", str(out)]) == 0
    lp = column(out / "lambda-fixed.csv", "lambda_plus[per_time]")
    assert len(lp) == 100
    assert np.all(np.abs(lp - math.log(2)) < 1e-12)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["log_base"] == "e"
    assert manifest["experiments"][0]["verdicts"]["lambda_plus"]["kind"] == "converged"


@pytest.mark.parametrize("name", ["branch_mc.toml", "kingman.toml", "all.toml"])
def test_rerun_is_byte_identical(tmp_path, name):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["run", "--config", str(CONFIGS / name), "--out", str(out), "--threads", "2"]) == 0
    csvs = sorted(p.name for p in a.glob("*.csv"))
    assert csvs
    for n in csvs:
        assert (a / n).read_bytes() == (b / n).read_bytes()


def test_naive_flag_matches_tree(tmp_path):
    tree, naive = tmp_path / "tree", tmp_path / "naive"
    cfg = str(CONFIGS / "branch_exact.toml")
    assert main(["branch-exact", "--config", cfg, "--out", str(tree)]) == 0
    assert main(["branch-exact", "--config", cfg, "--out", str(naive), "--naive"]) == 0
    ht, rt = read_rows(tree / "branch-exact.csv")
    hn, rn = read_rows(naive / "branch-exact.csv")
    assert ht == hn and len(rt) == len(rn) == 10
    for a, b in zip(rt, rn):
        for x, y in zip(a, b):
            try:
                fx, fy = float(x), float(y)
            except ValueError:
                assert x == y
                continue
            assert abs(fx - fy) <= 1e-9 * max(abs(fx), abs(fy), 1e-300)


@pytest.mark.parametrize("name,rows", [
    ("branch_exact.toml", 10), ("birkhoff.toml", None), ("fekete.toml", None), ("branch_mc.toml", None),
])
def test_row_count_matches_index_range(tmp_path, name, rows):
    assert main(["run", "--config", str(CONFIGS / name), "--out", str(tmp_path)]) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    for entry in manifest["experiments"]:
        header, body = read_rows(tmp_path / entry["csv"])
        assert len(body) == (rows or entry["rows"])
        assert all("[" in h for h in header if h.startswith(("Lambda", "lambda", "birkhoff", "ratio")))


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text(MINIMAL.replace("N = 2", "N = 0"))
    assert main(["lambda-fixed", "--config", str(bad)]) == 2
    assert main(["branch-exact", "--config", str(CONFIGS / "branch_exact.toml"),
                 "--out", str(tmp_path / "o"), "--set", "experiment.n_max=40"]) == 3
    assert main(["birkhoff", "--config", str(CONFIGS / "branch_exact.toml")]) == 2
    sing = tmp_path / "sing.toml"
    sing.write_text(SINGULAR_SECOND.format(out=tmp_path / "s"))
    assert main(["run", "--config", str(sing)]) == 4


def test_failed_run_leaves_no_partial_output(tmp_path):
    out = tmp_path / "s"
    sing = tmp_path / "sing.toml"
    sing.write_text(SINGULAR_SECOND.format(out=out))
    assert main(["run", "--config", str(sing)]) == 4
    assert not out.exists()
    keep = tmp_path / "keep"
    keep.mkdir()
    (keep / "note.txt").write_text("mine")
    assert main(["run", "--config", str(sing), "--out", str(keep)]) == 4
    assert [p.name for p in keep.iterdir()] == ["note.txt"]


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "cocyclelab", "fekete", "--config",
                          str(CONFIGS / "fekete.toml"), "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "manifest.json").exists()
