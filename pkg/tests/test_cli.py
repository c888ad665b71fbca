import csv
import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from hypconc.cli import Config, ConfigError, main, run
from hypconc.report import COLUMNS

CONFIGS = Path(__file__).resolve().parents[1] / "demos" / "configs"


def cfg(d):
    return Config(json.dumps(d, indent=2))


def test_drift_config(tmp_path):
    code = main(["run", "--config", str(CONFIGS / "drift_f2.json"), "--out", str(tmp_path)])
    assert code == 0
    env = json.loads((tmp_path / "drift.json").read_text())
    ell = env["results"]["drift"][0]["ell_hat"]
    assert 0.495 <= ell <= 0.505
    assert {"config", "seed", "versions", "wall_time_s"} <= set(env)


def test_bounds_table_lambda_one(tmp_path):
    code = main(["run", "--config", str(CONFIGS / "bounds_lambda1.json"), "--out", str(tmp_path)])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "bounds-table.csv").read_text())))
    assert rows and all(r["bound"] == "1.0" and r["vacuous"] == "true" for r in rows)
    assert all("infinite" in r["assumptions"] for r in rows)
    env = json.loads((tmp_path / "bounds-table.json").read_text())
    assert env["results"]["D"] == "inf" and env["results"]["C"] == "inf"


def test_csv_columns_and_byte_identical(tmp_path):
    c = {"experiment": "tail", "model": {"kind": "tree", "rank": 2}, "measure": {"srw": True},
         "n": [100], "t": [0.1, 0.2], "trials": 2000, "c": 0.75, "seed": 3}
    _, a, _ = run(cfg(c))
    _, b, _ = run(cfg(c), threads=1)
    assert a == b
    assert a.splitlines()[0] == ",".join(COLUMNS)
    for r in csv.DictReader(io.StringIO(a)):
        assert r["bound_kind"] in ("c-form", "D-form") and r["assumptions"]
    _, other, _ = run(cfg(c), seed=4)
    assert other != a


def test_thread_count_does_not_change_output(tmp_path):
    # a fresh interpreter with a different numba pool size
    out = tmp_path / "t3"
    env = dict(os.environ, NUMBA_NUM_THREADS="3")
    subprocess.run([sys.executable, "-m", "hypconc.cli", "run", "--config", str(CONFIGS / "tail_f2.json"),
                    "--out", str(out), "--threads", "3"], check=True, env=env, capture_output=True)
    main(["run", "--config", str(CONFIGS / "tail_f2.json"), "--out", str(tmp_path / "t1"), "--threads", "1"])
    assert (out / "tail.csv").read_bytes() == (tmp_path / "t1" / "tail.csv").read_bytes()


def test_config_errors_report_lines(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "experiment": "drift",\n  "seed": 0,\n  "n": ,\n}\n')
    assert main(["run", "--config", str(p)]) == 2
    assert "line 4" in capsys.readouterr().err
    p.write_text('{\n  "experiment": "drift",\n  "model": {"kind": "tree"},\n  "n": [],\n  "seed": 0\n}\n')
    assert main(["run", "--config", str(p)]) == 2
    err = capsys.readouterr().err
    assert "line 4" in err and "nonempty" in err
    with pytest.raises(ConfigError):
        run(cfg({"experiment": "sorting", "seed": 0}))
    with pytest.raises(ConfigError):
        run(cfg({"experiment": "drift", "model": {"kind": "tree"}, "measure": {"srw": True}, "n": [10]}))


def test_unknown_suite(capsys):
    assert main(["acceptance", "nosuch"]) == 2
    err = capsys.readouterr().err
    assert "kesten" in err and "azuma" in err


def test_acceptance_verb_runs_suite(capsys):
    assert main(["acceptance", "drift-bound"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_list_models(capsys):
    assert main(["list-models"]) == 0
    out = capsys.readouterr().out
    for word in ("tree", "plane", "matrix", "kesten", "bounds-table"):
        assert word in out


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.json")))
def test_demo_configs_run(name, tmp_path):
    assert main(["run", "--config", str(CONFIGS / name), "--out", str(tmp_path)]) == 0
