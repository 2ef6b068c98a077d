import json
import math
import os
import subprocess
import sys

import pytest

from dftlab.cli import main
from dftlab.config import ConfigError, NGrid, RunConfig, TMode, parse_config
from dftlab.distributions import ScaledFamily, SymmetricPareto
from dftlab.runner import MANIFEST, report_lines

ORACLE_CFG = {
    "distribution": {"kind": "Rademacher"},
    "p": 1.5,
    "r": 1.2,
    "epsilon": 1.0,
    "t_mode": {"mode": "fixed", "values": [0.0, 1.0]},
    "n_grid": {"values": [2, 4]},
    "reps": 2000,
    "master_seed": 5,
    "suites": ["oracle"],
    "options": {"oracle_configs": 4},
}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


class TestConfig:
    def test_round_trip(self, tmp_path):
        cfg = RunConfig(
            ScaledFamily(SymmetricPareto(1.8), "power", 0.25),
            1.5, 1.2, 0.5,
            TMode("random", count=3, seed=9),
            NGrid(n0=4, gamma=2.0, points=6),
            1000, 2**63 + 5, ("rates", "bounds"), "out", {"dense_head": 32},
        )
        assert parse_config(json.loads(cfg.to_json())) == cfg

    @pytest.mark.parametrize(
        "patch,field",
        [
            ({"p": 2.5}, "p"),
            ({"r": 1.7}, "r"),
            ({"epsilon": 0}, "epsilon"),
            ({"reps": 10}, "reps"),
            ({"suites": ["oracle", "nope"]}, "suites[1]"),
            ({"t_mode": {"mode": "fixed", "values": [4.0]}}, "t_mode.values[0]"),
            ({"n_grid": {"values": [4, 2]}}, "n_grid.values"),
            ({"n_grid": {"n0": 4, "gamma": 1.0, "points": 3}}, "n_grid"),
            ({"master_seed": -1}, "master_seed"),
            ({"options": {"bogus": 1}}, "options.bogus"),
            ({"distribution": {"kind": "Cauchy"}}, "distribution"),
        ],
    )
    def test_field_paths(self, patch, field):
        with pytest.raises(ConfigError) as exc:
            parse_config({**ORACLE_CFG, **patch})
        assert exc.value.field == field

    def test_random_t_in_range(self):
        ts = TMode("random", count=1000, seed=3).resolve()
        assert all(-math.pi <= t < math.pi for t in ts)


class TestCommands:
    def test_minimal_oracle_run(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert main(["run", "--config", write(tmp_path, ORACLE_CFG), "--output", str(out)]) == 0
        man = json.loads((out / MANIFEST).read_text())
        assert [f["path"] for f in man["files"]] == ["oracle.csv"]
        assert main(["report", str(out)]) == 0
        assert "oracle:" in capsys.readouterr().out

    def test_invalid_p(self, tmp_path, capsys):
        rc = main(["run", "--config", write(tmp_path, {**ORACLE_CFG, "p": 2.5})])
        assert rc == 2
        assert "'p'" in capsys.readouterr().err

    def test_validate(self, tmp_path):
        assert main(["validate", "--config", write(tmp_path, ORACLE_CFG)]) == 0
        assert main(["validate", "--config", str(tmp_path / "missing.json")]) == 2

    def test_missing_artifact(self, tmp_path):
        out = tmp_path / "o"
        main(["run", "--config", write(tmp_path, ORACLE_CFG), "--output", str(out)])
        (out / "oracle.csv").unlink()
        assert main(["report", str(out)]) == 3

    def test_tampered_artifact(self, tmp_path):
        out = tmp_path / "o"
        main(["run", "--config", write(tmp_path, ORACLE_CFG), "--output", str(out)])
        with open(out / "oracle.csv", "a") as fh:
            fh.write("x\n")
        assert main(["report", str(out)]) == 3

    def test_no_manifest(self, tmp_path):
        assert main(["report", str(tmp_path)]) == 3

    def test_empty_suites(self, tmp_path):
        out = tmp_path / "e"
        assert main(["run", "--config", write(tmp_path, {**ORACLE_CFG, "suites": []}), "--output", str(out)]) == 0
        assert report_lines(out) == ["no suites executed"]

    def test_oracle_rejects_pareto(self, tmp_path):
        cfg = {**ORACLE_CFG, "distribution": {"kind": "SymmetricPareto", "alpha": 1.8}}
        assert main(["run", "--config", write(tmp_path, cfg), "--output", str(tmp_path / "x")]) == 2

    def test_seed_override_and_determinism(self, tmp_path):
        path = write(tmp_path, ORACLE_CFG)
        for d, seed in (("a", "11"), ("b", "11"), ("c", "12")):
            main(["run", "--config", path, "--output", str(tmp_path / d), "--seed", seed])
        a, b, c = ((tmp_path / d / "oracle.csv").read_bytes() for d in "abc")
        assert a == b and a != c

    def test_output_precedence(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("DFTLAB_OUTPUT_DIR", str(tmp_path / "env"))
        path = write(tmp_path, ORACLE_CFG)
        main(["run", "--config", path])
        assert (tmp_path / "env" / MANIFEST).exists()
        path = write(tmp_path, {**ORACLE_CFG, "output_dir": str(tmp_path / "cfg")}, "c2.json")
        main(["run", "--config", path])
        assert (tmp_path / "cfg" / MANIFEST).exists()
        main(["run", "--config", path, "--output", str(tmp_path / "flag")])
        assert (tmp_path / "flag" / MANIFEST).exists()
        monkeypatch.delenv("DFTLAB_OUTPUT_DIR")
        main(["run", "--config", write(tmp_path, ORACLE_CFG, "c3.json")])
        assert (tmp_path / "dftlab_out" / MANIFEST).exists()

    def test_oracle_spot_query(self, capsys):
        assert main(["oracle", "--t", "0", "--n", "2", "--threshold", "1.8"]) == 0
        assert float(capsys.readouterr().out) == 0.5
        assert main(["oracle", "--t", "1.5707963267948966", "--n", "2"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "value,probability" and len(lines) == 2

    def test_oracle_guard(self):
        assert main(["oracle", "--t", "0.5", "--n", "30"]) == 2

    def test_console_entry(self, tmp_path):
        out = subprocess.run(
            [sys.executable, "-m", "dftlab", "validate", "--config", write(tmp_path, ORACLE_CFG)],
            capture_output=True, text=True, env=dict(os.environ),
        )
        assert out.returncode == 0 and out.stdout.startswith("ok:")
