import json

import pytest

from polydens.cli import main


def _write(tmp_path, cfg):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    return str(p)


SWEEP = {"domain": {"bounds": [[0, 1]]}, "m": 1, "density": {"kind": "point_concentration", "delta": 0.1},
         "eps": [0.1, 0.05, 0.025, 0.0125, 0.00625], "cells": 16, "k": 4}


def test_sweep_pass_writes_tables(tmp_path):
    cfg = {**SWEEP, "tolerances": {"j": 2, "slope": -1.0, "slope_tol": 0.5, "r2_min": 0.9}}
    out = tmp_path / "out"
    assert main(["sweep", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 0
    names = {p.name for p in out.iterdir()}
    assert {"sweep.csv", "acceptance.json"} <= names
    assert json.loads((out / "acceptance.json").read_text())["failures"] == []


def test_sweep_predicate_failure_exit_code(tmp_path):
    cfg = {**SWEEP, "tolerances": {"j": 2, "slope": 5.0, "slope_tol": 0.1}}
    assert main(["sweep", "--config", _write(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 2


def test_bad_config_exit_code(tmp_path):
    assert main(["sweep", "--config", _write(tmp_path, {**SWEEP, "eps": [0.1, 0.2]}), "--out", str(tmp_path)]) == 1
    assert main(["solve", "--config", str(tmp_path / "missing.json")]) == 1


def test_solve_json(tmp_path):
    cfg = {"domain": {"bounds": [[0, 1], [0, 1]]}, "m": 1, "density": {"kind": "constant"}, "cells": 8, "k": 5}
    out = tmp_path / "s"
    assert main(["solve", "--config", _write(tmp_path, cfg), "--out", str(out), "--format", "json"]) == 0
    files = list(out.iterdir())
    assert files and all(f.suffix == ".json" for f in files)


def test_taylor_and_verify(tmp_path):
    t = {"m": 1, "N": 1, "k": 0, "eps": [0.1, 0.05, 0.02, 0.01]}
    assert main(["taylor", "--config", _write(tmp_path, t), "--out", str(tmp_path / "t")]) == 0
    v = {**SWEEP, "kinds": ["UpperMass_Nlt2m", "LowerMass"]}
    assert main(["verify", "--config", _write(tmp_path, v), "--out", str(tmp_path / "v")]) == 0
    assert (tmp_path / "v" / "verdicts.csv").exists()


def test_gny_and_steklov(tmp_path):
    g = {"domain": {"bounds": [[0, 1], [0, 1]]}, "m": 1, "density": {"kind": "constant"}, "j": 3, "cells": 16}
    assert main(["gny", "--config", _write(tmp_path, g), "--out", str(tmp_path / "g")]) == 0
    assert (tmp_path / "g" / "decomposition.json").exists()
    s = {"domain": {"bounds": [[0, 1]]}, "m": 1, "eps": [0.1, 0.01], "j_max": 2}
    assert main(["steklov", "--config", _write(tmp_path, s), "--out", str(tmp_path / "st")]) == 0


def test_seed_flag_is_deterministic(tmp_path):
    cfg = _write(tmp_path, {**SWEEP, "eps": [0.1, 0.05]})
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "7"]) == 1
    main(["sweep", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "7"])
    assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()


def test_missing_command_exits():
    with pytest.raises(SystemExit):
        main([])
