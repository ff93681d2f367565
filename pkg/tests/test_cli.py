from __future__ import annotations

import json
from pathlib import Path

import pytest

from vicsek_lab.cli import main
from vicsek_lab.config import config_from_dict
from vicsek_lab.errors import ConfigError

BASE_CONFIG = {
    "ratios": {"generator": "constant", "l": 3},
    "p": 2,
    "beta_star": 1.0,
    "depth": 2,
    "vertex_level": 4,
    "seeds": [1, 2],
    "epsilons": [0.1, 0.05],
    "mode": "rational",
    "threads": 1,
}


def write_config(tmp_path: Path, overrides=None) -> Path:
    cfg = dict(BASE_CONFIG)
    if overrides:
        cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_config_validation_errors():
    with pytest.raises(ConfigError, match="ratios"):
        config_from_dict({})
    with pytest.raises(ConfigError, match="vertex_level"):
        config_from_dict({"ratios": [3, 3, 3], "depth": 5, "vertex_level": 3})
    with pytest.raises(ConfigError, match="unknown config fields"):
        config_from_dict({"ratios": [3], "bogus": 1})
    with pytest.raises(ConfigError, match="p must be > 1"):
        config_from_dict({"ratios": {"generator": "constant", "l": 3}, "p": 1})
    with pytest.raises(ConfigError, match="rational mode"):
        config_from_dict(
            {"ratios": {"generator": "constant", "l": 3}, "p": 2.5, "mode": "rational"}
        )
    with pytest.raises(ConfigError, match="invalid ratios"):
        config_from_dict({"ratios": {"generator": "constant", "l": 4}})


def test_explicit_ratio_list_too_short():
    with pytest.raises(ConfigError, match="shorter than"):
        config_from_dict({"ratios": [3, 5], "depth": 4, "vertex_level": 6}).ratio_sequence()


def test_build_command(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "art"
    assert main(["build", "--config", str(cfg), "--out", str(out)]) == 0
    doc = json.loads((out / "geometry_level2.json").read_text())
    data = doc["data"]
    assert data["num_cells"] == 25
    assert len(data["vertices"]) == 101
    assert len(data["edges"]) == 100
    tails = {e[0] for e in data["edges"]}
    assert data["origin"] in tails


def test_budget_exceeded_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path, {"depth": 9, "vertex_level": 9, "cell_budget": 1000})
    out = tmp_path / "art"
    assert main(["build", "--config", str(cfg), "--out", str(out)]) == 2
    err = capsys.readouterr().err
    assert "1953125" in err  # required cell count is named in the diagnostic


def test_missing_config_exit_code(tmp_path, capsys):
    assert main(["build", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2


def test_selftest_small_config(tmp_path):
    cfg = write_config(tmp_path, {"depth": 2, "vertex_level": 4})
    out = tmp_path / "art"
    assert main(["selftest", "--config", str(cfg), "--out", str(out)]) == 0
    report = (out / "selftest_report.csv").read_text().splitlines()
    assert report[0].startswith("# config=")
    assert report[1] == "check,ok,detail"
    assert all(",true" in line or line.startswith(("#", "check")) for line in report)


def test_selftest_threads_byte_identical(tmp_path):
    cfg = write_config(tmp_path, {"depth": 2, "vertex_level": 4})
    outs = []
    for t in (1, 3):
        out = tmp_path / f"art{t}"
        assert main(
            ["selftest", "--config", str(cfg), "--out", str(out), "--threads", str(t)]
        ) == 0
        outs.append(out)
    files = sorted(p.name for p in outs[0].iterdir())
    assert files == sorted(p.name for p in outs[1].iterdir())
    for name in files:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_measure_energy_bbm_commands(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "art"
    for cmd in ("measure", "energy", "energy-measure", "besov", "bbm", "resistance"):
        assert main([cmd, "--config", str(cfg), "--out", str(out)]) == 0, cmd
    table = (out / "scale_table.csv").read_text().splitlines()
    assert table[1] == "n,rho,psi,phi"
    assert table[2] == "0,2,1,2"
    curve = (out / "bbm_curve.csv").read_text().splitlines()
    assert curve[1].startswith("epsilon,beta,value")
    assert all(line.endswith(",true") for line in curve[2:])


def test_hausdorff_command(tmp_path):
    cfg = write_config(tmp_path, {"hausdorff": {"a": 3, "b": 5, "theta": 1.0, "prefix_len": 200}})
    out = tmp_path / "art"
    assert main(["hausdorff", "--config", str(cfg), "--out", str(out)]) == 0
    summary = json.loads((out / "hausdorff_summary.json").read_text())["data"]
    assert summary["non_self_similar"] is True
    rows = (out / "hausdorff_diagnostics.csv").read_text().splitlines()
    assert len(rows) == 202  # comment + header + 200 rows


def test_config_hash_stamps_artifacts(tmp_path):
    cfg = write_config(tmp_path)
    out1 = tmp_path / "a1"
    out2 = tmp_path / "a2"
    assert main(["measure", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["measure", "--config", str(cfg), "--out", str(out2)]) == 0
    assert (out1 / "scale_table.csv").read_bytes() == (out2 / "scale_table.csv").read_bytes()
    cfg2 = write_config(tmp_path, {"depth": 1, "vertex_level": 3})
    assert main(["measure", "--config", str(cfg2), "--out", str(out2)]) == 0
    head1 = (out1 / "scale_table.csv").read_text().splitlines()[0]
    head2 = (out2 / "scale_table.csv").read_text().splitlines()[0]
    assert head1 != head2  # different config, different stamp
