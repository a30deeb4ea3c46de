import json

import pytest

from kickedion.cli import main


def test_run_small_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "trap": {"k": 0.4, "nu_tau": 1.8, "eta": 0.25, "N": 32},
        "initial": {"fock": 2},
        "outputs": [{"type": "quasienergies"}, {"type": "states"}],
    }))
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["files"] == 2
    assert (tmp_path / "o/manifest.json").exists()


def test_flag_overrides(tmp_path):
    out = tmp_path / "o"
    assert main(["floquet", "--preset", "fig1", "--N", "120", "--k", "0.2", "--out", str(out)]) == 0
    m = json.loads((out / "manifest.json").read_text())
    assert m["config"]["trap"]["N"] == 120 and m["config"]["trap"]["k"] == 0.2
    assert {f["path"] for f in m["files"]} == {"quasienergies.csv", "weights_initial.csv"}


def test_classical_map_subcommand(tmp_path):
    out = tmp_path / "o"
    assert main(["classical-map", "--out", str(out)]) == 0
    assert (out / "portrait_k0.3.csv").exists() and (out / "portrait_k0.4.csv").exists()


def test_correlate_with_M(tmp_path):
    out = tmp_path / "o"
    assert main(["correlate", "--M", "7", "--out", str(out)]) == 0
    lines = (out / "autocorr_initial.csv").read_text().splitlines()
    assert len(lines) == 1 + 8


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"trap": {"k": 0.1, "nu_tau": 1, "eta": 0.5}, "outputs": []}))
    assert main(["run", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "config error" in capsys.readouterr().err
    assert main(["run", "no_such_preset", "--out", str(tmp_path / "o")]) == 2


def test_unsafe_grid_override_is_config_error(tmp_path):
    # shrinking N makes the preset grid leave the truncation-safe region
    assert main(["qfunction", "--N", "8", "--out", str(tmp_path / "o")]) == 2


def test_bad_flag_exits_nonzero():
    with pytest.raises(SystemExit) as exc:
        main(["floquet", "--ordering", "Sideways"])
    assert exc.value.code != 0
