"""CLI subcommands, exit codes and the validation suite."""

import json

import numpy as np
import pytest

import magnoncat.lindblad as lindblad
from magnoncat.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, list_presets, main
from magnoncat.validate import run_validation

SMALL = {
    "name": "cli_case",
    "level": "EFFECTIVE",
    "fock": 8,
    "params": {"gamma": 16.0, "gamma_phi": 0.0, "kappa": 0.0, "eps_p": 0.35},
    "initial": {"kind": "fock", "n": 0},
    "time": {"gamma_t_end": 3.0, "points": 16},
}


def write_cfg(tmp_path, **kw):
    raw = {**SMALL, **kw}
    path = tmp_path / "case.json"
    path.write_text(json.dumps(raw))
    return path


def test_presets_all_validate():
    from magnoncat.scenarios import ScenarioConfig
    from magnoncat.cli import _preset_dir

    names = [n for n, _ in list_presets()]
    assert {"fig2a", "fig2b", "fig3_row1", "fig3_row2", "fig3_row3", "fig4a",
            "fig4b", "fig4c", "fig5ab", "fig5cd", "fig6a", "fig6b", "fig7"} <= set(names)
    for name in names:
        raw = json.loads((_preset_dir() / f"{name}.json").read_text())
        ScenarioConfig.from_dict(raw)  # must not raise


def test_presets_list_cli(capsys):
    assert main(["presets", "list"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "fig2a" in out and "fig7" in out


def test_run_ok(tmp_path):
    cfg = write_cfg(tmp_path)
    assert main(["run", str(cfg), "--out", str(tmp_path / "out")]) == EXIT_OK
    assert (tmp_path / "out" / "cli_case_trajectory.csv").exists()
    assert (tmp_path / "out" / "cli_case_manifest.json").exists()


def test_config_errors_exit_1(tmp_path):
    missing = tmp_path / "nope.json"
    assert main(["run", str(missing), "--out", str(tmp_path)]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({**SMALL, "volume": 3}))
    assert main(["run", str(unknown), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_fock_and_level_overrides(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out), "--fock", "8"]) == EXIT_OK
    lines = (out / "cli_case_trajectory.csv").read_text().splitlines()
    assert len(lines) == 17


def test_sweep_cli(tmp_path):
    cfg = write_cfg(tmp_path, sweep={"axis": "kappa", "values": [0.0, 0.2]})
    out = tmp_path / "out"
    assert main(["sweep", str(cfg), "--out", str(out)]) == EXIT_OK
    summary = (out / "cli_case_summary.csv").read_text().splitlines()
    assert len(summary) == 3


def test_steady_cli(tmp_path):
    cfg = write_cfg(tmp_path, fock=10)
    out = tmp_path / "out"
    assert main(["steady", str(cfg), "--out", str(out)]) == EXIT_OK
    m = json.loads((out / "cli_case_manifest.json").read_text())
    assert m["steady"]["qubit_excited"] < 1e-6
    assert (out / "cli_case_steady.csv").read_text().startswith("n,population")


def test_wigner_cli_defaults_to_end_time(tmp_path):
    cfg = write_cfg(tmp_path, fock=30, wigner_grid={"re": [-2.0, 2.0, 31], "im": [-2.0, 2.0, 31]})
    out = tmp_path / "out"
    assert main(["wigner", str(cfg), "--out", str(out)]) == EXIT_OK
    assert (out / "cli_case_wigner_gt3.csv").exists()


def test_strict_convergence_gate(tmp_path):
    # full drive at fock 6 badly undertruncates the pumped cat; the 2N gate must trip
    cfg = write_cfg(tmp_path, fock=6, time={"gamma_t_end": 20.0, "points": 41},
                    params={"gamma": 16.0, "gamma_phi": 0.0, "kappa": 0.0, "eps_p": 3.53},
                    target={"kind": "none"})
    rc = main(["run", str(cfg), "--out", str(tmp_path / "out"), "--strict-convergence"])
    assert rc == EXIT_NUMERICAL


def test_validate_passes():
    checks = run_validation()
    assert all(c.ok for c in checks)
    assert main(["validate"]) == EXIT_OK


def test_validate_catches_dissipator_sign_flip(monkeypatch):
    # mutation smoke test: flip the Lindblad prefactor sign and the
    # analytic free-decay check must fail
    original = lindblad._rhs_raw

    def flipped(h_f, prepared, rho):
        out = (-1j * 2 * np.pi) * (h_f @ rho - rho @ h_f)
        for r2, o, od, k in prepared:
            out -= r2 * (2.0 * (o @ rho @ od) - k @ rho - rho @ k)
        return out

    monkeypatch.setattr(lindblad, "_rhs_raw", flipped)
    checks = run_validation()
    by_name = {c.name: c for c in checks}
    assert not by_name["free_decay_analytic"].ok
    monkeypatch.setattr(lindblad, "_rhs_raw", original)
