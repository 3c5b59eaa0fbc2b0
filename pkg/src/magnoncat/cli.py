"""Command-line front end.

Subcommands: run, sweep, steady, wigner, validate, presets.
Exit codes: 0 success, 1 configuration error, 2 numerical-gate failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from importlib import resources
from pathlib import Path

from .lindblad import EngineError, NullSpaceError
from .runner import load_config, run_scenario_files, run_sweep_files
from .scenarios import ConfigError, ScenarioConfig

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


def _preset_dir():
    return resources.files("magnoncat") / "presets"


def list_presets() -> list[tuple[str, str]]:
    out = []
    for entry in sorted(_preset_dir().iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            data = json.loads(entry.read_text())
            out.append((entry.name[:-5], data.get("description", "")))
    return out


def _resolve_config(token: str) -> ScenarioConfig:
    path = Path(token)
    if path.exists():
        return load_config(path)
    preset = _preset_dir() / f"{token}.json"
    if preset.is_file():
        return ScenarioConfig.from_dict(json.loads(preset.read_text()))
    raise ConfigError(f"no config file or preset named {token!r}")


def _common_flags(sub):
    sub.add_argument("config", help="path to a scenario JSON file, or a preset name")
    sub.add_argument("--out", default="out", help="output directory (default: ./out)")
    sub.add_argument("--fock", type=int, default=None, help="override the Fock truncation")
    sub.add_argument("--level", default=None, help="override the model level")
    sub.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    sub.add_argument(
        "--strict-convergence",
        action="store_true",
        help="enable the 2N convergence gate and fail the run if it trips",
    )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="magnoncat", description=__doc__)
    sp = ap.add_subparsers(dest="command", required=True)
    for name, txt in (
        ("run", "execute one scenario and write trajectory/Wigner files"),
        ("sweep", "execute a parameter sweep"),
        ("steady", "solve the Liouvillian steady state for a scenario"),
        ("wigner", "compute Wigner snapshots for a scenario"),
    ):
        _common_flags(sp.add_parser(name, help=txt))
    sp.add_parser("validate", help="run the fast invariant suite")
    pp = sp.add_parser("presets", help="preset utilities")
    pp.add_argument("action", choices=["list"])
    return ap


def _apply_overrides(cfg: ScenarioConfig, args, force: dict | None = None) -> ScenarioConfig:
    raw = copy.deepcopy(cfg.raw)
    if args.level:
        raw["level"] = args.level
    if args.strict_convergence:
        raw["convergence_gate"] = True
    for key, val in (force or {}).items():
        raw.setdefault("outputs", {})[key] = val
    return ScenarioConfig.from_dict(raw)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "presets":
            for name, desc in list_presets():
                print(f"{name:12s} {desc}")
            return EXIT_OK
        if args.command == "validate":
            from .validate import run_validation

            checks = run_validation()
            ok = True
            for c in checks:
                print(f"{'PASS' if c.ok else 'FAIL'} {c.name}: {c.detail}")
                ok = ok and c.ok
            return EXIT_OK if ok else EXIT_NUMERICAL

        cfg = _resolve_config(args.config)
        if args.command == "sweep":
            cfg = _apply_overrides(cfg, args)
            manifest = run_sweep_files(cfg, args.out, fock=args.fock, threads=max(1, args.threads))
            bad = [r for r in manifest["rows"] if r["status"] != "ok"]
            print(f"sweep {cfg['name']}: {len(manifest['rows'])} points, {len(bad)} failed -> {args.out}")
            return EXIT_NUMERICAL if bad else EXIT_OK

        force = {}
        if args.command == "steady":
            # steady solve plus the trajectory cross-check; no phase-space output
            force = {"steady": True, "wigner_at_gamma_t": [], "wigner_at_min_var_x2": False,
                     "compare": None}
        if args.command == "wigner":
            force = {"steady": False, "compare": None}
            if not cfg["outputs"]["wigner_at_gamma_t"] and not cfg["outputs"]["wigner_at_min_var_x2"]:
                force["wigner_at_gamma_t"] = [cfg["time"]["gamma_t_end"]]
        cfg = _apply_overrides(cfg, args, force)
        result = run_scenario_files(cfg, args.out, fock=args.fock)
        status = "FAILED" if result.failed else "ok"
        extra = ""
        if result.gate is not None:
            extra = f" gate_drift={result.gate['max_drift']:.2e}"
        print(f"run {cfg['name']}: {status}{extra} -> {args.out}")
        if result.failed and args.strict_convergence:
            return EXIT_NUMERICAL
        return EXIT_NUMERICAL if result.failed else EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EngineError, NullSpaceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
