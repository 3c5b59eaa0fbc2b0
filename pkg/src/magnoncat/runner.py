"""File emission for scenario runs: CSV data, Wigner grids, JSON manifests.

Reruns of the same configuration produce byte-identical files: floats are
formatted with a fixed %.12g, JSON keys are sorted, line endings are LF and
nothing time- or host-dependent is written.  Every data file's SHA-256 digest
is recorded in the run manifest.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import WIGNER_CONVENTION
from .lindblad import Trajectory
from .scenarios import (
    ScenarioConfig,
    ScenarioResult,
    SweepSpec,
    execute_scenario,
    execute_sweep_point,
    sweep_spec,
)

__all__ = ["run_scenario_files", "run_sweep_files", "load_config"]

_FLOAT_FMT = "%.12g"

CONVENTIONS = {
    "frequency_units": "MHz as omega/2pi; time in microseconds; gamma_t = 2*pi*gamma*t",
    "gamma_t_axis": "the dimensionless time axis; capital-Gamma t labels are the same quantity",
    "wigner": WIGNER_CONVENTION + "; the displaced-state variant equals this under beta -> -beta",
    "fidelity": "Tr[rho_tar rho]; normalized and Uhlmann variants reported for mixed-vs-mixed",
    "lindblad": "(rate/2)(2 o rho o+ - o+o rho - rho o+o) with rates {gamma, gamma_phi/2, kappa}",
}


def load_config(path: str | Path) -> ScenarioConfig:
    from .scenarios import ConfigError

    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    return ScenarioConfig.from_dict(raw)


def _fmt(x) -> str:
    if x is None:
        return "nan"
    return _FLOAT_FMT % float(x)


def _write(path: Path, text: str) -> dict:
    data = text.encode("utf-8")
    path.write_bytes(data)
    return {"sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)}


def _trajectory_csv(traj: Trajectory) -> str:
    lines = ["t_us,gamma_t,fidelity,parity,n_mean,var_x1,var_x2,p_excited"]
    fid = traj.fidelity
    for i in range(len(traj.times)):
        lines.append(
            ",".join(
                [
                    _fmt(traj.times[i]),
                    _fmt(traj.gamma_t[i]),
                    _fmt(fid[i]) if fid is not None else "nan",
                    _fmt(traj.parity[i]),
                    _fmt(traj.n_mean[i]),
                    _fmt(traj.var_x1[i]),
                    _fmt(traj.var_x2[i]),
                    _fmt(traj.p_excited[i]),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _wigner_csv(grid) -> str:
    lines = [
        "re_min,re_max,re_n,im_min,im_max,im_n",
        ",".join(
            [
                _fmt(grid.re_min),
                _fmt(grid.re_max),
                str(grid.re_n),
                _fmt(grid.im_min),
                _fmt(grid.im_max),
                str(grid.im_n),
            ]
        ),
    ]
    for row in grid.values:  # one line per Im(beta) grid value, columns sweep Re(beta)
        lines.append(",".join(_FLOAT_FMT % v for v in row))
    return "\n".join(lines) + "\n"


def _steady_csv(steady: dict) -> str:
    lines = ["n,population"]
    for n, pop in enumerate(steady["populations"]):
        lines.append(f"{n},{_FLOAT_FMT % pop}")
    return "\n".join(lines) + "\n"


def _compare_csv(compare: dict) -> str:
    lines = ["t_us,gamma_t,overlap,overlap_normalized,fidelity_uhlmann"]
    for r in compare["rows"]:
        lines.append(
            ",".join(_fmt(r[k]) for k in ("t_us", "gamma_t", "overlap", "overlap_normalized", "fidelity_uhlmann"))
        )
    return "\n".join(lines) + "\n"


def _derived_dict(result: ScenarioResult) -> dict:
    d = dataclasses.asdict(result.derived)
    d["alpha"] = [result.derived.alpha.real, result.derived.alpha.imag]
    d["stark"] = result.derived.stark
    return d


def _manifest(result: ScenarioResult, files: dict, extra: dict | None = None) -> str:
    traj = result.trajectory
    manifest = {
        "name": result.config["name"],
        "code_version": __version__,
        "config": result.config,
        "params": dataclasses.asdict(result.params),
        "derived": _derived_dict(result),
        "conventions": CONVENTIONS,
        "summary": result.summary,
        "diagnostics": traj.diagnostics if traj is not None else {},
        "failed": result.failed,
        "gate": result.gate,
        "steady": result.steady,
        "compare": {k: v for k, v in (result.compare or {}).items() if k != "rows"} or None,
        "wigner_gamma_t": sorted(result.wigner_grids),
        "wigner_min_var_gamma_t": result.wigner_min_var_gamma_t,
        "files": files,
    }
    return json.dumps(manifest, sort_keys=True, indent=1, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def run_scenario_files(cfg: ScenarioConfig, out_dir: str | Path, fock: int | None = None) -> ScenarioResult:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = execute_scenario(cfg, fock=fock)
    name = cfg["name"]
    files = {}
    if result.trajectory is not None and cfg["outputs"]["trajectory"]:
        files[f"{name}_trajectory.csv"] = _write(out / f"{name}_trajectory.csv", _trajectory_csv(result.trajectory))
    for gt, grid in sorted(result.wigner_grids.items()):
        fname = f"{name}_wigner_gt{_gt_tag(gt)}.csv"
        files[fname] = _write(out / fname, _wigner_csv(grid))
    if result.steady is not None:
        files[f"{name}_steady.csv"] = _write(out / f"{name}_steady.csv", _steady_csv(result.steady))
    if result.compare is not None:
        files[f"{name}_compare.csv"] = _write(out / f"{name}_compare.csv", _compare_csv(result.compare))
    (out / f"{name}_manifest.json").write_text(_manifest(result, files))
    return result


def _gt_tag(gt: float) -> str:
    tag = ("%g" % gt).replace(".", "p").replace("-", "m")
    return tag


def _sweep_worker(args):
    spec_dict, index, fock = args
    spec = SweepSpec(**spec_dict)
    row, result = execute_sweep_point(spec, index, fock=fock)
    payload = None
    if result is not None:
        payload = {
            "trajectory": result.trajectory,
            "config": result.config,
            "summary": result.summary,
        }
    return index, row, payload


def run_sweep_files(cfg: ScenarioConfig, out_dir: str | Path, fock: int | None = None, threads: int = 1) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = sweep_spec(cfg)
    name = cfg["name"]
    jobs = [(dataclasses.asdict(spec), i, fock) for i in range(len(spec.values))]
    results: list = [None] * len(jobs)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for index, row, payload in pool.map(_sweep_worker, jobs):
                results[index] = (row, payload)
    else:
        for job in jobs:
            index, row, payload = _sweep_worker(job)
            results[index] = (row, payload)

    files = {}
    rows = []
    trajs = {}
    for index, (row, payload) in enumerate(results):
        rows.append(row)
        if payload is not None and payload["trajectory"] is not None:
            pname = f"{name}_p{index}_trajectory.csv"
            files[pname] = _write(out / pname, _trajectory_csv(payload["trajectory"]))
            trajs[index] = payload["trajectory"]

    header = "index,axis,value,max_fidelity,argmax_gamma_t,final_fidelity,abs_alpha,status"
    lines = [header]
    for r in rows:
        lines.append(
            ",".join(
                [
                    str(r["index"]),
                    r["axis"],
                    _fmt(r["value"]),
                    _fmt(r.get("max_fidelity")),
                    _fmt(r.get("argmax_gamma_t")),
                    _fmt(r.get("final_fidelity")),
                    _fmt(r.get("abs_alpha")),
                    str(r["status"]).replace(",", ";"),
                ]
            )
        )
    files[f"{name}_summary.csv"] = _write(out / f"{name}_summary.csv", "\n".join(lines) + "\n")

    # flatness across mismatch sweeps: max |F(t) - F_matched(t)| per point
    flatness = None
    if spec.axis in ("delta13", "deta12") and trajs:
        matched = [i for i, v in enumerate(spec.values) if v == 0.0]
        if matched and matched[0] in trajs:
            ref = trajs[matched[0]].fidelity
            flatness = {
                str(spec.values[i]): float(np.abs(t.fidelity - ref).max())
                for i, t in trajs.items()
                if t.fidelity is not None and ref is not None
            }

    manifest = {
        "name": name,
        "code_version": __version__,
        "config": cfg.raw,
        "conventions": CONVENTIONS,
        "axis": spec.axis,
        "values": spec.values,
        "hold": spec.hold,
        "rows": rows,
        "flatness_vs_matched": flatness,
        "files": files,
    }
    (out / f"{name}_manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=1, default=_json_default) + "\n"
    )
    return manifest
