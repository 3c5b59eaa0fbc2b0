"""Master-equation integration and Liouvillian steady states.

Convention: a :class:`LindbladTerm` with operator o and rate r contributes
(r/2) * (2 o rho o† - o†o rho - rho o†o) to d(rho)/dt.  The physical channel
rates map to term rates r in {gamma, gamma_phi/2, kappa} so the prefactors
come out as gamma/2, gamma_phi/4 and kappa/2.

Stored frequencies are in MHz/2pi units and time is in microseconds, so the
engine multiplies Hamiltonians and rates by 2*pi when forming d(rho)/dt
(phases and decay exponents are then 2*pi*f*t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import svd

from .hilbert import QMatrix, parity_op
from .params import TWO_PI

__all__ = [
    "EngineError",
    "NullSpaceError",
    "LindbladTerm",
    "standard_dissipators",
    "EvolveConfig",
    "Trajectory",
    "StaticHamiltonian",
    "lindblad_rhs",
    "evolve",
    "steady_state",
    "parity_series",
    "max_parity_drift",
]

TRACE_GATE = 1e-7
HERM_GATE = 1e-7
POSITIVITY_GATE = -1e-6


class EngineError(RuntimeError):
    """Integration could not be completed (e.g. adaptive-step underflow)."""


class NullSpaceError(RuntimeError):
    """Steady-state extraction failed or needs a decomposition hint."""


@dataclass(frozen=True)
class LindbladTerm:
    op: QMatrix
    rate: float  # MHz/2pi; contribution (rate/2) * L[op]
    label: str = ""

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"negative rate {self.rate} for term {self.label!r}")


def standard_dissipators(
    sm: QMatrix, sz: QMatrix, m: QMatrix, gamma: float, gamma_phi: float, kappa: float
) -> list[LindbladTerm]:
    """Qubit relaxation, qubit pure dephasing and magnon loss with the
    prefactor convention gamma/2, gamma_phi/4, kappa/2."""
    terms = []
    if gamma > 0:
        terms.append(LindbladTerm(sm, gamma, "qubit_relaxation"))
    if gamma_phi > 0:
        terms.append(LindbladTerm(sz, gamma_phi / 2.0, "qubit_dephasing"))
    if kappa > 0:
        terms.append(LindbladTerm(m, kappa, "magnon_loss"))
    return terms


class StaticHamiltonian:
    """Adapter giving a bare operator the time-dependent-Hamiltonian interface."""

    def __init__(self, h: QMatrix):
        if h.herm_defect() > 1e-9 * max(1.0, h.norm()):
            raise ValueError("Hamiltonian is not Hermitian")
        self.space = h.space
        self._data = h.data
        self.fastest_freq = 0.0

    def f_matrix(self, t: float) -> np.ndarray:
        return self._data


def _as_hamiltonian(h):
    if isinstance(h, QMatrix):
        return StaticHamiltonian(h)
    if hasattr(h, "f_matrix") and hasattr(h, "fastest_freq"):
        return h
    raise TypeError(f"cannot interpret {type(h).__name__} as a Hamiltonian")


def _prepare_terms(terms: list[LindbladTerm]):
    prepared = []
    for term in terms:
        o = term.op.data
        od = o.conj().T
        prepared.append((TWO_PI * term.rate / 2.0, o, od, od @ o))
    return prepared


def _rhs_raw(h_f: np.ndarray, prepared, rho: np.ndarray) -> np.ndarray:
    out = (-1j * TWO_PI) * (h_f @ rho - rho @ h_f)
    for r2, o, od, k in prepared:
        out += r2 * (2.0 * (o @ rho @ od) - k @ rho - rho @ k)
    return out


def lindblad_rhs(h, terms: list[LindbladTerm], rho: QMatrix, t: float = 0.0) -> QMatrix:
    """d(rho)/dt = -i[H(t), rho] + sum (rate/2) L[o] rho, in 1/us units."""
    ham = _as_hamiltonian(h)
    if rho.space != ham.space:
        raise ValueError("state and Hamiltonian live on different spaces")
    for term in terms:
        if term.op.space != rho.space:
            raise ValueError(f"collapse operator {term.label!r} on a different space")
    drho = _rhs_raw(ham.f_matrix(t), _prepare_terms(terms), rho.data)
    return QMatrix(rho.space, drho, "operator")


@dataclass(frozen=True)
class EvolveConfig:
    t_end: float
    grid: np.ndarray  # output times in us, sorted, within [0, t_end]
    method: str = "rk45"  # "rk45" | "rk4"
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float | None = None  # us; default (1/40) / fastest_freq
    rk4_step: float = 1e-4
    snapshot_times: tuple[float, ...] = ()
    convergence_gate: bool = False  # honored by the scenario runner (re-run at 2N)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        object.__setattr__(self, "grid", grid)
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError("output grid must be a nonempty 1-d array")
        if np.any(np.diff(grid) < 0):
            raise ValueError("output times must be sorted")
        if grid[0] < 0 or grid[-1] > self.t_end + 1e-12:
            raise ValueError("output times outside [0, t_end]")
        if self.rtol <= 0 or self.atol <= 0 or self.rk4_step <= 0:
            raise ValueError("tolerances and steps must be positive")
        if self.method not in ("rk45", "rk4"):
            raise ValueError(f"unknown integrator {self.method!r}")
        for ts in self.snapshot_times:
            if ts < 0 or ts > self.t_end + 1e-12:
                raise ValueError(f"snapshot time {ts} outside [0, t_end]")

    @staticmethod
    def from_gamma_t(gamma: float, gamma_t_end: float, points: int, **kw) -> "EvolveConfig":
        t_end = gamma_t_end / (TWO_PI * gamma)
        grid = np.linspace(0.0, t_end, points)
        snaps_gt = kw.pop("snapshot_gamma_t", ())
        snaps = tuple(gt / (TWO_PI * gamma) for gt in snaps_gt)
        return EvolveConfig(t_end=t_end, grid=grid, snapshot_times=snaps, **kw)


@dataclass
class Trajectory:
    times: np.ndarray
    gamma_t: np.ndarray
    fidelity: np.ndarray | None
    parity: np.ndarray
    n_mean: np.ndarray
    var_x1: np.ndarray
    var_x2: np.ndarray
    p_excited: np.ndarray
    snapshots: dict[float, QMatrix] = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    failed: bool = False

    def observable(self, name: str) -> np.ndarray:
        return getattr(self, name)


def _observable_ops(space, target: QMatrix | None):
    """Dense matrices whose traces against rho give the tracked observables."""
    from .hilbert import annihilation, number_op, qubit_ops  # local to avoid cycles

    ops = {}
    labels = space.labels
    if "magnon" in labels:
        a = annihilation(space, "magnon").data
        ad = a.conj().T
        x1 = (a + ad) / math.sqrt(2.0)
        x2 = 1j * (ad - a) / math.sqrt(2.0)
        ops["parity"] = parity_op(space, "magnon").data
        ops["n_mean"] = number_op(space, "magnon").data
        ops["_x1"] = x1
        ops["_x1sq"] = x1 @ x1
        ops["_x2"] = x2
        ops["_x2sq"] = x2 @ x2
    if "qubit" in labels:
        sz = qubit_ops(space).sz.data
        ops["p_excited"] = 0.5 * (np.eye(space.dim) + sz)
    if target is not None:
        tar = target.data if target.kind == "density" else target.data @ target.data.conj().T
        if target.space == space:
            ops["fidelity"] = tar
        else:
            ops["fidelity"] = space.embed(tar, "magnon")
    return ops


def _tr(rho: np.ndarray, op: np.ndarray) -> float:
    return float(np.einsum("ij,ji->", rho, op).real)


def evolve(
    rho0: QMatrix,
    h,
    terms: list[LindbladTerm],
    cfg: EvolveConfig,
    target: QMatrix | None = None,
    gamma: float = 0.0,
) -> Trajectory:
    """Integrate the master equation, tracking the standard observable set.

    `target` (a magnon-space ket or density) enables the fidelity series;
    `gamma` only scales the dimensionless time axis gamma_t = 2*pi*gamma*t.
    """
    ham = _as_hamiltonian(h)
    rho0.validate()
    prepared = _prepare_terms(terms)
    dim = rho0.space.dim

    eval_times = np.unique(np.concatenate([cfg.grid, np.asarray(cfg.snapshot_times, dtype=float)]))

    def fun(t, y):
        rho = y.reshape(dim, dim)
        return _rhs_raw(ham.f_matrix(t), prepared, rho).ravel()

    nfev = 0
    if cfg.method == "rk45":
        max_step = cfg.max_step
        if max_step is None:
            max_step = (1.0 / 40.0) / ham.fastest_freq if ham.fastest_freq > 0 else np.inf
        sol = solve_ivp(
            fun,
            (0.0, cfg.t_end),
            rho0.data.ravel().astype(complex),
            method="RK45",
            t_eval=eval_times,
            rtol=cfg.rtol,
            atol=cfg.atol,
            max_step=max_step,
        )
        if not sol.success:
            raise EngineError(f"integration failed: {sol.message}")
        states = sol.y.T.reshape(-1, dim, dim)
        nfev = int(sol.nfev)
    else:
        states = _rk4_on_grid(fun, rho0.data, eval_times, cfg.rk4_step, dim)
        nfev = 4 * int(math.ceil(cfg.t_end / cfg.rk4_step))

    ops = _observable_ops(rho0.space, target)
    nt = len(cfg.grid)
    series = {k: np.zeros(nt) for k in ("parity", "n_mean", "var_x1", "var_x2", "p_excited")}
    fid = np.zeros(nt) if "fidelity" in ops else None

    max_trace = 0.0
    max_herm = 0.0
    snapshots: dict[float, QMatrix] = {}
    min_eig = np.inf
    snap_set = {round(float(t), 15) for t in cfg.snapshot_times}

    out_row = 0
    for j, t in enumerate(eval_times):
        rho = states[j]
        max_trace = max(max_trace, abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag))
        herm = np.linalg.norm(rho - rho.conj().T)
        max_herm = max(max_herm, herm)
        rho_sym = 0.5 * (rho + rho.conj().T)  # reported states are re-symmetrized
        key = round(float(t), 15)
        if key in snap_set:
            snapshots[float(t)] = QMatrix(rho0.space, rho_sym, "density")
            min_eig = min(min_eig, float(np.linalg.eigvalsh(rho_sym).min()))
        if out_row < nt and abs(t - cfg.grid[out_row]) < 1e-12:
            for name in series:
                if name in ops:
                    series[name][out_row] = _tr(rho_sym, ops[name])
            if "magnon" in rho0.space.labels:
                m1 = _tr(rho_sym, ops["_x1"])
                series["var_x1"][out_row] = _tr(rho_sym, ops["_x1sq"]) - m1 * m1
                m2 = _tr(rho_sym, ops["_x2"])
                series["var_x2"][out_row] = _tr(rho_sym, ops["_x2sq"]) - m2 * m2
            if fid is not None:
                fid[out_row] = _tr(rho_sym, ops["fidelity"])
            out_row += 1

    failed = max_trace > TRACE_GATE or max_herm > HERM_GATE
    reasons = []
    if max_trace > TRACE_GATE:
        reasons.append(f"trace drift {max_trace:.2e} > {TRACE_GATE:.0e}")
    if max_herm > HERM_GATE:
        reasons.append(f"hermiticity drift {max_herm:.2e} > {HERM_GATE:.0e}")
    if min_eig < POSITIVITY_GATE:
        failed = True
        reasons.append(f"min eigenvalue {min_eig:.2e} < {POSITIVITY_GATE:.0e}")

    return Trajectory(
        times=cfg.grid.copy(),
        gamma_t=TWO_PI * gamma * cfg.grid,
        fidelity=fid,
        parity=series["parity"],
        n_mean=series["n_mean"],
        var_x1=series["var_x1"],
        var_x2=series["var_x2"],
        p_excited=series["p_excited"],
        snapshots=snapshots,
        diagnostics={
            "nfev": nfev,
            "max_trace_drift": max_trace,
            "max_herm_drift": max_herm,
            "min_snapshot_eig": None if min_eig is np.inf else min_eig,
            "reasons": reasons,
        },
        failed=failed,
    )


def _rk4_on_grid(fun, rho0: np.ndarray, eval_times: np.ndarray, h: float, dim: int) -> np.ndarray:
    """Classic fixed-step RK4, landing exactly on every requested time."""
    y = rho0.ravel().astype(complex)
    out = np.empty((len(eval_times), dim * dim), dtype=complex)
    t = 0.0
    for j, tj in enumerate(eval_times):
        span = tj - t
        if span > 0:
            nsub = max(1, int(math.ceil(span / h - 1e-12)))
            dt = span / nsub
            for _ in range(nsub):
                k1 = fun(t, y)
                k2 = fun(t + 0.5 * dt, y + 0.5 * dt * k1)
                k3 = fun(t + 0.5 * dt, y + 0.5 * dt * k2)
                k4 = fun(t + dt, y + dt * k3)
                y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                t += dt
            t = tj
        out[j] = y
    return out.reshape(-1, dim, dim)


# -- steady states ----------------------------------------------------------------


def _liouvillian_dense(h_f: np.ndarray, prepared) -> np.ndarray:
    d = h_f.shape[0]
    eye = np.eye(d, dtype=complex)
    L = (-1j * TWO_PI) * (np.kron(h_f, eye) - np.kron(eye, h_f.T))
    for r2, o, od, k in prepared:
        L += r2 * (2.0 * np.kron(o, o.conj()) - np.kron(k, eye) - np.kron(eye, k.T))
    return L


def _psd_normalize(mat: np.ndarray, space) -> QMatrix:
    m = 0.5 * (mat + mat.conj().T)
    tr = np.trace(m).real
    if abs(tr) < 1e-14:
        raise NullSpaceError("candidate fixed state has (near-)zero trace")
    m = m / tr
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    m = (v * w) @ v.conj().T
    m = m / np.trace(m).real
    return QMatrix(space, m, "density")


def steady_state(
    h: QMatrix,
    terms: list[LindbladTerm],
    parity_hint: QMatrix | str | None = None,
    null_tol: float = 1e-9,
) -> QMatrix:
    """Density matrix in the null space of the vectorized Liouvillian.

    For a unique fixed point no hint is needed.  When magnon loss is absent the
    fixed space splits into magnon-parity sectors; the hint is then either an
    initial density (its parity weights select the asymptotic mixture) or one
    of "even"/"odd" for a single sector.
    """
    ham = _as_hamiltonian(h)
    prepared = _prepare_terms(terms)
    d = ham.space.dim
    L = _liouvillian_dense(ham.f_matrix(0.0), prepared)
    _, s, vh = svd(L, full_matrices=False, lapack_driver="gesdd")
    cutoff = max(s[0] * null_tol, 1e-30)
    null = vh[s < cutoff].conj()
    if null.shape[0] == 0:
        raise NullSpaceError(f"no Liouvillian null vector; smallest singular value {s[-1]:.3e}")
    mats = [v.reshape(d, d) for v in null]

    if null.shape[0] == 1 and parity_hint is None:
        rho = _psd_normalize(mats[0], ham.space)
        _check_residual(ham, prepared, rho, null_tol)
        return rho
    if parity_hint is None:
        raise NullSpaceError(
            f"{null.shape[0]}-dimensional fixed space; supply an initial state or parity sector"
        )

    p = parity_op(ham.space, "magnon").data
    proj = {
        "even": 0.5 * (np.eye(d) + p),
        "odd": 0.5 * (np.eye(d) - p),
    }

    def sector_state(which: str) -> QMatrix:
        pr = proj[which]
        stack = np.array([(pr @ m @ pr).ravel() for m in mats])
        _, sv, svh = svd(stack, full_matrices=False)
        if sv[0] < 1e-12:
            raise NullSpaceError(f"no fixed state in the {which} sector")
        return _psd_normalize(svh[0].reshape(d, d), ham.space)

    if isinstance(parity_hint, str):
        rho = sector_state(parity_hint)
        _check_residual(ham, prepared, rho, null_tol)
        return rho

    w_even = float(np.trace(proj["even"] @ parity_hint.data).real)
    w_odd = float(np.trace(proj["odd"] @ parity_hint.data).real)
    parts = []
    if w_even > 1e-12:
        parts.append(w_even * sector_state("even").data)
    if w_odd > 1e-12:
        parts.append(w_odd * sector_state("odd").data)
    rho = QMatrix(ham.space, sum(parts), "density")
    _check_residual(ham, prepared, rho, null_tol)
    return rho


def _check_residual(ham, prepared, rho: QMatrix, null_tol: float):
    resid = float(np.linalg.norm(_rhs_raw(ham.f_matrix(0.0), prepared, rho.data)))
    if resid > 1e-9:
        raise NullSpaceError(f"steady-state residual |d(rho)/dt| = {resid:.3e} exceeds 1e-9")


def parity_series(traj: Trajectory) -> np.ndarray:
    return traj.parity


def max_parity_drift(traj: Trajectory) -> float:
    return float(np.abs(traj.parity - traj.parity[0]).max())
