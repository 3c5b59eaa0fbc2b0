"""Fast invariant suite behind the `validate` CLI subcommand."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import analytic_cat, recursion_residual, wigner_point
from .hilbert import (
    TruncationError,
    annihilation,
    coherent_ket,
    density_from_ket,
    displacement_op,
    fock_ket,
    identity_op,
    ket_from_amplitudes,
    parity_op,
    qubit_magnon,
    qubit_ops,
    random_density,
    single_mode,
)
from .lindblad import EvolveConfig, evolve, max_parity_drift, standard_dissipators
from .models import build_dressed, build_effective, build_interaction, build_rabi, build_rwa1
from .params import paper_params

__all__ = ["ValidationCheck", "run_validation"]


@dataclass
class ValidationCheck:
    name: str
    ok: bool
    detail: str


def run_validation() -> list[ValidationCheck]:
    checks = []

    def record(name, ok, detail):
        checks.append(ValidationCheck(name, bool(ok), detail))

    # ladder algebra
    sp5 = single_mode(5)
    a = annihilation(sp5, "magnon")
    elem = (a @ fock_ket(5, 4)).data[3, 0].real
    record("ladder_matrix_element", abs(elem - 2.0) < 1e-12, f"<3|a|4> = {elem}")
    p_op = parity_op(sp5)
    record("parity_squares_to_identity", np.abs((p_op @ p_op).data - np.eye(5)).max() < 1e-14, "P^2 = I")

    # displacement vs coherent state
    disp_vac = (displacement_op(40, 1.5) @ fock_ket(40, 0)).data
    fid = abs(np.vdot(coherent_ket(40, 1.5).data, disp_vac)) ** 2
    record("displacement_coherent_fidelity", fid > 1 - 1e-8, f"fidelity {fid:.2e}")

    # builder Hermiticity at random times
    p = paper_params()
    sp = qubit_magnon(4)
    rng = np.random.default_rng(0)
    worst = 0.0
    for builder in (build_rwa1, build_rabi, build_dressed, build_interaction, build_effective):
        h = builder(sp, p)
        for t in rng.uniform(0.0, 0.3, size=20):
            m = h.f_matrix(float(t))
            worst = max(worst, float(np.abs(m - m.conj().T).max()))
    record("builders_hermitian", worst < 1e-10, f"max defect {worst:.2e}")

    # analytic free decay
    sp2 = qubit_magnon(2)
    q = qubit_ops(sp2)
    m2 = annihilation(sp2, "magnon")
    terms = standard_dissipators(q.sm, q.sz, m2, p.gamma, 0.0, 0.0)
    v = np.kron([0.0, 1.0], [1.0, 0.0])
    rho0 = density_from_ket(ket_from_amplitudes(sp2, v))
    cfg = EvolveConfig.from_gamma_t(p.gamma, 4.0, 21, rtol=1e-10, atol=1e-12)
    traj = evolve(rho0, identity_op(sp2) * 0.0, terms, cfg, gamma=p.gamma)
    err = float(np.abs(traj.p_excited - np.exp(-traj.gamma_t)).max())
    record("free_decay_analytic", err < 1e-6, f"max error {err:.2e}")

    # recursion oracle on the analytic cat
    _, cat = analytic_cat(40, 1.582, "even")
    resid = recursion_residual(cat, 1.582)
    record("cat_recursion_oracle", resid < 1e-10, f"residual {resid:.2e}")

    # parity conservation in a short pumped run
    n = 12
    spn = qubit_magnon(n)
    qn = qubit_ops(spn)
    mn = annihilation(spn, "magnon")
    h = build_effective(spn, p)
    terms = standard_dissipators(qn.sm, qn.sz, mn, p.gamma, p.gamma_phi, 0.0)
    v = np.zeros(2 * n)
    v[0] = 1.0
    traj = evolve(
        density_from_ket(ket_from_amplitudes(spn, v)),
        h,
        terms,
        EvolveConfig.from_gamma_t(p.gamma, 5.0, 21),
        gamma=p.gamma,
    )
    drift = max_parity_drift(traj)
    record("parity_conservation", drift < 1e-6, f"max drift {drift:.2e}")

    # truncation tail gate must fire for an undersized space
    try:
        coherent_ket(6, 1.58)
        record("truncation_tail_gate", False, "gate did not fire at dim=6, alpha=1.58")
    except TruncationError as exc:
        record("truncation_tail_gate", True, f"correctly rejected: {exc}")

    # Wigner origin value equals scaled parity expectation
    rho = random_density(single_mode(15), np.random.default_rng(1))
    par = float((np.diag(rho.data).real * np.array([(-1.0) ** k for k in range(15)])).sum())
    w0 = wigner_point(rho, 0.0)
    record("wigner_parity_identity", abs(w0 - (2.0 / math.pi) * par) < 1e-12,
           f"|W(0) - (2/pi)<P>| = {abs(w0 - (2/math.pi)*par):.2e}")

    return checks
