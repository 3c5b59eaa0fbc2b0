"""Observables and analytic steady-state oracles for the magnon mode.

Fidelity here is the Hilbert-Schmidt overlap Tr[rho_tar rho] (it coincides
with the usual fidelity when the target is pure).  The Wigner function is the
displaced-parity value W(beta) = (2/pi) Tr[D†(beta) rho D(beta) P]; the
published definition with rho displaced the other way is the beta -> -beta
reflection of this and the choice is recorded in output metadata.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .hilbert import (
    QMatrix,
    SpaceMismatchError,
    TruncationError,
    coherent_amplitudes,
    coherent_tail_mass,
    single_mode,
)

__all__ = [
    "CatSpec",
    "analytic_cat",
    "recursion_residual",
    "dominant_eigvec",
    "fidelity_overlap",
    "normalized_overlap",
    "trace_distance",
    "uhlmann_fidelity",
    "WignerGrid",
    "wigner",
    "fringe_ratio",
    "fringe_verdict",
    "quadrature_stats",
    "InitialSuperposition",
    "SteadyPrediction",
    "predict_steady",
]

WIGNER_CONVENTION = "W(beta) = (2/pi) Tr[D^dag(beta) rho D(beta) P]"
WIGNER_TAIL_GATE = 1e-4  # coherent tail mass allowed at the grid corner
FRINGE_THRESHOLD = 0.05  # segment max relative to global max


# -- analytic cat states --------------------------------------------------------


@dataclass(frozen=True)
class CatSpec:
    alpha: complex
    parity: str  # "even" | "odd"

    def __post_init__(self):
        if self.parity not in ("even", "odd"):
            raise ValueError(f"parity must be 'even' or 'odd', got {self.parity!r}")

    @property
    def normalization(self) -> float:
        """1/sqrt(2(1 ± exp(-2|alpha|^2))) for the (|a> ± |-a>) superposition."""
        s = 1.0 if self.parity == "even" else -1.0
        return 1.0 / math.sqrt(2.0 * (1.0 + s * math.exp(-2.0 * abs(self.alpha) ** 2)))


def analytic_cat(dim: int, alpha: complex, parity: str) -> tuple[CatSpec, QMatrix]:
    """Parity-projected coherent superposition, normalized on the truncated space."""
    spec = CatSpec(alpha=complex(alpha), parity=parity)
    if alpha != 0:
        tail = coherent_tail_mass(dim, alpha)
        if tail >= 1e-8:
            raise TruncationError(
                f"cat tail mass {tail:.3e} at dim={dim}, |alpha|={abs(alpha):.3f}"
            )
    keep = 0 if parity == "even" else 1
    c = coherent_amplitudes(dim, alpha)
    c[np.arange(dim) % 2 != keep] = 0.0
    if parity == "odd" and alpha == 0:
        c[1] = 1.0  # limiting single-quantum state
    c = c / np.linalg.norm(c)
    return spec, QMatrix(single_mode(dim), c.reshape(-1, 1), "ket")


def recursion_residual(ket: QMatrix, alpha: complex) -> float:
    """max_n |c_{n+2} sqrt((n+1)(n+2)) - alpha^2 c_n| over the truncated ladder.

    Zero (to rounding) exactly when the state is annihilated by (m^2 - alpha^2),
    independent of global phase and normalization.
    """
    c = ket.data.ravel()
    n = np.arange(c.size - 2)
    resid = c[2:] * np.sqrt((n + 1.0) * (n + 2.0)) - (alpha**2) * c[:-2]
    return float(np.abs(resid).max())


def dominant_eigvec(rho: QMatrix) -> QMatrix:
    """Eigenvector of the largest eigenvalue, as a ket on the same space."""
    w, v = np.linalg.eigh(0.5 * (rho.data + rho.data.conj().T))
    vec = v[:, -1].reshape(-1, 1)
    return QMatrix(rho.space, vec, "ket")


# -- overlaps -------------------------------------------------------------------


def _as_density_data(state: QMatrix) -> np.ndarray:
    if state.kind == "ket":
        v = state.data
        return v @ v.conj().T
    return state.data


def fidelity_overlap(rho_tar: QMatrix, rho: QMatrix) -> float:
    """Tr[rho_tar rho]; equals the usual fidelity for a pure target."""
    if rho_tar.space != rho.space:
        raise SpaceMismatchError("target and state live on different spaces")
    val = complex(np.trace(_as_density_data(rho_tar) @ _as_density_data(rho)))
    if abs(val.imag) > 1e-12 * max(1.0, abs(val)):
        raise ValueError(f"overlap has non-negligible imaginary part {val.imag}")
    return float(val.real)


def normalized_overlap(rho_a: QMatrix, rho_b: QMatrix) -> float:
    """Tr[ab]/max(Tr[a^2], Tr[b^2]); reaches 1 for identical mixed states."""
    a = _as_density_data(rho_a)
    b = _as_density_data(rho_b)
    num = float(np.trace(a @ b).real)
    den = max(float(np.trace(a @ a).real), float(np.trace(b @ b).real))
    return num / den


def trace_distance(rho_a: QMatrix, rho_b: QMatrix) -> float:
    d = _as_density_data(rho_a) - _as_density_data(rho_b)
    return float(0.5 * np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T))).sum())


def uhlmann_fidelity(rho_a: QMatrix, rho_b: QMatrix) -> float:
    """(Tr sqrt(sqrt(a) b sqrt(a)))^2; the mixed-state fidelity proper.

    Used where two genuinely mixed states are compared (cross-level checks);
    coincides with the Hilbert-Schmidt overlap when either state is pure.
    """
    from scipy.linalg import sqrtm

    a = _as_density_data(rho_a)
    b = _as_density_data(rho_b)
    ra = sqrtm(0.5 * (a + a.conj().T))
    inner = sqrtm(ra @ b @ ra)
    return float(np.real(np.trace(inner)) ** 2)


# -- Wigner function ------------------------------------------------------------


@dataclass(frozen=True)
class WignerGrid:
    re_min: float
    re_max: float
    re_n: int
    im_min: float
    im_max: float
    im_n: int
    values: np.ndarray  # shape (im_n, re_n), rows sweep Im(beta)

    def re_axis(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.re_n)

    def im_axis(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.im_n)

    def total_mass(self) -> float:
        m = np.trapezoid(self.values, self.re_axis(), axis=1)
        return float(np.trapezoid(m, self.im_axis()))

    def corner_radius(self) -> float:
        return max(
            math.hypot(r, i)
            for r in (self.re_min, self.re_max)
            for i in (self.im_min, self.im_max)
        )


def _laguerre_series(L: int, x: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Clenshaw evaluation of sum_n c_n (-1)^n sqrt(L!n!/(L+n)!) L_n^L(x)."""
    if len(c) == 1:
        y0 = c[0] * np.ones_like(x)
        y1 = np.zeros_like(x)
    elif len(c) == 2:
        y0 = c[0] * np.ones_like(x)
        y1 = c[1] * np.ones_like(x)
    else:
        k = len(c)
        y0 = c[-2] * np.ones_like(x)
        y1 = c[-1] * np.ones_like(x)
        for i in range(3, len(c) + 1):
            k -= 1
            y0, y1 = (
                c[-i] - y1 * math.sqrt(((k - 1.0) * (L + k - 1.0)) / ((L + k) * k)),
                y0 - y1 * ((L + 2.0 * k - 1.0) - x) / math.sqrt((L + k) * k),
            )
    return y0 - y1 * ((L + 1.0) - x) / math.sqrt(L + 1.0)


def wigner_point(rho_m: QMatrix, beta: complex) -> float:
    """Displaced-parity value at a single point, via the Laguerre closed form."""
    g = wigner(rho_m, re=(beta.real, beta.real, 1), im=(beta.imag, beta.imag, 1),
               tail_gate=None)
    return float(g.values[0, 0])


def wigner(
    rho_m: QMatrix,
    re: tuple[float, float, int] = (-3.0, 3.0, 121),
    im: tuple[float, float, int] = (-3.0, 3.0, 121),
    tail_gate: float | None = WIGNER_TAIL_GATE,
) -> WignerGrid:
    """Wigner function of a single-mode state on a rectangular grid.

    Evaluates the displaced-parity trace (2/pi) Tr[D†(beta) rho D(beta) P]
    through its Laguerre-series closed form (numerically stable Clenshaw
    recursion over the density-matrix diagonals).

    The tail gate errors out when a coherent state at the grid corner would
    lose more than `tail_gate` probability to truncation, which is the regime
    where displaced-state values become unreliable.
    """
    if len(rho_m.space.factors) != 1:
        raise ValueError("wigner expects a single-mode (reduced) state")
    dim = rho_m.space.dim
    re_min, re_max, re_n = re
    im_min, im_max, im_n = im
    corner = max(math.hypot(r, i) for r in (re_min, re_max) for i in (im_min, im_max))
    if tail_gate is not None:
        tail = coherent_tail_mass(dim, corner)
        if tail >= tail_gate:
            raise TruncationError(
                f"truncation dim={dim} too small for grid corner |beta|={corner:.2f} "
                f"(coherent tail mass {tail:.2e} >= {tail_gate:.0e})"
            )
    rho = _as_density_data(rho_m)
    x = np.linspace(re_min, re_max, re_n)
    y = np.linspace(im_min, im_max, im_n)
    B = x[None, :] + 1j * y[:, None]
    A2 = 2.0 * B
    X = np.abs(A2) ** 2
    # Double the off-diagonals once; the real part then collects both triangles.
    rho2 = rho * (2.0 - np.eye(dim))
    w = 2.0 * rho2[0, -1] * np.ones_like(A2) if dim > 1 else rho2[0, 0] * np.ones_like(A2)
    L = dim - 1
    while L > 0:
        L -= 1
        w = _laguerre_series(L, X, np.diag(rho2, L)) + w * A2 / math.sqrt(L + 1.0)
    values = (2.0 / math.pi) * np.real(w) * np.exp(-0.5 * X)
    return WignerGrid(re_min, re_max, re_n, im_min, im_max, im_n, values)


def fringe_ratio(grid: WignerGrid, im_extent: float = 1.0) -> float:
    """max |W| on the segment Re(beta)=0, |Im(beta)| <= im_extent, relative to
    the global max |W|."""
    re = grid.re_axis()
    i0 = int(np.argmin(np.abs(re)))
    if abs(re[i0]) > 1e-9 + 0.51 * (re[1] - re[0] if len(re) > 1 else 0.0):
        raise ValueError("grid does not contain the Re(beta)=0 axis")
    mask = np.abs(grid.im_axis()) <= im_extent
    seg = np.abs(grid.values[mask, i0]).max()
    return float(seg / np.abs(grid.values).max())


def fringe_verdict(grid: WignerGrid, threshold: float = FRINGE_THRESHOLD) -> str:
    return "cancelled" if fringe_ratio(grid) < threshold else "present"


# -- quadratures ----------------------------------------------------------------


def quadrature_stats(rho_m: QMatrix) -> dict[str, float]:
    """Means and variances of X1 = (m+m†)/sqrt(2) and X2 = i(m†-m)/sqrt(2)."""
    if len(rho_m.space.factors) != 1:
        raise ValueError("quadrature_stats expects a single-mode state")
    dim = rho_m.space.dim
    rho = _as_density_data(rho_m)
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    x1 = (a + a.conj().T) / math.sqrt(2.0)
    x2 = 1j * (a.conj().T - a) / math.sqrt(2.0)
    out = {}
    for name, op in (("x1", x1), ("x2", x2)):
        m1 = float(np.trace(rho @ op).real)
        m2 = float(np.trace(rho @ op @ op).real)
        out[f"mean_{name}"] = m1
        out[f"var_{name}"] = m2 - m1 * m1
    return out


# -- steady-state prediction ------------------------------------------------------


@dataclass(frozen=True)
class InitialSuperposition:
    """Bloch angles of cos(tb/2)|0> + sin(tb/2) e^{i pb} |1> on the magnon mode."""

    theta_b: float
    phi_b: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta_b <= math.pi:
            raise ValueError("theta_b outside [0, pi]")
        if not 0.0 <= self.phi_b < 2.0 * math.pi:
            raise ValueError("phi_b outside [0, 2pi)")

    @property
    def a(self) -> complex:
        return complex(math.cos(self.theta_b / 2.0))

    @property
    def b(self) -> complex:
        return math.sin(self.theta_b / 2.0) * cmath.exp(1j * self.phi_b)

    def ket(self, dim: int) -> QMatrix:
        v = np.zeros((dim, 1), dtype=complex)
        v[0, 0] = self.a
        v[1, 0] = self.b
        return QMatrix(single_mode(dim), v, "ket")


@dataclass(frozen=True)
class SteadyPrediction:
    weight_even: float
    weight_odd: float
    rho_coherent: QMatrix  # cross-coherence retained (pure-superposition ansatz)
    rho_mixture: QMatrix   # fringe-free parity mixture
    verdict: str | None    # which candidate a supplied numerical state matches


def predict_steady(
    init: InitialSuperposition,
    alpha: complex,
    dim: int,
    rho_numeric: QMatrix | None = None,
) -> SteadyPrediction:
    """Both asymptotic-state candidates for a |0>/|1> superposition start.

    The coherent candidate keeps the even-odd cross terms a*b |e><o| + h.c.;
    the mixture candidate drops them.  Whether the dissipative dynamics
    preserves that coherence is an empirical question, so when a numerical
    steady state is supplied the closer candidate (trace distance) is named in
    the verdict.
    """
    _, even = analytic_cat(dim, alpha, "even")
    _, odd = analytic_cat(dim, alpha, "odd")
    a, b = init.a, init.b
    pure = a * even.data + b * odd.data
    rho_coh = QMatrix(single_mode(dim), pure @ pure.conj().T, "density")
    we, wo = abs(a) ** 2, abs(b) ** 2
    ee = even.data @ even.data.conj().T
    oo = odd.data @ odd.data.conj().T
    rho_mix = QMatrix(single_mode(dim), we * ee + wo * oo, "density")
    verdict = None
    if rho_numeric is not None:
        d_coh = trace_distance(rho_coh, rho_numeric)
        d_mix = trace_distance(rho_mix, rho_numeric)
        verdict = "coherent" if d_coh < d_mix else "mixture"
    return SteadyPrediction(we, wo, rho_coh, rho_mix, verdict)
