"""Physical parameter records and the derived-quantity chain.

Unit convention: every frequency-like number is stored as (angular frequency)/2pi
in MHz, matching how such values are usually quoted.  Time is in microseconds,
so a stored value f contributes a phase 2*pi*f*t.  Matrix-building code applies
the 2*pi; formulas that are ratios of frequencies need no conversion.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

__all__ = [
    "TWO_PI",
    "PhysicalParams",
    "MismatchParams",
    "DerivedParams",
    "derive_params",
    "paper_params",
]

TWO_PI = 2.0 * math.pi

_EPS_CHAIN_TOL = 1e-9


@dataclass(frozen=True)
class PhysicalParams:
    """Bare system, drive and dissipation parameters (frequencies in MHz/2pi units).

    The drive-modulation amplitudes are locked to a single knob eps_p:
    eps = sqrt(2)*eps_p, eps1 = 2*eps, eps2 = 4*eps.  They may be passed
    explicitly but must then satisfy the lock.
    """

    omega_c: float = 8420.0
    omega: float = 8165.9          # common qubit/magnon frequency (near resonance)
    g_q: float = 121.0
    g_m: float = 21.0
    eta1: float = 2500.0
    eta2: float = 50.0
    eta3: float = 0.75
    omega_1: float = 0.0
    omega_2: float = 0.0
    omega_3: float = 0.0
    omega_p: float = 0.0
    eps_p: float = 3.53
    eps: float | None = None
    eps1: float | None = None
    eps2: float | None = None
    phi1: float = 0.0
    phi2: float = 0.0
    phi3: float = 0.0
    gamma: float = 16.0
    gamma_phi: float = 16.0
    kappa: float = 0.0

    def __post_init__(self):
        eps = math.sqrt(2.0) * self.eps_p
        for name, given, want in (
            ("eps", self.eps, eps),
            ("eps1", self.eps1, 2.0 * eps),
            ("eps2", self.eps2, 4.0 * eps),
        ):
            if given is None:
                object.__setattr__(self, name, want)
            elif abs(given - want) > _EPS_CHAIN_TOL * max(1.0, want):
                raise ValueError(
                    f"{name}={given} breaks the modulation lock (expected {want} from eps_p={self.eps_p})"
                )
        for name in ("g_q", "g_m", "eta1", "eta2", "eta3", "eps_p", "gamma", "gamma_phi", "kappa"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class MismatchParams:
    """Drive imperfections: tone-frequency offset and drive-matching deviation.

    delta13 = omega_1 - omega_3 offset (MHz/2pi; kHz-scale in practice) and
    deta12 = eta1 - (omega_1 - omega_2).  Both vanish in the matched condition.
    """

    delta13: float = 0.0
    deta12: float = 0.0


@dataclass(frozen=True)
class DerivedParams:
    Delta: float
    omega_M: float
    omega_Q: float
    G: float
    Delta_m: float
    Delta_q: float
    Delta_12: float
    Delta_13: float
    delta_z: float
    delta_x: float
    theta: float
    nu: float
    g_x: float
    g_z: float
    g_eff: float
    delta_m: float
    alpha: complex

    @property
    def stark(self) -> float:
        """Drive-induced level-shift coefficient 8*g_x^2/(3*nu)."""
        return 8.0 * self.g_x**2 / (3.0 * self.nu)


def derive_params(p: PhysicalParams, mm: MismatchParams | None = None) -> DerivedParams:
    """Deterministic derivation chain from bare to effective-model parameters.

    The dressed-rotation angle is taken on the branch theta = atan2(delta_z,
    |delta_x|), which makes both dressed couplings g_x, g_z positive for the
    reference parameter set (theta = pi/4, g_x = g_z = sqrt(2) G/4) and the
    steady cat amplitude real.
    """
    mm = mm or MismatchParams()
    Delta = p.omega_c - p.omega
    if Delta == 0.0:
        raise ZeroDivisionError("cavity detuning Delta is zero")
    omega_M = p.omega + p.g_m**2 / Delta
    omega_Q = p.omega + p.g_q**2 / Delta
    G = p.g_q * p.g_m / Delta
    Delta_m = omega_M - p.omega_1
    Delta_q = omega_Q - p.omega_1
    Delta_12 = p.omega_1 - p.omega_2
    Delta_13 = (p.omega_1 - p.omega_3) + mm.delta13
    deta12 = (p.eta1 - Delta_12) + mm.deta12

    if Delta_m == Delta_13:
        raise ZeroDivisionError("Delta_m equals the tone offset; magnon frame undefined")
    delta_z = p.eta2 / 2.0
    # Tone offset renormalizes the transverse component; the drive-matching
    # deviation enters as a residual detuning along the static drive axis.
    delta_x = -p.eta3 * G / (Delta_m - Delta_13) + deta12
    nu = math.hypot(delta_z, delta_x)
    theta = math.atan2(delta_z, abs(delta_x))
    g_x = (G / 2.0) * math.sin(theta)
    g_z = (G / 2.0) * math.cos(theta)
    g_eff = 4.0 * g_x * g_z / nu
    delta_m = Delta_m - nu / 2.0
    alpha = cmath.sqrt(p.eps_p / g_eff) if g_eff != 0.0 else complex("nan")
    return DerivedParams(
        Delta=Delta,
        omega_M=omega_M,
        omega_Q=omega_Q,
        G=G,
        Delta_m=Delta_m,
        Delta_q=Delta_q,
        Delta_12=Delta_12,
        Delta_13=Delta_13,
        delta_z=delta_z,
        delta_x=delta_x,
        theta=theta,
        nu=nu,
        g_x=g_x,
        g_z=g_z,
        g_eff=g_eff,
        delta_m=delta_m,
        alpha=alpha,
    )


def paper_params(**overrides) -> PhysicalParams:
    """Reference parameter set: the primary tone sits 0.3 MHz below the
    dressed magnon frequency (so the transverse and longitudinal components
    are equal in magnitude), the second tone is matched (eta1 = omega_1 -
    omega_2), and the modulation frequency matches the dressed splitting.

    Overrides are applied on top; tone frequencies and omega_p re-derive from
    overridden values unless themselves overridden.
    """
    base = PhysicalParams(**{k: v for k, v in overrides.items() if k in _BARE_FIELDS})
    omega_M = base.omega + base.g_m**2 / (base.omega_c - base.omega)
    chain = {
        "omega_1": omega_M - 0.3,
    }
    chain["omega_2"] = overrides.get("omega_1", chain["omega_1"]) - base.eta1
    chain["omega_3"] = overrides.get("omega_1", chain["omega_1"])
    for k, v in overrides.items():
        if k not in _BARE_FIELDS:
            chain[k] = v
    p = replace(base, **{k: v for k, v in chain.items() if k != "omega_p"})
    omega_p = chain.get("omega_p", None)
    if omega_p is None:
        omega_p = derive_params(p).nu
    return replace(p, omega_p=omega_p)


_BARE_FIELDS = {
    "omega_c", "omega", "g_q", "g_m", "eta1", "eta2", "eta3",
    "eps_p", "eps", "eps1", "eps2", "phi1", "phi2", "phi3",
    "gamma", "gamma_phi", "kappa",
}
