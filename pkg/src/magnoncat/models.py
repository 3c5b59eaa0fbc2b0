"""The Hamiltonian ladder of the driven cavity-magnon-qubit system.

Each builder returns a term-tagged :class:`Hamiltonian`: a sum of (constant
matrix, scalar envelope) pairs, so integrators can evaluate H(t) without
reassembling operator products.  Matrices are stored in MHz/2pi units (the
engine applies the 2*pi); envelopes carry their full 2*pi*f*t phases.

Levels, from the full three-body model down to the time-averaged two-magnon
model:

    THREE_MODE   cavity + qubit + magnon, beam-splitter couplings
    JC           cavity adiabatically eliminated, exchange coupling G
    ROTATING     frame of the primary drive tone, all sidebands kept
    RWA1         fast (two-tone-sum) sidebands dropped
    RABI         static-drive interaction picture + magnon displacement
    DRESSED      qubit basis rotated onto the static field (splitting nu)
    INTERACTION  frame of the modulation tone at omega_p = nu
    EFFECTIVE    time-averaged two-magnon exchange model
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .hilbert import (
    CompositeSpace,
    QMatrix,
    annihilation,
    number_op,
    qubit_ops,
)
from .params import TWO_PI, DerivedParams, MismatchParams, PhysicalParams, derive_params

__all__ = [
    "ModelLevel",
    "HTerm",
    "Hamiltonian",
    "apply_mismatch",
    "build_three_mode",
    "build_jc",
    "build_rotating",
    "build_rwa1",
    "build_rabi",
    "build_dressed",
    "build_interaction",
    "build_effective",
    "build",
    "dressed_rotation",
    "frame_displacement",
    "frame_map",
    "FrameError",
]


class ModelLevel(enum.Enum):
    THREE_MODE = "THREE_MODE"
    JC = "JC"
    ROTATING = "ROTATING"
    RWA1 = "RWA1"
    RABI = "RABI"
    DRESSED = "DRESSED"
    INTERACTION = "INTERACTION"
    EFFECTIVE = "EFFECTIVE"

    @property
    def time_dependent(self) -> bool:
        return self in (
            ModelLevel.ROTATING,
            ModelLevel.RWA1,
            ModelLevel.RABI,
            ModelLevel.DRESSED,
            ModelLevel.INTERACTION,
        )


class FrameError(ValueError):
    """Requested frame pair is not connected by a unitary in the ladder."""


@dataclass(frozen=True)
class HTerm:
    tag: str
    mat: np.ndarray
    envelope: Callable[[float], complex] | None = None
    pair: bool = False  # True: contribution env(t)*mat + conj(env(t))*mat†
    freq: float = 0.0   # fastest |frequency| in the envelope, MHz

    def matrix(self, t: float) -> np.ndarray:
        if self.envelope is None:
            return self.mat
        c = self.envelope(t)
        if self.pair:
            return c * self.mat + np.conj(c) * self.mat.conj().T
        return c.real * self.mat


class Hamiltonian:
    """Term-tagged, possibly time-dependent Hamiltonian on one space."""

    def __init__(self, space: CompositeSpace, level: ModelLevel, terms: list[HTerm]):
        self.space = space
        self.level = level
        self.terms = list(terms)
        static = [tm.mat for tm in terms if tm.envelope is None]
        self._static = sum(static) if static else np.zeros((space.dim, space.dim), dtype=complex)
        self._td = [tm for tm in terms if tm.envelope is not None]
        self.fastest_freq = max((tm.freq for tm in terms), default=0.0)

    @property
    def tags(self) -> list[str]:
        return [tm.tag for tm in self.terms]

    def f_matrix(self, t: float = 0.0) -> np.ndarray:
        h = self._static.copy()
        for tm in self._td:
            c = tm.envelope(t)
            if tm.pair:
                h += c * tm.mat
                h += np.conj(c) * tm.mat.conj().T
            else:
                h += c.real * tm.mat
        return h

    def term_matrix(self, tag: str, t: float = 0.0) -> np.ndarray:
        for tm in self.terms:
            if tm.tag == tag:
                return tm.matrix(t)
        raise KeyError(f"no term tagged {tag!r}; have {self.tags}")

    def qmatrix(self, t: float = 0.0) -> QMatrix:
        return QMatrix(self.space, self.f_matrix(t), "operator")


def apply_mismatch(p: PhysicalParams, mm: MismatchParams | None) -> PhysicalParams:
    """Fold declarative tone offsets into the actual tone frequencies."""
    if mm is None or (mm.delta13 == 0.0 and mm.deta12 == 0.0):
        return p
    from dataclasses import replace

    return replace(p, omega_2=p.omega_2 + mm.deta12, omega_3=p.omega_3 - mm.delta13)


def _two_body(space: CompositeSpace):
    labels = set(space.labels)
    if labels != {"qubit", "magnon"}:
        raise ValueError(f"expected a qubit+magnon space, got {space.labels}")
    q = qubit_ops(space)
    m = annihilation(space, "magnon")
    return q, m.data, m.dag().data, number_op(space, "magnon").data


# -- builders ---------------------------------------------------------------------


def build_three_mode(
    space: CompositeSpace,
    p: PhysicalParams,
    omega_q: float | None = None,
    omega_m: float | None = None,
) -> Hamiltonian:
    """Full three-body model: cavity-qubit and cavity-magnon exchange couplings.

    The bare qubit/magnon frequencies default to the common near-resonant
    value; they can be split (e.g. to align the dressed frequencies) without
    touching the parameter record.
    """
    if set(space.labels) != {"cavity", "qubit", "magnon"}:
        raise ValueError(f"expected cavity+qubit+magnon, got {space.labels}")
    wq = p.omega if omega_q is None else omega_q
    wm = p.omega if omega_m is None else omega_m
    q = qubit_ops(space)
    c = annihilation(space, "cavity")
    m = annihilation(space, "magnon")
    h = (
        p.omega_c * (c.dag() @ c).data
        + 0.5 * wq * q.sz.data
        + wm * (m.dag() @ m).data
        + p.g_q * ((c @ q.sp).data + (c.dag() @ q.sm).data)
        + p.g_m * ((c @ m.dag()).data + (c.dag() @ m).data)
    )
    return Hamiltonian(space, ModelLevel.THREE_MODE, [HTerm("full", h)])


def build_jc(
    space: CompositeSpace,
    p: PhysicalParams,
    mm: MismatchParams | None = None,
    derived: DerivedParams | None = None,
) -> Hamiltonian:
    """Exchange model after cavity elimination: dressed frequencies and coupling G."""
    d = derived or derive_params(apply_mismatch(p, mm))
    q, m, md, n = _two_body(space)
    terms = [
        HTerm("magnon_energy", d.omega_M * n),
        HTerm("qubit_energy", 0.5 * d.omega_Q * q.sz.data),
        HTerm("exchange", d.G * (q.sp.data @ m + q.sm.data @ md)),
    ]
    return Hamiltonian(space, ModelLevel.JC, terms)


def _drive_terms(p: PhysicalParams, d: DerivedParams, q, m, md, fast: bool) -> list[HTerm]:
    """Shared drive terms of the primary-tone rotating frame (slow set), plus
    the dropped two-tone-sum sidebands when `fast` is set."""
    wp = TWO_PI * p.omega_p
    sx = q.sx.data
    sp_ = q.sp.data

    def eta1_t(t):
        return p.eta1 + p.eps1 * math.cos(wp * t)

    def eta2_t(t):
        return p.eta2 + p.eps2 * math.cos(wp * t)

    w12 = TWO_PI * d.Delta_12
    w13 = TWO_PI * d.Delta_13
    terms = [
        HTerm("drive1_static", 0.5 * p.eta1 * sx),
        HTerm(
            "drive1_mod",
            0.5 * p.eps1 * sx,
            envelope=lambda t: complex(math.cos(wp * t)),
            freq=p.omega_p,
        ),
        HTerm(
            "drive2",
            sp_,
            envelope=lambda t: 0.5 * eta2_t(t) * np.exp(1j * w12 * t),
            pair=True,
            freq=abs(d.Delta_12) + p.omega_p,
        ),
        HTerm(
            "magnon_drive",
            md,
            envelope=lambda t: 0.5 * p.eta3 * np.exp(1j * w13 * t),
            pair=True,
            freq=abs(d.Delta_13),
        ),
    ]
    if fast:
        w11 = TWO_PI * 2.0 * p.omega_1
        w1p2 = TWO_PI * (p.omega_1 + p.omega_2)
        w1p3 = TWO_PI * (p.omega_1 + p.omega_3)
        terms += [
            HTerm(
                "fast_drive1",
                sp_,
                envelope=lambda t: 0.5 * eta1_t(t) * np.exp(1j * w11 * t),
                pair=True,
                freq=2.0 * p.omega_1 + p.omega_p,
            ),
            HTerm(
                "fast_drive2",
                sp_,
                envelope=lambda t: 0.5 * eta2_t(t) * np.exp(1j * w1p2 * t),
                pair=True,
                freq=p.omega_1 + p.omega_2 + p.omega_p,
            ),
            HTerm(
                "fast_magnon",
                md,
                envelope=lambda t: 0.5 * p.eta3 * np.exp(1j * w1p3 * t),
                pair=True,
                freq=p.omega_1 + p.omega_3,
            ),
        ]
    return terms


def _rotating_frame(space, p, mm, derived, fast: bool, level: ModelLevel) -> Hamiltonian:
    p = apply_mismatch(p, mm)
    d = derived or derive_params(p)
    q, m, md, n = _two_body(space)
    terms = [
        HTerm("magnon_detuning", d.Delta_m * n),
        HTerm("qubit_detuning", 0.5 * d.Delta_q * q.sz.data),
        HTerm("exchange", d.G * (q.sp.data @ m + q.sm.data @ md)),
    ]
    terms += _drive_terms(p, d, q, m, md, fast=fast)
    return Hamiltonian(space, level, terms)


def build_rotating(space, p, mm=None, derived=None) -> Hamiltonian:
    """Primary-tone rotating frame with every sideband retained (exact)."""
    return _rotating_frame(space, p, mm, derived, fast=True, level=ModelLevel.ROTATING)


def build_rwa1(space, p, mm=None, derived=None) -> Hamiltonian:
    """Rotating frame after dropping the two-tone-sum sidebands (first RWA)."""
    return _rotating_frame(space, p, mm, derived, fast=False, level=ModelLevel.RWA1)


def build_rabi(space, p, mm=None, derived=None) -> Hamiltonian:
    """Static-drive interaction picture after the magnon displacement.

    Structure: (dz/2) sz + (dx/2) sx + Dm n + (G/2)(m†+m) sx
               + eps cos(wp t)(sx + sz),
    with dx carrying its derived (negative) sign.
    """
    p = apply_mismatch(p, mm)
    d = derived or derive_params(p)
    q, m, md, n = _two_body(space)
    wp = TWO_PI * p.omega_p
    terms = [
        HTerm("qubit_z", 0.5 * d.delta_z * q.sz.data),
        HTerm("qubit_x", 0.5 * d.delta_x * q.sx.data),
        HTerm("magnon_detuning", d.Delta_m * n),
        HTerm("coupling", 0.5 * d.G * ((m + md) @ q.sx.data)),
        HTerm(
            "drive_mod",
            p.eps * (q.sx.data + q.sz.data),
            envelope=lambda t: complex(math.cos(wp * t)),
            freq=p.omega_p,
        ),
    ]
    return Hamiltonian(space, ModelLevel.RABI, terms)


def build_dressed(space, p, mm=None, derived=None) -> Hamiltonian:
    """Dressed-basis model: splitting nu, longitudinal and transverse couplings.

    Pauli operators act in the dressed basis (index 0 = lower dressed state);
    couplings use the positive-branch values g_x = (G/2) sin(theta),
    g_z = (G/2) cos(theta) and the drive amplitude is eps_p = sqrt(2) eps / 2.
    """
    p = apply_mismatch(p, mm)
    d = derived or derive_params(p)
    q, m, md, n = _two_body(space)
    wp = TWO_PI * p.omega_p
    xm = m + md
    terms = [
        HTerm("qubit_energy", 0.5 * d.nu * q.sz.data),
        HTerm("magnon_detuning", d.Delta_m * n),
        HTerm("coupling_z", d.g_z * (xm @ q.sz.data)),
        HTerm("coupling_x", d.g_x * (xm @ q.sx.data)),
        HTerm(
            "drive",
            p.eps_p * q.sx.data,
            envelope=lambda t: complex(math.cos(wp * t)),
            freq=p.omega_p,
        ),
    ]
    return Hamiltonian(space, ModelLevel.DRESSED, terms)


def build_interaction(space, p, mm=None, derived=None) -> Hamiltonian:
    """Modulation-tone frame at omega_p = nu: detuned magnon, phase-tagged
    couplings at nu/2 and 3 nu/2, and the static transverse drive."""
    p = apply_mismatch(p, mm)
    d = derived or derive_params(p)
    if abs(p.omega_p - d.nu) > 1e-9 * max(1.0, d.nu):
        raise ValueError(f"omega_p={p.omega_p} != nu={d.nu}; the frame assumes resonance")
    q, m, md, n = _two_body(space)
    whalf = TWO_PI * d.nu / 2.0
    sz = q.sz.data
    sp_ = q.sp.data
    terms = [
        HTerm("magnon_detuning", d.delta_m * n),
        HTerm(
            "coupling_z",
            md @ sz,
            envelope=lambda t: d.g_z * np.exp(1j * whalf * t),
            pair=True,
            freq=d.nu / 2.0,
        ),
        HTerm(
            "coupling_x_slow",
            m @ sp_,
            envelope=lambda t: d.g_x * np.exp(1j * whalf * t),
            pair=True,
            freq=d.nu / 2.0,
        ),
        HTerm(
            "coupling_x_fast",
            md @ sp_,
            envelope=lambda t: d.g_x * np.exp(3j * whalf * t),
            pair=True,
            freq=1.5 * d.nu,
        ),
        HTerm("drive", p.eps_p * q.sx.data),
    ]
    return Hamiltonian(space, ModelLevel.INTERACTION, terms)


def build_effective(space, p, mm=None, derived=None, include_detuning: bool = False) -> Hamiltonian:
    """Time-averaged two-magnon model: level shift on the upper dressed state,
    pair exchange at g_eff, static transverse drive.

    The residual magnon detuning delta_m = Delta_m - nu/2 is omitted by
    default (matching the time-averaged model as published); include_detuning
    adds it back for calibration sweeps.
    """
    p = apply_mismatch(p, mm)
    d = derived or derive_params(p)
    q, m, md, n = _two_body(space)
    p_up = 0.5 * (np.eye(space.dim) + q.sz.data)
    m2 = m @ m
    two_mag = m2 @ q.sp.data
    terms = [
        HTerm("stark", d.stark * (p_up + 2.0 * (n @ p_up))),
        HTerm("two_magnon", -d.g_eff * (two_mag + two_mag.conj().T)),
        HTerm("drive", p.eps_p * q.sx.data),
    ]
    if include_detuning:
        terms.append(HTerm("magnon_detuning", d.delta_m * n))
    return Hamiltonian(space, ModelLevel.EFFECTIVE, terms)


_BUILDERS = {
    ModelLevel.THREE_MODE: build_three_mode,
    ModelLevel.JC: build_jc,
    ModelLevel.ROTATING: build_rotating,
    ModelLevel.RWA1: build_rwa1,
    ModelLevel.RABI: build_rabi,
    ModelLevel.DRESSED: build_dressed,
    ModelLevel.INTERACTION: build_interaction,
    ModelLevel.EFFECTIVE: build_effective,
}


def build(level: ModelLevel, space: CompositeSpace, p: PhysicalParams, mm=None, **kw) -> Hamiltonian:
    if level == ModelLevel.THREE_MODE:
        return build_three_mode(space, p, **kw)
    return _BUILDERS[level](space, p, mm, **kw)


# -- frame alignment ----------------------------------------------------------------


def dressed_rotation(d: DerivedParams) -> np.ndarray:
    """2x2 unitary sending the static qubit field (dz sz + dx sx)/2 to the
    diagonal (nu/2) sz, with the transverse-coupling image chosen positive.

    Deterministic phase convention: the lower dressed state has its largest
    component real positive; the upper state's phase makes <up|sx|down> >= 0.
    """
    hq = 0.5 * np.array(
        [[-d.delta_z, d.delta_x], [d.delta_x, d.delta_z]], dtype=complex
    )
    w, v = np.linalg.eigh(hq)
    v0 = v[:, 0]
    v1 = v[:, 1]
    k = int(np.argmax(np.abs(v0)))
    v0 = v0 * np.exp(-1j * np.angle(v0[k]))
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    ov = v1.conj() @ sx @ v0
    if abs(ov) > 1e-12:
        v1 = v1 * np.exp(1j * np.angle(ov))
    else:
        k = int(np.argmax(np.abs(v1)))
        v1 = v1 * np.exp(-1j * np.angle(v1[k]))
    return np.vstack([v0.conj(), v1.conj()])


def frame_displacement(p: PhysicalParams, d: DerivedParams) -> float:
    """Magnon displacement absorbing the static magnon drive: eta3/(2 Delta_m)."""
    return p.eta3 / (2.0 * d.Delta_m)


_LADDER = [
    ModelLevel.JC,
    ModelLevel.ROTATING,
    ModelLevel.RWA1,
    ModelLevel.RABI,
    ModelLevel.DRESSED,
    ModelLevel.INTERACTION,
    ModelLevel.EFFECTIVE,
]


def _link_unitary(space, i: int, p: PhysicalParams, d: DerivedParams, t: float) -> np.ndarray:
    """Unitary taking a state of _LADDER[i] to _LADDER[i+1] at time t."""
    frm = _LADDER[i]
    if frm == ModelLevel.JC:  # lab -> primary-tone rotating frame
        n = number_op(space, "magnon").data
        sz = qubit_ops(space).sz.data
        gen = np.diag(n) + 0.5 * np.diag(sz)
        return np.diag(np.exp(1j * TWO_PI * p.omega_1 * t * gen))
    if frm == ModelLevel.ROTATING:
        return np.eye(space.dim, dtype=complex)
    if frm == ModelLevel.RWA1:  # static-drive interaction picture, then displacement
        sx2 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        u0 = space.embed(expm(1j * TWO_PI * 0.5 * p.eta1 * t * sx2), "qubit")
        beta0 = frame_displacement(p, d)
        a2 = np.diag(np.sqrt(np.arange(1, space.dim_of("magnon"), dtype=float)), 1).astype(complex)
        disp = space.embed(expm(beta0 * a2.conj().T - beta0 * a2), "magnon")
        return disp @ u0
    if frm == ModelLevel.RABI:
        return space.embed(dressed_rotation(d), "qubit")
    if frm == ModelLevel.DRESSED:  # modulation-tone frame
        n = number_op(space, "magnon").data
        sz = qubit_ops(space).sz.data
        gen = np.diag(n) + np.diag(sz)
        return np.diag(np.exp(1j * TWO_PI * 0.5 * p.omega_p * t * gen))
    if frm == ModelLevel.INTERACTION:
        return np.eye(space.dim, dtype=complex)
    raise FrameError(f"no unitary link from {frm}")


def frame_map(
    state: QMatrix,
    frm: ModelLevel,
    to: ModelLevel,
    p: PhysicalParams,
    mm: MismatchParams | None = None,
    t: float = 0.0,
) -> QMatrix:
    """Map a state between ladder frames by the composed link unitaries.

    All two-body levels are composable; the three-body model is connected to
    the ladder by a non-unitary elimination step and is rejected.
    """
    if frm == to:
        return state
    if ModelLevel.THREE_MODE in (frm, to):
        raise FrameError("the three-body level is not unitarily composable with the ladder")
    p = apply_mismatch(p, mm)
    d = derive_params(p)
    a = _LADDER.index(frm)
    b = _LADDER.index(to)
    u = np.eye(state.space.dim, dtype=complex)
    if a < b:
        for i in range(a, b):
            u = _link_unitary(state.space, i, p, d, t) @ u
    else:
        for i in range(b, a):
            u = _link_unitary(state.space, i, p, d, t) @ u
        u = u.conj().T
    if state.kind == "ket":
        return QMatrix(state.space, u @ state.data, "ket")
    return QMatrix(state.space, u @ state.data @ u.conj().T, state.kind)
