"""Dense complex operator algebra over small composite Hilbert spaces.

A :class:`CompositeSpace` fixes an ordered list of tensor factors (label, dim);
every :class:`QMatrix` (operator, ket or density matrix) is tied to exactly one
space.  Index mapping is row-major over the ordered factors, i.e. the matrix of
``A on factor 0`` embedded in a two-factor space is ``kron(A, eye(d1))``.

All values are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.linalg import expm
from scipy.stats import poisson

__all__ = [
    "SpaceMismatchError",
    "TruncationError",
    "CompositeSpace",
    "QMatrix",
    "QubitOps",
    "single_mode",
    "qubit_magnon",
    "cavity_qubit_magnon",
    "annihilation",
    "creation",
    "number_op",
    "identity_op",
    "parity_op",
    "qubit_ops",
    "fock_ket",
    "coherent_ket",
    "coherent_tail_mass",
    "displacement_op",
    "ket_from_amplitudes",
    "density_from_ket",
    "random_density",
    "partial_trace",
    "expectation",
    "variance",
]

# Tolerances for the QMatrix kind invariants.
KET_NORM_TOL = 1e-10
HERM_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-8

COHERENT_TAIL_GATE = 1e-8


class SpaceMismatchError(ValueError):
    """Arithmetic attempted between values living on different spaces."""


class TruncationError(ValueError):
    """A Fock-space truncation is too small for the requested state."""


def _read_only(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CompositeSpace:
    """Ordered tensor-factor layout, e.g. (("qubit", 2), ("magnon", 30))."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        labels = [lab for lab, _ in self.factors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate factor labels in {labels}")
        for lab, d in self.factors:
            if d < 1:
                raise ValueError(f"factor {lab!r} has dim {d} < 1")

    @property
    def dim(self) -> int:
        return reduce(lambda acc, f: acc * f[1], self.factors, 1)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.factors)

    def index_of(self, label: str) -> int:
        for i, (lab, _) in enumerate(self.factors):
            if lab == label:
                return i
        raise KeyError(f"no factor labeled {label!r} in {self.labels}")

    def dim_of(self, label: str) -> int:
        return self.factors[self.index_of(label)][1]

    def embed(self, mat: np.ndarray, label: str) -> np.ndarray:
        """kron the single-factor matrix with identities on all other factors."""
        k = self.index_of(label)
        d = self.factors[k][1]
        mat = np.asarray(mat, dtype=complex)
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} != ({d}, {d}) for factor {label!r}")
        out = np.eye(1, dtype=complex)
        for i, (_, di) in enumerate(self.factors):
            out = np.kron(out, mat if i == k else np.eye(di, dtype=complex))
        return out


def single_mode(dim: int, label: str = "magnon") -> CompositeSpace:
    return CompositeSpace(((label, dim),))


def qubit_magnon(n: int) -> CompositeSpace:
    """Canonical two-body layout: qubit first, magnon mode second."""
    return CompositeSpace((("qubit", 2), ("magnon", n)))


def cavity_qubit_magnon(nc: int, n: int) -> CompositeSpace:
    """Canonical three-body layout for the full cavity model."""
    return CompositeSpace((("cavity", nc), ("qubit", 2), ("magnon", n)))


@dataclass(frozen=True)
class QMatrix:
    """Dense complex matrix (operator, ket column or density) on one space."""

    space: CompositeSpace
    data: np.ndarray
    kind: str  # "operator" | "ket" | "density"

    def __post_init__(self):
        object.__setattr__(self, "data", _read_only(self.data))
        d = self.space.dim
        want = (d, 1) if self.kind == "ket" else (d, d)
        if self.data.shape != want:
            raise ValueError(f"{self.kind} shape {self.data.shape} != {want}")
        if self.kind not in ("operator", "ket", "density"):
            raise ValueError(f"unknown kind {self.kind!r}")

    # -- arithmetic (only between values sharing one space) ------------------

    def _check(self, other: "QMatrix"):
        if self.space != other.space:
            raise SpaceMismatchError(
                f"operands live on different spaces: {self.space.labels} vs {other.space.labels}"
            )

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        self._check(other)
        kind = "ket" if other.kind == "ket" else "operator"
        return QMatrix(self.space, self.data @ other.data, kind)

    def __add__(self, other: "QMatrix") -> "QMatrix":
        self._check(other)
        if self.kind != other.kind:
            raise ValueError(f"cannot add {self.kind} and {other.kind}")
        return QMatrix(self.space, self.data + other.data, self.kind)

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        self._check(other)
        if self.kind != other.kind:
            raise ValueError(f"cannot subtract {self.kind} and {other.kind}")
        return QMatrix(self.space, self.data - other.data, self.kind)

    def __mul__(self, c: complex) -> "QMatrix":
        return QMatrix(self.space, self.data * c, self.kind)

    __rmul__ = __mul__

    def __neg__(self) -> "QMatrix":
        return QMatrix(self.space, -self.data, self.kind)

    def dag(self) -> "QMatrix":
        if self.kind == "ket":
            raise ValueError("dag() of a ket is a bra; not represented")
        return QMatrix(self.space, self.data.conj().T, self.kind)

    # -- diagnostics ----------------------------------------------------------

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def herm_defect(self) -> float:
        return float(np.linalg.norm(self.data - self.data.conj().T))

    def min_eig(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.data + self.data.conj().T)).min())

    def validate(self) -> None:
        """Raise if the kind invariants (norm / hermiticity / trace / PSD) fail."""
        if self.kind == "ket":
            if abs(self.norm() - 1.0) > KET_NORM_TOL:
                raise ValueError(f"ket norm {self.norm()} not 1 within {KET_NORM_TOL}")
        elif self.kind == "density":
            if self.herm_defect() > HERM_TOL:
                raise ValueError(f"density hermiticity defect {self.herm_defect()}")
            tr = complex(np.trace(self.data))
            if abs(tr - 1.0) > TRACE_TOL:
                raise ValueError(f"density trace {tr} not 1 within {TRACE_TOL}")
            lo = self.min_eig()
            if lo < -PSD_TOL:
                raise ValueError(f"density min eigenvalue {lo} < -{PSD_TOL}")


# -- operator constructors ----------------------------------------------------


def _lower(dim: int) -> np.ndarray:
    a = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        a[n - 1, n] = math.sqrt(n)
    return a


def annihilation(space: CompositeSpace, factor: str) -> QMatrix:
    """Truncated lowering operator on one bosonic factor, identity elsewhere."""
    d = space.dim_of(factor)
    if d < 2:
        raise ValueError(f"factor {factor!r} has dim {d} < 2")
    return QMatrix(space, space.embed(_lower(d), factor), "operator")


def creation(space: CompositeSpace, factor: str) -> QMatrix:
    return annihilation(space, factor).dag()


def number_op(space: CompositeSpace, factor: str) -> QMatrix:
    d = space.dim_of(factor)
    return QMatrix(space, space.embed(np.diag(np.arange(d, dtype=complex)), factor), "operator")


def identity_op(space: CompositeSpace) -> QMatrix:
    return QMatrix(space, np.eye(space.dim, dtype=complex), "operator")


def parity_op(space: CompositeSpace, factor: str = "magnon") -> QMatrix:
    """Bosonic number-parity operator: diagonal (-1)^n on the given factor."""
    d = space.dim_of(factor)
    diag = np.array([(-1.0) ** n for n in range(d)], dtype=complex)
    return QMatrix(space, space.embed(np.diag(diag), factor), "operator")


@dataclass(frozen=True)
class QubitOps:
    sz: QMatrix
    sp: QMatrix
    sm: QMatrix
    sx: QMatrix


def qubit_ops(space: CompositeSpace, label: str = "qubit") -> QubitOps:
    """Pauli set on the two-level factor; basis index 0 = ground, 1 = excited."""
    if space.dim_of(label) != 2:
        raise ValueError(f"factor {label!r} is not two-dimensional")
    sz = np.diag([-1.0 + 0j, 1.0])
    sm = np.zeros((2, 2), dtype=complex)
    sm[0, 1] = 1.0  # |g><e|
    sp = sm.conj().T
    return QubitOps(
        sz=QMatrix(space, space.embed(sz, label), "operator"),
        sp=QMatrix(space, space.embed(sp, label), "operator"),
        sm=QMatrix(space, space.embed(sm, label), "operator"),
        sx=QMatrix(space, space.embed(sp + sm, label), "operator"),
    )


# -- states --------------------------------------------------------------------


def fock_ket(dim: int, n: int, label: str = "magnon") -> QMatrix:
    if not 0 <= n < dim:
        raise ValueError(f"Fock level {n} outside [0, {dim})")
    v = np.zeros((dim, 1), dtype=complex)
    v[n, 0] = 1.0
    return QMatrix(single_mode(dim, label), v, "ket")


def coherent_amplitudes(dim: int, alpha: complex) -> np.ndarray:
    """Unnormalized Fock amplitudes alpha^n/sqrt(n!) times exp(-|alpha|^2/2)."""
    c = np.empty(dim, dtype=complex)
    c[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    return c


def coherent_tail_mass(dim: int, alpha: complex) -> float:
    """Probability mass of |alpha> on Fock levels >= dim (exact Poisson tail)."""
    if alpha == 0:
        return 0.0
    return float(poisson.sf(dim - 1, abs(alpha) ** 2))


def coherent_ket(dim: int, alpha: complex, label: str = "magnon",
                 tail_gate: float = COHERENT_TAIL_GATE) -> QMatrix:
    """Truncated coherent state, renormalized; errors if the cut tail exceeds the gate."""
    tail = coherent_tail_mass(dim, alpha)
    if tail >= tail_gate:
        raise TruncationError(
            f"coherent tail mass {tail:.3e} at dim={dim}, |alpha|={abs(alpha):.3f} "
            f"exceeds gate {tail_gate:.1e}"
        )
    c = coherent_amplitudes(dim, alpha)
    c = c / np.linalg.norm(c)
    return QMatrix(single_mode(dim, label), c.reshape(-1, 1), "ket")


def displacement_op(dim: int, beta: complex, label: str = "magnon") -> QMatrix:
    """exp(beta a† - beta* a) on the truncated space, via matrix exponential.

    Exactly unitary on the truncated space; a warning (not an error) is issued
    when D|0> fails the coherent tail gate at this dim.
    """
    sp = single_mode(dim, label)
    tail = coherent_tail_mass(dim, beta)
    if tail >= COHERENT_TAIL_GATE:
        warnings.warn(
            f"displacement |beta|={abs(beta):.3f} at dim={dim}: truncation tail {tail:.2e}",
            RuntimeWarning,
            stacklevel=2,
        )
    a = _lower(dim)
    return QMatrix(sp, expm(beta * a.conj().T - np.conj(beta) * a), "operator")


def ket_from_amplitudes(space: CompositeSpace, amps: np.ndarray, normalize: bool = False) -> QMatrix:
    v = np.asarray(amps, dtype=complex).reshape(-1, 1)
    if normalize:
        v = v / np.linalg.norm(v)
    ket = QMatrix(space, v, "ket")
    ket.validate()
    return ket


def density_from_ket(ket: QMatrix) -> QMatrix:
    if ket.kind != "ket":
        raise ValueError("density_from_ket expects a ket")
    v = ket.data
    return QMatrix(ket.space, v @ v.conj().T, "density")


def random_density(space: CompositeSpace, rng: np.random.Generator) -> QMatrix:
    """Ginibre-random full-rank density matrix (for property tests)."""
    d = space.dim
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return QMatrix(space, rho, "density")


# -- functionals ----------------------------------------------------------------


def partial_trace(rho: QMatrix, keep: str) -> QMatrix:
    """Reduced density matrix on the kept factor (all others traced out)."""
    if rho.kind != "density":
        raise ValueError("partial_trace expects a density matrix")
    space = rho.space
    k = space.index_of(keep)
    dims = [d for _, d in space.factors]
    nf = len(dims)
    t = rho.data.reshape(dims + dims)
    row = list(range(nf))
    col = [i if i != k else nf for i in range(nf)]  # fresh index on the kept ket side
    red = np.einsum(t, row + col, [k, nf])
    lab, d = space.factors[k]
    return QMatrix(single_mode(d, lab), red, "density")


def expectation(state: QMatrix, op: QMatrix) -> complex:
    """<psi|O|psi> for kets, Tr[rho O] for densities."""
    if state.space != op.space:
        raise SpaceMismatchError("state and operator live on different spaces")
    if state.kind == "ket":
        v = state.data
        return complex((v.conj().T @ op.data @ v)[0, 0])
    return complex(np.trace(state.data @ op.data))


def variance(state: QMatrix, op: QMatrix) -> float:
    """<O^2> - <O>^2 for Hermitian O."""
    if op.herm_defect() > HERM_TOL:
        raise ValueError("variance requires a Hermitian operator")
    o2 = QMatrix(op.space, op.data @ op.data, "operator")
    m1 = expectation(state, op)
    m2 = expectation(state, o2)
    return float(m2.real - m1.real**2)
