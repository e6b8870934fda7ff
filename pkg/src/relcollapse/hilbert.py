"""Dense linear algebra on small tensor-product Hilbert spaces.

Basis ordering follows ``numpy.kron``: for two spins the basis is
``|uu>, |ud>, |du>, |dd>`` where the left letter belongs to subsystem 1.
Subsystems are numbered from 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

__all__ = [
    "Ket",
    "LinOp",
    "SpectralDecomp",
    "NotUnit",
    "DimMismatch",
    "NotHermitian",
    "BadDensity",
    "MAX_DIMENSION",
    "IDENTITY2",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "UP",
    "DOWN",
    "pauli",
    "spin_eigenvector",
    "embed",
    "singlet",
    "product_ket",
    "basis_ket",
    "sigma_total",
    "spectral",
    "partial_trace",
    "commutes",
    "fidelity",
    "density",
    "unit_vector",
]

MAX_DIMENSION = 4096
HERMITIAN_TOL = 1e-10
GROUPING_TOL = 1e-8
COMMUTATOR_TOL = 1e-10


class NotUnit(ValueError):
    pass


class DimMismatch(ValueError):
    pass


class NotHermitian(ValueError):
    pass


class BadDensity(ValueError):
    pass


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    arr.setflags(write=False)
    return arr


def _total(dims) -> int:
    return int(np.prod(dims)) if len(dims) else 1


@dataclass(frozen=True, eq=False)
class Ket:
    dims: tuple
    amplitudes: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.size != _total(dims):
            raise DimMismatch(f"{amps.size} amplitudes do not fit dimensions {dims}")
        if amps.size > MAX_DIMENSION:
            raise DimMismatch(f"total dimension {amps.size} exceeds {MAX_DIMENSION}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "Ket":
        n = self.norm
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return Ket(self.dims, self.amplitudes / n)

    def __matmul__(self, other: "Ket") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self):
        return f"Ket(dims={self.dims}, amplitudes={np.round(self.amplitudes, 6).tolist()})"


@dataclass(frozen=True, eq=False)
class LinOp:
    dims: tuple
    matrix: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        m = _frozen(self.matrix)
        n = _total(dims)
        if m.shape != (n, n):
            raise DimMismatch(f"matrix shape {m.shape} does not match dimensions {dims}")
        if n > MAX_DIMENSION:
            raise DimMismatch(f"total dimension {n} exceeds {MAX_DIMENSION}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) <= tol)

    def __matmul__(self, other):
        if isinstance(other, LinOp):
            _same_dims(self, other)
            return LinOp(self.dims, self.matrix @ other.matrix)
        if isinstance(other, Ket):
            if other.dims != self.dims:
                raise DimMismatch(f"operator dims {self.dims} vs ket dims {other.dims}")
            return Ket(self.dims, self.matrix @ other.amplitudes)
        return NotImplemented

    def __add__(self, other: "LinOp") -> "LinOp":
        _same_dims(self, other)
        return LinOp(self.dims, self.matrix + other.matrix)

    def __sub__(self, other: "LinOp") -> "LinOp":
        _same_dims(self, other)
        return LinOp(self.dims, self.matrix - other.matrix)

    def __mul__(self, scalar) -> "LinOp":
        return LinOp(self.dims, self.matrix * scalar)

    __rmul__ = __mul__

    def dagger(self) -> "LinOp":
        return LinOp(self.dims, self.matrix.conj().T)

    @classmethod
    def identity(cls, dims) -> "LinOp":
        return cls(tuple(dims), np.eye(_total(dims)))

    def __repr__(self):
        return f"LinOp(dims={self.dims}, matrix=\n{np.round(self.matrix, 6)})"


def _same_dims(a: LinOp, b: LinOp):
    if a.dims != b.dims:
        raise DimMismatch(f"dimension mismatch: {a.dims} vs {b.dims}")


@dataclass(frozen=True, eq=False)
class SpectralDecomp:
    """Eigenvalues with the projectors onto their (possibly degenerate) eigenspaces."""

    parts: tuple

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)

    @property
    def eigenvalues(self) -> tuple:
        return tuple(value for value, _ in self.parts)

    def projector(self, eigenvalue: float, tol: float = 1e-8) -> LinOp:
        for value, proj in self.parts:
            if abs(value - eigenvalue) <= tol * max(1.0, abs(value)):
                return proj
        raise KeyError(f"{eigenvalue} is not an eigenvalue (have {self.eigenvalues})")

    def reconstruct(self) -> LinOp:
        dims = self.parts[0][1].dims
        return LinOp(dims, sum(v * p.matrix for v, p in self.parts))

    def apply_function(self, fn) -> LinOp:
        """``fn(op)`` through the spectral theorem."""
        dims = self.parts[0][1].dims
        return LinOp(dims, sum(fn(v) * p.matrix for v, p in self.parts))


IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
UP = np.array([1, 0], dtype=complex)
DOWN = np.array([0, 1], dtype=complex)

_AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


def unit_vector(u) -> np.ndarray:
    """Accept an axis tag (``"x"``, ``"y"``, ``"z"``) or a 3-vector of unit length."""
    if isinstance(u, str):
        try:
            return np.array(_AXES[u])
        except KeyError:
            raise NotUnit(f"unknown axis tag {u!r}") from None
    v = np.asarray(u, dtype=float).reshape(-1)
    if v.size != 3:
        raise NotUnit("a spatial direction needs three components")
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise NotUnit(f"direction {v.tolist()} is not a unit vector")
    return v


def pauli(u) -> LinOp:
    """Spin operator ``u·σ`` along the unit direction ``u``."""
    v = unit_vector(u)
    return LinOp((2,), v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z)


def spin_eigenvector(u, sign: int) -> np.ndarray:
    """Closed-form eigenvector of ``u·σ`` for eigenvalue ``sign`` (±1).

    Uses the half-angle phase convention ``e^{∓iφ/2}`` on the up/down
    components, with polar angle θ and azimuth φ of ``u``.
    """
    v = unit_vector(u)
    theta = math.acos(max(-1.0, min(1.0, v[2])))
    phi = math.atan2(v[1], v[0])
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    em, ep = np.exp(-0.5j * phi), np.exp(0.5j * phi)
    if sign > 0:
        return np.array([c * em, s * ep])
    return np.array([-s * em, c * ep])


def embed(op: LinOp, subsystem: int, dims: Sequence[int]) -> LinOp:
    """Lift a single-subsystem operator to the full space (1-based ``subsystem``)."""
    dims = tuple(int(d) for d in dims)
    if not 1 <= subsystem <= len(dims):
        raise DimMismatch(f"subsystem {subsystem} out of range for dims {dims}")
    if op.dim != dims[subsystem - 1]:
        raise DimMismatch(f"operator of dimension {op.dim} cannot act on subsystem of size {dims[subsystem - 1]}")
    factors = [np.eye(d) for d in dims]
    factors[subsystem - 1] = op.matrix
    return LinOp(dims, reduce(np.kron, factors))


def basis_ket(dims: Sequence[int], indices: Sequence[int]) -> Ket:
    dims = tuple(dims)
    amps = np.zeros(_total(dims), dtype=complex)
    amps[np.ravel_multi_index(tuple(indices), dims)] = 1.0
    return Ket(dims, amps)


def product_ket(*factors) -> Ket:
    """Tensor product of kets or plain amplitude vectors (each one subsystem)."""
    dims, vecs = [], []
    for f in factors:
        if isinstance(f, Ket):
            dims.extend(f.dims)
            vecs.append(f.amplitudes)
        else:
            v = np.asarray(f, dtype=complex).reshape(-1)
            dims.append(v.size)
            vecs.append(v)
    return Ket(tuple(dims), reduce(np.kron, vecs))


def singlet() -> Ket:
    return Ket((2, 2), (np.kron(UP, DOWN) - np.kron(DOWN, UP)) / math.sqrt(2))


def sigma_total(u, n_spins: int = 2) -> LinOp:
    """Total spin component ``Σ_j u·σ^(j)`` on ``n_spins`` spin-1/2 factors."""
    dims = (2,) * n_spins
    s = pauli(u)
    return LinOp(dims, sum(embed(s, j, dims).matrix for j in range(1, n_spins + 1)))


def _snap(value: float) -> float:
    r = round(value)
    return float(r) if abs(value - r) <= 1e-12 * max(1.0, abs(value)) else float(value)


def spectral(op: LinOp, group_tol: float = GROUPING_TOL) -> SpectralDecomp:
    """Spectral decomposition with near-degenerate eigenvalues grouped."""
    if not op.is_hermitian():
        raise NotHermitian("spectral decomposition requires a hermitian operator")
    herm = 0.5 * (op.matrix + op.matrix.conj().T)
    values, vectors = np.linalg.eigh(herm)
    groups: list[list[int]] = []
    for k, v in enumerate(values):
        if groups and abs(v - values[groups[-1][0]]) <= group_tol * max(1.0, abs(v)):
            groups[-1].append(k)
        else:
            groups.append([k])
    parts = []
    for g in groups:
        vecs = vectors[:, g]
        parts.append((_snap(float(np.mean(values[g]))), LinOp(op.dims, vecs @ vecs.conj().T)))
    return SpectralDecomp(tuple(parts))


def density(ket: Ket) -> LinOp:
    a = ket.amplitudes
    return LinOp(ket.dims, np.outer(a, a.conj()))


def partial_trace(rho: LinOp, keep: int, tol: float = 1e-10) -> LinOp:
    """Reduced density matrix of subsystem ``keep`` (1-based)."""
    m = rho.matrix
    if not rho.is_hermitian(tol):
        raise BadDensity("density matrix must be hermitian")
    if abs(np.trace(m) - 1.0) > tol:
        raise BadDensity(f"density matrix trace is {np.trace(m).real:.3g}, expected 1")
    if np.min(np.linalg.eigvalsh(0.5 * (m + m.conj().T))) < -tol:
        raise BadDensity("density matrix has a negative eigenvalue")
    dims = rho.dims
    if not 1 <= keep <= len(dims):
        raise DimMismatch(f"subsystem {keep} out of range for dims {dims}")
    n = len(dims)
    t = m.reshape(dims + dims)
    k = keep - 1
    # Contract every factor except ``keep`` between its row and column copies.
    row = list(range(n))
    col = list(range(n, 2 * n))
    for j in range(n):
        if j != k:
            col[j] = row[j]
    out = np.einsum(t, row + col, [row[k], col[k]])
    return LinOp((dims[k],), out)


def commutes(a: LinOp, b: LinOp, tol: float = COMMUTATOR_TOL) -> tuple[bool, float]:
    """Whether ``[a, b]`` vanishes, together with its largest entry magnitude."""
    _same_dims(a, b)
    c = a.matrix @ b.matrix - b.matrix @ a.matrix
    worst = float(np.max(np.abs(c), initial=0.0))
    return worst <= tol, worst


def fidelity(a: Ket, b: Ket) -> float:
    """``|<a|b>|²`` for normalized kets; insensitive to global phase."""
    if a.dims != b.dims:
        raise DimMismatch(f"dims {a.dims} vs {b.dims}")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
