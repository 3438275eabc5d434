"""Dense complex linear algebra for small Hermitian problems.

Everything here is a pure function of immutable inputs. Matrices stay below
~16x16 in this lab, so dense LAPACK calls are the whole story.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from app.config import settings
from app.core.exceptions import (
    DimensionMismatchError,
    EigensolverError,
    LabError,
    NotHermitianError,
)

logger = logging.getLogger("udcd.operators")


def _as_square(matrix) -> np.ndarray:
    arr = np.array(matrix, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionMismatchError(f"Expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise LabError("Matrix has non-finite entries")
    return arr


def _matrix_of(op) -> np.ndarray:
    if isinstance(op, (HermitianOperator, UnitaryMatrix)):
        return op.matrix
    return _as_square(op)


def hermiticity_defect(matrix: np.ndarray) -> float:
    """Largest entrywise |M - M^dagger| scaled by (1 + max |M|)."""
    return float(np.max(np.abs(matrix - matrix.conj().T)) / (1.0 + np.max(np.abs(matrix))))


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    matrix: np.ndarray

    def __post_init__(self):
        arr = _as_square(self.matrix)
        if hermiticity_defect(arr) > settings.HERMITIAN_TOL:
            raise NotHermitianError(
                f"Matrix is not Hermitian (defect {hermiticity_defect(arr):.2e})"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @classmethod
    def from_matrix(cls, matrix, tol: float = 1e-9) -> "HermitianOperator":
        """Project a numerically Hermitian matrix onto the exactly Hermitian one."""
        arr = _as_square(matrix)
        if hermiticity_defect(arr) > tol:
            raise NotHermitianError(
                f"Matrix is not Hermitian (defect {hermiticity_defect(arr):.2e})"
            )
        return cls(0.5 * (arr + arr.conj().T))

    @classmethod
    def zeros(cls, dim: int) -> "HermitianOperator":
        return cls(np.zeros((dim, dim), dtype=complex))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        _check_dims(self, other)
        return HermitianOperator(self.matrix + other.matrix)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        _check_dims(self, other)
        return HermitianOperator(self.matrix - other.matrix)


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    matrix: np.ndarray
    tol: float = field(default=0.0, compare=False, repr=False)

    def __post_init__(self):
        arr = _as_square(self.matrix)
        tol = self.tol or settings.UNITARY_TOL
        defect = float(np.max(np.abs(arr.conj().T @ arr - np.eye(arr.shape[0]))))
        if defect > tol:
            raise LabError(f"Matrix is not unitary (defect {defect:.2e})")
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, state: "StateVector") -> "StateVector":
        if state.dim != self.dim:
            raise DimensionMismatchError(f"Unitary of dim {self.dim} applied to state of dim {state.dim}")
        return StateVector.normalized(self.matrix @ state.amplitudes)


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        arr = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if arr.size == 0 or not np.all(np.isfinite(arr)):
            raise LabError("State vector must be non-empty and finite")
        norm = np.linalg.norm(arr)
        if abs(norm - 1.0) > 1e-12:
            raise LabError(f"State vector is not normalized (norm {norm:.15f})")
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    @classmethod
    def normalized(cls, amplitudes) -> "StateVector":
        arr = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(arr)
        if norm == 0.0:
            raise LabError("Cannot normalize the zero vector")
        return cls(arr / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Ascending eigenvalues and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def states(self) -> list[StateVector]:
        return [StateVector(self.vectors[:, n]) for n in range(self.dim)]

    def state(self, index: int) -> StateVector:
        return StateVector(self.vectors[:, index])

    def to_eigenbasis(self, matrix) -> np.ndarray:
        """Matrix elements <m|M|n> in this eigenbasis."""
        return self.vectors.conj().T @ _matrix_of(matrix) @ self.vectors

    def from_eigenbasis(self, matrix: np.ndarray) -> np.ndarray:
        return self.vectors @ matrix @ self.vectors.conj().T

    def exponential(self, t: float) -> UnitaryMatrix:
        """e^{-i t H} assembled from the stored spectrum."""
        phases = np.exp(-1j * float(t) * self.eigenvalues)
        return UnitaryMatrix((self.vectors * phases) @ self.vectors.conj().T)

    def gaps(self) -> np.ndarray:
        """omega_mn = E_m - E_n as a D x D array."""
        return self.eigenvalues[:, None] - self.eigenvalues[None, :]


def _check_dims(a, b) -> None:
    da, db = _matrix_of(a).shape[0], _matrix_of(b).shape[0]
    if da != db:
        raise DimensionMismatchError(f"Dimension mismatch: {da} vs {db}")


def commutator(a, b) -> np.ndarray:
    """[a, b] = ab - ba."""
    ma, mb = _matrix_of(a), _matrix_of(b)
    _check_dims(ma, mb)
    return ma @ mb - mb @ ma


def nested_commutator(h, b, order: int) -> np.ndarray:
    """L^order b with L = [h, .]; order 0 returns b itself."""
    if order < 0:
        raise LabError(f"Commutator order must be non-negative, got {order}")
    mh, result = _matrix_of(h), _matrix_of(b).copy()
    _check_dims(mh, result)
    for _ in range(order):
        result = mh @ result - result @ mh
    return result


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    # Largest-magnitude component of each column made real and non-negative.
    idx = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    return vectors * (np.abs(pivots) / pivots)[None, :]


def eigendecompose(h: HermitianOperator) -> SpectralDecomposition:
    try:
        eigenvalues, vectors = scipy.linalg.eigh(h.matrix)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(f"Eigensolver failed: {exc}") from exc

    vectors = _fix_phases(vectors)
    eigenvalues = np.array(eigenvalues, dtype=float)
    eigenvalues.setflags(write=False)
    vectors.setflags(write=False)
    return SpectralDecomposition(eigenvalues=eigenvalues, vectors=vectors)


def expm_hermitian(h: HermitianOperator, t: float) -> UnitaryMatrix:
    """e^{-i t h} via the spectral decomposition of h."""
    return eigendecompose(h).exponential(t)


def hs_norm(a) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.linalg.norm(_matrix_of(a), "fro"))


def spectral_norm(a) -> float:
    """Largest singular value; for Hermitian input, max |E_n|."""
    return float(np.linalg.norm(_matrix_of(a), 2))


def infidelity(target: StateVector, actual: StateVector) -> float:
    """1 - |<target|actual>|^2, clamped to [0, 1]."""
    if target.dim != actual.dim:
        raise DimensionMismatchError(f"State dimensions differ: {target.dim} vs {actual.dim}")
    overlap = np.vdot(target.amplitudes, actual.amplitudes)
    return float(min(1.0, max(0.0, 1.0 - abs(overlap) ** 2)))
