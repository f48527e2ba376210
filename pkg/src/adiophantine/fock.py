"""Truncated multimode bosonic state space.

Provides basis indexing for occupation tuples with a per-mode cutoff,
state vectors, ladder and number operators, coherent states, and a small
operator algebra with a real-diagonal fast path next to dense complex
storage.  Dimensions are desk scale (hundreds to a few thousand); there is
no sparse backend.

JSON layout used for golden files: every state and operator serializes to
``{"basis": {"num_modes": k, "cutoff": n}, ...}``.  Complex data is encoded
as ``[re, im]`` pairs in row-major order; operators carry ``"storage":
"diagonal" | "dense"``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "TruncationWarning",
    "BasisMismatchError",
    "FockBasis",
    "StateVector",
    "Operator",
    "HermitianOperator",
    "annihilation",
    "creation",
    "number_operator",
    "coherent_state",
    "as_mode_alphas",
]

HERMITICITY_TOL = 1e-12


class TruncationWarning(UserWarning):
    """A construction lost more probability weight to the cutoff than advertised."""


class BasisMismatchError(ValueError):
    """Operands live on different bases."""


@dataclass(frozen=True)
class FockBasis:
    """Occupation tuples (n_1 .. n_k) with 0 <= n_i <= cutoff.

    Enumeration is row-major: mode 1 varies slowest.  ``index`` and
    ``occupation`` are exact inverses over the whole space.
    """

    num_modes: int
    cutoff: int

    def __post_init__(self):
        if self.num_modes < 1:
            raise ValueError("need at least one mode")
        if self.cutoff < 1:
            raise ValueError("cutoff must be at least 1")

    @property
    def dimension(self) -> int:
        return (self.cutoff + 1) ** self.num_modes

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cutoff + 1,) * self.num_modes

    def index(self, occupation: Sequence[int]) -> int:
        occ = tuple(int(n) for n in occupation)
        if len(occ) != self.num_modes:
            raise ValueError(f"expected {self.num_modes} occupations, got {len(occ)}")
        i = 0
        for n in occ:
            if not 0 <= n <= self.cutoff:
                raise ValueError(f"occupation {n} outside [0, {self.cutoff}]")
            i = i * (self.cutoff + 1) + n
        return i

    def occupation(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.dimension:
            raise ValueError(f"index {index} outside [0, {self.dimension})")
        digits = []
        i = int(index)
        for _ in range(self.num_modes):
            i, n = divmod(i, self.cutoff + 1)
            digits.append(n)
        return tuple(reversed(digits))

    def occupations(self) -> np.ndarray:
        """All occupation tuples as an int array of shape (dimension, num_modes)."""
        grids = np.unravel_index(np.arange(self.dimension), self.shape)
        return np.stack(grids, axis=1).astype(np.int64)

    def mode_stride(self, mode: int) -> int:
        self._check_mode(mode)
        return (self.cutoff + 1) ** (self.num_modes - 1 - mode)

    def _check_mode(self, mode: int) -> None:
        if not 0 <= mode < self.num_modes:
            raise ValueError(f"mode {mode} outside [0, {self.num_modes})")

    def to_json_dict(self) -> dict:
        return {"num_modes": self.num_modes, "cutoff": self.cutoff}

    @classmethod
    def from_json_dict(cls, data: dict) -> "FockBasis":
        return cls(int(data["num_modes"]), int(data["cutoff"]))


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitude vector over a FockBasis."""

    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.basis.dimension,):
            raise ValueError(
                f"amplitude vector of shape {amps.shape} does not match "
                f"dimension {self.basis.dimension}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.basis, self.amplitudes / n)

    def probabilities(self) -> np.ndarray:
        # re^2 + im^2 rather than |z|^2: no square-root round-trip
        return self.amplitudes.real**2 + self.amplitudes.imag**2

    def overlap(self, other: "StateVector") -> complex:
        _same_basis(self.basis, other.basis)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    @classmethod
    def basis_state(cls, basis: FockBasis, occupation: Sequence[int]) -> "StateVector":
        amps = np.zeros(basis.dimension, dtype=np.complex128)
        amps[basis.index(occupation)] = 1.0
        return cls(basis, amps)

    def to_json_dict(self) -> dict:
        return {
            "basis": self.basis.to_json_dict(),
            "kind": "state",
            "amplitudes": _complex_pairs(self.amplitudes),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "StateVector":
        basis = FockBasis.from_json_dict(data["basis"])
        return cls(basis, _pairs_to_complex(data["amplitudes"]))


def _same_basis(a: FockBasis, b: FockBasis) -> None:
    if a != b:
        raise BasisMismatchError(f"basis mismatch: {a} vs {b}")


def _complex_pairs(array: np.ndarray) -> list[list[float]]:
    flat = np.asarray(array, dtype=np.complex128).ravel(order="C")
    return [[float(z.real), float(z.imag)] for z in flat]


def _pairs_to_complex(pairs: Sequence[Sequence[float]]) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)


class Operator:
    """Linear operator over a FockBasis, stored dense or as a real diagonal.

    Diagonal storage is kept through addition, real scaling and composition
    with other diagonals; any mix with dense (or a genuinely complex scalar)
    promotes to dense complex storage.
    """

    __slots__ = ("basis", "_diagonal", "_matrix")

    def __init__(self, basis: FockBasis, *, diagonal=None, matrix=None):
        if (diagonal is None) == (matrix is None):
            raise ValueError("provide exactly one of diagonal or matrix")
        self.basis = basis
        if diagonal is not None:
            diag = np.array(diagonal, dtype=np.float64)
            if diag.shape != (basis.dimension,):
                raise ValueError("diagonal length does not match basis dimension")
            if not np.all(np.isfinite(diag)):
                raise ValueError("diagonal entries must be finite")
            diag.setflags(write=False)
            self._diagonal = diag
            self._matrix = None
        else:
            dense = np.array(matrix, dtype=np.complex128)
            dim = basis.dimension
            if dense.shape != (dim, dim):
                raise ValueError("matrix shape does not match basis dimension")
            if not np.all(np.isfinite(dense)):
                raise ValueError("matrix entries must be finite")
            dense.setflags(write=False)
            self._diagonal = None
            self._matrix = dense

    @classmethod
    def from_diagonal(cls, basis: FockBasis, values) -> "Operator":
        values = np.asarray(values)
        if np.iscomplexobj(values):
            if np.any(values.imag != 0):
                raise ValueError("diagonal storage is real")
            values = values.real
        return cls(basis, diagonal=values)

    @classmethod
    def from_matrix(cls, basis: FockBasis, matrix) -> "Operator":
        return cls(basis, matrix=matrix)

    @property
    def is_diagonal(self) -> bool:
        return self._diagonal is not None

    @property
    def diagonal(self) -> np.ndarray:
        if self._diagonal is None:
            raise ValueError("operator is stored dense, not diagonal")
        return self._diagonal

    def to_matrix(self) -> np.ndarray:
        if self._diagonal is not None:
            return np.diag(self._diagonal.astype(np.complex128))
        return self._matrix.copy()

    def apply(self, state: StateVector) -> StateVector:
        _same_basis(self.basis, state.basis)
        if self._diagonal is not None:
            return StateVector(self.basis, self._diagonal * state.amplitudes)
        return StateVector(self.basis, self._matrix @ state.amplitudes)

    def dagger(self) -> "Operator":
        if self._diagonal is not None:
            return Operator(self.basis, diagonal=self._diagonal)
        return Operator(self.basis, matrix=self._matrix.conj().T)

    def hermiticity_defect(self) -> float:
        if self._diagonal is not None:
            return 0.0
        return float(np.max(np.abs(self._matrix - self._matrix.conj().T)))

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return self.hermiticity_defect() <= tol

    def __add__(self, other: "Operator") -> "Operator":
        if not isinstance(other, Operator):
            return NotImplemented
        _same_basis(self.basis, other.basis)
        if self.is_diagonal and other.is_diagonal:
            return Operator(self.basis, diagonal=self._diagonal + other._diagonal)
        return Operator(self.basis, matrix=self.to_matrix() + other.to_matrix())

    def __sub__(self, other: "Operator") -> "Operator":
        if not isinstance(other, Operator):
            return NotImplemented
        return self + (-1.0) * other

    def __mul__(self, scalar) -> "Operator":
        if not isinstance(scalar, (int, float, complex)):
            return NotImplemented
        z = complex(scalar)
        if self.is_diagonal and z.imag == 0.0:
            return Operator(self.basis, diagonal=self._diagonal * z.real)
        return Operator(self.basis, matrix=self.to_matrix() * z)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return (-1.0) * self

    def __matmul__(self, other: "Operator") -> "Operator":
        if not isinstance(other, Operator):
            return NotImplemented
        _same_basis(self.basis, other.basis)
        if self.is_diagonal and other.is_diagonal:
            return Operator(self.basis, diagonal=self._diagonal * other._diagonal)
        return Operator(self.basis, matrix=self.to_matrix() @ other.to_matrix())

    def to_json_dict(self) -> dict:
        out: dict = {"basis": self.basis.to_json_dict(), "kind": "operator"}
        if self._diagonal is not None:
            out["storage"] = "diagonal"
            out["diagonal"] = [float(x) for x in self._diagonal]
        else:
            out["storage"] = "dense"
            out["matrix"] = _complex_pairs(self._matrix)
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "Operator":
        basis = FockBasis.from_json_dict(data["basis"])
        if data["storage"] == "diagonal":
            return cls(basis, diagonal=np.array(data["diagonal"], dtype=np.float64))
        dim = basis.dimension
        dense = _pairs_to_complex(data["matrix"]).reshape(dim, dim)
        return cls(basis, matrix=dense)


class HermitianOperator(Operator):
    """Operator validated Hermitian at construction.

    Diagonal storage is real by type; dense storage must be conjugate
    symmetric within ``HERMITICITY_TOL``.  ``eigensystem`` returns the full
    ascending spectrum (exactly, for diagonal storage).
    """

    __slots__ = ()

    def __init__(self, basis: FockBasis, *, diagonal=None, matrix=None):
        super().__init__(basis, diagonal=diagonal, matrix=matrix)
        if not self.is_diagonal:
            defect = self.hermiticity_defect()
            if defect > HERMITICITY_TOL:
                raise ValueError(
                    f"matrix is not Hermitian (defect {defect:.3e} > {HERMITICITY_TOL})"
                )

    def eigenvalues(self) -> np.ndarray:
        if self.is_diagonal:
            return np.sort(self.diagonal)
        return np.linalg.eigvalsh(self._matrix)

    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        """Ascending eigenvalues and matching eigenvector columns."""
        if self.is_diagonal:
            order = np.argsort(self.diagonal, kind="stable")
            vectors = np.eye(self.basis.dimension, dtype=np.complex128)[:, order]
            return self.diagonal[order].copy(), vectors
        return np.linalg.eigh(self._matrix)

    @classmethod
    def from_json_dict(cls, data: dict) -> "HermitianOperator":
        plain = Operator.from_json_dict(data)
        if plain.is_diagonal:
            return cls(plain.basis, diagonal=plain.diagonal)
        return cls(plain.basis, matrix=plain.to_matrix())


def annihilation(basis: FockBasis, mode: int) -> Operator:
    """Bosonic lowering operator on one mode: a|n> = sqrt(n)|n-1>.

    Exact on the truncated span; only the conjugate raising direction loses
    the transition out of the cutoff level.
    """
    basis._check_mode(mode)
    occ = basis.occupations()
    n = occ[:, mode]
    matrix = np.zeros((basis.dimension, basis.dimension), dtype=np.complex128)
    sources = np.nonzero(n > 0)[0]
    targets = sources - basis.mode_stride(mode)
    matrix[targets, sources] = np.sqrt(n[sources].astype(np.float64))
    return Operator(basis, matrix=matrix)


def creation(basis: FockBasis, mode: int) -> Operator:
    return annihilation(basis, mode).dagger()


def number_operator(basis: FockBasis, mode: int) -> HermitianOperator:
    """Diagonal occupation-count operator for one mode."""
    basis._check_mode(mode)
    occ = basis.occupations()
    return HermitianOperator(basis, diagonal=occ[:, mode].astype(np.float64))


def as_mode_alphas(alphas, num_modes: int) -> tuple[complex, ...]:
    """Broadcast a scalar displacement to every mode, or validate a sequence."""
    if isinstance(alphas, (int, float, complex)):
        return (complex(alphas),) * num_modes
    values = tuple(complex(a) for a in alphas)
    if len(values) != num_modes:
        raise ValueError(f"expected {num_modes} displacements, got {len(values)}")
    return values


def coherent_state(
    basis: FockBasis, alphas, *, truncation_warn: float = 1e-6
) -> StateVector:
    """Truncated coherent state with amplitudes ~ prod alpha_i^n_i / sqrt(n_i!).

    Renormalized to unit norm on the truncated space.  Emits a
    :class:`TruncationWarning` when the probability weight lost to the
    cutoff exceeds ``truncation_warn`` before renormalization.
    """
    alpha_list = as_mode_alphas(alphas, basis.num_modes)
    amplitudes = np.ones(1, dtype=np.complex128)
    kept_weight = 1.0
    for alpha in alpha_list:
        c = np.empty(basis.cutoff + 1, dtype=np.complex128)
        c[0] = 1.0
        for n in range(1, basis.cutoff + 1):
            c[n] = c[n - 1] * alpha / math.sqrt(n)
        amplitudes = np.kron(amplitudes, c)
        kept_weight *= min(
            float(np.sum(np.abs(c) ** 2)) / math.exp(abs(alpha) ** 2), 1.0
        )
    truncated_weight = 1.0 - kept_weight
    if truncated_weight > truncation_warn:
        warnings.warn(
            f"coherent state loses weight {truncated_weight:.3e} to the cutoff "
            f"{basis.cutoff} (limit {truncation_warn:.1e})",
            TruncationWarning,
            stacklevel=2,
        )
    amplitudes = amplitudes / np.linalg.norm(amplitudes)
    return StateVector(basis, amplitudes)
