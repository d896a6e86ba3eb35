"""Pure states, density matrices, Pauli strings and observables.

Qubit 0 is the leftmost Kronecker factor everywhere in the package, so the
basis state ``|b_0 b_1 ... b_{N-1}>`` has index ``int("b_0b_1...", 2)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import (
    NonHermitianResult,
    NotNormalized,
    SpaceMismatch,
    ValidationError,
)
from .linalg import DEFAULT_TOL, MAX_DIM, dagger, hermitian_eig, kron_all

PAULI_LETTERS = "IXYZ"

_PAULI_1Q = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}
for _m in _PAULI_1Q.values():
    _m.setflags(write=False)

# clamp threshold for eigenvalues before taking logarithms
ENTROPY_EIG_FLOOR = 1e-12


def single_qubit_pauli(letter: str) -> np.ndarray:
    try:
        return _PAULI_1Q[letter]
    except KeyError:
        raise ValidationError(f"unknown Pauli letter {letter!r}") from None


@dataclass(frozen=True)
class HilbertSpec:
    """Register of ``n_qubits`` qubits with dimension ``2**n_qubits``."""

    n_qubits: int

    def __post_init__(self):
        if not isinstance(self.n_qubits, (int, np.integer)) or self.n_qubits < 1:
            raise ValidationError(f"n_qubits must be a positive integer, got {self.n_qubits!r}")
        if 2**self.n_qubits > MAX_DIM:
            raise ValidationError(f"dimension 2**{self.n_qubits} exceeds the dense limit {MAX_DIM}")

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @classmethod
    def from_dim(cls, dim: int) -> "HilbertSpec":
        n = int(dim).bit_length() - 1
        if dim < 2 or 2**n != dim:
            raise ValidationError(f"dimension must be a power of two >= 2, got {dim}")
        return cls(n)


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis; ``letters[0]`` acts on qubit 0."""

    letters: str

    def __post_init__(self):
        if not self.letters or any(c not in PAULI_LETTERS for c in self.letters):
            raise ValidationError(f"invalid Pauli string {self.letters!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)

    @classmethod
    def single(cls, letter: str, qubit: int, n_qubits: int) -> "PauliString":
        """``letter`` on ``qubit`` and identity elsewhere."""
        if not 0 <= qubit < n_qubits:
            raise ValidationError(f"qubit {qubit} outside register of {n_qubits}")
        chars = ["I"] * n_qubits
        chars[qubit] = letter
        return cls("".join(chars))

    def __str__(self):
        return self.letters


@lru_cache(maxsize=4096)
def _pauli_matrix_cached(letters: str) -> np.ndarray:
    m = kron_all(_PAULI_1Q[c] for c in letters)
    m.setflags(write=False)
    return m


def pauli_matrix(p: PauliString | str) -> np.ndarray:
    """Dense ``2**N x 2**N`` matrix of a Pauli string (read-only array)."""
    if isinstance(p, str):
        p = PauliString(p)
    return _pauli_matrix_cached(p.letters)


def all_pauli_strings(n_qubits: int) -> list[PauliString]:
    """All ``4**N`` Pauli strings in lexicographic ``I < X < Y < Z`` order."""
    return [PauliString("".join(t)) for t in itertools.product(PAULI_LETTERS, repeat=n_qubits)]


@dataclass(frozen=True)
class PureState:
    """Normalized state vector."""

    amplitudes: np.ndarray
    space: HilbertSpec = field(default=None)

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        space = self.space or HilbertSpec.from_dim(amp.size)
        if amp.size != space.dim:
            raise SpaceMismatch(f"{amp.size} amplitudes for dimension {space.dim}")
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "space", space)

    @property
    def n_qubits(self) -> int:
        return self.space.n_qubits

    def norm_error(self) -> float:
        return abs(float(np.vdot(self.amplitudes, self.amplitudes).real) - 1.0)

    def is_normalized(self, tol: float = DEFAULT_TOL) -> bool:
        return self.norm_error() <= tol

    @classmethod
    def basis(cls, bits: str | int, n_qubits: int | None = None) -> "PureState":
        """Computational basis state, e.g. ``PureState.basis("01")``."""
        if isinstance(bits, str):
            n_qubits = len(bits)
            index = int(bits, 2)
        else:
            index = int(bits)
        space = HilbertSpec(n_qubits)
        amp = np.zeros(space.dim, dtype=np.complex128)
        amp[index] = 1.0
        return cls(amp, space)

    @classmethod
    def zero(cls, n_qubits: int) -> "PureState":
        return cls.basis(0, n_qubits)


@dataclass(frozen=True)
class DensityMatrix:
    """Density operator on a qubit register.

    Construction only checks the shape. Call :meth:`check` to verify
    Hermiticity, unit trace and positivity.
    """

    matrix: np.ndarray
    space: HilbertSpec = field(default=None)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"density matrix must be square, got shape {m.shape}")
        space = self.space or HilbertSpec.from_dim(m.shape[0])
        if m.shape[0] != space.dim:
            raise SpaceMismatch(f"matrix of size {m.shape[0]} for dimension {space.dim}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "space", space)

    @property
    def n_qubits(self) -> int:
        return self.space.n_qubits

    @property
    def dim(self) -> int:
        return self.space.dim

    def violations(self, tol: float = DEFAULT_TOL) -> list[str]:
        """Describe every violated density-matrix invariant."""
        m = self.matrix
        out = []
        herm = float(np.max(np.abs(m - dagger(m))))
        if herm > tol:
            out.append(f"not Hermitian (residue {herm:.3g})")
            return out
        tr = np.trace(m)
        if abs(tr - 1.0) > tol:
            out.append(f"trace {tr.real:.12g} != 1")
        lam_min = float(hermitian_eig(m, tol)[0][-1])
        if lam_min < -tol:
            out.append(f"negative eigenvalue {lam_min:.3g}")
        return out

    def is_valid(self, tol: float = DEFAULT_TOL) -> bool:
        return not self.violations(tol)

    def check(self, tol: float = DEFAULT_TOL) -> "DensityMatrix":
        """Return ``self`` or raise ``ValidationError`` listing violations."""
        problems = self.violations(tol)
        if problems:
            raise ValidationError("invalid density matrix: " + "; ".join(problems))
        return self

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "DensityMatrix":
        space = HilbertSpec(n_qubits)
        return cls(np.eye(space.dim, dtype=np.complex128) / space.dim, space)

    @classmethod
    def zero(cls, n_qubits: int) -> "DensityMatrix":
        return density_from_pure(PureState.zero(n_qubits))


@dataclass(frozen=True)
class Observable:
    """Real linear combination of Pauli strings."""

    terms: tuple[tuple[float, PauliString], ...]
    space: HilbertSpec = field(default=None)

    def __post_init__(self):
        terms = []
        for coef, p in self.terms:
            if isinstance(p, str):
                p = PauliString(p)
            coef = float(np.real_if_close(coef))
            terms.append((coef, p))
        if not terms:
            raise ValidationError("an observable needs at least one term")
        n = terms[0][1].n_qubits
        if any(p.n_qubits != n for _, p in terms):
            raise SpaceMismatch("Pauli strings of differing length in one observable")
        space = self.space or HilbertSpec(n)
        if space.n_qubits != n:
            raise SpaceMismatch(f"terms act on {n} qubits, space has {space.n_qubits}")
        object.__setattr__(self, "terms", tuple(terms))
        object.__setattr__(self, "space", space)

    @classmethod
    def from_pauli(cls, p: PauliString | str, coef: float = 1.0) -> "Observable":
        return cls(((coef, p),))

    @property
    def n_qubits(self) -> int:
        return self.space.n_qubits

    def identity_coefficient(self) -> float:
        return sum(c for c, p in self.terms if p.is_identity)

    def trace(self) -> float:
        """Trace of the realized matrix, ``d`` times the identity coefficient."""
        return self.space.dim * self.identity_coefficient()

    def matrix(self) -> np.ndarray:
        d = self.space.dim
        out = np.zeros((d, d), dtype=np.complex128)
        for coef, p in self.terms:
            out += coef * pauli_matrix(p)
        return out

    def scaled(self, factor: float) -> "Observable":
        return Observable(tuple((factor * c, p) for c, p in self.terms), self.space)


def density_from_pure(psi: PureState, tol: float = DEFAULT_TOL) -> DensityMatrix:
    """Rank-1 projector ``|psi><psi|``."""
    if not psi.is_normalized(tol):
        raise NotNormalized(f"state norm deviates from 1 by {psi.norm_error():.3g}")
    a = psi.amplitudes
    return DensityMatrix(np.outer(a, a.conj()), psi.space)


def purity(rho: DensityMatrix) -> float:
    """``Tr(rho^2)``, computed as the squared Frobenius norm."""
    m = rho.matrix
    return float(np.vdot(m, m).real)


def von_neumann_entropy(rho: DensityMatrix, log_base: float = 2.0) -> float:
    """Entropy ``-sum l log l`` over the spectrum of ``rho``.

    Eigenvalues below ``ENTROPY_EIG_FLOOR`` count as zero, so ``0 log 0 = 0``
    and tiny negative eigenvalues from averaging do not produce NaNs.
    """
    lam = hermitian_eig(rho.matrix, tol=1e-8)[0]
    lam = lam[lam > ENTROPY_EIG_FLOOR]
    return float(-np.sum(lam * np.log(lam)) / np.log(log_base))


def _check_space(a: HilbertSpec, b: HilbertSpec):
    if a.n_qubits != b.n_qubits:
        raise SpaceMismatch(f"{a.n_qubits}-qubit operand vs {b.n_qubits}-qubit operand")


def expectation(obs: Observable, rho: DensityMatrix) -> float:
    """``Tr(O rho)``; the imaginary residue must be below 1e-8."""
    _check_space(obs.space, rho.space)
    m = rho.matrix
    value = 0.0 + 0.0j
    for coef, p in obs.terms:
        # Tr(P rho) = sum_ij P_ij rho_ji
        value += coef * np.sum(pauli_matrix(p) * m.T)
    if abs(value.imag) > 1e-8:
        raise NonHermitianResult(f"expectation has imaginary part {value.imag:.3g}")
    return float(value.real)


def pauli_expectation(p: PauliString, rho: DensityMatrix) -> float:
    _check_space(HilbertSpec(p.n_qubits), rho.space)
    return float(np.sum(pauli_matrix(p) * rho.matrix.T).real)


def overlap(a: PureState, b: PureState) -> float:
    """``|<a|b>|``, clipped to ``[0, 1]``."""
    _check_space(a.space, b.space)
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes))))


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the trace norm of ``a - b``."""
    _check_space(a.space, b.space)
    lam = np.linalg.eigvalsh(a.matrix - b.matrix)
    return float(0.5 * np.sum(np.abs(lam)))
