"""Dense complex linear algebra shared by the simulator.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
Comparisons always take an explicit tolerance; the package-wide default is
:data:`DEFAULT_TOL`.
"""
from __future__ import annotations

from functools import reduce

import numpy as np

from .errors import NotHermitian, ValidationError

DEFAULT_TOL = 1e-10

# dense envelope: d <= 2**10
MAX_DIM = 2**10


class SeedStream:
    """Reproducible random stream keyed by ``(master_seed, stream_index)``.

    Two streams built from the same pair produce identical draws. Distinct
    stream indices map to distinct ``SeedSequence`` spawn keys, which numpy
    guarantees to be statistically independent.

    Parameters
    ----------
    master_seed : int
        Non-negative 64-bit seed.
    stream_index : int, default=0
        Index of the sub-stream.
    """

    def __init__(self, master_seed: int, stream_index: int = 0):
        master_seed = int(master_seed)
        stream_index = int(stream_index)
        if not 0 <= master_seed < 2**64:
            raise ValidationError(f"master_seed must fit in 64 unsigned bits, got {master_seed}")
        if stream_index < 0:
            raise ValidationError(f"stream_index must be non-negative, got {stream_index}")
        self.master_seed = master_seed
        self.stream_index = stream_index
        seq = np.random.SeedSequence(master_seed, spawn_key=(stream_index,))
        self.rng = np.random.Generator(np.random.PCG64(seq))

    def child(self, index: int) -> "SeedStream":
        """Independent stream nested under this one.

        The child depends only on ``(master_seed, stream_index, index)`` and
        not on how many draws the parent has made.
        """
        child = SeedStream.__new__(SeedStream)
        child.master_seed = self.master_seed
        child.stream_index = self.stream_index
        seq = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.stream_index, int(index) + 1)
        )
        child.rng = np.random.Generator(np.random.PCG64(seq))
        return child

    def __repr__(self):
        return f"SeedStream(master_seed={self.master_seed}, stream_index={self.stream_index})"


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a 2-D complex128 array."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.size == 0:
        raise ValidationError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conjugate(np.swapaxes(m, -1, -2))


def allclose(a, b, tol: float = DEFAULT_TOL) -> bool:
    """Entrywise ``max |a - b| <= tol``; shapes must agree."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return False
    return bool(np.max(np.abs(a - b), initial=0.0) <= tol)


def kron(a, b) -> np.ndarray:
    """Kronecker product with the left factor as the most significant index."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(factors) -> np.ndarray:
    factors = list(factors)
    if not factors:
        raise ValidationError("kron_all needs at least one factor")
    return reduce(kron, factors)


def is_hermitian(m, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and allclose(m, dagger(m), tol)


def is_unitary(m, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``max |m^dagger m - I| <= tol``."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValidationError(f"is_unitary needs a square matrix, got {m.shape}")
    return allclose(dagger(m) @ m, np.eye(m.shape[0]), tol)


def hermitian_eig(m, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    m : array_like
        Square matrix, Hermitian within ``tol``.
    tol : float
        Maximum allowed entry of ``|m - m^dagger|``.

    Returns
    -------
    eigenvalues : ndarray
        Real eigenvalues in descending order.
    eigenvectors : ndarray
        Unitary matrix whose columns are the matching eigenvectors.

    Raises
    ------
    NotHermitian
        If ``m`` is not square or not Hermitian within ``tol``.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise NotHermitian(f"matrix is not square: {m.shape}")
    residue = float(np.max(np.abs(m - dagger(m))))
    if residue > tol:
        raise NotHermitian(f"max |m - m^dagger| = {residue:.3g} exceeds tol {tol:.3g}")
    # LAPACK zheevd on the symmetrized matrix; deterministic for a fixed input
    vals, vecs = np.linalg.eigh(0.5 * (m + dagger(m)))
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def haar_unitary(d: int, rng: SeedStream | np.random.Generator) -> np.ndarray:
    """Sample a ``d x d`` unitary from the Haar measure.

    QR-decompose a matrix of i.i.d. standard complex Gaussians and rescale
    the columns of ``Q`` by the phases of ``diag(R)``; without that phase
    fix the distribution of ``Q`` is not Haar.
    """
    if d < 2:
        raise ValidationError(f"haar_unitary needs d >= 2, got {d}")
    gen = rng.rng if isinstance(rng, SeedStream) else rng
    z = (gen.standard_normal((d, d)) + 1j * gen.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def haar_unitaries(d: int, count: int, rng: SeedStream | np.random.Generator) -> np.ndarray:
    """Stack of ``count`` independent Haar unitaries, shape ``(count, d, d)``.

    Same construction as :func:`haar_unitary`, batched.
    """
    if d < 2:
        raise ValidationError(f"haar_unitaries needs d >= 2, got {d}")
    gen = rng.rng if isinstance(rng, SeedStream) else rng
    shape = (int(count), d, d)
    z = (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diag / np.abs(diag))[:, None, :]
