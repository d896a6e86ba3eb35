"""Apply small operators to chosen qubits of a vector or density matrix."""
from __future__ import annotations

import numpy as np


def _apply_axes(t: np.ndarray, op: np.ndarray, axes: list[int]) -> np.ndarray:
    k = len(axes)
    opt = op.reshape((2,) * (2 * k))
    res = np.tensordot(opt, t, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(res, list(range(k)), axes)


def apply_to_vector(psi: np.ndarray, op: np.ndarray, targets, n: int) -> np.ndarray:
    """``op`` acting on ``targets`` of an ``n``-qubit state vector."""
    targets = list(targets)
    if len(targets) == n and targets == list(range(n)):
        return op @ psi
    t = psi.reshape((2,) * n)
    return _apply_axes(t, op, targets).reshape(-1)


def conjugate(rho: np.ndarray, op: np.ndarray, targets, n: int) -> np.ndarray:
    """``op rho op^dagger`` with ``op`` acting on ``targets``."""
    targets = list(targets)
    if len(targets) == n and targets == list(range(n)):
        return op @ rho @ op.conj().T
    d = rho.shape[0]
    t = rho.reshape((2,) * (2 * n))
    t = _apply_axes(t, op, targets)
    t = _apply_axes(t, op.conj(), [n + q for q in targets])
    return t.reshape(d, d)


def kraus_sum(rho: np.ndarray, ops, targets, n: int) -> np.ndarray:
    """``sum_k A_k rho A_k^dagger`` with every ``A_k`` acting on ``targets``."""
    out = np.zeros_like(rho)
    for a in ops:
        out += conjugate(rho, a, targets, n)
    return out


def embed_operator(op: np.ndarray, targets, n: int) -> np.ndarray:
    """Full ``2**n`` matrix of ``op`` on ``targets`` tensored with identity."""
    targets = list(targets)
    k = len(targets)
    rest = [q for q in range(n) if q not in targets]
    full = np.kron(op, np.eye(2 ** (n - k), dtype=np.complex128))
    # axes of `full` follow the order targets + rest; map back to 0..n-1
    order = targets + rest
    t = full.reshape((2,) * (2 * n))
    perm = [order.index(q) for q in range(n)]
    t = t.transpose(perm + [n + p for p in perm])
    return t.reshape(2**n, 2**n)
