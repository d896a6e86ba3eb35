"""Independent reference implementations and frozen reference values.

Nothing here imports the package. Values marked frozen were computed once
with mpmath at 30 digits or with explicit Kronecker products and pasted in.
"""
import math
from functools import reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0 + 0j, -1.0])
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}

# entropy (bits) of the projected state and 1 - S/N, for d = 2, 4, 8, 16
ENTROPY_BITS = {
    2: 0.918295834054489515,
    4: 1.98989809546428729,
    8: 2.99868493216018268,
    16: 3.99983046064659214,
}
ONE_MINUS_S_OVER_N = {1: 0.0817041659455104852, 2: 0.00505095226785635348, 3: 0.000438355946605773122}

# unrounded layer budgets ln(2/delta) / (2 eps^2) with ||H|| = 1, eps = 0.1
BUDGET_RAW = {0.05: 184.443972705696815, 0.01: 264.915868327401834}

# periodic TFIM ground energies
TFIM_GROUND = {
    (2, -1.0): -2.8284271247461900976,
    (2, -0.25): -2.0615528128088303,
    (3, -1.0): -4.0,
    (4, -1.0): -5.226251859505507,
    (4, -0.5): -4.271558410139715,
}

# contraction of twirled 2-qubit X noise at p = 0.01: 1 - p (1 + 1/15)
TWIRLED_2Q_CONTRACTION = 0.98933333333333333333


def op_on(p: np.ndarray, i: int, n: int) -> np.ndarray:
    return reduce(np.kron, [p if k == i else I2 for k in range(n)])


def pauli_string(letters: str) -> np.ndarray:
    return reduce(np.kron, [PAULI[c] for c in letters])


def tfim_dense(n: int, x: float) -> np.ndarray:
    h = sum(x * op_on(X, i, n) @ op_on(X, (i + 1) % n, n) for i in range(n))
    return h - sum(op_on(Z, i, n) for i in range(n))


def entropy_bits(rho: np.ndarray) -> float:
    lam = np.linalg.eigvalsh(rho)
    lam = lam[lam > 1e-14]
    return float(-np.sum(lam * np.log2(lam)))


def closed_form_entropy(d: int) -> float:
    return math.log2(d + 1) + d / (d + 1) * math.log2((d - 1) / d)


def twirl_apply(unitaries, kraus, rho: np.ndarray) -> np.ndarray:
    """``(1/|G|) sum_U U^dag E(U rho U^dag) U`` evaluated directly on ``rho``."""
    out = np.zeros_like(rho)
    for u in unitaries:
        inner = u @ rho @ u.conj().T
        mapped = sum(a @ inner @ a.conj().T for a in kraus)
        out += u.conj().T @ mapped @ u
    return out / len(unitaries)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = rank or d
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return m / np.trace(m)


def random_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())
