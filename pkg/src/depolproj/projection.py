"""Depolarizing projection of layer-wise Pauli noise.

Under a Pauli channel ``(1 - p) id + p Lambda`` after each of ``L`` layers,
the number of faulty layers is binomial. Keeping only single faults and
averaging the fault over a unitary 2-design turns the noise into a global
depolarizing channel with contraction ``1 - pL(1 - q)``, where
``q = -1/(d^2 - 1)``. This module holds those closed forms, the entropy of
the projected state, the random-circuit experiment that checks the
convergence numerically, and the layer budget needed for a target accuracy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from . import _local
from .errors import FirstOrderInvalid, MOutOfRange, NotPure, ValidationError
from .linalg import SeedStream, hermitian_eig, haar_unitaries
from .states import (
    DensityMatrix,
    HilbertSpec,
    Observable,
    purity,
    single_qubit_pauli,
    von_neumann_entropy,
)


def _space(space) -> HilbertSpec:
    if isinstance(space, HilbertSpec):
        return space
    return HilbertSpec(int(space))


def theoretical_q(space: HilbertSpec | int) -> float:
    """Contraction ``-1/(d^2 - 1)`` of a twirled non-identity Pauli conjugation.

    ``space`` may be a :class:`HilbertSpec` or a qubit count.
    """
    d = _space(space).dim
    return -1.0 / (d * d - 1)


def project_rho_d(rho0: DensityMatrix, tol: float = 1e-10) -> DensityMatrix:
    """``q rho0 + (1 - q) I/d`` for a pure ``rho0``."""
    if abs(purity(rho0) - 1.0) > tol:
        raise NotPure(f"purity {purity(rho0):.12g} differs from 1")
    q = theoretical_q(rho0.space)
    d = rho0.dim
    return DensityMatrix(q * rho0.matrix + ((1.0 - q) / d) * np.eye(d), rho0.space)


def rho_d_eigenvalues(space: HilbertSpec | int) -> np.ndarray:
    """Spectrum of the projected state, descending.

    ``d - 1`` copies of ``d/(d^2 - 1)`` and one ``1/(d + 1)``.
    """
    d = _space(space).dim
    return np.array([d / ((d - 1) * (d + 1))] * (d - 1) + [1.0 / (d + 1)])


def theoretical_entropy(space: HilbertSpec | int, log_base: float = 2.0) -> float:
    """Closed-form entropy ``log(d+1) + d/(d+1) log((d-1)/d)`` of the projected state."""
    d = _space(space).dim
    if d < 2:
        raise ValidationError("theoretical_entropy needs d >= 2")
    nats = math.log(d + 1) + d / (d + 1) * math.log((d - 1) / d)
    return nats / math.log(log_base)


@dataclass(frozen=True)
class BinomialErrorModel:
    """Number of faulty layers out of ``L`` with per-layer fault probability ``p``."""

    p: float
    L: int

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError(f"p must lie in [0, 1], got {self.p}")
        if int(self.L) != self.L or self.L < 0:
            raise ValidationError(f"L must be a non-negative integer, got {self.L}")


def error_weight(model: BinomialErrorModel, M: int) -> float:
    """Probability ``C(L, M) p^M (1 - p)^(L - M)`` of exactly ``M`` faults.

    Evaluated in log space for ``L > 60``.
    """
    L, p = int(model.L), float(model.p)
    if not 0 <= M <= L:
        raise MOutOfRange(f"M={M} outside [0, {L}]")
    if p == 0.0:
        return 1.0 if M == 0 else 0.0
    if p == 1.0:
        return 1.0 if M == L else 0.0
    if L <= 60:
        return math.comb(L, M) * p**M * (1.0 - p) ** (L - M)
    log_w = (
        math.lgamma(L + 1)
        - math.lgamma(M + 1)
        - math.lgamma(L - M + 1)
        + M * math.log(p)
        + (L - M) * math.log1p(-p)
    )
    return math.exp(log_w)


def error_weight_exact(p: Fraction, L: int, M: int) -> Fraction:
    """Rational binomial weight, for cross-checking :func:`error_weight`."""
    p = Fraction(p)
    return math.comb(L, M) * p**M * (1 - p) ** (L - M)


def first_order_noisy_state(rho: DensityMatrix, p: float, L: int, tol: float = 1e-10) -> DensityMatrix:
    """Single-fault approximation ``[1 - pL(1-q)] rho + pL(1-q) I/d``.

    Raises
    ------
    FirstOrderInvalid
        If ``p * L >= 1``.
    NotPure
        If ``rho`` is not pure within ``tol``.
    """
    if p < 0 or L < 0:
        raise ValidationError(f"p and L must be non-negative, got p={p}, L={L}")
    if p * L >= 1.0:
        raise FirstOrderInvalid(f"pL = {p * L:.3g} is not small; the single-fault expansion needs pL < 1")
    if abs(purity(rho) - 1.0) > tol:
        raise NotPure(f"purity {purity(rho):.12g} differs from 1")
    q = theoretical_q(rho.space)
    w = p * L * (1.0 - q)
    d = rho.dim
    return DensityMatrix((1.0 - w) * rho.matrix + (w / d) * np.eye(d), rho.space)


def traceless_scale(space: HilbertSpec | int, p: float, L: int) -> float:
    """Factor ``1 - pL(1-q)`` multiplying traceless expectation values."""
    return 1.0 - p * L * (1.0 - theoretical_q(space))


@dataclass(frozen=True)
class TwirlExperimentSpec:
    """Random-circuit twirl experiment.

    ``mode`` is ``"exact"`` (average over every insertion position) or
    ``"sampled"`` (``trials`` uniform draws of the position).
    """

    n_qubits: int
    layer_counts: tuple
    pauli: str = "X"
    mode: str = "exact"
    trials: int = 0
    seed: int = 0

    def __post_init__(self):
        counts = tuple(int(x) for x in self.layer_counts)
        object.__setattr__(self, "layer_counts", counts)
        HilbertSpec(self.n_qubits)
        if not counts:
            raise ValidationError("layer_counts must be non-empty")
        if counts[0] < 1 or any(b <= a for a, b in zip(counts, counts[1:])):
            raise ValidationError(f"layer_counts must be positive and increasing, got {counts}")
        if self.pauli not in ("X", "Y", "Z"):
            raise ValidationError(f"pauli must be X, Y or Z, got {self.pauli!r}")
        if self.mode not in ("exact", "sampled"):
            raise ValidationError(f"mode must be 'exact' or 'sampled', got {self.mode!r}")
        if self.mode == "sampled" and int(self.trials) < 1:
            raise ValidationError("sampled mode needs trials >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError(f"seed must fit in 64 unsigned bits, got {self.seed}")


class TwirlRow(NamedTuple):
    L: int
    entropy: float
    one_minus_s_over_n: float


def insertion_states(unitaries: np.ndarray, pauli: str) -> np.ndarray:
    """State vectors with the Pauli inserted after each layer.

    Row ``i`` is ``u_{L-1} ... u_{i+1} P u_i ... u_0 |0...0>`` with ``P`` on
    qubit 0.
    """
    L, d, _ = unitaries.shape
    n = int(round(math.log2(d)))
    p = single_qubit_pauli(pauli)
    out = np.empty((L, d), dtype=np.complex128)
    psi = np.zeros(d, dtype=np.complex128)
    psi[0] = 1.0
    forward = np.empty((L, d), dtype=np.complex128)
    for i in range(L):
        psi = unitaries[i] @ psi
        forward[i] = _local.apply_to_vector(psi, p, [0], n)
    suffix = np.eye(d, dtype=np.complex128)
    for i in range(L - 1, -1, -1):
        out[i] = suffix @ forward[i]
        suffix = suffix @ unitaries[i]
    return out


def averaged_state(vectors: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """``sum_i w_i |v_i><v_i|`` with uniform weights by default."""
    if weights is None:
        weights = np.full(vectors.shape[0], 1.0 / vectors.shape[0])
    return (vectors.T * weights) @ vectors.conj()


def run_twirl_experiment(spec: TwirlExperimentSpec) -> list[TwirlRow]:
    """Entropy of the fault-averaged state for each layer count.

    For each ``L`` a fresh sequence of ``L`` Haar unitaries is drawn from the
    stream ``(seed, index of L)``; the insertion positions are averaged
    uniformly (exact mode) or drawn ``trials`` times from a child stream
    (sampled mode). Entropies are in bits.
    """
    n = spec.n_qubits
    d = 2**n
    rows = []
    for k, L in enumerate(spec.layer_counts):
        stream = SeedStream(spec.seed, k)
        us = haar_unitaries(d, L, stream)
        vecs = insertion_states(us, spec.pauli)
        if spec.mode == "exact":
            rho = averaged_state(vecs)
        else:
            picks = stream.child(0).rng.integers(0, L, size=int(spec.trials))
            weights = np.bincount(picks, minlength=L) / float(spec.trials)
            rho = averaged_state(vecs, weights)
        s = von_neumann_entropy(DensityMatrix(rho), log_base=2.0)
        rows.append(TwirlRow(L, s, 1.0 - s / n))
    return rows


@dataclass(frozen=True)
class LayerBudget:
    """Confidence complement ``delta``, accuracy ``epsilon`` and ``||H||``."""

    delta: float
    epsilon: float
    h_norm: float

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValidationError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.epsilon > 0.0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")
        if not self.h_norm > 0.0:
            raise ValidationError(f"h_norm must be positive, got {self.h_norm}")


def layer_budget_value(budget: LayerBudget) -> float:
    """``ln(2/delta) ||H||^2 / (2 epsilon^2)`` before rounding up."""
    return math.log(2.0 / budget.delta) * budget.h_norm**2 / (2.0 * budget.epsilon**2)


def required_layers(budget: LayerBudget) -> int:
    """Number of layers for accuracy ``epsilon`` at confidence ``1 - delta``."""
    value = layer_budget_value(budget)
    # guard against 184.99999999999997-style rounding noise
    return max(1, math.ceil(value - 1e-9 * max(1.0, value)))


def operator_norm(obs: Observable | np.ndarray) -> float:
    """Largest absolute eigenvalue of a Hermitian observable."""
    m = obs.matrix() if isinstance(obs, Observable) else obs
    lam = hermitian_eig(m, tol=1e-9)[0]
    return float(max(abs(lam[0]), abs(lam[-1])))
