"""Purity-based mitigation of depolarizing noise.

If the noisy state is ``(1 - r) rho + r I/d`` with ``rho`` pure, its purity is
``(1 - r)^2 (1 - 1/d) + 1/d``. Measuring the purity by Pauli tomography
fixes ``r``, and traceless expectation values are restored by dividing by
``1 - r``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .circuit import sample_measurements
from .errors import (
    FullyDepolarized,
    IncompletePauliSet,
    PurityAboveOne,
    PurityBelowFloor,
    ValidationError,
)
from .linalg import SeedStream
from .states import (
    DensityMatrix,
    HilbertSpec,
    PauliString,
    all_pauli_strings,
    pauli_expectation,
    pauli_matrix,
    purity,
)

# slack on purity domain checks; shot noise lands slightly outside [1/d, 1]
PURITY_TOL = 1e-6

Backend = Callable[[PauliString, int, SeedStream], dict]


@dataclass(frozen=True)
class TomographyResult:
    """Pauli expectation values; ``shots_per_setting == 0`` marks exact values."""

    space: HilbertSpec
    pauli_expectations: dict
    shots_per_setting: int = 0

    def reconstruct(self) -> DensityMatrix:
        """``(1/d) sum_a <P_a> P_a``."""
        d = self.space.dim
        m = np.zeros((d, d), dtype=np.complex128)
        for p, v in self.pauli_expectations.items():
            m += v * pauli_matrix(p)
        return DensityMatrix(m / d, self.space)


@dataclass(frozen=True)
class MitigationEstimate:
    purity: float
    rate: float

    @property
    def factor(self) -> float:
        return 1.0 / (1.0 - self.rate)


def _parity_expectation(counts: dict, p: PauliString) -> float:
    support = [i for i, c in enumerate(p.letters) if c != "I"]
    total = 0
    signed = 0
    for bits, c in counts.items():
        parity = sum(bits[i] == "1" for i in support) % 2
        signed += -c if parity else c
        total += c
    return signed / total


def tomography(
    source: DensityMatrix | Backend,
    shots: int = 0,
    rng: SeedStream | None = None,
    n_qubits: int | None = None,
) -> TomographyResult:
    """Estimate ``<P_a>`` for all ``4**N`` Pauli strings.

    Parameters
    ----------
    source : DensityMatrix or callable
        State to measure, or a backend ``f(basis, shots, stream) -> counts``
        returning bitstring counts with qubit 0 first.
    shots : int
        0 for exact expectation values (needs a ``DensityMatrix``), otherwise
        the number of shots per setting.
    rng : SeedStream
        Required when ``shots > 0``. Setting ``k`` (lexicographic order)
        draws from ``rng.child(k)``.
    n_qubits : int, optional
        Register size; only needed for callable backends.
    """
    shots = int(shots)
    if shots < 0:
        raise ValidationError(f"shots must be >= 0, got {shots}")
    if isinstance(source, DensityMatrix):
        space = source.space
    else:
        if n_qubits is None:
            raise ValidationError("n_qubits is required with a measurement backend")
        space = HilbertSpec(n_qubits)
        if shots == 0:
            raise ValidationError("exact tomography needs a DensityMatrix")
    if shots > 0 and rng is None:
        raise ValidationError("sampled tomography needs a SeedStream")
    strings = all_pauli_strings(space.n_qubits)
    values = {}
    for k, p in enumerate(strings):
        if p.is_identity:
            values[p] = 1.0
        elif shots == 0:
            values[p] = pauli_expectation(p, source)
        else:
            stream = rng.child(k)
            if isinstance(source, DensityMatrix):
                counts = sample_measurements(source, p, shots, stream)
            else:
                counts = source(p, shots, stream)
            values[p] = _parity_expectation(counts, p)
    return TomographyResult(space, values, shots)


def purity_from_tomography(t: TomographyResult) -> float:
    """``(1/d) sum_a <P_a>^2``."""
    n = t.space.n_qubits
    missing = [p for p in all_pauli_strings(n) if p not in t.pauli_expectations]
    if missing:
        raise IncompletePauliSet(f"{len(missing)} Pauli strings missing, e.g. {missing[0]}")
    return float(sum(v * v for v in t.pauli_expectations.values()) / t.space.dim)


def rate_from_purity(value: float, space: HilbertSpec | int, tol: float = PURITY_TOL) -> float:
    """Depolarizing rate implied by a purity, assuming a pure noiseless state.

    Inverts ``purity = (1 - r)^2 (1 - 1/d) + 1/d``; the result is clamped into
    ``[0, 1]``.

    Raises
    ------
    PurityBelowFloor
        If ``value < 1/d - tol``.
    PurityAboveOne
        If ``value > 1 + tol``.
    """
    if not isinstance(space, HilbertSpec):
        space = HilbertSpec(int(space))
    d = space.dim
    floor = 1.0 / d
    if value < floor - tol:
        raise PurityBelowFloor(f"purity {value:.9g} below the maximally mixed value {floor:.9g}")
    if value > 1.0 + tol:
        raise PurityAboveOne(f"purity {value:.9g} exceeds 1")
    frac = min(1.0, max(0.0, (value - floor) / (1.0 - floor)))
    return float(min(1.0, max(0.0, 1.0 - math.sqrt(frac))))


def mitigate_expectation(raw: float, r: float, obs_trace: float, space: HilbertSpec | int) -> float:
    """Undo depolarization: ``(raw - r Tr(O)/d) / (1 - r)``.

    Raises
    ------
    FullyDepolarized
        If ``r >= 1 - 1e-9``.
    """
    if not isinstance(space, HilbertSpec):
        space = HilbertSpec(int(space))
    if r < 0:
        raise ValidationError(f"rate must be non-negative, got {r}")
    if r >= 1.0 - 1e-9:
        raise FullyDepolarized(f"rate {r} leaves no signal to rescale")
    return (raw - r * obs_trace / space.dim) / (1.0 - r)


def estimate_mitigation(
    rho: DensityMatrix, shots: int = 0, rng: SeedStream | None = None
) -> MitigationEstimate:
    """Purity and rate of a noisy state; exact purity when ``shots == 0``."""
    if shots == 0:
        value = purity(rho)
    else:
        value = purity_from_tomography(tomography(rho, shots, rng))
    return MitigationEstimate(value, rate_from_purity(value, rho.space))


class PurityMitigator(TransformerMixin, BaseEstimator):
    """Rescale noisy expectation values by the purity-derived rate.

    ``fit`` measures the purity of a noisy state (exactly, or by sampled
    tomography when ``shots > 0``) and stores ``rate_``. ``transform`` maps
    raw expectation values of an observable with trace ``obs_trace`` to
    mitigated ones.

    Parameters
    ----------
    shots : int, default=0
        Shots per Pauli setting; 0 uses the exact purity.
    seed : int, default=0
        Seed for sampled tomography.
    obs_trace : float, default=0.0
        Trace of the observable whose values are transformed.
    """

    def __init__(self, shots: int = 0, seed: int = 0, obs_trace: float = 0.0):
        self.shots = shots
        self.seed = seed
        self.obs_trace = obs_trace

    def fit(self, X, y=None):
        if isinstance(X, TomographyResult):
            self.purity_ = purity_from_tomography(X)
            self.space_ = X.space
        else:
            rho = X if isinstance(X, DensityMatrix) else DensityMatrix(X)
            rng = SeedStream(self.seed) if self.shots else None
            est = estimate_mitigation(rho, int(self.shots), rng)
            self.purity_ = est.purity
            self.space_ = rho.space
        self.rate_ = rate_from_purity(self.purity_, self.space_)
        return self

    def transform(self, X):
        check_is_fitted(self, "rate_")
        if self.rate_ >= 1.0 - 1e-9:
            raise FullyDepolarized(f"rate {self.rate_} leaves no signal to rescale")
        raw = np.asarray(X, dtype=float)
        return (raw - self.rate_ * self.obs_trace / self.space_.dim) / (1.0 - self.rate_)

    def inverse_transform(self, X):
        check_is_fitted(self, "rate_")
        x = np.asarray(X, dtype=float)
        return x * (1.0 - self.rate_) + self.rate_ * self.obs_trace / self.space_.dim
