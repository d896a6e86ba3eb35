"""Noisy-VQE sweeps, descent curves and the first-order validity scan.

These helpers sit between the library modules and the command-line runner;
the acceptance suite drives them directly.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .channels import PauliChannel, clifford_group, twirl_channel
from .circuit import AnsatzSpec, NoiseModel, build_ansatz, haar_layer_circuit, simulate_noisy, simulate_pure
from .errors import ValidationError
from .linalg import SeedStream
from .mitigation import mitigate_expectation
from .projection import first_order_noisy_state
from .states import density_from_pure, trace_distance
from .vqe import (
    Mitigation,
    OptimizerConfig,
    TFIMSpec,
    build_tfim,
    energy,
    exact_diagonalize,
    run_vqe,
)


class SweepPoint(NamedTuple):
    coupling: float
    depth: int
    seed: int
    raw: float
    mitigated: float | None
    exact: float
    rate: float | None
    purity: float | None
    overlap: float

    @property
    def residual(self) -> float:
        """``|E_mitigated - E_exact|``."""
        return abs(self.mitigated - self.exact)


def sweep_point(
    n_qubits: int,
    coupling: float,
    depth: int,
    seed: int,
    noise: NoiseModel | None,
    mitigation: Mitigation,
    opt: OptimizerConfig,
    entangler: str = "ring",
) -> SweepPoint:
    """Optimize the noisy raw energy, then mitigate at the final parameters.

    ``opt.seed`` is replaced by ``seed``; the final tomography (if any) uses
    stream ``(seed, 3)``.
    """
    tfim = TFIMSpec(n_qubits, coupling)
    circuit = build_ansatz(AnsatzSpec(n_qubits, depth, entangler))
    run_opt = OptimizerConfig(**{**opt.__dict__, "seed": seed})
    trace = run_vqe(circuit, tfim, noise, mitigation, run_opt, record_mitigated=False)
    hamiltonian = build_tfim(tfim)
    res = energy(circuit, trace.final.params, hamiltonian, noise, mitigation, SeedStream(seed, 3))
    e0 = exact_diagonalize(hamiltonian).ground_energy
    return SweepPoint(
        float(coupling), int(depth), int(seed), res.raw, res.mitigated, e0, res.rate, res.purity,
        trace.final.overlap,
    )


def median_and_mad(values: Sequence[float]) -> tuple[float, float]:
    """Median and median absolute deviation (unscaled)."""
    v = np.asarray(values, dtype=float)
    med = float(np.median(v))
    return med, float(np.median(np.abs(v - med)))


def non_increasing_within_mad(medians: Sequence[float], mads: Sequence[float]) -> bool:
    """True iff each median exceeds its predecessor by at most the larger MAD of the pair."""
    for k in range(len(medians) - 1):
        if medians[k + 1] > medians[k] + max(mads[k], mads[k + 1]):
            return False
    return True


class DescentRow(NamedTuple):
    iteration: int
    raw: float
    mitigated: float | None
    overlap: float


def descent_curve(
    n_qubits: int,
    coupling: float,
    depth: int,
    noise: NoiseModel | None,
    mitigation: Mitigation,
    opt: OptimizerConfig,
    rescale: str = "final",
    entangler: str = "ring",
) -> list[DescentRow]:
    """Per-iteration raw and mitigated energies of one VQE run.

    With ``rescale="final"`` the rate measured at the last iterate rescales
    the whole raw curve, as when the purity is only measured once at the end.
    ``"per-iteration"`` measures the rate at every iterate.
    """
    if rescale not in ("final", "per-iteration"):
        raise ValidationError(f"rescale must be 'final' or 'per-iteration', got {rescale!r}")
    tfim = TFIMSpec(n_qubits, coupling)
    circuit = build_ansatz(AnsatzSpec(n_qubits, depth, entangler))
    per_iter = rescale == "per-iteration"
    trace = run_vqe(circuit, tfim, noise, mitigation, opt, record_mitigated=per_iter)
    if not mitigation.enabled or per_iter:
        return [DescentRow(r.iteration, r.raw, r.mitigated, r.overlap) for r in trace.records]
    hamiltonian = build_tfim(tfim)
    final = energy(circuit, trace.final.params, hamiltonian, noise, mitigation, SeedStream(opt.seed, 3))
    tr, space = hamiltonian.trace(), hamiltonian.space
    return [
        DescentRow(r.iteration, r.raw, mitigate_expectation(r.raw, final.rate, tr, space), r.overlap)
        for r in trace.records
    ]


def twirled_layer_noise(n_qubits: int, n_layers: int, p: float, letter: str = "X") -> NoiseModel:
    """Whole-register noise after every layer: a Pauli fault on qubit 0 with
    probability ``p``, twirled over the Clifford group (``n_qubits <= 2``)."""
    ch = PauliChannel.single(letter, p, n_qubits, 0)
    twirled = twirl_channel(ch, clifford_group(n_qubits))
    return NoiseModel(layer_overrides={i: twirled for i in range(n_layers)})


def first_order_distance(n_qubits: int, n_layers: int, p: float, seed: int, letter: str = "X") -> float:
    """Trace distance between the simulated twirled-noise state of a Haar
    layer circuit and its single-fault approximation."""
    circuit = haar_layer_circuit(n_qubits, n_layers, SeedStream(seed, 0))
    noisy = simulate_noisy(circuit, None, twirled_layer_noise(n_qubits, n_layers, p, letter))
    ideal = density_from_pure(simulate_pure(circuit))
    return trace_distance(noisy, first_order_noisy_state(ideal, p, n_layers))


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])

