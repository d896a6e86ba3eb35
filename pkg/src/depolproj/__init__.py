"""Depolarizing projection of Pauli noise and purity-based error mitigation.

Density-matrix simulation of layered parametric circuits under Pauli and
depolarizing noise, the closed forms for twirled noise, and a noisy VQE for
the transverse-field Ising model with purity-derived mitigation.
"""
from .channels import (
    DepolarizingChannel,
    KrausChannel,
    PauliChannel,
    apply_channel,
    clifford_group,
    depolarize,
    depolarizing_projection,
    pauli_transfer_matrix,
    twirl_channel,
)
from .circuit import AnsatzSpec, NoiseModel, bind, build_ansatz, simulate_noisy, simulate_pure
from .errors import DepolprojError, NumericError, ValidationError
from .linalg import SeedStream, haar_unitary, hermitian_eig
from .mitigation import PurityMitigator, mitigate_expectation, rate_from_purity, tomography
from .projection import (
    LayerBudget,
    TwirlExperimentSpec,
    first_order_noisy_state,
    project_rho_d,
    required_layers,
    run_twirl_experiment,
    theoretical_entropy,
    theoretical_q,
)
from .states import DensityMatrix, HilbertSpec, Observable, PauliString, PureState, purity, von_neumann_entropy
from .vqe import Mitigation, OptimizerConfig, TFIMSpec, VQESolver, build_tfim, energy, exact_diagonalize, run_vqe

__version__ = "0.1.0"

__all__ = [
    "AnsatzSpec",
    "DensityMatrix",
    "DepolarizingChannel",
    "DepolprojError",
    "HilbertSpec",
    "KrausChannel",
    "LayerBudget",
    "Mitigation",
    "NoiseModel",
    "NumericError",
    "Observable",
    "OptimizerConfig",
    "PauliChannel",
    "PauliString",
    "PureState",
    "PurityMitigator",
    "SeedStream",
    "TFIMSpec",
    "TwirlExperimentSpec",
    "VQESolver",
    "ValidationError",
    "apply_channel",
    "bind",
    "build_ansatz",
    "build_tfim",
    "clifford_group",
    "depolarize",
    "depolarizing_projection",
    "energy",
    "exact_diagonalize",
    "first_order_noisy_state",
    "haar_unitary",
    "hermitian_eig",
    "mitigate_expectation",
    "pauli_transfer_matrix",
    "project_rho_d",
    "purity",
    "rate_from_purity",
    "required_layers",
    "run_twirl_experiment",
    "run_vqe",
    "simulate_noisy",
    "simulate_pure",
    "theoretical_entropy",
    "theoretical_q",
    "tomography",
    "twirl_channel",
    "von_neumann_entropy",
]
