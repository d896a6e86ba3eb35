from functools import reduce

import numpy as np
import pytest
from hypothesis import given, strategies as st

import depolproj.circuit as circuit_mod
from depolproj.channels import DepolarizingChannel, PauliChannel, depolarizing_kraus
from depolproj.circuit import (
    CNOT_MATRIX,
    AnsatzSpec,
    CircuitLayer,
    Gate,
    NoiseModel,
    bind,
    build_ansatz,
    entangling_layers,
    haar_layer_circuit,
    rotated_probabilities,
    rx,
    rz,
    sample_measurements,
    simulate_noisy,
    simulate_pure,
)
from depolproj.errors import BadSpec, ChannelSpaceMismatch, ParamLengthMismatch
from depolproj.linalg import SeedStream
from depolproj.states import DensityMatrix, HilbertSpec, density_from_pure

from oracles import I2, PAULI, random_density


def expm_pauli(letter, theta):
    p = PAULI[letter]
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * p


def cnot_oracle(c, t, n):
    # |b> -> |b with bit t flipped if bit c set>, qubit 0 most significant
    d = 2**n
    m = np.zeros((d, d))
    for b in range(d):
        bits = [(b >> (n - 1 - k)) & 1 for k in range(n)]
        if bits[c]:
            bits[t] ^= 1
        m[int("".join(map(str, bits)), 2), b] = 1
    return m


def ansatz_unitary_oracle(n, depth, params):
    """Full-register unitary built gate by gate with explicit Kronecker products."""
    u = np.eye(2**n, dtype=complex)
    k = 0

    def rot_block():
        nonlocal u, k
        u = reduce(np.kron, [expm_pauli("X", params[k + q]) for q in range(n)]) @ u
        u = reduce(np.kron, [expm_pauli("Z", params[k + n + q]) for q in range(n)]) @ u
        k += 2 * n

    rot_block()
    for _ in range(depth):
        for layer in entangling_layers(n):
            for g in layer.gates:
                u = cnot_oracle(*g.targets, n) @ u
        rot_block()
    return u


def test_rotation_convention():
    for theta in (0.3, -1.2, np.pi):
        assert np.allclose(rx(theta), expm_pauli("X", theta))
        assert np.allclose(rz(theta), expm_pauli("Z", theta))
    assert np.allclose(CNOT_MATRIX, cnot_oracle(0, 1, 2))


def test_entangling_layout():
    assert [[g.targets for g in layer.gates] for layer in entangling_layers(2)] == [[(0, 1)]]
    assert [[g.targets for g in layer.gates] for layer in entangling_layers(4)] == [
        [(0, 1), (2, 3)],
        [(1, 2), (3, 0)],
    ]
    layout3 = [[g.targets for g in layer.gates] for layer in entangling_layers(3)]
    assert layout3 == [[(0, 1)], [(1, 2)], [(2, 0)]]
    assert [[g.targets for g in layer.gates] for layer in entangling_layers(3, "line")] == [[(0, 1)], [(1, 2)]]


@pytest.mark.parametrize("n,depth", [(2, 0), (2, 2), (3, 1), (4, 4)])
def test_ansatz_shape(n, depth):
    c = build_ansatz(AnsatzSpec(n, depth))
    assert c.n_params == 2 * n * (depth + 1)
    assert c.count_gates("RX") == n * (depth + 1)
    assert c.count_gates("RZ") == n * (depth + 1)
    links = 1 if n == 2 else n
    assert c.count_gates("CNOT") == links * depth


@given(st.integers(2, 4), st.integers(0, 3), st.integers(0, 2**32 - 1))
def test_ansatz_matches_oracle(n, depth, seed):
    c = build_ansatz(AnsatzSpec(n, depth))
    params = np.random.default_rng(seed).uniform(-np.pi, np.pi, c.n_params)
    bound = bind(c, params)
    u = ansatz_unitary_oracle(n, depth, params)
    assert np.allclose(bound.unitary(), u, atol=1e-12)
    assert np.allclose(simulate_pure(bound).amplitudes, u[:, 0], atol=1e-12)
    rho = simulate_noisy(bound)
    assert np.allclose(rho.matrix, density_from_pure(simulate_pure(bound)).matrix, atol=1e-12)


def test_spec_errors():
    with pytest.raises(ParamLengthMismatch):
        bind(build_ansatz(AnsatzSpec(2, 1)), np.zeros(3))
    with pytest.raises(BadSpec):
        AnsatzSpec(1, 1)
    with pytest.raises(BadSpec):
        CircuitLayer((Gate.RX(0, 0), Gate.CNOT(0, 1)))
    with pytest.raises(BadSpec):
        Gate.CNOT(1, 1)
    with pytest.raises(BadSpec):
        Gate.fixed(np.ones((2, 2)), [0])
    with pytest.raises(ChannelSpaceMismatch):
        NoiseModel(after_single_qubit=depolarizing_kraus(2, 0.1))


def test_uniform_depolarizing_closed_form():
    c = haar_layer_circuit(2, 5, SeedStream(1))
    pure = density_from_pure(simulate_pure(c)).matrix
    rho = simulate_noisy(c, noise=NoiseModel.uniform_depolarizing(5, 0.1, 2), check=True)
    expected = 0.9**5 * pure + (1 - 0.9**5) * np.eye(4) / 4
    assert np.allclose(rho.matrix, expected, atol=1e-13)


def test_gate_noise_matches_explicit_oracle():
    n, depth = 3, 1
    c = build_ansatz(AnsatzSpec(n, depth))
    params = np.random.default_rng(0).uniform(-3, 3, c.n_params)
    p1, p2 = 0.05, 0.1
    noise = NoiseModel(
        after_single_qubit=PauliChannel.single("Y", p1),
        after_cnot=DepolarizingChannel(p2, HilbertSpec(2)),
    )
    rho = np.zeros((8, 8), dtype=complex)
    rho[0, 0] = 1
    bound = bind(c, params)
    for layer in bound.layers:
        for g in layer:
            full = circuit_mod._local.embed_operator(g.matrix, g.targets, n)
            rho = full @ rho @ full.conj().T
        for g in layer:
            if len(g.targets) == 1:
                y = circuit_mod._local.embed_operator(PAULI["Y"], g.targets, n)
                rho = (1 - p1) * rho + p1 * y @ rho @ y
            else:
                # pair depolarizing as the uniform average over the 16 pair Paulis
                a, b = g.targets
                acc = np.zeros_like(rho)
                for pa in "IXYZ":
                    for pb in "IXYZ":
                        op = np.eye(1)
                        for q in range(n):
                            op = np.kron(op, PAULI[pa] if q == a else PAULI[pb] if q == b else I2)
                        acc += op @ rho @ op.conj().T
                rho = (1 - p2) * rho + p2 * acc / 16
    got = simulate_noisy(bound, noise=noise, check=True).matrix
    assert np.allclose(got, rho, atol=1e-13)


@given(st.integers(0, 2**32 - 1))
def test_dense_and_local_paths_agree(seed):
    c = build_ansatz(AnsatzSpec(3, 2))
    params = np.random.default_rng(seed).uniform(-3, 3, c.n_params)
    noise = NoiseModel(after_single_qubit=PauliChannel.single("X", 0.02), after_cnot=depolarizing_kraus(2, 0.03))
    bound = bind(c, params)
    dense = simulate_noisy(bound, noise=noise).matrix
    saved = circuit_mod.DENSE_LAYER_QUBITS
    try:
        circuit_mod.DENSE_LAYER_QUBITS = 0
        local = simulate_noisy(bound, noise=noise).matrix
    finally:
        circuit_mod.DENSE_LAYER_QUBITS = saved
    assert np.allclose(dense, local, atol=1e-13)


def test_measurement_sampling():
    rho = DensityMatrix(random_density(4, np.random.default_rng(3)))
    probs = rotated_probabilities(rho, "XY")
    assert abs(probs.sum() - 1) < 1e-12
    counts = sample_measurements(rho, "XY", 20000, SeedStream(0))
    assert sum(counts.values()) == 20000
    freq = np.array([counts.get(format(i, "02b"), 0) for i in range(4)]) / 20000
    assert np.max(np.abs(freq - probs)) < 0.02
    again = sample_measurements(rho, "XY", 20000, SeedStream(0))
    assert counts == again


def test_plus_state_measured_in_x_basis():
    plus = DensityMatrix(np.full((2, 2), 0.5))
    assert np.allclose(rotated_probabilities(plus, "X"), [1, 0])
    assert np.allclose(rotated_probabilities(plus, "Z"), [0.5, 0.5])
