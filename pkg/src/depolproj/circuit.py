"""Layered parametric circuits and their noiseless and noisy simulation.

A circuit is an ordered list of layers; each layer holds gates on disjoint
qubits. Rotations follow ``R_P(theta) = exp(-i theta P / 2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _local
from .channels import (
    Channel,
    DepolarizingChannel,
    KrausChannel,
    PauliChannel,
    _local_operators,
    apply_channel_local,
    validate_cptp,
)
from .errors import (
    BadSpec,
    ChannelSpaceMismatch,
    ParamLengthMismatch,
    ValidationError,
)
from .linalg import DEFAULT_TOL, SeedStream, as_matrix, haar_unitary, is_unitary, kron_all
from .states import DensityMatrix, HilbertSpec, PauliString, PureState

CNOT_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
S_DAG = np.diag([1.0, -1j]).astype(np.complex128)

_GATE_KINDS = ("RX", "RZ", "CNOT", "U")


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


@dataclass(frozen=True)
class Gate:
    """One gate. ``param_index`` is used by rotations, ``matrix`` by ``U``."""

    kind: str
    targets: tuple
    param_index: int | None = None
    matrix: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        if self.kind not in _GATE_KINDS:
            raise BadSpec(f"unknown gate kind {self.kind!r}")
        if len(set(targets)) != len(targets):
            raise BadSpec(f"gate {self.kind} has repeated targets {targets}")
        if self.kind in ("RX", "RZ"):
            if len(targets) != 1:
                raise BadSpec(f"{self.kind} acts on exactly one qubit")
            if self.param_index is None or self.param_index < 0:
                raise BadSpec(f"{self.kind} needs a non-negative param_index")
        elif self.kind == "CNOT":
            if len(targets) != 2:
                raise BadSpec("CNOT needs (control, target)")
        else:
            m = as_matrix(self.matrix)
            if m.shape != (2 ** len(targets),) * 2 or not is_unitary(m, DEFAULT_TOL):
                raise BadSpec(f"fixed gate on {len(targets)} qubits needs a unitary matrix")
            object.__setattr__(self, "matrix", m)

    @classmethod
    def RX(cls, qubit: int, param_index: int) -> "Gate":
        return cls("RX", (qubit,), param_index)

    @classmethod
    def RZ(cls, qubit: int, param_index: int) -> "Gate":
        return cls("RZ", (qubit,), param_index)

    @classmethod
    def CNOT(cls, control: int, target: int) -> "Gate":
        return cls("CNOT", (control, target))

    @classmethod
    def fixed(cls, matrix, targets) -> "Gate":
        return cls("U", tuple(targets), None, matrix)

    def unitary(self, params=None) -> np.ndarray:
        if self.kind == "RX":
            return rx(params[self.param_index])
        if self.kind == "RZ":
            return rz(params[self.param_index])
        if self.kind == "CNOT":
            return CNOT_MATRIX
        return self.matrix


@dataclass(frozen=True)
class CircuitLayer:
    gates: tuple

    def __post_init__(self):
        gates = tuple(self.gates)
        used = set()
        for g in gates:
            if used.intersection(g.targets):
                raise BadSpec(f"qubits {sorted(used.intersection(g.targets))} used twice in one layer")
            used.update(g.targets)
        object.__setattr__(self, "gates", gates)

    @property
    def qubits(self) -> set:
        return {q for g in self.gates for q in g.targets}


@dataclass(frozen=True)
class LayeredCircuit:
    space: HilbertSpec
    layers: tuple
    n_params: int

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        n = self.space.n_qubits
        for layer in layers:
            for g in layer.gates:
                if any(not 0 <= t < n for t in g.targets):
                    raise BadSpec(f"gate {g.kind} targets {g.targets} outside {n} qubits")
                if g.param_index is not None and g.param_index >= self.n_params:
                    raise BadSpec(f"param_index {g.param_index} >= n_params {self.n_params}")

    @property
    def n_qubits(self) -> int:
        return self.space.n_qubits

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def count_gates(self, kind: str) -> int:
        return sum(g.kind == kind for layer in self.layers for g in layer.gates)


@dataclass(frozen=True)
class BoundGate:
    kind: str
    targets: tuple
    matrix: np.ndarray


@dataclass(frozen=True)
class BoundCircuit:
    """Circuit with every rotation replaced by its concrete unitary."""

    space: HilbertSpec
    layers: tuple  # tuple of tuples of BoundGate

    @property
    def n_qubits(self) -> int:
        return self.space.n_qubits

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def layer_unitary(self, index: int) -> np.ndarray:
        n = self.n_qubits
        u = np.eye(2**n, dtype=np.complex128)
        for g in self.layers[index]:
            u = _local.embed_operator(g.matrix, g.targets, n) @ u
        return u

    def unitary(self) -> np.ndarray:
        n = self.n_qubits
        u = np.eye(2**n, dtype=np.complex128)
        for i in range(self.n_layers):
            u = self.layer_unitary(i) @ u
        return u


@dataclass(frozen=True)
class AnsatzSpec:
    """Hardware-efficient ansatz: RX+RZ blocks separated by CNOT entanglers."""

    n_qubits: int
    depth: int
    entangler: str = "ring"

    def __post_init__(self):
        if not isinstance(self.n_qubits, (int, np.integer)) or self.n_qubits < 1:
            raise BadSpec(f"n_qubits must be a positive integer, got {self.n_qubits!r}")
        if not isinstance(self.depth, (int, np.integer)) or self.depth < 0:
            raise BadSpec(f"depth must be a non-negative integer, got {self.depth!r}")
        if self.entangler not in ("ring", "line"):
            raise BadSpec(f"entangler must be 'ring' or 'line', got {self.entangler!r}")
        if self.entangler == "ring" and self.n_qubits < 2:
            raise BadSpec("a ring entangler needs at least 2 qubits")

    @property
    def n_params(self) -> int:
        return 2 * self.n_qubits * (self.depth + 1)


def entangling_layers(n_qubits: int, entangler: str = "ring") -> list[CircuitLayer]:
    """CNOT chain ``i -> i+1`` split into layers of disjoint gates.

    Even-indexed links form the first layer and odd-indexed links the second.
    On a ring with an odd number of qubits the wrap-around link ``N-1 -> 0``
    gets a third layer; on two qubits the ring has the single link ``0 -> 1``.
    """
    n = n_qubits
    if n < 2:
        return []
    links = [(i, i + 1) for i in range(n - 1)]
    wrap = entangler == "ring" and n > 2
    even = [Gate.CNOT(a, b) for a, b in links[0::2]]
    odd = [Gate.CNOT(a, b) for a, b in links[1::2]]
    extra = []
    if wrap:
        if n % 2 == 0:
            odd.append(Gate.CNOT(n - 1, 0))
        else:
            extra.append(Gate.CNOT(n - 1, 0))
    return [CircuitLayer(tuple(g)) for g in (even, odd, extra) if g]


def build_ansatz(spec: AnsatzSpec) -> LayeredCircuit:
    """``[RX, RZ]`` followed by ``depth`` blocks of ``[CNOTs, RX, RZ]``.

    Parameters are numbered block by block: RX on qubits ``0..N-1`` first,
    then RZ on ``0..N-1``.
    """
    n = spec.n_qubits
    layers = []
    k = 0

    def rotations():
        nonlocal k
        rx_layer = CircuitLayer(tuple(Gate.RX(q, k + q) for q in range(n)))
        rz_layer = CircuitLayer(tuple(Gate.RZ(q, k + n + q) for q in range(n)))
        k += 2 * n
        return [rx_layer, rz_layer]

    layers += rotations()
    for _ in range(spec.depth):
        layers += entangling_layers(n, spec.entangler)
        layers += rotations()
    return LayeredCircuit(HilbertSpec(n), tuple(layers), spec.n_params)


def bind(circuit: LayeredCircuit, params) -> BoundCircuit:
    """Substitute rotation angles.

    Raises
    ------
    ParamLengthMismatch
        If ``len(params) != circuit.n_params``.
    """
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.size != circuit.n_params:
        raise ParamLengthMismatch(f"expected {circuit.n_params} parameters, got {params.size}")
    layers = tuple(
        tuple(BoundGate(g.kind, g.targets, g.unitary(params)) for g in layer.gates)
        for layer in circuit.layers
    )
    return BoundCircuit(circuit.space, layers)


def haar_layer_circuit(n_qubits: int, n_layers: int, rng: SeedStream) -> BoundCircuit:
    """Circuit whose every layer is one Haar-random unitary on the whole register."""
    space = HilbertSpec(n_qubits)
    targets = tuple(range(n_qubits))
    layers = tuple(
        (BoundGate("U", targets, haar_unitary(space.dim, rng)),) for _ in range(n_layers)
    )
    return BoundCircuit(space, layers)


def _as_bound(circuit) -> BoundCircuit:
    if isinstance(circuit, BoundCircuit):
        return circuit
    if isinstance(circuit, LayeredCircuit) and circuit.n_params == 0:
        return bind(circuit, [])
    raise ValidationError("simulation needs a bound circuit; call bind(circuit, params)")


def simulate_pure(circuit: BoundCircuit, initial: PureState | None = None) -> PureState:
    """Apply every layer to a state vector (default ``|0...0>``)."""
    circuit = _as_bound(circuit)
    n = circuit.n_qubits
    if initial is None:
        initial = PureState.zero(n)
    if initial.n_qubits != n:
        raise ChannelSpaceMismatch(f"{initial.n_qubits}-qubit state for a {n}-qubit circuit")
    psi = initial.amplitudes.copy()
    for layer in circuit.layers:
        for g in layer:
            psi = _local.apply_to_vector(psi, g.matrix, g.targets, n)
    return PureState(psi, circuit.space)


@dataclass(frozen=True)
class NoiseModel:
    """Channels attached to gates or layers.

    ``after_single_qubit`` (1 qubit) follows every single-qubit gate on that
    gate's qubit and ``after_cnot`` (2 qubits) follows every two-qubit gate
    on its pair, in ``(control, target)`` order. A channel in
    ``layer_overrides`` acts on the whole register after that layer and
    replaces the gate-attached noise there. Idle qubits get no noise.
    """

    after_single_qubit: Channel | None = None
    after_cnot: Channel | None = None
    layer_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.after_single_qubit is not None:
            self._check(self.after_single_qubit, 1, "after_single_qubit")
        if self.after_cnot is not None:
            self._check(self.after_cnot, 2, "after_cnot")
        overrides = {int(k): v for k, v in dict(self.layer_overrides).items()}
        for k, ch in overrides.items():
            self._check(ch, None, f"layer override {k}")
        object.__setattr__(self, "layer_overrides", overrides)

    @staticmethod
    def _check(ch, n_qubits, name):
        if n_qubits is not None and ch.space.n_qubits != n_qubits:
            raise ChannelSpaceMismatch(f"{name} must act on {n_qubits} qubit(s)")
        if not isinstance(ch, (KrausChannel, PauliChannel, DepolarizingChannel)):
            raise ValidationError(f"{name} is not a channel: {type(ch).__name__}")
        if isinstance(ch, KrausChannel) and not validate_cptp(ch):
            raise ValidationError(f"{name} is not trace preserving")

    @property
    def is_noiseless(self) -> bool:
        return self.after_single_qubit is None and self.after_cnot is None and not self.layer_overrides

    @classmethod
    def uniform_depolarizing(cls, n_layers: int, rate: float, n_qubits: int) -> "NoiseModel":
        """Whole-register depolarizing channel after every layer."""
        ch = DepolarizingChannel(rate, HilbertSpec(n_qubits))
        return cls(layer_overrides={i: ch for i in range(n_layers)})


# registers up to this size are simulated with full-register matrices
DENSE_LAYER_QUBITS = 6

_EMBED_CACHE: dict = {}
_CNOT_LAYER_CACHE: dict = {}


def _layer_matrix(layer, n: int) -> np.ndarray:
    if all(g.kind == "CNOT" for g in layer):
        key = (n,) + tuple(g.targets for g in layer)
        hit = _CNOT_LAYER_CACHE.get(key)
        if hit is None:
            hit = _CNOT_LAYER_CACHE[key] = _dense_product(layer, n)
        return hit
    if len(layer) == n and all(len(g.targets) == 1 for g in layer):
        ordered = sorted(layer, key=lambda g: g.targets[0])
        return kron_all(g.matrix for g in ordered)
    return _dense_product(layer, n)


def _dense_product(layer, n: int) -> np.ndarray:
    u = np.eye(2**n, dtype=np.complex128)
    for g in layer:
        u = _local.embed_operator(g.matrix, g.targets, n) @ u
    return u


def _embedded_channel(ch, targets, n: int) -> list:
    """Weighted full-register operators of a gate-attached channel, cached."""
    key = (id(ch), tuple(targets), n)
    hit = _EMBED_CACHE.get(key)
    if hit is not None and hit[0] is ch:
        return hit[1]
    if len(_EMBED_CACHE) > 512:
        _EMBED_CACHE.clear()
    ops = [(w, _local.embed_operator(a, targets, n)) for w, a in _local_operators(ch)]
    # keep `ch` alive so its id is not recycled while cached
    _EMBED_CACHE[key] = (ch, ops)
    return ops


def simulate_noisy(
    circuit: BoundCircuit,
    initial: DensityMatrix | None = None,
    noise: NoiseModel | None = None,
    check: bool = False,
    tol: float = 1e-9,
) -> DensityMatrix:
    """Evolve a density matrix layer by layer, inserting the noise channels.

    With ``check=True`` the density-matrix invariants are verified after
    every layer and a ``ValidationError`` names the first failing layer.
    """
    circuit = _as_bound(circuit)
    n = circuit.n_qubits
    noise = noise or NoiseModel()
    if initial is None:
        initial = DensityMatrix.zero(n)
    if initial.n_qubits != n:
        raise ChannelSpaceMismatch(f"{initial.n_qubits}-qubit state for a {n}-qubit circuit")
    for i, ch in noise.layer_overrides.items():
        if ch.space.n_qubits != n:
            raise ChannelSpaceMismatch(f"override on layer {i} acts on {ch.space.n_qubits} qubits, circuit has {n}")
    dense = n <= DENSE_LAYER_QUBITS
    rho = initial.matrix.copy()
    for i, layer in enumerate(circuit.layers):
        if dense:
            u = _layer_matrix(layer, n)
            rho = u @ rho @ u.conj().T
        else:
            for g in layer:
                rho = _local.conjugate(rho, g.matrix, g.targets, n)
        override = noise.layer_overrides.get(i)
        if override is not None:
            rho = apply_channel_local(override, rho, list(range(n)), n)
            continue
        for g in layer:
            if len(g.targets) == 1:
                ch = noise.after_single_qubit
            elif len(g.targets) == 2:
                ch = noise.after_cnot
            else:
                ch = None
            if ch is None:
                continue
            if dense:
                out = np.zeros_like(rho)
                for w, a in _embedded_channel(ch, g.targets, n):
                    out += w * (a @ rho @ a.conj().T)
                rho = out
            else:
                rho = apply_channel_local(ch, rho, g.targets, n)
        if check:
            problems = DensityMatrix(rho, circuit.space).violations(tol)
            if problems:
                raise ValidationError(f"after layer {i}: " + "; ".join(problems))
    return DensityMatrix(rho, circuit.space)


def measurement_rotation(letter: str) -> np.ndarray:
    """Single-qubit rotation mapping the ``letter`` eigenbasis onto Z."""
    if letter == "X":
        return HADAMARD
    if letter == "Y":
        return HADAMARD @ S_DAG
    if letter in ("Z", "I"):
        return np.eye(2, dtype=np.complex128)
    raise ValidationError(f"unknown measurement basis {letter!r}")


def rotated_probabilities(rho: DensityMatrix, basis: PauliString | str) -> np.ndarray:
    """Outcome distribution after rotating each qubit into its basis."""
    basis = PauliString(basis) if isinstance(basis, str) else basis
    n = rho.n_qubits
    if basis.n_qubits != n:
        raise ChannelSpaceMismatch(f"{basis.n_qubits}-letter basis for {n} qubits")
    m = rho.matrix
    for q, letter in enumerate(basis.letters):
        if letter in "XY":
            m = _local.conjugate(m, measurement_rotation(letter), [q], n)
    probs = np.clip(np.real(np.diagonal(m)), 0.0, None)
    return probs / probs.sum()


def sample_measurements(
    rho: DensityMatrix,
    basis: PauliString | str,
    shots: int,
    rng: SeedStream | np.random.Generator,
) -> dict[str, int]:
    """Draw ``shots`` computational-basis outcomes in the given Pauli basis.

    X uses a Hadamard, Y uses S-dagger then Hadamard; Z and I are measured
    directly. Keys are bitstrings with qubit 0 first; only observed outcomes
    appear, in ascending order.
    """
    if int(shots) < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    probs = rotated_probabilities(rho, basis)
    gen = rng.rng if isinstance(rng, SeedStream) else rng
    counts = gen.multinomial(int(shots), probs)
    n = rho.n_qubits
    return {format(i, f"0{n}b"): int(c) for i, c in enumerate(counts) if c}
