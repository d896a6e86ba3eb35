"""Transverse-field Ising VQE with noisy simulation and purity mitigation."""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .circuit import (
    AnsatzSpec,
    LayeredCircuit,
    NoiseModel,
    bind,
    build_ansatz,
    simulate_noisy,
    simulate_pure,
)
from .errors import OptimizerDiverged, TooLarge, ValidationError
from .linalg import MAX_DIM, SeedStream, hermitian_eig
from .mitigation import estimate_mitigation, mitigate_expectation
from .states import (
    HilbertSpec,
    Observable,
    PauliString,
    PureState,
    expectation,
)

# eigenvalues this close to E0 belong to the ground space
DEGENERACY_TOL = 1e-8

# consecutive iterations above the starting energy before giving up
DIVERGENCE_PATIENCE = 50


@dataclass(frozen=True)
class TFIMSpec:
    """Periodic chain ``H = x sum X_i X_{i+1} - sum Z_i``."""

    n_qubits: int
    coupling: float

    def __post_init__(self):
        if not isinstance(self.n_qubits, (int, np.integer)) or self.n_qubits < 2:
            raise ValidationError(f"the TFIM chain needs n_qubits >= 2, got {self.n_qubits!r}")
        object.__setattr__(self, "coupling", float(self.coupling))


def build_tfim(spec: TFIMSpec) -> Observable:
    """Hamiltonian with the wrap-around bond ``X_{N-1} X_0``.

    For ``N = 2`` the two bonds coincide and both terms are kept.
    """
    n = spec.n_qubits
    terms = []
    for i in range(n):
        letters = ["I"] * n
        letters[i] = "X"
        letters[(i + 1) % n] = "X"
        terms.append((spec.coupling, PauliString("".join(letters))))
    for i in range(n):
        terms.append((-1.0, PauliString.single("Z", i, n)))
    return Observable(tuple(terms), HilbertSpec(n))


class EigenSolution(NamedTuple):
    energies: np.ndarray
    states: list

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    @property
    def gap(self) -> float:
        """Distance from ``E0`` to the first level outside the ground space."""
        e0 = self.energies[0]
        above = self.energies[self.energies > e0 + DEGENERACY_TOL]
        return float(above[0] - e0) if above.size else 0.0

    def ground_space(self, tol: float = DEGENERACY_TOL) -> np.ndarray:
        """Columns spanning the eigenspace of ``E0``."""
        k = int(np.sum(self.energies <= self.energies[0] + tol))
        return np.stack([s.amplitudes for s in self.states[:k]], axis=1)


def exact_diagonalize(obs: Observable | TFIMSpec) -> EigenSolution:
    """Full spectrum in ascending order with orthonormal eigenstates."""
    if isinstance(obs, TFIMSpec):
        obs = build_tfim(obs)
    if obs.space.dim > MAX_DIM:
        raise TooLarge(f"dimension {obs.space.dim} exceeds {MAX_DIM}")
    vals, vecs = hermitian_eig(obs.matrix(), tol=1e-9)
    vals, vecs = vals[::-1], vecs[:, ::-1]
    states = [PureState(vecs[:, i], obs.space) for i in range(vecs.shape[1])]
    return EigenSolution(vals.copy(), states)


@dataclass(frozen=True)
class Mitigation:
    """How to mitigate energies: ``off``, ``exact-purity`` or ``tomography``.

    ``tomography`` with ``shots == 0`` uses exact Pauli expectation values.
    """

    mode: str = "off"
    shots: int = 0

    def __post_init__(self):
        if self.mode not in ("off", "exact-purity", "tomography"):
            raise ValidationError(f"unknown mitigation mode {self.mode!r}")
        if int(self.shots) < 0:
            raise ValidationError("shots must be >= 0")

    @property
    def enabled(self) -> bool:
        return self.mode != "off"

    @property
    def effective_shots(self) -> int:
        return int(self.shots) if self.mode == "tomography" else 0


class EnergyResult(NamedTuple):
    raw: float
    mitigated: float | None
    purity: float | None
    rate: float | None


def energy(
    circuit: LayeredCircuit,
    params,
    hamiltonian: Observable,
    noise: NoiseModel | None = None,
    mitigation: Mitigation | str = "off",
    rng: SeedStream | None = None,
) -> EnergyResult:
    """Noisy energy of the ansatz state and, optionally, its mitigated value."""
    if isinstance(mitigation, str):
        mitigation = Mitigation(mitigation)
    rho = simulate_noisy(bind(circuit, params), None, noise)
    raw = expectation(hamiltonian, rho)
    if not mitigation.enabled:
        return EnergyResult(raw, None, None, None)
    shots = mitigation.effective_shots
    if shots and rng is None:
        raise ValidationError("sampled tomography needs a SeedStream")
    est = estimate_mitigation(rho, shots, rng)
    mitigated = mitigate_expectation(raw, est.rate, hamiltonian.trace(), hamiltonian.space)
    return EnergyResult(raw, mitigated, est.purity, est.rate)


def ground_overlap(circuit: LayeredCircuit, params, target: TFIMSpec | Observable | EigenSolution) -> float:
    """Norm of the ansatz state's projection onto the ground space."""
    sol = target if isinstance(target, EigenSolution) else exact_diagonalize(target)
    psi = simulate_pure(bind(circuit, params)).amplitudes
    amp = sol.ground_space().conj().T @ psi
    return float(min(1.0, np.linalg.norm(amp)))


@dataclass(frozen=True)
class OptimizerConfig:
    """Optimizer settings.

    SPSA uses gains ``a_k = a / (k + 1 + A)^alpha`` and
    ``c_k = c / (k + 1)^gamma``. Nelder-Mead starts from a simplex of edge
    ``step``. ``target_overlap = 1`` effectively disables early stopping.
    """

    method: str = "spsa"
    max_iterations: int = 500
    a: float = 0.6
    c: float = 0.15
    A: float = 20.0
    alpha: float = 0.602
    gamma: float = 0.101
    step: float = 0.5
    seed: int = 0
    target_overlap: float = 0.99

    def __post_init__(self):
        if self.method not in ("spsa", "nelder-mead"):
            raise ValidationError(f"method must be 'spsa' or 'nelder-mead', got {self.method!r}")
        if int(self.max_iterations) < 1:
            raise ValidationError("max_iterations must be >= 1")
        if not 0.0 < self.target_overlap <= 1.0:
            raise ValidationError(f"target_overlap must lie in (0, 1], got {self.target_overlap}")
        for name in ("a", "c", "step"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")


class IterationRecord(NamedTuple):
    iteration: int
    params: np.ndarray
    raw: float
    mitigated: float | None
    overlap: float


@dataclass
class DescentTrace:
    records: list = field(default_factory=list)
    converged: bool = False

    def __len__(self):
        return len(self.records)

    @property
    def raw(self) -> np.ndarray:
        return np.array([r.raw for r in self.records])

    @property
    def best_raw(self) -> np.ndarray:
        """Running minimum of the raw energy."""
        return np.minimum.accumulate(self.raw)

    @property
    def overlaps(self) -> np.ndarray:
        return np.array([r.overlap for r in self.records])

    @property
    def final(self) -> IterationRecord:
        return self.records[-1]


class _Objective:
    """Raw noisy energy with a small cache keyed by the parameter bytes.

    The cache holds a full simplex so per-iterate callbacks do not re-simulate.
    """

    def __init__(self, circuit, hamiltonian, noise):
        self.circuit = circuit
        self.hamiltonian = hamiltonian
        self.noise = noise
        self.n_calls = 0
        self._cache: OrderedDict = OrderedDict()
        self._capacity = circuit.n_params + 4

    def __call__(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        key = theta.tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        self.n_calls += 1
        rho = simulate_noisy(bind(self.circuit, theta), None, self.noise)
        value = expectation(self.hamiltonian, rho)
        self._cache[key] = value
        if len(self._cache) > self._capacity:
            self._cache.popitem(last=False)
        return value


def initial_parameters(n_params: int, seed: int) -> np.ndarray:
    """Uniform draws from ``[-pi, pi]`` on stream ``(seed, 0)``."""
    return SeedStream(seed, 0).rng.uniform(-np.pi, np.pi, size=n_params)


def _spsa(objective, theta0, opt: OptimizerConfig, on_iterate):
    rng = SeedStream(opt.seed, 1).rng
    theta = theta0.copy()
    for k in range(opt.max_iterations):
        ak = opt.a / (k + 1 + opt.A) ** opt.alpha
        ck = opt.c / (k + 1) ** opt.gamma
        delta = rng.choice((-1.0, 1.0), size=theta.size)
        diff = objective(theta + ck * delta) - objective(theta - ck * delta)
        theta = theta - ak * diff / (2.0 * ck) * delta
        if on_iterate(theta):
            return


def _nelder_mead(objective, theta0, opt: OptimizerConfig, on_iterate):
    n = theta0.size
    simplex = np.vstack([theta0, theta0 + opt.step * np.eye(n)])

    def callback(intermediate_result):
        if on_iterate(np.array(intermediate_result.x)):
            raise StopIteration

    minimize(
        objective,
        theta0,
        method="Nelder-Mead",
        callback=callback,
        options={
            "maxiter": opt.max_iterations,
            "initial_simplex": simplex,
            "xatol": 1e-10,
            "fatol": 1e-12,
            "adaptive": n > 6,
        },
    )


def run_vqe(
    circuit: LayeredCircuit,
    tfim: TFIMSpec | Observable,
    noise: NoiseModel | None = None,
    mitigation: Mitigation | str = "off",
    opt: OptimizerConfig | None = None,
    initial_params=None,
    record_mitigated: bool = True,
) -> DescentTrace:
    """Minimize the raw noisy energy and record every iterate.

    Each record holds the parameters after the update, their raw energy,
    the mitigated energy (when mitigation is on and ``record_mitigated``)
    and the noiseless overlap with the exact ground space. The run stops
    after ``max_iterations`` or once the overlap reaches ``target_overlap``.

    Raises
    ------
    OptimizerDiverged
        If the raw energy stays above its starting value for 50 consecutive
        iterations.
    """
    opt = opt or OptimizerConfig()
    if isinstance(mitigation, str):
        mitigation = Mitigation(mitigation)
    hamiltonian = build_tfim(tfim) if isinstance(tfim, TFIMSpec) else tfim
    if hamiltonian.space.n_qubits != circuit.n_qubits:
        raise ValidationError("Hamiltonian and circuit act on different registers")
    solution = exact_diagonalize(hamiltonian)
    objective = _Objective(circuit, hamiltonian, noise)
    if initial_params is None:
        theta0 = initial_parameters(circuit.n_params, opt.seed)
    else:
        theta0 = np.asarray(initial_params, dtype=float).copy()
        if theta0.size != circuit.n_params:
            raise ValidationError(f"expected {circuit.n_params} initial parameters")
    e_start = objective(theta0)
    tomo_stream = SeedStream(opt.seed, 2)
    trace = DescentTrace()
    above = 0

    def on_iterate(theta) -> bool:
        nonlocal above
        k = len(trace.records)
        raw = objective(theta)
        mitigated = None
        if mitigation.enabled and record_mitigated:
            mitigated = energy(
                circuit, theta, hamiltonian, noise, mitigation, tomo_stream.child(k)
            ).mitigated
        ov = ground_overlap(circuit, theta, solution)
        trace.records.append(IterationRecord(k, theta.copy(), raw, mitigated, ov))
        above = above + 1 if raw > e_start else 0
        if above >= DIVERGENCE_PATIENCE:
            raise OptimizerDiverged(
                f"raw energy above its initial value {e_start:.6g} for {above} iterations"
            )
        if ov >= opt.target_overlap:
            trace.converged = True
            return True
        return len(trace.records) >= opt.max_iterations

    if opt.method == "spsa":
        _spsa(objective, theta0, opt, on_iterate)
    else:
        _nelder_mead(objective, theta0, opt, on_iterate)
    return trace


class VQESolver(BaseEstimator):
    """Estimator wrapper around :func:`run_vqe` for the TFIM ansatz.

    ``fit(H)`` accepts a :class:`TFIMSpec` or an :class:`Observable` and
    stores the optimized ``params_``, the descent ``trace_`` and the final
    energies. ``predict`` evaluates energies of other Hamiltonians at the
    fitted parameters.
    """

    def __init__(
        self,
        depth: int = 2,
        entangler: str = "ring",
        method: str = "spsa",
        max_iterations: int = 500,
        target_overlap: float = 0.99,
        noise: NoiseModel | None = None,
        mitigation: str = "off",
        shots: int = 0,
        seed: int = 0,
    ):
        self.depth = depth
        self.entangler = entangler
        self.method = method
        self.max_iterations = max_iterations
        self.target_overlap = target_overlap
        self.noise = noise
        self.mitigation = mitigation
        self.shots = shots
        self.seed = seed

    def _mitigation(self) -> Mitigation:
        return Mitigation(self.mitigation, self.shots)

    def fit(self, X, y=None):
        hamiltonian = build_tfim(X) if isinstance(X, TFIMSpec) else X
        self.circuit_ = build_ansatz(AnsatzSpec(hamiltonian.n_qubits, self.depth, self.entangler))
        opt = OptimizerConfig(
            method=self.method,
            max_iterations=self.max_iterations,
            seed=self.seed,
            target_overlap=self.target_overlap,
        )
        self.trace_ = run_vqe(
            self.circuit_, hamiltonian, self.noise, self._mitigation(), opt, record_mitigated=False
        )
        self.params_ = self.trace_.final.params
        self.overlap_ = self.trace_.final.overlap
        result = energy(
            self.circuit_, self.params_, hamiltonian, self.noise, self._mitigation(), SeedStream(self.seed, 3)
        )
        self.energy_ = result.raw
        self.mitigated_energy_ = result.mitigated
        self.rate_ = result.rate
        return self

    def predict(self, X):
        """Raw (or mitigated, when enabled) energy of each Hamiltonian in ``X``."""
        check_is_fitted(self, "params_")
        items = X if isinstance(X, (list, tuple)) else [X]
        out = []
        for h in items:
            h = build_tfim(h) if isinstance(h, TFIMSpec) else h
            res = energy(self.circuit_, self.params_, h, self.noise, self._mitigation(), SeedStream(self.seed, 3))
            out.append(res.mitigated if res.mitigated is not None else res.raw)
        return np.array(out)
