"""Quantum channels in Kraus, Pauli and depolarizing form.

Channels keep their most specific representation. ``to_kraus`` converts
down on demand; application functions dispatch on the type so Pauli and
depolarizing channels never build dense Kraus families in inner loops.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Union

import numpy as np

from . import _local
from .errors import (
    DuplicateTarget,
    IncompleteKraus,
    NonUnitaryFrame,
    RateOutOfRange,
    SpaceMismatch,
    TargetOutOfRange,
    ValidationError,
)
from .linalg import DEFAULT_TOL, allclose, as_matrix, dagger, is_unitary
from .states import (
    DensityMatrix,
    HilbertSpec,
    PauliString,
    all_pauli_strings,
    pauli_matrix,
)

__all__ = [
    "KrausChannel",
    "PauliChannel",
    "DepolarizingChannel",
    "DepolarizingForm",
    "apply_kraus",
    "apply_pauli_channel",
    "apply_channel",
    "depolarize",
    "validate_cptp",
    "embed_channel",
    "twirl_channel",
    "depolarizing_projection",
    "pauli_transfer_matrix",
    "clifford_group",
    "cptp_parameter_count",
    "pauli_flip",
    "depolarizing_kraus",
]


class DepolarizingForm(NamedTuple):
    """Nearest map of the form ``rho -> q rho + (1 - q) I/d``.

    ``residue`` is the largest entry of the difference between the channel's
    Pauli transfer matrix and ``diag(1, q, ..., q)``.
    """

    q: float
    residue: float

    @property
    def rate(self) -> float:
        return 1.0 - self.q


@dataclass(frozen=True)
class KrausChannel:
    """Channel ``rho -> sum_k A_k rho A_k^dagger``.

    Completeness is not enforced at construction, so invalid families can be
    represented and rejected by :func:`validate_cptp` or :func:`apply_kraus`.
    ``projection`` is set by :func:`twirl_channel` when canonicalizing.
    """

    operators: tuple
    space: HilbertSpec = field(default=None)
    projection: DepolarizingForm | None = field(default=None, compare=False)

    def __post_init__(self):
        ops = tuple(as_matrix(a) for a in self.operators)
        if not ops:
            raise ValidationError("a Kraus channel needs at least one operator")
        d = ops[0].shape[0]
        if any(a.shape != (d, d) for a in ops):
            raise ValidationError("Kraus operators must be square and of equal size")
        space = self.space or HilbertSpec.from_dim(d)
        if space.dim != d:
            raise SpaceMismatch(f"operators of size {d} for dimension {space.dim}")
        for a in ops:
            a.setflags(write=False)
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "space", space)

    @property
    def n_qubits(self) -> int:
        return self.space.n_qubits

    def completeness_residue(self) -> float:
        d = self.space.dim
        total = sum(dagger(a) @ a for a in self.operators)
        return float(np.max(np.abs(total - np.eye(d))))

    def to_kraus(self) -> "KrausChannel":
        return self

    def superoperator(self) -> np.ndarray:
        """Matrix ``S`` with ``vec(E(rho)) = S vec(rho)`` for row-major ``vec``."""
        a = np.stack(self.operators)
        d = self.space.dim
        return np.einsum("kij,kab->iajb", a, a.conj()).reshape(d * d, d * d)


@dataclass(frozen=True)
class PauliChannel:
    """Incoherent Pauli channel ``rho -> sum_a p_a P_a rho P_a``."""

    probabilities: dict
    space: HilbertSpec = field(default=None)

    def __post_init__(self):
        probs = {}
        for key, p in dict(self.probabilities).items():
            key = PauliString(key) if isinstance(key, str) else key
            p = float(p)
            if p < 0:
                raise ValidationError(f"negative Pauli probability {p} for {key}")
            if p > 0:
                probs[key] = probs.get(key, 0.0) + p
        if not probs:
            raise ValidationError("Pauli channel has no positive probabilities")
        n = next(iter(probs)).n_qubits
        if any(k.n_qubits != n for k in probs):
            raise SpaceMismatch("Pauli strings of differing length in one channel")
        total = sum(probs.values())
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"Pauli probabilities sum to {total!r}, not 1")
        space = self.space or HilbertSpec(n)
        if space.n_qubits != n:
            raise SpaceMismatch(f"strings act on {n} qubits, space has {space.n_qubits}")
        # deterministic iteration order
        ordered = dict(sorted(probs.items(), key=lambda kv: kv[0].letters))
        object.__setattr__(self, "probabilities", ordered)
        object.__setattr__(self, "space", space)

    @property
    def n_qubits(self) -> int:
        return self.space.n_qubits

    @property
    def error_probability(self) -> float:
        """Total weight ``p`` of the non-identity strings."""
        return sum(p for k, p in self.probabilities.items() if not k.is_identity)

    @classmethod
    def single(cls, letter: str, p: float, n_qubits: int = 1, qubit: int = 0) -> "PauliChannel":
        """``letter`` on ``qubit`` with probability ``p``, identity otherwise."""
        if not 0.0 <= p <= 1.0:
            raise RateOutOfRange(f"Pauli error probability must lie in [0, 1], got {p}")
        ident = PauliString("I" * n_qubits)
        return cls({ident: 1.0 - p, PauliString.single(letter, qubit, n_qubits): p})

    def to_kraus(self) -> KrausChannel:
        return KrausChannel(
            tuple(np.sqrt(p) * pauli_matrix(k) for k, p in self.probabilities.items()),
            self.space,
        )


@dataclass(frozen=True)
class DepolarizingChannel:
    """``rho -> (1 - r) rho + r I/d`` with ``0 <= r <= 1``."""

    rate: float
    space: HilbertSpec

    def __post_init__(self):
        rate = float(self.rate)
        if not 0.0 <= rate <= 1.0:
            raise RateOutOfRange(f"depolarizing rate must lie in [0, 1], got {rate}")
        object.__setattr__(self, "rate", rate)

    @property
    def n_qubits(self) -> int:
        return self.space.n_qubits

    def to_pauli(self) -> PauliChannel:
        d2 = self.space.dim**2
        probs = {p: self.rate / d2 for p in all_pauli_strings(self.n_qubits)}
        probs[PauliString("I" * self.n_qubits)] = 1.0 - self.rate + self.rate / d2
        return PauliChannel(probs, self.space)

    def to_kraus(self) -> KrausChannel:
        return self.to_pauli().to_kraus()


Channel = Union[KrausChannel, PauliChannel, DepolarizingChannel]


def _check_same_space(ch, rho: DensityMatrix):
    if ch.space.n_qubits != rho.space.n_qubits:
        raise SpaceMismatch(
            f"{ch.space.n_qubits}-qubit channel applied to a {rho.space.n_qubits}-qubit state"
        )


def validate_cptp(ch: KrausChannel, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``max |sum A^dagger A - I| <= tol``."""
    return ch.to_kraus().completeness_residue() <= tol


def apply_kraus(ch: KrausChannel, rho: DensityMatrix, tol: float = DEFAULT_TOL) -> DensityMatrix:
    """``sum_k A_k rho A_k^dagger``."""
    _check_same_space(ch, rho)
    residue = ch.completeness_residue()
    if residue > tol:
        raise IncompleteKraus(f"completeness residue {residue:.3g} exceeds {tol:.3g}")
    m = rho.matrix
    out = np.zeros_like(m)
    for a in ch.operators:
        out += a @ m @ dagger(a)
    return DensityMatrix(out, rho.space)


def apply_pauli_channel(ch: PauliChannel, rho: DensityMatrix) -> DensityMatrix:
    """``sum_a p_a P_a rho P_a``."""
    _check_same_space(ch, rho)
    m = rho.matrix
    out = np.zeros_like(m)
    for key, p in ch.probabilities.items():
        if key.is_identity:
            out += p * m
        else:
            pm = pauli_matrix(key)
            out += p * (pm @ m @ pm)
    return DensityMatrix(out, rho.space)


def depolarize(rho: DensityMatrix, r: float) -> DensityMatrix:
    """``(1 - r) rho + r I/d``."""
    if not 0.0 <= r <= 1.0:
        raise RateOutOfRange(f"depolarizing rate must lie in [0, 1], got {r}")
    d = rho.dim
    return DensityMatrix((1.0 - r) * rho.matrix + (r / d) * np.eye(d), rho.space)


def apply_channel(ch: Channel, rho: DensityMatrix) -> DensityMatrix:
    """Apply a channel in whichever representation it is stored."""
    if isinstance(ch, DepolarizingChannel):
        _check_same_space(ch, rho)
        return depolarize(rho, ch.rate)
    if isinstance(ch, PauliChannel):
        return apply_pauli_channel(ch, rho)
    return apply_kraus(ch, rho)


def _local_operators(ch: Channel):
    """(weights, matrices) used to apply ``ch`` to a subset of qubits."""
    if isinstance(ch, DepolarizingChannel):
        ch = ch.to_pauli()
    if isinstance(ch, PauliChannel):
        return [(p, pauli_matrix(k)) for k, p in ch.probabilities.items()]
    return [(1.0, a) for a in ch.operators]


def apply_channel_local(ch: Channel, rho: np.ndarray, targets, n: int) -> np.ndarray:
    """Apply a ``k``-qubit channel to ``targets`` of an ``n``-qubit density matrix array."""
    if isinstance(ch, DepolarizingChannel) and len(targets) == n:
        r = ch.rate
        return (1.0 - r) * rho + (r / rho.shape[0]) * np.eye(rho.shape[0])
    out = np.zeros_like(rho)
    for w, a in _local_operators(ch):
        out += w * _local.conjugate(rho, a, targets, n)
    return out


def _check_targets(targets, n_qubits: int, k: int) -> list[int]:
    targets = [int(t) for t in targets]
    if len(targets) != k:
        raise ValidationError(f"{k}-qubit channel given {len(targets)} targets")
    if len(set(targets)) != len(targets):
        raise DuplicateTarget(f"duplicate targets {targets}")
    for t in targets:
        if not 0 <= t < n_qubits:
            raise TargetOutOfRange(f"target {t} outside register of {n_qubits} qubits")
    return targets


def embed_channel(ch: Channel, targets, space: HilbertSpec) -> KrausChannel:
    """Tensor every Kraus operator of ``ch`` with identity off ``targets``."""
    kraus = ch.to_kraus()
    targets = _check_targets(targets, space.n_qubits, kraus.n_qubits)
    ops = tuple(_local.embed_operator(a, targets, space.n_qubits) for a in kraus.operators)
    return KrausChannel(ops, space)


def pauli_transfer_matrix(ch: Channel) -> np.ndarray:
    """Real matrix ``R_ab = Tr(P_a E(P_b)) / d`` over the lexicographic Pauli basis."""
    kraus = ch.to_kraus()
    n = kraus.n_qubits
    d = kraus.space.dim
    basis = np.stack([pauli_matrix(p).reshape(-1) for p in all_pauli_strings(n)])
    s = kraus.superoperator()
    return ((basis.conj() @ s @ basis.T) / d).real


def depolarizing_projection(ch: Channel) -> DepolarizingForm:
    """Project a channel onto ``rho -> q rho + (1 - q) I/d``.

    ``q`` is the mean of the non-identity diagonal of the Pauli transfer
    matrix, which is the twirl of the channel over any unitary 2-design.
    """
    if isinstance(ch, DepolarizingChannel):
        return DepolarizingForm(1.0 - ch.rate, 0.0)
    ptm = pauli_transfer_matrix(ch)
    m = ptm.shape[0]
    q = float((np.trace(ptm) - ptm[0, 0]) / (m - 1))
    target = np.diag([1.0] + [q] * (m - 1))
    return DepolarizingForm(q, float(np.max(np.abs(ptm - target))))


def _depolarizing_form_kraus(q: float, space: HilbertSpec) -> KrausChannel:
    d2 = space.dim**2
    n = space.n_qubits
    p_other = (1.0 - q) / d2
    probs = {p: p_other for p in all_pauli_strings(n)}
    probs[PauliString("I" * n)] = max(0.0, 1.0 - (d2 - 1) * p_other)
    total = sum(probs.values())
    return PauliChannel({k: v / total for k, v in probs.items()}, space).to_kraus()


def twirl_channel(
    ch: Channel,
    frame,
    canonicalize: bool = True,
    tol: float = DEFAULT_TOL,
) -> KrausChannel:
    """Average ``ch`` over conjugation by the unitaries in ``frame``.

    The result is ``rho -> (1/|F|) sum_U U^dagger ch(U rho U^dagger) U``,
    stored as the Kraus family ``{U^dagger A_k U / sqrt(|F|)}``. With
    ``canonicalize`` the depolarizing projection is attached as
    ``.projection``; if its residue is below ``tol`` the returned Kraus
    family is the compact Pauli form of that projection.

    Raises
    ------
    NonUnitaryFrame
        If any frame element is not unitary within 1e-10.
    """
    kraus = ch.to_kraus()
    frame = [as_matrix(u) for u in frame]
    if not frame:
        raise ValidationError("twirling frame is empty")
    for i, u in enumerate(frame):
        if u.shape != (kraus.space.dim,) * 2 or not is_unitary(u, DEFAULT_TOL):
            raise NonUnitaryFrame(f"frame element {i} is not a unitary of dimension {kraus.space.dim}")
    scale = 1.0 / np.sqrt(len(frame))
    u = np.stack(frame)
    a = np.stack(kraus.operators)
    # ops[f, k] = U_f^dagger A_k U_f
    ops = np.einsum("fji,kjl,flm->fkim", u.conj(), a, u) * scale
    twirled = KrausChannel(tuple(ops.reshape(-1, *a.shape[1:])), kraus.space)
    if not canonicalize:
        return twirled
    form = depolarizing_projection(twirled)
    if form.residue <= tol:
        compact = _depolarizing_form_kraus(form.q, kraus.space)
        return KrausChannel(compact.operators, kraus.space, projection=form)
    return KrausChannel(twirled.operators, kraus.space, projection=form)


def _phase_key(m: np.ndarray) -> tuple:
    flat = m.reshape(-1)
    idx = int(np.argmax(np.abs(flat) > 1e-6))
    canon = flat * (abs(flat[idx]) / flat[idx])
    return tuple(np.round(canon.real, 6)) + tuple(np.round(canon.imag, 6))


@lru_cache(maxsize=2)
def _clifford_group_cached(n_qubits: int) -> tuple:
    h = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
    s = np.diag([1, 1j]).astype(np.complex128)
    gens = []
    for q in range(n_qubits):
        gens.append(_local.embed_operator(h, [q], n_qubits))
        gens.append(_local.embed_operator(s, [q], n_qubits))
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)
    for q in range(n_qubits - 1):
        gens.append(_local.embed_operator(cnot, [q, q + 1], n_qubits))
    ident = np.eye(2**n_qubits, dtype=np.complex128)
    seen = {_phase_key(ident): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for gen in gens:
                m = gen @ g
                key = _phase_key(m)
                if key not in seen:
                    seen[key] = m
                    nxt.append(m)
        frontier = nxt
    out = tuple(seen.values())
    for m in out:
        m.setflags(write=False)
    return out


def clifford_group(n_qubits: int) -> list[np.ndarray]:
    """Clifford group modulo global phase, generated from H, S and CNOT.

    Has 24 elements for one qubit and 11520 for two. Only ``n_qubits <= 2``
    is supported.
    """
    if n_qubits not in (1, 2):
        raise ValidationError(f"clifford_group supports 1 or 2 qubits, got {n_qubits}")
    return list(_clifford_group_cached(n_qubits))


def cptp_parameter_count(n_qubits: int) -> int:
    """Real degrees of freedom ``d**4 - d**2`` of an ``n``-qubit CPTP map."""
    d = 2**n_qubits
    return d**4 - d**2


def pauli_flip(letter: str, p: float) -> KrausChannel:
    """Single-qubit ``{sqrt(1-p) I, sqrt(p) P}``."""
    return PauliChannel.single(letter, p).to_kraus()


def depolarizing_kraus(n_qubits: int, r: float) -> KrausChannel:
    return DepolarizingChannel(r, HilbertSpec(n_qubits)).to_kraus()


def channels_equal(a: Channel, b: Channel, tol: float = DEFAULT_TOL) -> bool:
    """Compare two channels through their superoperators."""
    return allclose(a.to_kraus().superoperator(), b.to_kraus().superoperator(), tol)
