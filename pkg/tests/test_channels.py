import numpy as np
import pytest
from hypothesis import given, strategies as st

from depolproj.channels import (
    DepolarizingChannel,
    KrausChannel,
    PauliChannel,
    apply_channel,
    apply_channel_local,
    apply_kraus,
    channels_equal,
    clifford_group,
    cptp_parameter_count,
    depolarize,
    depolarizing_kraus,
    depolarizing_projection,
    embed_channel,
    pauli_flip,
    pauli_transfer_matrix,
    twirl_channel,
    validate_cptp,
)
from depolproj.errors import (
    DuplicateTarget,
    IncompleteKraus,
    NonUnitaryFrame,
    RateOutOfRange,
    SpaceMismatch,
    TargetOutOfRange,
    ValidationError,
)
from depolproj.linalg import SeedStream, haar_unitary, is_unitary
from depolproj.projection import project_rho_d, theoretical_q
from depolproj.states import DensityMatrix, HilbertSpec

from oracles import PAULI, TWIRLED_2Q_CONTRACTION, random_density, random_pure, twirl_apply

ONE = HilbertSpec(1)


def conjugation(letter: str) -> KrausChannel:
    return KrausChannel((PAULI[letter],), ONE)


def test_clifford_group_orders():
    g1 = clifford_group(1)
    assert len(g1) == 24
    assert all(is_unitary(u, 1e-12) for u in g1)
    assert len(clifford_group(2)) == 11520


def test_cptp_parameter_count():
    assert cptp_parameter_count(1) == 12
    assert cptp_parameter_count(2) == 240


def test_twirled_x_conjugation_is_projected_state():
    tw = twirl_channel(conjugation("X"), clifford_group(1))
    assert abs(tw.projection.q - (-1 / 3)) <= 1e-12
    assert tw.projection.residue <= 1e-12
    rho0 = DensityMatrix.zero(1)
    out = apply_channel(tw, rho0)
    assert np.max(np.abs(out.matrix - project_rho_d(rho0).matrix)) <= 1e-12
    # against the direct average over the group
    ref = twirl_apply(clifford_group(1), [PAULI["X"]], rho0.matrix)
    assert np.max(np.abs(out.matrix - ref)) <= 1e-12


@pytest.mark.parametrize("letter", ["X", "Y", "Z"])
@given(seed=st.integers(0, 2**32 - 1))
def test_twirl_of_any_pauli_conjugation_depolarizes(letter, seed):
    tw = twirl_channel(conjugation(letter), clifford_group(1))
    assert abs(tw.projection.q - theoretical_q(1)) <= 1e-12
    rho = random_density(2, np.random.default_rng(seed))
    ref = twirl_apply(clifford_group(1), [PAULI[letter]], rho)
    assert np.allclose(apply_channel(tw, DensityMatrix(rho)).matrix, ref, atol=1e-12)


def test_twirl_without_canonical_form_matches_oracle():
    ch = pauli_flip("Y", 0.3)
    tw = twirl_channel(ch, clifford_group(1), canonicalize=False)
    rho = random_density(2, np.random.default_rng(4))
    ref = twirl_apply(clifford_group(1), ch.operators, rho)
    assert np.allclose(apply_kraus(tw, DensityMatrix(rho)).matrix, ref, atol=1e-12)


def test_twirl_non_pauli_channel_depolarizes():
    # amplitude damping is not unital; its twirl is still depolarizing
    g = 0.3
    ad = KrausChannel(
        (np.array([[1, 0], [0, np.sqrt(1 - g)]]), np.array([[0, np.sqrt(g)], [0, 0]])), ONE
    )
    tw = twirl_channel(ad, clifford_group(1))
    assert tw.projection.residue <= 1e-12
    rho = random_density(2, np.random.default_rng(0))
    ref = twirl_apply(clifford_group(1), ad.operators, rho)
    assert np.allclose(apply_channel(tw, DensityMatrix(rho)).matrix, ref, atol=1e-12)


def test_two_qubit_twirl_contraction():
    ch = PauliChannel.single("X", 0.01, n_qubits=2, qubit=0)
    tw = twirl_channel(ch, clifford_group(2))
    assert tw.projection.residue <= 1e-12
    assert abs(tw.projection.q - TWIRLED_2Q_CONTRACTION) <= 1e-12
    assert abs(tw.projection.q - (1 - 0.01 * (1 - theoretical_q(2)))) <= 1e-12


def test_haar_frame_is_only_approximate():
    frame = [haar_unitary(2, SeedStream(3)) for _ in range(1)]
    tw = twirl_channel(conjugation("X"), frame)
    assert tw.projection.residue > 1e-3


def test_frame_must_be_unitary():
    with pytest.raises(NonUnitaryFrame):
        twirl_channel(conjugation("X"), [np.eye(2) * 2])


def test_kraus_completeness():
    assert validate_cptp(pauli_flip("X", 0.2))
    bad = KrausChannel((np.eye(2) * 0.9,), ONE)
    assert not validate_cptp(bad)
    with pytest.raises(IncompleteKraus):
        apply_kraus(bad, DensityMatrix.zero(1))


def test_rates_validated():
    with pytest.raises(RateOutOfRange):
        depolarize(DensityMatrix.zero(1), 1.5)
    with pytest.raises(RateOutOfRange):
        DepolarizingChannel(-0.1, ONE)
    with pytest.raises(ValidationError):
        PauliChannel({"I": 0.5, "X": 0.4})


def test_ptm_of_depolarizing():
    ptm = pauli_transfer_matrix(depolarizing_kraus(1, 0.3))
    assert np.allclose(ptm, np.diag([1, 0.7, 0.7, 0.7]), atol=1e-14)
    form = depolarizing_projection(DepolarizingChannel(0.3, ONE))
    assert form.rate == pytest.approx(0.3)


def test_representations_agree():
    for r in (0.0, 0.25, 1.0):
        dep = DepolarizingChannel(r, HilbertSpec(2))
        assert channels_equal(dep.to_kraus(), dep.to_pauli(), 1e-12)
        rho = DensityMatrix(random_density(4, np.random.default_rng(1)))
        a = apply_channel(dep, rho).matrix
        b = apply_channel(dep.to_pauli(), rho).matrix
        c = apply_channel(dep.to_kraus(), rho).matrix
        assert np.allclose(a, b, atol=1e-14) and np.allclose(a, c, atol=1e-14)


@given(st.integers(0, 2**32 - 1), st.floats(0, 1), st.sampled_from(["X", "Y", "Z"]))
def test_channels_preserve_density_matrices(seed, p, letter):
    rho = DensityMatrix(random_density(4, np.random.default_rng(seed)))
    ch = embed_channel(pauli_flip(letter, p), [1], HilbertSpec(2))
    out = apply_channel(ch, rho)
    assert out.is_valid(1e-10)
    out = apply_channel(DepolarizingChannel(p, HilbertSpec(2)), rho)
    assert out.is_valid(1e-10)


@given(st.integers(0, 2**32 - 1), st.permutations([0, 1, 2]))
def test_local_application_matches_embedding(seed, perm):
    rng = np.random.default_rng(seed)
    rho = random_density(8, rng)
    ch = PauliChannel({"IX": 0.1, "ZY": 0.2, "II": 0.7})
    targets = list(perm[:2])
    local = apply_channel_local(ch, rho, targets, 3)
    full = apply_kraus(embed_channel(ch, targets, HilbertSpec(3)), DensityMatrix(rho)).matrix
    assert np.allclose(local, full, atol=1e-13)


def test_embed_targets_checked():
    with pytest.raises(DuplicateTarget):
        embed_channel(depolarizing_kraus(2, 0.1), [0, 0], HilbertSpec(3))
    with pytest.raises(TargetOutOfRange):
        embed_channel(pauli_flip("X", 0.1), [3], HilbertSpec(3))
    with pytest.raises(SpaceMismatch):
        apply_channel(depolarizing_kraus(2, 0.1), DensityMatrix.zero(1))


def test_pure_state_twirl_entropy_is_closed_form():
    psi = random_pure(2, np.random.default_rng(2))
    tw = twirl_channel(conjugation("Z"), clifford_group(1))
    out = apply_channel(tw, DensityMatrix(psi))
    assert np.allclose(np.sort(np.linalg.eigvalsh(out.matrix)), [1 / 3, 2 / 3], atol=1e-12)
