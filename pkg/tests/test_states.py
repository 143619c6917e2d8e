import math

import numpy as np
import pytest

from qsvlab.channels import NoiseModel, apply_noise
from qsvlab.states import (
    DensityMatrix,
    PureState,
    embed_operator,
    fidelity,
    make_theta_state,
    make_w_state,
    pauli_string_matrix,
)

from conftest import PX, PZ, embed_oracle, w_state_vector


def test_w3_is_uniform_single_excitation():
    w3 = make_w_state(3)
    amps = w3.amplitudes
    # |001>, |010>, |100> at indices 1, 2, 4
    for idx in (1, 2, 4):
        assert amps[idx] == pytest.approx(1 / math.sqrt(3))
    assert np.count_nonzero(amps) == 3


def test_w2_is_bell_pair():
    np.testing.assert_allclose(
        make_w_state(2).amplitudes, [0, 1 / math.sqrt(2), 1 / math.sqrt(2), 0]
    )


def test_w4_normalised_and_orthogonal_to_vacuum():
    w4 = make_w_state(4)
    assert np.sum(np.abs(w4.amplitudes) ** 2) == pytest.approx(1.0, abs=1e-12)
    assert w4.amplitudes[0] == 0.0


@pytest.mark.parametrize("n", range(2, 11))
def test_w_state_amplitude_pattern(n):
    w = make_w_state(n)
    np.testing.assert_allclose(w.amplitudes, w_state_vector(n), atol=1e-15)


@pytest.mark.parametrize("n", [0, 1, 11])
def test_w_state_rejects_out_of_range(n):
    with pytest.raises(ValueError):
        make_w_state(n)


def test_theta_state_bell_point():
    np.testing.assert_allclose(
        make_theta_state(math.pi / 4).amplitudes,
        [0, 1 / math.sqrt(2), 1 / math.sqrt(2), 0],
        atol=1e-15,
    )


def test_theta_state_endpoint_is_product():
    np.testing.assert_allclose(make_theta_state(0.0).amplitudes, [0, 0, 1, 0])


def test_theta_state_table_column():
    theta = math.asin(1 / math.sqrt(3))
    np.testing.assert_allclose(
        make_theta_state(theta).amplitudes,
        [0, 1 / math.sqrt(3), math.sqrt(2) / math.sqrt(3), 0],
        atol=1e-15,
    )


def test_fidelity_of_projector_is_one():
    w3 = make_w_state(3)
    assert fidelity(w3.density(), w3) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_maximally_mixed():
    w3 = make_w_state(3)
    mixed = DensityMatrix(3, np.eye(8) / 8)
    assert fidelity(mixed, w3) == pytest.approx(1 / 8, abs=1e-12)


def test_fidelity_orthogonal_admixture():
    w3 = make_w_state(3)
    vac = np.zeros((8, 8))
    vac[0, 0] = 1.0
    rho = DensityMatrix(3, 0.9 * w3.projector() + 0.1 * vac)
    assert fidelity(rho, w3) == pytest.approx(0.9, abs=1e-12)


def test_fidelity_dimension_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        fidelity(DensityMatrix(2, np.eye(4) / 4), make_w_state(3))


def test_pure_state_norm_enforced():
    with pytest.raises(ValueError, match="sum to"):
        PureState(1, np.array([1.0, 1.0]))


def test_density_matrix_validation():
    with pytest.raises(ValueError, match="trace"):
        DensityMatrix(1, np.eye(2))
    with pytest.raises(ValueError, match="Hermitian"):
        DensityMatrix(1, np.array([[0.5, 0.5], [-0.5, 0.5]], dtype=complex))
    with pytest.raises(ValueError, match="eigenvalue"):
        DensityMatrix(1, np.array([[1.5, 0], [0, -0.5]], dtype=complex))


def test_density_matrix_immutable():
    dm = DensityMatrix(1, np.eye(2) / 2)
    with pytest.raises(ValueError):
        dm.matrix[0, 0] = 5.0


def test_embed_operator_matches_oracle():
    rng = np.random.default_rng(8)
    for qubits in [(0,), (2,), (0, 2), (1, 3)]:
        n = 4
        k = len(qubits)
        op = rng.normal(size=(2**k, 2**k)) + 1j * rng.normal(size=(2**k, 2**k))
        got = embed_operator(op, qubits, n)
        want = embed_oracle(op, qubits, n)
        assert np.max(np.abs(got - want)) < 1e-12


def test_pauli_string_matrix():
    np.testing.assert_array_equal(pauli_string_matrix("XZ"), np.kron(PX, PZ))
    with pytest.raises(ValueError):
        pauli_string_matrix("XQ")


def test_channel_fidelity_computable_from_dominant_eigenvector():
    # depolarized pure state: dominant eigenvector recovers the input
    w3 = make_w_state(3)
    rho = apply_noise(w3.density(), NoiseModel.depolarizing(0.2))
    w, v = np.linalg.eigh(np.asarray(rho.matrix))
    top = v[:, -1]
    assert abs(np.vdot(top, w3.amplitudes)) ** 2 == pytest.approx(1.0, abs=1e-10)
