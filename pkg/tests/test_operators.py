import numpy as np
import pytest
import scipy.linalg

from app.core.exceptions import DimensionMismatchError, LabError, NotHermitianError
from app.core.operators import (
    HermitianOperator,
    StateVector,
    UnitaryMatrix,
    commutator,
    eigendecompose,
    expm_hermitian,
    hs_norm,
    infidelity,
    nested_commutator,
    spectral_norm,
)


class TestHermitianOperator:

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            HermitianOperator(np.array([[0, 1], [0, 0]], dtype=complex))

    def test_rejects_non_square(self):
        with pytest.raises(DimensionMismatchError):
            HermitianOperator(np.zeros((2, 3)))

    def test_rejects_non_finite(self):
        with pytest.raises(LabError):
            HermitianOperator(np.array([[np.nan, 0], [0, 1]]))

    def test_from_matrix_symmetrizes_small_defects(self, pauli):
        noisy = pauli["X"] + np.array([[0, 1e-11], [0, 0]])
        op = HermitianOperator.from_matrix(noisy)
        assert np.array_equal(op.matrix, op.matrix.conj().T)
        assert np.allclose(op.matrix, pauli["X"], atol=1e-10)

    def test_matrix_is_read_only_copy(self, pauli):
        source = pauli["Z"].copy()
        op = HermitianOperator(source)
        source[0, 0] = 5.0
        assert op.matrix[0, 0] == 1.0
        with pytest.raises(ValueError):
            op.matrix[0, 0] = 2.0

    def test_arithmetic(self, pauli):
        x, z = HermitianOperator(pauli["X"]), HermitianOperator(pauli["Z"])
        assert np.allclose((x + z).matrix, pauli["X"] + pauli["Z"])
        assert np.allclose((x - z).matrix, pauli["X"] - pauli["Z"])
        with pytest.raises(DimensionMismatchError):
            x + HermitianOperator.zeros(3)


class TestEigendecompose:

    @pytest.mark.parametrize("dim", [1, 2, 6, 16])
    def test_reconstructs_operator(self, random_hermitian, dim):
        h = random_hermitian(dim)
        dec = eigendecompose(h)
        assert np.all(np.diff(dec.eigenvalues) > 0)
        rebuilt = dec.from_eigenbasis(np.diag(dec.eigenvalues))
        np.testing.assert_allclose(rebuilt, h.matrix, atol=1e-11)
        np.testing.assert_allclose(dec.vectors.conj().T @ dec.vectors, np.eye(dim), atol=1e-12)

    def test_phase_convention(self, random_hermitian):
        dec = eigendecompose(random_hermitian(5))
        for n in range(dec.dim):
            column = dec.vectors[:, n]
            pivot = column[np.argmax(np.abs(column))]
            assert abs(pivot.imag) < 1e-14
            assert pivot.real > 0

    def test_gaps(self, pauli):
        dec = eigendecompose(HermitianOperator(pauli["Z"]))
        np.testing.assert_allclose(dec.gaps(), [[0.0, -2.0], [2.0, 0.0]])

    def test_states_are_eigenvectors(self, random_hermitian):
        h = random_hermitian(4)
        dec = eigendecompose(h)
        for energy, state in zip(dec.eigenvalues, dec.states):
            np.testing.assert_allclose(h.matrix @ state.amplitudes, energy * state.amplitudes, atol=1e-12)


class TestExponential:

    def test_matches_scipy_expm(self, random_hermitian):
        h = random_hermitian(5)
        u = expm_hermitian(h, 0.7)
        np.testing.assert_allclose(u.matrix, scipy.linalg.expm(-0.7j * h.matrix), atol=1e-12)

    def test_zero_time_is_identity(self, random_hermitian):
        np.testing.assert_allclose(expm_hermitian(random_hermitian(3), 0.0).matrix, np.eye(3), atol=1e-14)

    @pytest.mark.parametrize("dim", [1, 3, 8, 16])
    def test_inverse_is_negative_time(self, random_hermitian, rng, dim):
        h = random_hermitian(dim)
        t = float(rng.uniform(-3.0, 3.0))
        product = expm_hermitian(h, t).matrix @ expm_hermitian(h, -t).matrix
        np.testing.assert_allclose(product, np.eye(dim), atol=1e-12)

    def test_unitary_rejects_non_unitary(self):
        with pytest.raises(LabError):
            UnitaryMatrix(np.array([[1.0, 0.0], [0.0, 2.0]]))


class TestCommutators:

    def test_pauli_algebra(self, pauli):
        np.testing.assert_allclose(commutator(pauli["X"], pauli["Y"]), 2j * pauli["Z"])
        np.testing.assert_allclose(commutator(pauli["Z"], pauli["X"]), 2j * pauli["Y"])
        np.testing.assert_allclose(commutator(pauli["Z"], pauli["Y"]), -2j * pauli["X"])

    @pytest.mark.parametrize("dim", [2, 5, 9])
    def test_antisymmetry(self, random_hermitian, dim):
        a, b = random_hermitian(dim), random_hermitian(dim)
        total = commutator(a, b) + commutator(b, a)
        assert hs_norm(total) <= 1e-14 * hs_norm(a) * hs_norm(b)

    def test_nested_orders(self, pauli):
        np.testing.assert_allclose(nested_commutator(pauli["Z"], pauli["X"], 0), pauli["X"])
        # [Z, [Z, X]] = [Z, 2iY] = 4X
        np.testing.assert_allclose(nested_commutator(pauli["Z"], pauli["X"], 2), 4 * pauli["X"])
        np.testing.assert_allclose(nested_commutator(pauli["Z"], pauli["X"], 3), 8j * pauli["Y"])
        with pytest.raises(LabError):
            nested_commutator(pauli["Z"], pauli["X"], -1)


class TestStatesAndNorms:

    def test_state_must_be_normalized(self):
        with pytest.raises(LabError):
            StateVector(np.array([1.0, 1.0]))
        state = StateVector.normalized([1.0, 1.0])
        assert np.isclose(np.linalg.norm(state.amplitudes), 1.0)

    def test_infidelity(self):
        up, down = StateVector([1.0, 0.0]), StateVector([0.0, 1.0])
        plus = StateVector.normalized([1.0, 1.0])
        assert infidelity(up, up) == 0.0
        assert infidelity(up, down) == 1.0
        assert np.isclose(infidelity(up, plus), 0.5)
        with pytest.raises(DimensionMismatchError):
            infidelity(up, StateVector([1.0, 0.0, 0.0]))

    def test_norms(self, pauli):
        assert np.isclose(spectral_norm(pauli["Z"]), 1.0)
        assert np.isclose(hs_norm(pauli["I"]), np.sqrt(2.0))
        assert np.isclose(spectral_norm(HermitianOperator(3 * pauli["X"])), 3.0)

    @pytest.mark.parametrize("dim", [2, 4, 7])
    def test_hs_norm_unitary_invariance(self, random_hermitian, rng, dim):
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        u = expm_hermitian(random_hermitian(dim), float(rng.uniform(0.1, 2.0))).matrix
        assert hs_norm(u @ m @ u.conj().T) == pytest.approx(hs_norm(m), rel=1e-12)
        assert hs_norm(u @ m) == pytest.approx(hs_norm(m), rel=1e-12)
