import numpy as np
import pytest
from hypothesis import given, strategies as st

from heatstat.errors import DimensionMismatch, NotHermitian
from heatstat.models import HermitianSpec, unitarity_deviation
from heatstat.qcore import adjoint, jacobi_eigh, matmul, matrix_power, propagator, reconstruct, trace

from conftest import haar_unitary


def random_hermitian(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (X + X.conj().T)


@given(n=st.integers(1, 7), seed=st.integers(0, 2 ** 31 - 1))
def test_jacobi_matches_numpy(n, seed):
    A = random_hermitian(n, seed)
    spec = jacobi_eigh(A)
    np.testing.assert_allclose(spec.eigenvalues, np.linalg.eigvalsh(A), atol=1e-10)
    assert unitarity_deviation(spec.eigenvectors) <= 1e-10
    np.testing.assert_allclose(reconstruct(spec), A, atol=1e-10)
    assert np.all(np.diff(spec.eigenvalues) >= 0)


def test_jacobi_degenerate_spectrum():
    U = haar_unitary(3, 11)
    A = U @ np.diag([1.0, 1.0, 2.0]) @ U.conj().T
    spec = jacobi_eigh(A)
    np.testing.assert_allclose(spec.eigenvalues, [1.0, 1.0, 2.0], atol=1e-12)
    np.testing.assert_allclose(reconstruct(spec), A, atol=1e-12)


def test_jacobi_diagonal_input_is_sorted():
    spec = jacobi_eigh(np.diag([3.0, -1.0, 0.5]))
    np.testing.assert_array_equal(spec.eigenvalues, [-1.0, 0.5, 3.0])


def test_jacobi_rejects_non_hermitian():
    A = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(NotHermitian) as info:
        jacobi_eigh(A)
    assert info.value.deviation == pytest.approx(2.0)


def test_non_square_is_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        jacobi_eigh(np.zeros((2, 3)))
    with pytest.raises(DimensionMismatch):
        matmul(np.eye(2), np.eye(3))


def test_propagator_phases():
    H = HermitianSpec.from_energies([-1.0, 0.5, 2.0])
    U = propagator(H, 0.8)
    np.testing.assert_allclose(np.abs(U.phases), 1.0)
    np.testing.assert_allclose(U.matrix, np.diag(np.exp(-1j * np.array([-1.0, 0.5, 2.0]) * 0.8)))
    np.testing.assert_array_equal(propagator(H, 0.0).matrix, np.eye(3))


def test_small_helpers():
    A = haar_unitary(4, 3)
    np.testing.assert_allclose(matmul(adjoint(A), A), np.eye(4), atol=1e-12)
    assert trace(np.eye(4)) == pytest.approx(4.0)
    np.testing.assert_array_equal(matrix_power(A, 0), np.eye(4))
    np.testing.assert_allclose(matrix_power(A, 3), A @ A @ A, atol=1e-12)


def test_jacobi_converges_on_previously_stalling_input():
    A = random_hermitian(4, 1)
    spec = jacobi_eigh(A)
    np.testing.assert_allclose(spec.eigenvalues, np.linalg.eigvalsh(A), atol=1e-10)
    np.testing.assert_allclose(reconstruct(spec), A, atol=1e-10)


def test_jacobi_converges_across_many_seeds():
    for n in range(2, 7):
        for seed in range(300):
            A = random_hermitian(n, seed)
            np.testing.assert_allclose(reconstruct(jacobi_eigh(A)), A, atol=1e-10)
