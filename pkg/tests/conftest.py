import numpy as np
import pytest

from app.core.operators import HermitianOperator
from app.modules.drive.service import ground_spectrum
from app.modules.hamiltonians.schemas import AffineSchedule, LMGModel, TwoLevelModel

LMG_LAMBDA = 1.0
LMG_STEP = 1e-3


@pytest.fixture
def pauli():
    return {
        "I": np.eye(2, dtype=complex),
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_hermitian(rng):
    """Factory for dense random Hermitian operators with a generic spectrum."""

    def make(dim: int, scale: float = 1.0) -> HermitianOperator:
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        return HermitianOperator(scale * 0.5 * (a + a.conj().T))

    return make


@pytest.fixture
def two_level_model():
    """hX(lambda) = lambda, hZ = 1."""
    return TwoLevelModel(hx=AffineSchedule(offset=0.0, slope=1.0), hz=AffineSchedule(offset=1.0, slope=0.0))


@pytest.fixture(scope="session")
def lmg_model():
    """N = 10, J0 = -1, hX = lambda, evaluated at the critical point lambda = 1."""
    return LMGModel(n_spins=10, j0=-1.0, hx0=1.0)


@pytest.fixture(scope="session")
def lmg_spectrum(lmg_model):
    return ground_spectrum(lmg_model, LMG_LAMBDA)


@pytest.fixture(scope="session")
def small_lmg_model():
    return LMGModel(n_spins=4, j0=-1.0, hx0=1.0)


def local_minima(values) -> list[int]:
    """1-based K of interior points strictly below both neighbours."""
    return [i + 1 for i in range(1, len(values) - 1) if values[i] < values[i - 1] and values[i] < values[i + 1]]


def local_maxima(values) -> list[int]:
    return [i + 1 for i in range(1, len(values) - 1) if values[i] > values[i - 1] and values[i] > values[i + 1]]
