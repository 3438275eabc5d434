"""Hamiltonian builders for the two-level system and the collective-spin model."""

import numpy as np

from app.core.exceptions import DegeneratePointError
from app.core.operators import HermitianOperator
from app.modules.hamiltonians.schemas import LMGModel, TwoLevelModel

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


# ── Two-level system ──

def two_level_build(model: TwoLevelModel, lam: float) -> HermitianOperator:
    return HermitianOperator(model.hx.value(lam) * PAULI_X + model.hz.value(lam) * PAULI_Z)


def two_level_derivative(model: TwoLevelModel, lam: float) -> HermitianOperator:
    return HermitianOperator(model.hx.slope * PAULI_X + model.hz.slope * PAULI_Z)


def _field_norm_sq(model: TwoLevelModel, lam: float) -> float:
    r2 = model.hx.value(lam) ** 2 + model.hz.value(lam) ** 2
    if r2 == 0.0:
        raise DegeneratePointError(f"hX and hZ both vanish at lambda={lam}")
    return r2


def two_level_gap(model: TwoLevelModel, lam: float) -> float:
    """Delta = 2 sqrt(hX^2 + hZ^2)."""
    return 2.0 * float(np.sqrt(_field_norm_sq(model, lam)))


def two_level_exact_agp(model: TwoLevelModel, lam: float) -> HermitianOperator:
    """[hZ dhX - hX dhZ] / [2 (hX^2 + hZ^2)] * Y."""
    r2 = _field_norm_sq(model, lam)
    hx, hz = model.hx.value(lam), model.hz.value(lam)
    coeff = (hz * model.hx.slope - hx * model.hz.slope) / (2.0 * r2)
    return HermitianOperator(coeff * PAULI_Y)


# ── Collective spin (LMG) ──

def spin_matrices(n_spins: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(S_x, S_y, S_z) for spin S = N/2, basis ordered m = S, S-1, ..., -S."""
    s = n_spins / 2.0
    m = s - np.arange(n_spins + 1)
    # <m+1|S_+|m> sits just above the diagonal in descending-m order
    ladder = np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1))
    s_plus = np.diag(ladder, k=1).astype(complex)
    s_minus = s_plus.conj().T
    sx = 0.5 * (s_plus + s_minus)
    sy = -0.5j * (s_plus - s_minus)
    sz = np.diag(m).astype(complex)
    return sx, sy, sz


def lmg_build(model: LMGModel, lam: float) -> HermitianOperator:
    """(2J/N) S_z^2 + 2 hX S_x in the (N+1)-dimensional symmetric sector."""
    sx, _, sz = spin_matrices(model.n_spins)
    j, h = model.coupling(lam), model.transverse_field(lam)
    return HermitianOperator((2.0 * j / model.n_spins) * (sz @ sz) + 2.0 * h * sx)


def lmg_derivative(model: LMGModel, lam: float) -> HermitianOperator:
    sx, _, _ = spin_matrices(model.n_spins)
    return HermitianOperator(2.0 * model.hx0 * sx)
