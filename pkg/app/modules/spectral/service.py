"""Exact gauge potential, spectral function, effective generator and the
distance functionals that compare them."""

import logging
import math

import numpy as np

from app.config import settings
from app.core.exceptions import (
    DimensionMismatchError,
    EmptySpectralSupportError,
    GaugePotentialUndefinedError,
    LabError,
    ScheduleError,
)
from app.core.operators import (
    HermitianOperator,
    SpectralDecomposition,
    eigendecompose,
    nested_commutator,
    spectral_norm,
)
from app.modules.schedule.schemas import AngleSchedule
from app.modules.spectral.schemas import SpectralFunction, SpectralLine, TruncatedAgpFit

logger = logging.getLogger("udcd.spectral")

MAX_SERIES_ORDER = 400


def _eigen_data(h: HermitianOperator, dh: HermitianOperator) -> tuple[SpectralDecomposition, np.ndarray, np.ndarray]:
    """Decomposition of h, <m|dh|n> in that basis, and omega_mn = E_m - E_n."""
    if h.dim != dh.dim:
        raise DimensionMismatchError(f"H has dim {h.dim} but dH has dim {dh.dim}")
    dec = eigendecompose(h)
    return dec, dec.to_eigenbasis(dh), dec.gaps()


def _degenerate_mask(dec: SpectralDecomposition, omega: np.ndarray) -> np.ndarray:
    threshold = settings.DEGENERACY_TOL * float(np.max(np.abs(dec.eigenvalues)))
    off_diagonal = ~np.eye(dec.dim, dtype=bool)
    return off_diagonal & (np.abs(omega) <= threshold)


def _coupled_mask(dh_eig: np.ndarray, dh: HermitianOperator) -> np.ndarray:
    return np.abs(dh_eig) > settings.COUPLING_TOL * spectral_norm(dh)


def _raise_if_coupled_degenerate(bad: np.ndarray, omega: np.ndarray) -> None:
    if bad.any():
        m, n = (int(i) for i in np.argwhere(np.triu(bad | bad.T))[0])
        raise GaugePotentialUndefinedError(m, n, float(omega[m, n]))


def exact_agp(h: HermitianOperator, dh: HermitianOperator) -> HermitianOperator:
    """<m|A|n> = i <m|dH|n> / omega_nm for m != n, zero on the diagonal."""
    dec, dh_eig, omega = _eigen_data(h, dh)
    degenerate = _degenerate_mask(dec, omega)
    _raise_if_coupled_degenerate(degenerate & _coupled_mask(dh_eig, dh), omega)

    safe = ~np.eye(dec.dim, dtype=bool) & ~degenerate
    a_eig = np.zeros_like(dh_eig)
    a_eig[safe] = -1j * dh_eig[safe] / omega[safe]
    return HermitianOperator.from_matrix(dec.from_eigenbasis(a_eig))


def spectral_function(h: HermitianOperator, dh: HermitianOperator, ground_only: bool = False) -> SpectralFunction:
    """Lines (omega_mn, |<m|dH|n>|^2) over all pairs, or over pairs with the ground state."""
    dec, dh_eig, omega = _eigen_data(h, dh)
    weights = np.abs(dh_eig) ** 2

    if ground_only:
        pairs = [(m, 0) for m in range(1, dec.dim)] + [(0, m) for m in range(1, dec.dim)]
    else:
        pairs = [(m, n) for m in range(dec.dim) for n in range(dec.dim) if m != n]
    if not pairs:
        raise EmptySpectralSupportError("A one-dimensional Hamiltonian has no spectral lines")

    max_weight = max(weights[m, n] for m, n in pairs)
    threshold = max(settings.WEIGHT_THRESHOLD * max_weight, (settings.COUPLING_TOL * spectral_norm(dh)) ** 2)
    support = [(m, n) for m, n in pairs if weights[m, n] > threshold]
    if not support:
        raise EmptySpectralSupportError()

    degenerate = _degenerate_mask(dec, omega)
    for m, n in support:
        if degenerate[m, n]:
            raise GaugePotentialUndefinedError(m, n, float(omega[m, n]))

    lines = tuple(SpectralLine(omega=float(omega[m, n]), weight=float(weights[m, n])) for m, n in support)
    gaps = [abs(line.omega) for line in lines]
    return SpectralFunction(lines=lines, delta_min=min(gaps), delta_max=max(gaps), ground_only=ground_only)


def kernel_partial_sum(sched: AngleSchedule, omegas) -> np.ndarray:
    """sum_k (phi_k / dl) sin(theta_k omega), the Fourier side of the kernel."""
    w = np.asarray(omegas, dtype=float)
    flat = w.reshape(-1)
    values = np.sin(np.multiply.outer(flat, sched.thetas)) @ (sched.phis / sched.delta_lambda)
    return values.reshape(w.shape)


def effective_generator(h: HermitianOperator, dh: HermitianOperator, sched: AngleSchedule) -> HermitianOperator:
    """<m|V|n> = i <m|dH|n> sum_k (phi_k / dl) sin(theta_k omega_mn)."""
    if sched.delta_lambda == 0.0:
        raise ScheduleError("delta_lambda must be non-zero")
    dec, dh_eig, omega = _eigen_data(h, dh)
    v_eig = 1j * dh_eig * kernel_partial_sum(sched, omega)
    return HermitianOperator.from_matrix(dec.from_eigenbasis(v_eig))


def effective_generator_series(
    h: HermitianOperator,
    dh: HermitianOperator,
    sched: AngleSchedule,
    tol: float = 1e-14,
) -> HermitianOperator:
    """The odd nested-commutator series of V summed until a term drops below tol.

    Terms are carried as (theta_max L)^{2l-1} dH / (2l-1)! so neither the
    commutator powers nor the factorials overflow.
    """
    if h.dim != dh.dim:
        raise DimensionMismatchError(f"H has dim {h.dim} but dH has dim {dh.dim}")
    result = np.zeros_like(dh.matrix)
    if sched.K == 0:
        return HermitianOperator(result)

    theta_max = float(np.max(np.abs(sched.thetas)))
    ratios = sched.thetas / theta_max
    weights = sched.phis / sched.delta_lambda
    h_scaled = theta_max * h.matrix

    scaled_term = nested_commutator(h_scaled, dh.matrix, 1)
    for l in range(1, MAX_SERIES_ORDER + 1):
        coeff = (-1) ** (l + 1) * float(np.sum(weights * ratios ** (2 * l - 1)))
        term = 1j * coeff * scaled_term
        result = result + term
        # |coeff| <= sum |weights|, so this bounds the current term
        if l > 1 and np.linalg.norm(scaled_term) * np.sum(np.abs(weights)) < tol:
            break
        scaled_term = nested_commutator(h_scaled, scaled_term, 2) / ((2 * l) * (2 * l + 1))
    else:
        logger.warning("Nested-commutator series did not reach tol=%g after %d terms", tol, MAX_SERIES_ORDER)
    return HermitianOperator.from_matrix(result)


def _check_frequencies(omegas: np.ndarray) -> None:
    if np.any(omegas == 0.0):
        raise LabError("Spectral function has a zero-frequency line")


def agp_distance(spec: SpectralFunction, sched: AngleSchedule) -> float:
    """sum over lines of weight * [1/omega + sum_k (phi_k/dl) sin(theta_k omega)]^2."""
    if sched.delta_lambda == 0.0:
        raise ScheduleError("delta_lambda must be non-zero")
    omegas, weights = spec.omegas, spec.weights
    _check_frequencies(omegas)
    residual = 1.0 / omegas + kernel_partial_sum(sched, omegas)
    return float(np.sum(weights * residual**2))


def ground_state_distance(h: HermitianOperator, dh: HermitianOperator, sched: AngleSchedule, target_index: int = 0) -> float:
    """||(A - V)|n>||^2 for the eigenstate n = target_index of h."""
    dec = eigendecompose(h)
    diff = exact_agp(h, dh).matrix - effective_generator(h, dh, sched).matrix
    return float(np.linalg.norm(diff @ dec.vectors[:, target_index]) ** 2)


def kernel_curve(
    sched: AngleSchedule,
    omegas,
    regularized: bool = False,
    eta: float | None = None,
) -> list[float]:
    """[g(omega) + sum_k (phi_k/dl) sin(theta_k omega)]^2 with g = 1/omega
    or, when regularized, omega / (omega^2 + eta^2)."""
    w = np.asarray(omegas, dtype=float)
    if regularized:
        eta = sched.eta if eta is None else eta
        if eta is None:
            raise ScheduleError("A regularized kernel needs eta")
        if eta == 0.0:
            _check_frequencies(w)
        g = w / (w**2 + eta**2)
    else:
        _check_frequencies(w)
        g = 1.0 / w
    return ((g + kernel_partial_sum(sched, w)) ** 2).tolist()


def truncated_distance(spec: SpectralFunction, alphas) -> float:
    """sum over lines of weight * [1/omega + sum_l alpha_l omega^{2l-1}]^2."""
    omegas, weights = spec.omegas, spec.weights
    _check_frequencies(omegas)
    powers = 2 * np.arange(1, len(alphas) + 1) - 1
    poly = (omegas[:, None] ** powers[None, :]) @ np.asarray(alphas, dtype=float)
    return float(np.sum(weights * (1.0 / omegas + poly) ** 2))


def fit_truncated_agp(spec: SpectralFunction, d: int) -> TruncatedAgpFit:
    """Weighted least squares of -1/omega in the odd monomials omega^{2l-1}.

    Frequencies are rescaled by the largest |omega| before the solve; the
    SVD-based solver returns the minimum-norm solution in the rescaled
    coefficients when the system is rank deficient.
    """
    if d < 1:
        raise LabError(f"Truncation order d must be at least 1, got {d}")
    if not spec.lines:
        raise EmptySpectralSupportError()
    omegas, weights = spec.omegas, spec.weights
    _check_frequencies(omegas)

    scale = float(np.max(np.abs(omegas)))
    powers = 2 * np.arange(1, d + 1) - 1
    root_w = np.sqrt(weights)
    design = root_w[:, None] * (omegas[:, None] / scale) ** powers[None, :]
    target = -root_w / omegas
    beta, _, rank, _ = np.linalg.lstsq(design, target, rcond=settings.LSTSQ_RCOND)
    if rank < d:
        logger.warning("Truncated AGP fit is rank deficient (rank %d < d=%d)", rank, d)

    alphas = tuple(float(b) for b in beta / scale ** powers.astype(float))
    residual = max(0.0, truncated_distance(spec, alphas))
    return TruncatedAgpFit(d=d, alphas=alphas, residual=residual)


def truncated_agp_operator(h: HermitianOperator, dh: HermitianOperator, fit: TruncatedAgpFit) -> HermitianOperator:
    """i sum_l alpha_l L^{2l-1} dH built from explicit nested commutators."""
    if h.dim != dh.dim:
        raise DimensionMismatchError(f"H has dim {h.dim} but dH has dim {dh.dim}")
    result = np.zeros_like(dh.matrix)
    term = nested_commutator(h, dh, 1)
    for alpha in fit.alphas:
        result = result + 1j * alpha * term
        term = nested_commutator(h, term, 2)
    return HermitianOperator.from_matrix(result)


def relative_error(a: HermitianOperator, b: HermitianOperator) -> float:
    """||a - b|| / ||b|| in the Hilbert-Schmidt norm (absolute if b = 0)."""
    denom = float(np.linalg.norm(b.matrix))
    diff = float(np.linalg.norm(a.matrix - b.matrix))
    return diff / denom if denom > 0 and math.isfinite(denom) else diff
