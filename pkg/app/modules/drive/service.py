"""Composite unitary, gate sequences and the infidelity experiments."""

import logging
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from app.config import settings
from app.core.exceptions import DegenerateLevelError, DimensionMismatchError, LabError
from app.core.operators import (
    HermitianOperator,
    StateVector,
    UnitaryMatrix,
    eigendecompose,
    expm_hermitian,
    hs_norm,
    infidelity,
    spectral_norm,
)
from app.modules.drive.schemas import (
    DriveResult,
    GateSequence,
    GateStep,
    GeneratorTag,
    Ordering,
    SweepResult,
)
from app.modules.hamiltonians.schemas import ParametrizedHamiltonian
from app.modules.schedule.schemas import AngleSchedule, ComplexityReport
from app.modules.schedule.service import (
    complexity_estimate,
    period_prediction,
    regularized_angles,
    standard_angles,
)
from app.modules.spectral.schemas import SpectralFunction
from app.modules.spectral.service import effective_generator, spectral_function

logger = logging.getLogger("udcd.drive")

COMPOSITE_UNITARY_TOL = 1e-9


def _ordered_factors(sched: AngleSchedule, ordering: Ordering) -> list[tuple[int, float, float]]:
    factors = sched.signed_pairs()
    return factors if ordering == Ordering.ASCENDING else factors[::-1]


def _check_dims(h: HermitianOperator, dh: HermitianOperator) -> None:
    if h.dim != dh.dim:
        raise DimensionMismatchError(f"H has dim {h.dim} but dH has dim {dh.dim}")


# ── Unitaries ──

def composite_unitary(
    h: HermitianOperator,
    dh: HermitianOperator,
    sched: AngleSchedule,
    ordering: Ordering = Ordering.ASCENDING,
) -> UnitaryMatrix:
    """prod_k e^{i theta_k H} e^{-i (phi_k/2) dH} e^{-i theta_k H}, k = -K..K, k != 0."""
    _check_dims(h, dh)
    h_dec, dh_dec = eigendecompose(h), eigendecompose(dh)
    u = np.eye(h.dim, dtype=complex)
    for _, theta, phi in _ordered_factors(sched, ordering):
        rotation = h_dec.exponential(theta).matrix
        kick = dh_dec.exponential(phi / 2.0).matrix
        u = rotation.conj().T @ kick @ rotation @ u
    return UnitaryMatrix(u, tol=COMPOSITE_UNITARY_TOL)


def adiabatic_unitary(agp: HermitianOperator, delta_lambda: float) -> UnitaryMatrix:
    """e^{-i dl A}, the quench limit of counterdiabatic driving."""
    return expm_hermitian(agp, delta_lambda)


def generator_gap(
    h: HermitianOperator,
    dh: HermitianOperator,
    sched: AngleSchedule,
    ordering: Ordering = Ordering.ASCENDING,
) -> float:
    """||U - e^{-i dl V}||, the part of the composite unitary beyond first order in phi."""
    u = composite_unitary(h, dh, sched, ordering)
    single = expm_hermitian(effective_generator(h, dh, sched), sched.delta_lambda)
    return hs_norm(u.matrix - single.matrix)


# ── Gate sequences ──

def gate_sequence(sched: AngleSchedule, merge: bool = False, ordering: Ordering = Ordering.ASCENDING) -> GateSequence:
    """Expand the composite unitary into exp(-i angle G) steps.

    With merge=True adjacent H rotations of consecutive factors are fused,
    e.g. e^{-i theta_k H} e^{i theta_{k+1} H} = e^{i (pi/Omega) H}.
    """
    steps: list[GateStep] = []
    for _, theta, phi in _ordered_factors(sched, ordering):
        steps.append(GateStep(tag=GeneratorTag.H, angle=theta))
        steps.append(GateStep(tag=GeneratorTag.DH, angle=phi / 2.0))
        steps.append(GateStep(tag=GeneratorTag.H, angle=-theta))

    if merge:
        fused: list[GateStep] = []
        for step in steps:
            if fused and step.tag == GeneratorTag.H and fused[-1].tag == GeneratorTag.H:
                fused[-1] = GateStep(tag=GeneratorTag.H, angle=fused[-1].angle + step.angle)
            else:
                fused.append(step)
        steps = fused
    return GateSequence(steps=tuple(steps), merged=merge, ordering=ordering)


def replay_gates(h: HermitianOperator, dh: HermitianOperator, sequence: GateSequence) -> UnitaryMatrix:
    _check_dims(h, dh)
    decompositions = {GeneratorTag.H: eigendecompose(h), GeneratorTag.DH: eigendecompose(dh)}
    u = np.eye(h.dim, dtype=complex)
    for step in sequence.steps:
        u = decompositions[step.tag].exponential(step.angle).matrix @ u
    return UnitaryMatrix(u, tol=COMPOSITE_UNITARY_TOL)


def sequence_complexity(sequence: GateSequence, h_norm: float, dh_norm: float) -> ComplexityReport:
    """sum over steps of ||G|| |angle|, counted gate by gate."""
    h_term = sum(abs(s.angle) for s in sequence.steps if s.tag == GeneratorTag.H) * h_norm
    dh_term = sum(abs(s.angle) for s in sequence.steps if s.tag == GeneratorTag.DH) * dh_norm
    return ComplexityReport(h_term=h_term, dh_term=dh_term, total=h_term + dh_term)


# ── Infidelity experiments ──

def eigenstate(h: HermitianOperator, index: int) -> StateVector:
    """Eigenstate `index` of h, refusing degenerate levels."""
    dec = eigendecompose(h)
    if not 0 <= index < dec.dim:
        raise LabError(f"Target index {index} out of range for dimension {dec.dim}")
    threshold = settings.DEGENERACY_TOL * float(np.max(np.abs(dec.eigenvalues)))
    energies = dec.eigenvalues
    for neighbor in (index - 1, index + 1):
        if 0 <= neighbor < dec.dim and abs(energies[neighbor] - energies[index]) <= threshold:
            raise DegenerateLevelError(
                f"Level {index} is degenerate with level {neighbor} (E={energies[index]:.12g})"
            )
    return dec.state(index)


def transfer_infidelity(
    model: ParametrizedHamiltonian,
    lam: float,
    delta_lambda: float,
    unitary: UnitaryMatrix | None,
    target_index: int = 0,
) -> float:
    """1 - |<n(lam + dl)| U |n(lam)>|^2; U = None means no drive."""
    start = eigenstate(model.hamiltonian(lam), target_index)
    target = eigenstate(model.hamiltonian(lam + delta_lambda), target_index)
    moved = start if unitary is None else unitary.apply(start)
    return infidelity(target, moved)


def drive_infidelity(
    model: ParametrizedHamiltonian,
    lam: float,
    sched: AngleSchedule,
    target_index: int = 0,
    ordering: Ordering = Ordering.ASCENDING,
) -> float:
    u = composite_unitary(model.hamiltonian(lam), model.derivative(lam), sched, ordering)
    return transfer_infidelity(model, lam, sched.delta_lambda, u, target_index)


def quench_infidelity(
    model: ParametrizedHamiltonian,
    lam: float,
    delta_lambda: float,
    target_index: int = 0,
) -> float:
    """1 - |<n(lam + dl)|n(lam)>|^2."""
    return transfer_infidelity(model, lam, delta_lambda, None, target_index)


def ground_spectrum(model: ParametrizedHamiltonian, lam: float) -> SpectralFunction:
    """Ground-state spectral function; its support fixes Delta_min and Delta_max."""
    return spectral_function(model.hamiltonian(lam), model.derivative(lam), ground_only=True)


def sweep_K(
    model: ParametrizedHamiltonian,
    lam: float,
    delta_lambda: float,
    omega: float | None,
    K_max: int,
    eta: float | None = None,
    ordering: Ordering = Ordering.ASCENDING,
    workers: int | None = None,
) -> SweepResult:
    """Ground-state infidelity for K = 1..K_max.

    omega=None resolves the cutoff to Delta_max of the ground spectrum; an
    eta switches to regularized angles.
    """
    if K_max < 1:
        raise LabError(f"K_max must be at least 1, got {K_max}")
    started = time.perf_counter()
    h, dh = model.hamiltonian(lam), model.derivative(lam)
    spec = ground_spectrum(model, lam)
    omega = spec.delta_max if omega is None else omega
    period = period_prediction(omega, spec.delta_min)
    quench = quench_infidelity(model, lam, delta_lambda)
    h_norm, dh_norm = spectral_norm(h), spectral_norm(dh)

    ks = range(1, K_max + 1)
    # Schedules are built on the calling thread; quadrature warning capture
    # is not thread-safe.
    if eta is None:
        schedules = {K: standard_angles(K, omega, delta_lambda) for K in ks}
    else:
        schedules = {K: regularized_angles(K, omega, delta_lambda, eta) for K in ks}

    def run_row(K: int) -> DriveResult:
        sched = schedules[K]
        value = drive_infidelity(model, lam, sched, 0, ordering)
        logger.debug("Sweep row", extra={"K": K, "omega": omega, "eta": eta, "infidelity": value})
        return DriveResult(
            K=K,
            infidelity=value,
            quench_infidelity=quench,
            complexity=complexity_estimate(sched, h_norm, dh_norm),
        )

    workers = settings.SWEEP_WORKERS if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_row, ks))
    else:
        rows = [run_row(K) for K in ks]

    best = min(rows, key=lambda r: r.infidelity)
    logger.info(
        "Sweep finished: best K=%d (infidelity %.3e, quench %.3e), K_p=%.4f",
        best.K, best.infidelity, quench, period,
        extra={
            "omega": omega,
            "eta": eta,
            "delta_lambda": delta_lambda,
            "duration_ms": round((time.perf_counter() - started) * 1000, 1),
        },
    )
    return SweepResult(
        rows=tuple(rows),
        predicted_period=period,
        omega=omega,
        eta=eta,
        delta_min=spec.delta_min,
        delta_max=spec.delta_max,
        ordering=ordering,
    )


def scaling_exponent(xs, ys) -> float:
    """Slope of log(ys) against log(xs) from a least-squares line."""
    slope, _ = np.polyfit(np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float)), 1)
    return float(slope)
