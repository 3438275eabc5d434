"""Rotation-angle schedules: sine integral, standard and regularized angles,
period prediction and gate complexity."""

import logging
import math
import warnings

import numpy as np
from scipy import integrate, special

from app.config import settings
from app.core.exceptions import ScheduleError
from app.modules.schedule.schemas import AngleSchedule, ComplexityReport

logger = logging.getLogger("udcd.schedule")

SI_PI = 1.8519370519824661  # Si(pi), the global maximum of Si on [0, inf)

# Width of the near-zero window, in units of eta, integrated separately
# from the oscillatory tail.
_PEAK_WINDOW = 20.0


def sine_integral(x: float) -> float:
    """Si(x) = int_0^x sin(y)/y dy."""
    return float(special.sici(float(x))[0])


def _check_common(K: int, omega: float, delta_lambda: float) -> None:
    if K < 1:
        raise ScheduleError(f"K must be at least 1, got {K}")
    if not omega > 0:
        raise ScheduleError(f"Omega must be positive, got {omega}")
    if delta_lambda == 0.0 or not math.isfinite(delta_lambda):
        raise ScheduleError(f"delta_lambda must be finite and non-zero, got {delta_lambda}")


def standard_angles(K: int, omega: float, delta_lambda: float) -> AngleSchedule:
    """theta_k = k pi / Omega, phi_k = -(2 dl / Omega) Si(k pi)."""
    _check_common(K, omega, delta_lambda)
    ks = np.arange(1, K + 1)
    phis = -(2.0 * delta_lambda / omega) * special.sici(ks * math.pi)[0]
    return AngleSchedule.build(omega, delta_lambda, phis, kind="standard")


def two_level_angles(gap: float, delta_lambda: float) -> AngleSchedule:
    """K = 1 with theta_1 = pi / 2 Delta and phi_1 = -dl / Delta (Omega = 2 Delta)."""
    if not gap > 0:
        raise ScheduleError(f"Two-level gap must be positive, got {gap}")
    _check_common(1, 2.0 * gap, delta_lambda)
    return AngleSchedule.build(2.0 * gap, delta_lambda, [-delta_lambda / gap], kind="two_level")


def _quad(func, a: float, b: float, **kwargs) -> float:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        value, abserr = integrate.quad(
            func, a, b, epsabs=settings.QUAD_EPSABS, epsrel=1e-13, limit=settings.QUAD_LIMIT, **kwargs
        )
    for w in caught:
        logger.warning("Quadrature on [%g, %g] may be inaccurate (abserr=%.2e): %s", a, b, abserr, w.message)
    return value


def regularized_integral(k: int, omega: float, eta: float) -> float:
    """int_0^Omega [w / (w^2 + eta^2)] sin(k pi w / Omega) dw."""
    a = k * math.pi / omega
    eta2 = eta * eta
    if eta == 0.0:
        return sine_integral(k * math.pi)

    if eta >= omega:
        # Smooth integrand: a single weighted (QAWO) rule is enough.
        return _quad(lambda w: w / (w * w + eta2), 0.0, omega, weight="sin", wvar=a)

    # w/(w^2+eta^2) = 1/w - eta^2/(w(w^2+eta^2)); the first piece is Si(k pi),
    # the second has an eta-wide peak at the origin.
    split = min(_PEAK_WINDOW * eta, omega)
    peak = _quad(lambda w: a * np.sinc(a * w / math.pi) / (w * w + eta2), 0.0, split, points=[eta])
    tail = 0.0
    if split < omega:
        tail = _quad(lambda w: 1.0 / (w * (w * w + eta2)), split, omega, weight="sin", wvar=a)
    return sine_integral(k * math.pi) - eta2 * (peak + tail)


def regularized_angles(K: int, omega: float, delta_lambda: float, eta: float) -> AngleSchedule:
    """phi_k = -(2 dl / Omega) int_0^Omega [w/(w^2+eta^2)] sin(k pi w/Omega) dw."""
    _check_common(K, omega, delta_lambda)
    if eta < 0 or not math.isfinite(eta):
        raise ScheduleError(f"eta must be finite and non-negative, got {eta}")
    if eta == 0.0:
        standard = standard_angles(K, omega, delta_lambda)
        return standard.model_copy(update={"eta": 0.0, "kind": "regularized"})

    phis = [-(2.0 * delta_lambda / omega) * regularized_integral(k, omega, eta) for k in range(1, K + 1)]
    logger.debug("Regularized angles computed", extra={"K": K, "omega": omega, "eta": eta})
    return AngleSchedule.build(omega, delta_lambda, phis, eta=eta, kind="regularized")


def period_prediction(omega: float, delta_min: float) -> float:
    """K_p = Omega / Delta_min."""
    if not omega > 0 or not delta_min > 0:
        raise ScheduleError(f"Omega and delta_min must be positive, got {omega} and {delta_min}")
    return omega / delta_min


def complexity_estimate(sched: AngleSchedule, h_norm: float, dh_norm: float) -> ComplexityReport:
    """Complexity of the merged gate sequence.

    The merged H rotations add up to 4 K pi / Omega; the dH rotations
    contribute sum_k |phi_k| (two factors of |phi_k|/2 per k).
    """
    if h_norm < 0 or dh_norm < 0:
        raise ScheduleError("Norms must be non-negative")
    h_term = 4.0 * sched.K * math.pi / sched.omega * h_norm
    dh_term = float(np.sum(np.abs(sched.phis))) * dh_norm
    return ComplexityReport(h_term=h_term, dh_term=dh_term, total=h_term + dh_term)
