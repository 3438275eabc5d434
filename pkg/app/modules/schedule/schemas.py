import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

ScheduleKind = Literal["standard", "regularized", "two_level", "custom"]


class AngleSchedule(BaseModel):
    """Rotation angles (theta_k, phi_k) for k = 1..K.

    Negative k are never stored: theta_{-k} = -theta_k and phi_{-k} = -phi_k.
    """

    K: int = Field(ge=0)
    omega: float = Field(gt=0)
    delta_lambda: float
    eta: float | None = Field(default=None, ge=0)
    pairs: tuple[tuple[float, float], ...] = ()
    kind: ScheduleKind = "custom"

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_pairs(self) -> "AngleSchedule":
        if self.delta_lambda == 0.0 or not math.isfinite(self.delta_lambda):
            raise ValueError("delta_lambda must be finite and non-zero")
        if len(self.pairs) != self.K:
            raise ValueError(f"expected {self.K} angle pairs, got {len(self.pairs)}")
        for k, (theta, phi) in enumerate(self.pairs, start=1):
            expected = k * math.pi / self.omega
            if not math.isclose(theta, expected, rel_tol=1e-12):
                raise ValueError(f"theta_{k}={theta!r} differs from k*pi/omega={expected!r}")
            if not math.isfinite(phi):
                raise ValueError(f"phi_{k} is not finite")
        return self

    @classmethod
    def build(
        cls,
        omega: float,
        delta_lambda: float,
        phis,
        eta: float | None = None,
        kind: ScheduleKind = "custom",
    ) -> "AngleSchedule":
        """Attach theta_k = k pi / omega to the given phi_k."""
        phis = [float(p) for p in phis]
        pairs = tuple((k * math.pi / omega, phi) for k, phi in enumerate(phis, start=1))
        return cls(K=len(phis), omega=omega, delta_lambda=delta_lambda, eta=eta, pairs=pairs, kind=kind)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([p[0] for p in self.pairs], dtype=float)

    @property
    def phis(self) -> np.ndarray:
        return np.array([p[1] for p in self.pairs], dtype=float)

    def signed_pairs(self) -> list[tuple[int, float, float]]:
        """(k, theta_k, phi_k) for k = -K..-1, 1..K in ascending k."""
        negative = [(-k, -theta, -phi) for k, (theta, phi) in reversed(list(enumerate(self.pairs, start=1)))]
        positive = [(k, theta, phi) for k, (theta, phi) in enumerate(self.pairs, start=1)]
        return negative + positive


class ComplexityReport(BaseModel):
    h_term: float = Field(ge=0)
    dh_term: float = Field(ge=0)
    total: float = Field(ge=0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_total(self) -> "ComplexityReport":
        if not math.isclose(self.total, self.h_term + self.dh_term, rel_tol=1e-12, abs_tol=1e-300):
            raise ValueError("total must equal h_term + dh_term")
        return self
