import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class SpectralLine(BaseModel):
    omega: float
    weight: float = Field(ge=0)

    model_config = ConfigDict(frozen=True)


class SpectralFunction(BaseModel):
    """Phi(omega) as a finite comb of lines (omega_mn, |<m|dH|n>|^2)."""

    lines: tuple[SpectralLine, ...]
    delta_min: float = Field(gt=0)
    delta_max: float = Field(gt=0)
    ground_only: bool = False

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_bounds(self) -> "SpectralFunction":
        if self.delta_min > self.delta_max:
            raise ValueError("delta_min must not exceed delta_max")
        if not all(math.isfinite(line.omega) for line in self.lines):
            raise ValueError("line frequencies must be finite")
        return self

    @property
    def omegas(self) -> np.ndarray:
        return np.array([line.omega for line in self.lines], dtype=float)

    @property
    def weights(self) -> np.ndarray:
        return np.array([line.weight for line in self.lines], dtype=float)


class TruncatedAgpFit(BaseModel):
    """Coefficients alpha_l of i sum_l alpha_l L^{2l-1} dH and the fit residual."""

    d: int = Field(ge=1)
    alphas: tuple[float, ...]
    residual: float = Field(ge=0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_length(self) -> "TruncatedAgpFit":
        if len(self.alphas) != self.d:
            raise ValueError(f"expected {self.d} coefficients, got {len(self.alphas)}")
        return self
