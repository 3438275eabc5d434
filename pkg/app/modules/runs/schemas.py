import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.modules.drive.schemas import Ordering

# Keys of the flat run-configuration document, in serialization order.
CONFIG_KEYS = (
    "model",
    "n_spins",
    "j0",
    "hx0",
    "hx_offset",
    "hx_slope",
    "hz_offset",
    "hz_slope",
    "lambda",
    "delta_lambda",
    "omega",
    "k",
    "k_max",
    "eta",
    "merge",
    "ordering",
    "out",
)


class RunConfig(BaseModel):
    """One experiment: a model, a working point and the drive parameters.

    omega = None means "auto": the cutoff resolves to Delta_max of the ground
    spectral function at run time. eta_fraction holds the `<f>*delta_min`
    form of eta until Delta_min is known.
    """

    model: Literal["two_level", "lmg"]
    n_spins: int | None = Field(default=None, ge=1)
    j0: float = -1.0
    hx0: float = 1.0
    hx_offset: float = 0.0
    hx_slope: float = 0.0
    hz_offset: float = 0.0
    hz_slope: float = 0.0
    lambda_: float = Field(alias="lambda")
    delta_lambda: float
    omega: float | None = Field(default=None, gt=0)
    k: int | None = Field(default=None, ge=1)
    k_max: int | None = Field(default=None, ge=1)
    eta: float | None = Field(default=None, ge=0)
    eta_fraction: float | None = Field(default=None, ge=0)
    merge: bool = False
    ordering: Ordering = Ordering.ASCENDING
    out: str | None = None

    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    @field_validator("delta_lambda")
    @classmethod
    def _nonzero_step(cls, v: float) -> float:
        if v == 0.0 or not math.isfinite(v):
            raise ValueError("delta_lambda must be finite and non-zero")
        return v

    @field_validator("lambda_", "j0", "hx0", "hx_offset", "hx_slope", "hz_offset", "hz_slope")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("value must be finite")
        return v

    @model_validator(mode="after")
    def _check_model(self) -> "RunConfig":
        if self.model == "lmg" and self.n_spins is None:
            raise ValueError("n_spins is required for model = lmg")
        if self.eta is not None and self.eta_fraction is not None:
            raise ValueError("eta is given both as a number and as a fraction of delta_min")
        return self

    def resolve_eta(self, delta_min: float) -> float | None:
        if self.eta_fraction is not None:
            return self.eta_fraction * delta_min
        return self.eta


class KernelGrid(BaseModel):
    """Frequency grid and schedule sizes for kernel curves.

    omega_min/omega_max default to (Omega / points, Omega].
    """

    k_list: tuple[int, ...] = (4, 8, 13, 17)
    points: int = Field(default=400, ge=2)
    omega_min: float | None = Field(default=None, ge=0)
    omega_max: float | None = Field(default=None, gt=0)
    regularized: bool = False

    model_config = ConfigDict(frozen=True)

    @field_validator("k_list")
    @classmethod
    def _non_negative(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if any(k < 0 for k in v):
            raise ValueError("K values must be non-negative")
        return v
