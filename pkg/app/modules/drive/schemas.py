from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.modules.schedule.schemas import ComplexityReport


class GeneratorTag(str, Enum):
    """Which generator a gate exponentiates."""
    H = "H"
    DH = "DH"


class Ordering(str, Enum):
    """Order in which the k-factors of the composite unitary are applied."""
    ASCENDING = "ascending"  # k = -K first, k = +K last (leftmost)
    DESCENDING = "descending"


class GateStep(BaseModel):
    """exp(-i * angle * G) with G = H or dH."""

    tag: GeneratorTag
    angle: float

    model_config = ConfigDict(frozen=True)


class GateSequence(BaseModel):
    """Steps listed in application order (first applied first)."""

    steps: tuple[GateStep, ...]
    merged: bool
    ordering: Ordering = Ordering.ASCENDING

    model_config = ConfigDict(frozen=True)

    def count(self, tag: GeneratorTag) -> int:
        return sum(1 for step in self.steps if step.tag == tag)

    def __len__(self) -> int:
        return len(self.steps)


class DriveResult(BaseModel):
    K: int = Field(ge=1)
    infidelity: float = Field(ge=0, le=1)
    quench_infidelity: float = Field(ge=0, le=1)
    complexity: ComplexityReport

    model_config = ConfigDict(frozen=True)


class SweepResult(BaseModel):
    rows: tuple[DriveResult, ...]
    predicted_period: float = Field(gt=0)
    omega: float = Field(gt=0)
    eta: float | None = None
    delta_min: float = Field(gt=0)
    delta_max: float = Field(gt=0)
    ordering: Ordering = Ordering.ASCENDING

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_order(self) -> "SweepResult":
        ks = [row.K for row in self.rows]
        if ks != sorted(ks):
            raise ValueError("rows must be ordered by K")
        return self

    @property
    def infidelities(self) -> list[float]:
        return [row.infidelity for row in self.rows]
