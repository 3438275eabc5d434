from typing import Literal, Protocol, runtime_checkable

from pydantic import BaseModel, ConfigDict, Field

from app.core.operators import HermitianOperator


@runtime_checkable
class ParametrizedHamiltonian(Protocol):
    """H(lambda) together with its parameter derivative."""

    @property
    def dimension(self) -> int: ...

    def hamiltonian(self, lam: float) -> HermitianOperator: ...

    def derivative(self, lam: float) -> HermitianOperator: ...


class AffineSchedule(BaseModel):
    """f(lambda) = offset + slope * lambda."""

    offset: float = 0.0
    slope: float = 0.0

    model_config = ConfigDict(frozen=True)

    def value(self, lam: float) -> float:
        return self.offset + self.slope * lam


class TwoLevelModel(BaseModel):
    """H(lambda) = hX(lambda) X + hZ(lambda) Z."""

    kind: Literal["two_level"] = "two_level"
    hx: AffineSchedule = AffineSchedule()
    hz: AffineSchedule = AffineSchedule()

    model_config = ConfigDict(frozen=True)

    @property
    def dimension(self) -> int:
        return 2

    def hamiltonian(self, lam: float) -> HermitianOperator:
        from app.modules.hamiltonians.service import two_level_build

        return two_level_build(self, lam)

    def derivative(self, lam: float) -> HermitianOperator:
        from app.modules.hamiltonians.service import two_level_derivative

        return two_level_derivative(self, lam)


class LMGModel(BaseModel):
    """Fully connected Ising model in the maximum-spin sector.

    H(lambda) = [J/2N] sum_{i,j} Z_i Z_j + hx0 * lambda * sum_i X_i, with the
    i = j terms of the double sum kept.
    """

    kind: Literal["lmg"] = "lmg"
    n_spins: int = Field(ge=1)
    j0: float = -1.0
    hx0: float = 1.0

    model_config = ConfigDict(frozen=True)

    @property
    def dimension(self) -> int:
        return self.n_spins + 1

    def coupling(self, lam: float) -> float:
        return self.j0

    def transverse_field(self, lam: float) -> float:
        return self.hx0 * lam

    def hamiltonian(self, lam: float) -> HermitianOperator:
        from app.modules.hamiltonians.service import lmg_build

        return lmg_build(self, lam)

    def derivative(self, lam: float) -> HermitianOperator:
        from app.modules.hamiltonians.service import lmg_derivative

        return lmg_derivative(self, lam)


Model = TwoLevelModel | LMGModel
