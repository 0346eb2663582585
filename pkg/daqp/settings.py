import math
from typing import Literal

from pydantic import BaseModel, Field


class Settings(BaseModel):
    """Solver tolerances and limits shared by the plain and proximal paths"""

    eps_primal: float = Field(1e-6, gt=0)
    zeta_singular: float = Field(1e-11, gt=0)
    iter_max: int = Field(250, gt=0)
    cycle_tol: float = Field(1e-12, gt=0)
    prox_eps: float = Field(1e-4, gt=0)
    prox_eta: float = Field(math.sqrt(2.0 ** -24), gt=0)
    prox_outer_max: int = Field(100, gt=0)
    violation_rule: Literal["most_negative", "first_negative"] = "most_negative"

    model_config = {"frozen": True}

    def tightened(self) -> "Settings":
        """Settings used to compute reference solutions"""
        return self.model_copy(update={"prox_eps": 1e-6, "prox_eta": 1e-10})
