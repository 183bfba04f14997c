"""
Pydantic models for the JSON the CLI reads and writes.
"""
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, RootModel, field_validator, model_validator


class StateFile(BaseModel):
    """
    A 4x4 complex matrix, each entry written as a [re, im] pair.

        {"matrix": [[[re, im], [re, im], [re, im], [re, im]], ...]}
    """
    model_config = ConfigDict(extra="forbid")

    matrix: List[List[Tuple[float, float]]]

    @field_validator("matrix")
    @classmethod
    def four_by_four(cls, grid):
        if len(grid) != 4 or any(len(row) != 4 for row in grid):
            raise ValueError("matrix must be 4x4")
        return grid

    def to_array(self) -> np.ndarray:
        pairs = np.array(self.matrix, dtype=float)
        return pairs[..., 0] + 1j * pairs[..., 1]

    @classmethod
    def from_array(cls, m) -> "StateFile":
        m = np.asarray(m, dtype=complex)
        return cls(matrix=np.stack([m.real, m.imag], axis=-1).tolist())


class DiscordResultModel(BaseModel):
    q_value: float
    branch: Optional[str] = None
    theta_opt: Optional[float] = None
    unit: str
    q0: Optional[float] = None
    q_pi2: Optional[float] = None
    q_theta: Optional[float] = None
    method: str = "piecewise"

    @model_validator(mode="after")
    def nonnegative(self):
        if self.q_value < 0:
            raise ValueError("discord cannot be negative")
        return self


class CrossingsModel(RootModel[List[float]]):
    """Crossing times, serialized as a bare JSON list."""

    @field_validator("root")
    @classmethod
    def ascending(cls, roots):
        return sorted(roots)


class PeakModel(BaseModel):
    alpha_t: float
    q_bits: float
