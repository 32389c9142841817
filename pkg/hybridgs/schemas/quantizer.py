"""
De-quantization metadata schemas.
"""
import math
from typing import Literal, Union

from pydantic import BaseModel, Field, field_validator, model_validator


class UqParams(BaseModel):
    """Uniform quantizer metadata: codes map linearly onto [f_min, f_max]."""
    kind: Literal["uq"] = "uq"
    f_min: float = Field(..., description="Lower end of the quantization range")
    f_max: float = Field(..., description="Upper end of the quantization range")
    bit_depth: int = Field(..., ge=1, le=32, description="Bits per code (N)")

    @model_validator(mode="after")
    def validate_range(self):
        if not self.f_max > self.f_min:
            raise ValueError("f_max must be greater than f_min")
        return self

    @property
    def levels(self) -> int:
        return (1 << self.bit_depth) - 1

    @property
    def step(self) -> float:
        return (self.f_max - self.f_min) / self.levels


class RqParams(BaseModel):
    """Robust quantizer metadata: codes de-quantize through the ridge fit r = a*q + b."""
    kind: Literal["rq"] = "rq"
    a: float = Field(..., description="Ridge slope")
    b: float = Field(..., description="Ridge intercept")
    bit_depth: int = Field(..., ge=1, le=32, description="Bits per code (N)")
    epsilon: float = Field(1e-8, gt=0, description="Guard added to the range denominator")

    @field_validator("a", "b")
    @classmethod
    def validate_finite(cls, v):
        if not math.isfinite(v):
            raise ValueError("ridge coefficients must be finite")
        return v


QuantizerParams = Union[UqParams, RqParams]
