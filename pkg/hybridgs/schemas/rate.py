"""
Rate model and planner results.
"""
from typing import List

from pydantic import BaseModel, Field

from hybridgs.schemas.geometry import PruneSchedule


class RateModel(BaseModel):
    """Bits-per-primitive size model of the explicit representation."""
    bd_p: int = Field(16, ge=0, description="Position bit depth")
    bd_c: int = Field(16, ge=0, description="Color latent bit depth")
    bd_o: int = Field(16, ge=0, description="Opacity bit depth")
    bd_s: int = Field(16, ge=0, description="Scale bit depth")
    bd_r: int = Field(16, ge=0, description="Rotation latent bit depth")
    k_c: int = Field(3, ge=0, description="Color latent width")
    k_r: int = Field(2, ge=0, description="Rotation latent width")
    lossless_ratio: float = Field(1.3, gt=0, description="Assumed downstream lossless ratio L")

    @property
    def p_bit(self) -> int:
        return 3 * (self.bd_p + self.bd_s) + self.k_c * self.bd_c + self.bd_o + self.k_r * self.bd_r

    @property
    def attribute_channels(self) -> int:
        """Channels whose bit depth rate control may lower: k_c + 1 + 3 + k_r."""
        return self.k_c + 1 + 3 + self.k_r


class Method1Plan(BaseModel):
    """Primitive-count rate control result."""
    n_target: int
    n_top: int
    estimated_bytes: float
    schedule: PruneSchedule | None = None


class DeltaStep(BaseModel):
    delta: int
    p_bit: int
    estimated_bytes: float


class DeltaPlan(BaseModel):
    """Bit-depth rate control result."""
    delta: int = Field(..., ge=0, description="Uniform attribute bit-depth reduction")
    delta_p_bit: int = Field(..., description="Bits saved per primitive")
    model: RateModel = Field(..., description="Rate model with reduced bit depths")
    steps: List[DeltaStep] = Field(default_factory=list)
