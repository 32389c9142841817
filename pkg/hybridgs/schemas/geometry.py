"""
Geometry schemas: lattice normalization and pruning schedules.
"""
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator


class NormalizationTransform(BaseModel):
    """Translation and scaling that place a scene on the signed integer lattice."""
    center: tuple[float, float, float] = Field(..., description="Bounding-box center C")
    scale: float = Field(..., gt=0, description="Scaling ratio k")
    bit_depth: int = Field(..., ge=2, le=31, description="Lattice bit depth N")

    @property
    def half_extent(self) -> int:
        """Largest lattice coordinate magnitude, 2^(N-1) - 1."""
        return (1 << (self.bit_depth - 1)) - 1


class ScheduleInputs(BaseModel):
    """Training time marks used to spread pruning over events."""
    T: int = Field(70_000, ge=1, description="Total epochs")
    T_d: int = Field(15_000, ge=0, description="Densification end")
    T_p: int = Field(36_000, ge=0, description="Pruning start")
    T_u: int = Field(66_000, ge=0, description="Uniqueness end")
    I_p: int = Field(2_500, ge=1, description="Pruning interval")
    T_top: Optional[int] = Field(None, description="Top quality point; defaults to (T_d + T_p) // 2")


class PruneEvent(BaseModel):
    epoch: int
    count: int = Field(..., ge=0)


class PruneSchedule(BaseModel):
    """Planned progressive pruning from n_top down to n_target primitives."""
    T: int
    T_d: int
    T_top: int
    T_p: int
    T_u: int
    I_p: int
    F_p: int = Field(..., description="Number of pruning events")
    per_event_count: int = Field(..., ge=0, description="N' primitives per event")
    n_top: int = Field(..., ge=0)
    n_target: int = Field(..., ge=0)
    events: List[PruneEvent] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_marks(self):
        if not (self.T_d < self.T_top < self.T_p < self.T_u <= self.T):
            raise ValueError("time marks must satisfy T_d < T_top < T_p < T_u <= T")
        return self

    @property
    def total_pruned(self) -> int:
        return sum(event.count for event in self.events)
