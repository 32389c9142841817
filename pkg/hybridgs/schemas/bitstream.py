from typing import Literal

from pydantic import BaseModel, Field

from hybridgs.schemas.geometry import NormalizationTransform

MAGIC = b"HGS1"
VERSION = 1


class StreamHeader(BaseModel):
    """Fixed-size header of an .hgs stream."""
    version: int = VERSION
    n: int = Field(..., ge=0, description="Primitive count")
    bd_p: int = Field(..., ge=2, le=18)
    bd_c: int = Field(..., ge=1, le=32)
    bd_o: int = Field(..., ge=1, le=32)
    bd_s: int = Field(..., ge=1, le=32)
    bd_r: int = Field(..., ge=1, le=32)
    k_c: int = Field(..., ge=1, le=48)
    k_r: int = Field(..., ge=1, le=4)
    quantizer_kind: Literal["uq", "rq"]
    attr_mode: Literal["raht", "bypass"] = "raht"
    position_mode: Literal["lqm", "uq"] = "lqm"
    rq_widened: bool = Field(False, description="RQ codes stored as signed N+1 bit values")
    qs: float = Field(1.0, gt=0)
    transform: NormalizationTransform
    substream_count: int = Field(0, description="Attribute substreams: 3 + k_c + 1 + k_r")
    payload_length: int = Field(0, ge=0, description="Bytes following the header")

    @property
    def expected_substreams(self) -> int:
        return 3 + self.k_c + 1 + self.k_r
