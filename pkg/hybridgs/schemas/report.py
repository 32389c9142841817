"""
Report schemas emitted by the CLI.
"""
from typing import List, Optional

from pydantic import BaseModel, Field

MIB = float(1 << 20)


class ComponentSize(BaseModel):
    name: str
    coded_bytes: int = Field(..., ge=0)
    pre_codec_bytes: Optional[float] = Field(None, description="n * channels * BD / 8 before entropy coding")


class AllocationReport(BaseModel):
    """Per-component byte accounting of a stream."""
    n: int
    p_bit: int
    total_bytes: int
    components: List[ComponentSize]

    def component(self, name: str) -> ComponentSize:
        for c in self.components:
            if c.name == name:
                return c
        raise KeyError(name)

    def pre_codec_mib(self, name: str) -> float:
        return self.component(name).pre_codec_bytes / MIB

    def to_flat_dict(self) -> dict:
        """Machine-readable key-value form."""
        out = {"n": self.n, "p_bit": self.p_bit, "total_bytes": self.total_bytes}
        for c in self.components:
            out[f"{c.name}.coded_bytes"] = c.coded_bytes
            if c.pre_codec_bytes is not None:
                out[f"{c.name}.pre_codec_bytes"] = c.pre_codec_bytes
        return out

    def to_text(self) -> str:
        lines = [
            f"Total size            {self.total_bytes / MIB:.2f} MB ({self.total_bytes} B)",
            f"  primitive number    {self.n:,}",
            f"  bits per primitive  {self.p_bit}",
        ]
        for c in self.components:
            coded = f"{c.coded_bytes / MIB:.2f} MB" if c.coded_bytes >= 1 << 20 else f"{c.coded_bytes / 1024:.1f} KB"
            pre = f" ({c.pre_codec_bytes / MIB:.2f})" if c.pre_codec_bytes is not None else ""
            lines.append(f"  {c.name:<20}{coded}{pre}")
        return "\n".join(lines)


class EncodeSummary(BaseModel):
    """Summary of one encode run."""
    n_input: int
    n_coded: int
    removed_outliers: int = 0
    removed_duplicates: int = 0
    pruned: int = 0
    p_bit: int
    coded_bytes: int
    target_bytes: Optional[int] = None
    estimated_bytes: float
    lossless_ratio: float
    measured_lossless_ratio: Optional[float] = None
    bit_depths: dict[str, int]
    allocation: AllocationReport


class VerifyReport(BaseModel):
    """Result of an in-memory encode/decode self-check."""
    ok: bool
    n: int
    geometry_exact: bool
    max_code_error: int
    code_error_bound: float
    coded_bytes: int
    messages: List[str] = Field(default_factory=list)
