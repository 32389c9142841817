"""
Per-invocation codec options.
"""
from typing import Literal, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator

from hybridgs.core.config import settings
from hybridgs.core.errors import ConfigError
from hybridgs.schemas.geometry import ScheduleInputs


class LatentConfig(BaseModel):
    """Latent decoder fit settings."""
    hidden: int = Field(50, ge=1, description="Hidden units of the decoder")
    activation: Literal["relu", "identity"] = Field("relu", description="Hidden activation")
    epochs: int = Field(default_factory=lambda: settings.LATENT_EPOCHS, ge=0)
    step_size: float = Field(1e-2, gt=0, description="Gradient descent step")
    seed: int = Field(default_factory=lambda: settings.SEED)
    noise: float = Field(1e-3, ge=0, description="Init noise on unused hidden units")
    backtracking: bool = Field(False, description="Halve the step on a rising or non-finite loss instead of failing")


class EncodeConfig(BaseModel):
    """Options of one encode run."""
    input: str = Field(..., description="Input 3DGS PLY path")
    output: str = Field(..., description="Output .hgs path")
    bd: int = Field(default_factory=lambda: settings.BIT_DEPTH, description="Position bit depth")
    bd_c: Optional[int] = Field(None, ge=1, le=24, description="Color latent bit depth (defaults to bd)")
    bd_o: Optional[int] = Field(None, ge=1, le=24, description="Opacity bit depth (defaults to bd)")
    bd_s: Optional[int] = Field(None, ge=1, le=24, description="Scale bit depth (defaults to bd)")
    bd_r: Optional[int] = Field(None, ge=1, le=24, description="Rotation latent bit depth (defaults to bd)")
    kc: int = Field(3, description="Color latent width")
    kr: int = Field(2, description="Rotation latent width")
    quantizer: Literal["uq", "rq"] = Field("rq", description="Attribute quantizer")
    lam: float = Field(0.01, ge=0, description="Ridge penalty of the robust quantizer")
    epsilon: float = Field(1e-8, gt=0)
    outlier: bool = Field(True, description="Run statistical outlier removal")
    nb_neighbors: int = Field(50, ge=1)
    std_ratio: float = Field(2.0, gt=0)
    target_size: Optional[int] = Field(None, gt=0, description="Target coded size in bytes")
    rate_method: Literal[1, 2] = Field(1)
    lossless_ratio: float = Field(default_factory=lambda: settings.LOSSLESS_RATIO, gt=0)
    measure_l: bool = Field(False, description="Measure L with a first encode pass")
    schedule: ScheduleInputs = Field(default_factory=ScheduleInputs)
    attr_mode: Literal["raht", "bypass"] = Field("raht")
    qs: float = Field(1.0, gt=0, description="RAHT coefficient quantization step")
    dedup_mode: Literal["largest", "first"] = Field("largest")
    position_quantizer: Literal["lqm", "uq"] = Field("lqm")
    latent: LatentConfig = Field(default_factory=LatentConfig)
    cameras: Optional[str] = Field(None, description="Camera list to adjust alongside the scene")
    workers: int = Field(default_factory=lambda: settings.WORKERS, ge=1)

    @field_validator("bd")
    @classmethod
    def validate_bd(cls, v):
        if not 2 <= v <= 18:
            raise ValueError("bd must be in [2, 18]")
        return v

    @field_validator("kc")
    @classmethod
    def validate_kc(cls, v):
        if not 1 <= v <= 48:
            raise ValueError("kc must be in [1, 48]")
        return v

    @field_validator("kr")
    @classmethod
    def validate_kr(cls, v):
        if not 1 <= v <= 4:
            raise ValueError("kr must be in [1, 4]")
        return v

    @property
    def attribute_bit_depths(self) -> dict[str, int]:
        return {
            "bd_c": self.bd_c or self.bd,
            "bd_o": self.bd_o or self.bd,
            "bd_s": self.bd_s or self.bd,
            "bd_r": self.bd_r or self.bd,
        }


class DecodeConfig(BaseModel):
    """Options of one decode run."""
    input: str
    output: str
    denormalize: bool = False
    cameras: Optional[str] = None
    cameras_out: Optional[str] = None
    workers: int = Field(default_factory=lambda: settings.WORKERS, ge=1)


def build_config(model: type[BaseModel], **values) -> BaseModel:
    """
    Validate options into a config model.

    Args:
        model: EncodeConfig or DecodeConfig
        **values: Raw option values; None entries fall back to defaults

    Returns:
        The validated config

    Raises:
        ConfigError: If any option is invalid
    """
    try:
        return model(**{k: v for k, v in values.items() if v is not None})
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or "config"
        raise ConfigError(f"Invalid option {field}: {first['msg']}")
