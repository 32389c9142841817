from hybridgs.schemas.quantizer import UqParams, RqParams, QuantizerParams
from hybridgs.schemas.geometry import NormalizationTransform, ScheduleInputs, PruneEvent, PruneSchedule
from hybridgs.schemas.rate import RateModel, Method1Plan, DeltaStep, DeltaPlan
from hybridgs.schemas.encode_config import EncodeConfig, DecodeConfig, LatentConfig, build_config
from hybridgs.schemas.bitstream import StreamHeader, MAGIC, VERSION
from hybridgs.schemas.report import AllocationReport, ComponentSize, EncodeSummary, VerifyReport, MIB

__all__ = [
    "UqParams",
    "RqParams",
    "QuantizerParams",
    "NormalizationTransform",
    "ScheduleInputs",
    "PruneEvent",
    "PruneSchedule",
    "RateModel",
    "Method1Plan",
    "DeltaStep",
    "DeltaPlan",
    "EncodeConfig",
    "DecodeConfig",
    "LatentConfig",
    "build_config",
    "StreamHeader",
    "MAGIC",
    "VERSION",
    "AllocationReport",
    "ComponentSize",
    "EncodeSummary",
    "VerifyReport",
    "MIB",
]
