"""
Decoded contents of an .hgs stream.
"""
from dataclasses import dataclass, field
from typing import Optional

from hybridgs.models.compact_cloud import CompactCloud
from hybridgs.models.latent_model import LatentModel
from hybridgs.schemas.bitstream import StreamHeader


@dataclass
class HgsBitstream:
    """
    Everything a decoder needs, as read back from the container.

    Attributes:
        header: StreamHeader (counts, bit depths, modes, transform)
        params: De-quantization metadata per attribute channel, substream order
        position_params: Per-axis UqParams when positions were coded with UQ
        color_model: Decoder of the shared DC+SH latent
        rotation_model: Decoder of the rotation latent
        compact: Integer cloud in Morton order
        block_sizes: Bytes of each framed block, by component name
    """
    header: StreamHeader
    params: list
    color_model: LatentModel
    rotation_model: LatentModel
    compact: CompactCloud
    position_params: Optional[list] = None
    block_sizes: dict[str, int] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.compact.n
