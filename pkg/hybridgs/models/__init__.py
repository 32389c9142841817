"""
Models package for array containers.
"""
from hybridgs.models.gaussian_cloud import GaussianCloud, CHANNEL_WIDTHS, ATTRIBUTE_CHANNELS
from hybridgs.models.compact_cloud import CompactCloud
from hybridgs.models.latent_model import LatentModel, PcaResult
from hybridgs.models.camera import Camera, CameraList
from hybridgs.models.codec_streams import CodingMatrix, OctreeStream, RahtCoefficients
from hybridgs.models.bitstream import HgsBitstream

__all__ = [
    "GaussianCloud",
    "CHANNEL_WIDTHS",
    "ATTRIBUTE_CHANNELS",
    "CompactCloud",
    "LatentModel",
    "PcaResult",
    "Camera",
    "CameraList",
    "CodingMatrix",
    "OctreeStream",
    "RahtCoefficients",
    "HgsBitstream",
]
