"""
Routers package for CLI commands.
"""
from hybridgs.routers.encode_router import encode, verify_cmd
from hybridgs.routers.decode_router import decode
from hybridgs.routers.report_router import inspect_cmd, pca_report

__all__ = ["encode", "verify_cmd", "decode", "inspect_cmd", "pca_report"]
