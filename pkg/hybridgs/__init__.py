"""
HybridGS: compact 3D Gaussian Splatting streams through point cloud coding.
"""
__version__ = "1.0.0"
