"""Acoustic rake receivers: image-source room simulation and echo-aware beamformers."""

__version__ = "0.1.0"
