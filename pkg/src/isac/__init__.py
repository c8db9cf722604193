"""Mutual-information beamforming for dual-function radar-communication arrays."""

__version__ = "0.1.0"
