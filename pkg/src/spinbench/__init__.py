"""Entanglement and compilation benchmarks for bilinear spin-qubit arrays."""

__version__ = "0.1.0"
