"""Deterministic discrete-event simulator for mobility-aware multihop wireless routing."""

__version__ = "0.1.0"
