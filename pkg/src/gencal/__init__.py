"""Pointwise generalised geometry: form spinors, generalised metrics,
pure spinors, generalised calibrations, Dirac spinor bilinears and T-duality."""

__version__ = "0.1.0"
