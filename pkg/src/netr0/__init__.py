"""Network-structure features, SIR simulation and regression models for R0."""

__version__ = "0.1.0"
