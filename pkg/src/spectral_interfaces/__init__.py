"""Interface asymptotics of exactly solvable spectral models."""

__version__ = "0.1.0"
