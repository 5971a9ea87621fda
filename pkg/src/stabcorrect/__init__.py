"""Desk-scale simulator and algorithm library for stabilizer self-correction
and structured stabilizer decompositions of n-qubit pure states."""

__version__ = "0.1.0"
