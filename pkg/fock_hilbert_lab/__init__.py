"""
Fock Hilbert Lab

Hilbert-type operators between weighted Fock spaces as truncated matrices,
with moments, Carleson constants and desk-scale verification scans.
"""

__version__ = "0.1.0"

from .cli import main

__all__ = ["main"]
