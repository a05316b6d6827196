"""Double-phase Baouendi-Grushin energies with variable exponent on tensor grids."""

__version__ = "0.1.0"
