"""Desk-scale computations around three-term prime progressions weighted by r2(p-1)."""

__version__ = "0.1.0"
