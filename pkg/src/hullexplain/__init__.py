"""Dual explanation of black-box regressors via convex-hull coordinates."""

__version__ = "0.1.0"
