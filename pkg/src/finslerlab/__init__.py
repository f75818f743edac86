"""Numerical checks of curvature, invariant-metric and metric-equivalence
inequalities for complex Finsler and Kähler metrics on bounded domains."""

__version__ = "0.1.0"
