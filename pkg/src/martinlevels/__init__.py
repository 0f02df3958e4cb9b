"""Numerical toolkit for positive harmonic functions on unbounded planar
domains: closed-form fields, discrete Green ratios, level-set convexity
certificates, and slice asymptotics."""

from . import fields, geometry, greenratio, levelset, slices

__version__ = "0.1.0"

__all__ = ["fields", "geometry", "greenratio", "levelset", "slices", "__version__"]
