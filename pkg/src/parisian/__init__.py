"""Exact constructions of parisian sets and certified Fourier-coefficient selection.

Submodules
----------
numerics
    Exact rationals, phase reduction and directed rounding.
measure
    Piecewise-uniform plus atomic measures on the circle ``(-1, 1]``.
fourier
    Closed-form Fourier coefficients and a quadrature oracle.
riesz
    Signed-sum spectra of lacunary sequences and Riesz-product coefficients.
construction
    Frequency sequences, nested stage families and truncation sets.
selection
    Inductive frequency selection with coefficient lower-bound certificates.
dimension
    Mass-ratio audits and box counting for stage measures.
"""
from .exceptions import ParisianError

__version__ = "0.1.0"

__all__ = ["ParisianError", "__version__"]
