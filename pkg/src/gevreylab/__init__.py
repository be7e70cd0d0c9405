"""gevreylab: exact series solutions of singular first-order holomorphic PDEs.

Core pieces: sparse exact truncated power series, generalized Weierstrass
division with P-adic decomposition, the Theorem-style solver branches,
Gevrey order estimation, and Nagumo-norm diagnostics.
"""

from .rationals import GaussianRational
from .series import SeriesMatrix, SeriesVector, TruncatedSeries
from .division import (
    LinearForm,
    PAdicDecomposition,
    ResidueClass,
    min_exponent,
    monomial_divide,
    p_adic_decompose,
    p_adic_multiply,
    quotient,
    residue,
    shift,
    weierstrass_divide,
)
from .textform import SeriesSyntaxError, parse_series, series_to_text

__all__ = [
    "GaussianRational",
    "LinearForm",
    "PAdicDecomposition",
    "ResidueClass",
    "SeriesMatrix",
    "SeriesSyntaxError",
    "SeriesVector",
    "TruncatedSeries",
    "min_exponent",
    "monomial_divide",
    "p_adic_decompose",
    "p_adic_multiply",
    "parse_series",
    "quotient",
    "residue",
    "series_to_text",
    "shift",
    "weierstrass_divide",
]

__version__ = "0.1.0"
