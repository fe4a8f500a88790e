"""Pseudo-spectral solvers and diagnostics for the hydrostatic (thin-strip)
limit of the Oldroyd-B model on a periodic strip."""

from ._backend import BACKEND
from .config import RunConfig, load_config, serialize
from .constitutive import MaterialParams
from .spectral import Grid, NormSpec, SpectralField

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Grid",
    "MaterialParams",
    "NormSpec",
    "RunConfig",
    "SpectralField",
    "load_config",
    "serialize",
    "__version__",
]
