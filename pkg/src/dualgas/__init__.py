"""Spectra, work statistics, and thermodynamics of 1-D contact gases and their duals."""

from .core import (
    TG_COUPLING,
    Adiabatic,
    Box,
    ConfigError,
    ContactCoordinateError,
    DimensionlessCoupling,
    LinearRamp,
    ModelSpec,
    Ring,
    SuddenCoupling,
    SuddenWall,
    alpha_of,
    duality_sign,
    exchange_sign_grid,
)

__version__ = "0.1.0"
