"""Separation of variables for Laplace's equation in five-cyclide coordinates."""

from .config import Config
from .dirichlet import BoundaryFunction, boundary_l2_error, solve_dirichlet
from .eigensolver import get_eigen, solve_two_param
from .elliptic import OmegaTable, get_table
from .errors import CyclideError, NumericalError
from .geometry import DEFAULT_A, ParamsA, RegionSpec, SignProfile, from_cyclide, to_cyclide
from .harmonics import harmonic

__all__ = [
    "BoundaryFunction",
    "Config",
    "CyclideError",
    "DEFAULT_A",
    "NumericalError",
    "OmegaTable",
    "ParamsA",
    "RegionSpec",
    "SignProfile",
    "boundary_l2_error",
    "from_cyclide",
    "get_eigen",
    "get_table",
    "harmonic",
    "solve_dirichlet",
    "solve_two_param",
    "to_cyclide",
]

__version__ = "0.1.0"
