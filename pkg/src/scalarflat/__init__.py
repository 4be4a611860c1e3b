"""Scalar-flat Kahler verification toolkit for blown-up ruled surfaces.

Subsystems:

* `lattice`    exact intersection theory, admissibility, topological bounds
* `futaki`     the Futaki invariant by two closed formulas, existence
* `parabolic`  parabolic quasi-stability of the associated flagged bundle
* `hyperbolic` half-space geometry, Green functions, Fuchsian groups
* `ansatz`     the hyperbolic-monopole metric and its verification suite
* `asdcalc`    spectral exterior calculus and the deformation operator
* `cli`        one entry point: admissible, futaki, stability, ansatz,
               asd-index, full
"""

from .errors import (
    ConfigError,
    DimensionMismatchError,
    GridExclusionError,
    QuantizationError,
    ScalarFlatError,
)
from .lattice import HomologyClass, KahlerClassParam, RuledSurfaceModel
from .units import PiMultiple

__all__ = [
    "ConfigError",
    "DimensionMismatchError",
    "GridExclusionError",
    "HomologyClass",
    "KahlerClassParam",
    "PiMultiple",
    "QuantizationError",
    "RuledSurfaceModel",
    "ScalarFlatError",
]

__version__ = "0.1.0"
